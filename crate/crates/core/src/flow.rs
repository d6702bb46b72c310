//! Quantum stochastic flows as repeated-interaction unitary cocycles.
//!
//! `U_t = G^{(t−1)} ⋯ G^{(0)}` where `G^{(i)}` is the one-step unitary acting
//! on the initial space and slice `i`. The flow is `j_t(a) = U_t*(a ⊗ I)U_t`;
//! its vacuum-adapted form compresses by `P_t` on both sides.

use rand::Rng;

use crate::error::{QfkError, Result};
use crate::fock::{conditional_expectation, vacuum_projection, vacuum_vector, LatticeParams, StateVector};
use crate::linalg::{matrix_exp, ComplexMatrix, UnitaryMatrix, C64, I, ZERO};
use crate::random::{state_vector, unit_vector};
use crate::structure::{Adaptedness, HPGenerator};

/// `G_h = exp(X_h)·diag(I_n, W)` with
/// `X_h = [[−ihH, −√h L*], [√h L, 0]]`.
///
/// `G_h − I = D(F + O(h))D` for `D = diag(√h, I)`, so the lattice flow has
/// the structure map of `(H, L, W)` as its generator.
pub fn build_one_step(gen: &HPGenerator, h: f64) -> Result<UnitaryMatrix> {
    if !(h.is_finite() && h > 0.0) {
        return Err(QfkError::Lattice(format!("time step h must be positive, got {h}")));
    }
    let (n, d) = (gen.n(), gen.d());
    let sh = h.sqrt();
    let lb = gen.l_block();
    let mut x = ComplexMatrix::zeros((1 + d) * n, (1 + d) * n);
    x.set_block(0, 0, &gen.hamiltonian().matrix().scale(-I * h));
    x.set_block(0, n, &lb.adjoint().scale_real(-sh));
    x.set_block(n, 0, &lb.scale_real(sh));
    let mut gauge = ComplexMatrix::identity((1 + d) * n);
    gauge.set_block(n, n, gen.gauge().matrix());
    UnitaryMatrix::new(matrix_exp(&x)? * gauge)
}

#[derive(Debug, Clone)]
pub struct DiscreteCocycle {
    gen: HPGenerator,
    params: LatticeParams,
    one_step: UnitaryMatrix,
    one_step_adj: ComplexMatrix,
}

impl DiscreteCocycle {
    pub fn new(gen: HPGenerator, params: LatticeParams) -> Result<Self> {
        if gen.n() != params.n || gen.d() != params.d {
            return Err(QfkError::Dimension(format!(
                "generator has (n, d) = ({}, {}), lattice has ({}, {})",
                gen.n(),
                gen.d(),
                params.n,
                params.d
            )));
        }
        let one_step = build_one_step(&gen, params.h)?;
        let one_step_adj = one_step.matrix().adjoint();
        Ok(Self { gen, params, one_step, one_step_adj })
    }

    pub fn gen(&self) -> &HPGenerator {
        &self.gen
    }

    pub fn params(&self) -> LatticeParams {
        self.params
    }

    pub fn one_step(&self) -> &UnitaryMatrix {
        &self.one_step
    }

    /// `G^{(i)} v`.
    pub fn step(&self, i: usize, v: &StateVector) -> StateVector {
        v.apply_local(self.one_step.matrix(), i)
    }

    pub fn step_mut(&self, i: usize, v: &mut StateVector) {
        v.apply_local_mut(self.one_step.matrix(), i);
    }

    pub fn step_adjoint_mut(&self, i: usize, v: &mut StateVector) {
        v.apply_local_mut(&self.one_step_adj, i);
    }

    /// `G^{(i)*} v`.
    pub fn step_adjoint(&self, i: usize, v: &StateVector) -> StateVector {
        v.apply_local(&self.one_step_adj, i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Adjoint,
}

#[derive(Debug, Clone)]
pub struct FlowHandle {
    cocycle: DiscreteCocycle,
    mode: Adaptedness,
}

impl FlowHandle {
    pub fn new(gen: HPGenerator, params: LatticeParams, mode: Adaptedness) -> Result<Self> {
        Ok(Self { cocycle: DiscreteCocycle::new(gen, params)?, mode })
    }

    pub fn cocycle(&self) -> &DiscreteCocycle {
        &self.cocycle
    }

    pub fn params(&self) -> LatticeParams {
        self.cocycle.params
    }

    pub fn gen(&self) -> &HPGenerator {
        &self.cocycle.gen
    }

    pub fn mode(&self) -> Adaptedness {
        self.mode
    }

    pub fn with_mode(&self, mode: Adaptedness) -> Self {
        Self { cocycle: self.cocycle.clone(), mode }
    }

    /// The same flow on a lattice with `slices` slices.
    pub fn restricted(&self, slices: usize) -> Result<Self> {
        let params = self.params().with_slices(slices)?;
        Ok(Self {
            cocycle: DiscreteCocycle {
                gen: self.cocycle.gen.clone(),
                params,
                one_step: self.cocycle.one_step.clone(),
                one_step_adj: self.cocycle.one_step_adj.clone(),
            },
            mode: self.mode,
        })
    }
}

fn check_vector(fh: &FlowHandle, v: &StateVector) -> Result<()> {
    if v.params() != fh.params() {
        return Err(QfkError::Dimension("state vector lives on a different lattice".into()));
    }
    Ok(())
}

pub fn apply_unitary_cocycle(
    fh: &FlowHandle,
    t_idx: usize,
    v: &StateVector,
    direction: Direction,
) -> Result<StateVector> {
    fh.params().check_time(t_idx)?;
    check_vector(fh, v)?;
    let mut w = v.clone();
    match direction {
        Direction::Forward => {
            for i in 0..t_idx {
                fh.cocycle.step_mut(i, &mut w);
            }
        }
        Direction::Adjoint => {
            for i in (0..t_idx).rev() {
                fh.cocycle.step_adjoint_mut(i, &mut w);
            }
        }
    }
    Ok(w)
}

/// `j_t(a)v`, compressed by `P_t` in vacuum mode.
pub fn flow_apply(fh: &FlowHandle, a: &ComplexMatrix, t_idx: usize, v: &StateVector) -> Result<StateVector> {
    fh.params().check_time(t_idx)?;
    check_vector(fh, v)?;
    if a.shape() != (fh.params().n, fh.params().n) {
        return Err(QfkError::Dimension("flow argument must be n x n".into()));
    }
    let conj = |w: &StateVector| -> Result<StateVector> {
        let u = apply_unitary_cocycle(fh, t_idx, w, Direction::Forward)?;
        apply_unitary_cocycle(fh, t_idx, &u.apply_initial(a), Direction::Adjoint)
    };
    match fh.mode {
        Adaptedness::Identity => conj(v),
        Adaptedness::Vacuum => vacuum_projection(t_idx, &conj(&vacuum_projection(t_idx, v)?)?),
    }
}

/// `max_v ‖j_t(ab)v − j_t(a)j_t(b)v‖` over random unit vectors.
pub fn flow_homomorphism_check<R: Rng + ?Sized>(
    fh: &FlowHandle,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    t_idx: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let ab = a * b;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut v = state_vector(rng, fh.params());
        let nrm = v.norm();
        v.scale_mut(C64::new(1.0 / nrm, 0.0));
        let lhs = flow_apply(fh, &ab, t_idx, &v)?;
        let rhs = flow_apply(fh, a, t_idx, &flow_apply(fh, b, t_idx, &v)?)?;
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

/// `U_t(e_q ⊗ Ω)` for every basis vector of the initial space.
///
/// `U_t(e_q ⊗ Ω)` is vacuum beyond slice `t`, so it is returned on the lattice
/// with `max(t, 1)` slices.
pub fn propagated_vacuum_basis(fh: &FlowHandle, t_idx: usize) -> Result<Vec<StateVector>> {
    let p = fh.params();
    p.check_time(t_idx)?;
    let small = p.with_slices(t_idx.max(1))?;
    (0..p.n)
        .map(|q| {
            let mut e = vec![ZERO; p.n];
            e[q] = C64::new(1.0, 0.0);
            let mut w = vacuum_vector(small, &e)?;
            for i in 0..t_idx {
                fh.cocycle.step_mut(i, &mut w);
            }
            Ok(w)
        })
        .collect()
}

/// Matrix `[⟨y_p, (a ⊗ I) z_q⟩]_{pq}`.
pub fn sandwich_matrix(ys: &[StateVector], a: &ComplexMatrix, zs: &[StateVector]) -> ComplexMatrix {
    let n = ys.len();
    let az: Vec<StateVector> = zs.iter().map(|z| z.apply_initial(a)).collect();
    ComplexMatrix::from_fn(n, n, |p, q| ys[p].inner(&az[q]))
}

/// `𝒯^0_t(a)`, with entries `⟨e_pΩ, j_t(a) e_qΩ⟩`.
pub fn vacuum_semigroup_element(fh: &FlowHandle, a: &ComplexMatrix, t_idx: usize) -> Result<ComplexMatrix> {
    fh.params().check_time(t_idx)?;
    let basis = propagated_vacuum_basis(fh, t_idx)?;
    Ok(sandwich_matrix(&basis, a, &basis))
}

/// `σ_s(op)`: `op` acts on the initial space and the slices from `s` on,
/// which form a lattice with `N − s` slices; the first `s` slices are spectators.
pub fn second_quantised_shift(
    s_idx: usize,
    op: impl Fn(&StateVector) -> Result<StateVector>,
    v: &StateVector,
) -> Result<StateVector> {
    let p = v.params();
    if s_idx > p.slices {
        return Err(QfkError::SliceRange { index: s_idx, slices: p.slices });
    }
    if s_idx == 0 {
        return op(v);
    }
    if s_idx == p.slices {
        return Err(QfkError::Lattice("shift leaves no slices for the shifted operator".into()));
    }
    let reduced = p.with_slices(p.slices - s_idx)?;
    let prefixes = p.stride(s_idx);
    let r_full = p.noise_dim();
    let r_red = reduced.noise_dim();
    let mut out = StateVector::zeros(p);
    let mut chunk = vec![ZERO; reduced.dimension()];
    for prefix in 0..prefixes {
        for q in 0..p.n {
            for w in 0..r_red {
                chunk[q * r_red + w] = v.amplitudes()[q * r_full + w * prefixes + prefix];
            }
        }
        if chunk.iter().all(|z| *z == ZERO) {
            continue;
        }
        let image = op(&StateVector::from_amplitudes(reduced, chunk.clone())?)?;
        if image.params() != reduced {
            return Err(QfkError::Dimension("shifted operator changed the lattice".into()));
        }
        let amps = out.amplitudes_mut();
        for q in 0..p.n {
            for w in 0..r_red {
                amps[q * r_full + w * prefixes + prefix] = image.amplitudes()[q * r_red + w];
            }
        }
    }
    Ok(out)
}

/// `J_s(op) v = U_s* σ_s(op) U_s v`.
pub fn shifted_operator_apply(
    fh: &FlowHandle,
    s_idx: usize,
    op: impl Fn(&StateVector) -> Result<StateVector>,
    v: &StateVector,
) -> Result<StateVector> {
    let u = apply_unitary_cocycle(fh, s_idx, v, Direction::Forward)?;
    let shifted = second_quantised_shift(s_idx, op, &u)?;
    apply_unitary_cocycle(fh, s_idx, &shifted, Direction::Adjoint)
}

/// `max_v ‖j_{s+t}(a)v − J_s(j_t(a))v‖` over random unit vectors (identity-adapted flow).
pub fn cocycle_identity_check<R: Rng + ?Sized>(
    fh: &FlowHandle,
    a: &ComplexMatrix,
    s_idx: usize,
    t_idx: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let p = fh.params();
    if s_idx + t_idx > p.slices {
        return Err(QfkError::SliceRange { index: s_idx + t_idx, slices: p.slices });
    }
    let full = fh.with_mode(Adaptedness::Identity);
    let reduced = if s_idx == 0 { full.clone() } else { full.restricted(p.slices - s_idx)? };
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v = state_vector(rng, p);
        let lhs = flow_apply(&full, a, s_idx + t_idx, &v)?;
        let rhs = shifted_operator_apply(&full, s_idx, |w| flow_apply(&reduced, a, t_idx, w), &v)?;
        worst = worst.max(lhs.distance(&rhs) / v.norm());
    }
    Ok(worst)
}

fn random_unit_state<R: Rng + ?Sized>(rng: &mut R, p: LatticeParams) -> StateVector {
    let mut v = state_vector(rng, p);
    let nrm = v.norm();
    v.scale_mut(C64::new(1.0 / nrm, 0.0));
    v
}

/// `max_v ‖j_t(I)v − v‖`, with `v` replaced by `P_t v` in vacuum mode.
pub fn unitality_check<R: Rng + ?Sized>(fh: &FlowHandle, t_idx: usize, trials: usize, rng: &mut R) -> Result<f64> {
    let id = ComplexMatrix::identity(fh.params().n);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v = random_unit_state(rng, fh.params());
        let want = match fh.mode {
            Adaptedness::Identity => v.clone(),
            Adaptedness::Vacuum => vacuum_projection(t_idx, &v)?,
        };
        worst = worst.max(flow_apply(fh, &id, t_idx, &v)?.distance(&want));
    }
    Ok(worst)
}

/// `max_v ‖k_t(a)v − P_t k_t(a) P_t v‖` for the vacuum-adapted flow `k`.
pub fn vacuum_adaptedness_check<R: Rng + ?Sized>(
    fh: &FlowHandle,
    a: &ComplexMatrix,
    t_idx: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let vac = fh.with_mode(Adaptedness::Vacuum);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v = random_unit_state(rng, fh.params());
        let kv = flow_apply(&vac, a, t_idx, &v)?;
        let pkp = vacuum_projection(t_idx, &flow_apply(&vac, a, t_idx, &vacuum_projection(t_idx, &v)?)?)?;
        worst = worst.max(kv.distance(&pkp));
    }
    Ok(worst)
}

/// `max_v ‖j_t(a)P_t v − P_t j_t(a)v‖` for the identity-adapted flow.
pub fn projection_commutation_check<R: Rng + ?Sized>(
    fh: &FlowHandle,
    a: &ComplexMatrix,
    t_idx: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let full = fh.with_mode(Adaptedness::Identity);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v = random_unit_state(rng, fh.params());
        let jp = flow_apply(&full, a, t_idx, &vacuum_projection(t_idx, &v)?)?;
        let pj = vacuum_projection(t_idx, &flow_apply(&full, a, t_idx, &v)?)?;
        worst = worst.max(jp.distance(&pj));
    }
    Ok(worst)
}

/// `max |⟨uΩ, 𝔼^Ω_t(A) wΩ⟩ − ⟨uΩ, A wΩ⟩|` for `A = j_N(a)` and random unit `u`, `w`.
pub fn tower_property_check<R: Rng + ?Sized>(
    fh: &FlowHandle,
    a: &ComplexMatrix,
    t_idx: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let p = fh.params();
    p.check_time(t_idx)?;
    let full = fh.with_mode(Adaptedness::Identity);
    let op = |v: &StateVector| flow_apply(&full, a, p.slices, v);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let u = vacuum_vector(p, &unit_vector(rng, p.n))?;
        let w = vacuum_vector(p, &unit_vector(rng, p.n))?;
        let conditioned = conditional_expectation(t_idx, &u, &w, op)?;
        let plain = u.inner(&op(&w)?);
        worst = worst.max((conditioned - plain).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, HermitianMatrix};
    use crate::random::{complex_matrix, rng_from_seed};
    use crate::structure::{phi_from_hp, psi_from_phi};

    fn gaussian_flow(slices: usize, h: f64) -> FlowHandle {
        let gen = HPGenerator::gaussian_subordination(&HermitianMatrix::new(pauli::z()).unwrap());
        FlowHandle::new(gen, LatticeParams::new(2, 1, slices, h).unwrap(), Adaptedness::Identity).unwrap()
    }

    fn random_flow(seed: u64, d: usize, slices: usize, mode: Adaptedness) -> FlowHandle {
        let mut rng = rng_from_seed(seed);
        let gen = HPGenerator::random(&mut rng, 2, d, 1.2);
        FlowHandle::new(gen, LatticeParams::new(2, d, slices, 0.1).unwrap(), mode).unwrap()
    }

    #[test]
    fn one_step_examples() {
        let g = build_one_step(&HPGenerator::trivial(2, 1), 0.1).unwrap();
        assert!((g.matrix() - &ComplexMatrix::identity(4)).max_abs() < 1e-15);

        // L = iσ_z: X_h = [[0, i√h σ_z], [i√h σ_z, 0]].
        let h = 0.05;
        let gen =
            HPGenerator::new(HermitianMatrix::zeros(2), vec![pauli::z().scale(I)], UnitaryMatrix::identity(2)).unwrap();
        let g = build_one_step(&gen, h).unwrap();
        let mut x = ComplexMatrix::zeros(4, 4);
        x.set_block(0, 2, &pauli::z().scale(I * h.sqrt()));
        x.set_block(2, 0, &pauli::z().scale(I * h.sqrt()));
        assert!((g.matrix() - &matrix_exp(&x).unwrap()).max_abs() < 1e-14);
        assert!((g.matrix().adjoint() * g.matrix() - ComplexMatrix::identity(4)).max_abs() < 1e-12);
        assert!(build_one_step(&gen, 0.0).is_err());
    }

    #[test]
    fn one_step_vacuum_block_taylor_remainder() {
        let mut rng = rng_from_seed(11);
        let gen = HPGenerator::random(&mut rng, 2, 2, 0.7);
        let mut ratios = Vec::new();
        for &h in &[0.1, 0.05, 0.025] {
            let g = build_one_step(&gen, h).unwrap();
            let want = ComplexMatrix::identity(2) + gen.k().scale_real(h);
            let rem = (g.matrix().block(0, 0, 2, 2) - want).spectral_norm();
            ratios.push(rem / (h * h));
        }
        assert!(ratios.iter().all(|r| *r < 10.0), "{ratios:?}");
        assert!((ratios[2] - ratios[1]).abs() < 0.2 * ratios[1]);
    }

    #[test]
    fn gauge_unitary_with_eigenvalue_minus_one_is_accepted() {
        let gen =
            HPGenerator::new(HermitianMatrix::zeros(2), vec![pauli::x()], UnitaryMatrix::new(pauli::z()).unwrap())
                .unwrap();
        let g = build_one_step(&gen, 0.1).unwrap();
        assert!((g.matrix().adjoint() * g.matrix() - ComplexMatrix::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn cocycle_application_examples() {
        let fh = random_flow(1, 1, 4, Adaptedness::Identity);
        let mut rng = rng_from_seed(12);
        let v = state_vector(&mut rng, fh.params());
        assert_eq!(apply_unitary_cocycle(&fh, 0, &v, Direction::Forward).unwrap(), v);
        for _ in 0..20 {
            let v = state_vector(&mut rng, fh.params());
            let f = apply_unitary_cocycle(&fh, 4, &v, Direction::Forward).unwrap();
            assert!((f.norm() - v.norm()).abs() <= 1e-12 * v.norm());
            let back = apply_unitary_cocycle(&fh, 4, &f, Direction::Adjoint).unwrap();
            assert!(back.distance(&v) <= 1e-12 * v.norm());
        }
        assert!(apply_unitary_cocycle(&fh, 5, &v, Direction::Forward).is_err());
    }

    #[test]
    fn flow_unitality() {
        let mut rng = rng_from_seed(13);
        let fh = random_flow(2, 2, 3, Adaptedness::Identity);
        let v = state_vector(&mut rng, fh.params());
        let id = ComplexMatrix::identity(2);
        assert!(flow_apply(&fh, &id, 3, &v).unwrap().distance(&v) < 1e-12 * v.norm());
        let vac = fh.with_mode(Adaptedness::Vacuum);
        for t in 0..=3 {
            let out = flow_apply(&vac, &id, t, &v).unwrap();
            assert!(out.distance(&vacuum_projection(t, &v).unwrap()) < 1e-12 * v.norm());
        }
        let a = complex_matrix(&mut rng, 2, 2);
        let out = flow_apply(&vac, &a, 0, &v).unwrap();
        let want = vacuum_projection(0, &v).unwrap().apply_initial(&a);
        assert!(out.distance(&want) < 1e-12 * v.norm());
    }

    #[test]
    fn homomorphism_in_both_modes() {
        let mut rng = rng_from_seed(14);
        for mode in [Adaptedness::Identity, Adaptedness::Vacuum] {
            let fh = random_flow(3, 1, 4, mode);
            let id = ComplexMatrix::identity(2);
            assert!(flow_homomorphism_check(&fh, &id, &id, 4, 2, &mut rng).unwrap() < 1e-12);
            for t in 0..=4 {
                let a = complex_matrix(&mut rng, 2, 2);
                let b = complex_matrix(&mut rng, 2, 2);
                assert!(flow_homomorphism_check(&fh, &a, &b, t, 3, &mut rng).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn vacuum_mode_adaptedness_and_commutation() {
        let mut rng = rng_from_seed(15);
        let fh = random_flow(4, 2, 3, Adaptedness::Identity);
        let vac = fh.with_mode(Adaptedness::Vacuum);
        for t in 0..=3 {
            let a = complex_matrix(&mut rng, 2, 2);
            let v = state_vector(&mut rng, fh.params());
            let out = flow_apply(&vac, &a, t, &v).unwrap();
            assert!(out.is_vacuum_from(t));
            let jp = flow_apply(&fh, &a, t, &vacuum_projection(t, &v).unwrap()).unwrap();
            let pj = vacuum_projection(t, &flow_apply(&fh, &a, t, &v).unwrap()).unwrap();
            assert!(jp.distance(&pj) <= 1e-10 * v.norm());
            let e_id = vacuum_semigroup_element(&fh, &a, t).unwrap();
            let e_vac = vacuum_semigroup_element(&vac, &a, t).unwrap();
            assert!((e_id - e_vac).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn structural_check_suite() {
        let mut rng = rng_from_seed(16);
        for mode in [Adaptedness::Identity, Adaptedness::Vacuum] {
            let fh = random_flow(5, 1, 4, mode);
            for t in 0..=4 {
                let a = complex_matrix(&mut rng, 2, 2);
                assert!(unitality_check(&fh, t, 2, &mut rng).unwrap() <= 1e-10);
                assert!(vacuum_adaptedness_check(&fh, &a, t, 2, &mut rng).unwrap() <= 1e-10);
                assert!(projection_commutation_check(&fh, &a, t, 2, &mut rng).unwrap() <= 1e-10);
                assert!(tower_property_check(&fh, &a, t, 2, &mut rng).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn vacuum_semigroup_examples() {
        let fh = gaussian_flow(4, 0.1);
        let id = ComplexMatrix::identity(2);
        assert!((vacuum_semigroup_element(&fh, &id, 4).unwrap() - id.clone()).max_abs() < 1e-12);
        let x = pauli::x();
        assert_eq!(vacuum_semigroup_element(&fh, &x, 0).unwrap(), x);
    }

    #[test]
    fn gaussian_vacuum_semigroup_converges_at_first_order() {
        // Oracle: e^{−2t}σ_x at t = 0.5.
        let target = pauli::x().scale_real((-1.0f64).exp());
        let errs: Vec<f64> = [0.05, 0.025]
            .iter()
            .map(|&h| {
                let fh = gaussian_flow((0.5f64 / h).round() as usize, h);
                (vacuum_semigroup_element(&fh, &pauli::x(), fh.params().slices).unwrap() - target.clone())
                    .spectral_norm()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 0.7 && order < 1.3, "errors {errs:?}");
    }

    #[test]
    fn one_step_generator_matches_tau0() {
        let mut rng = rng_from_seed(16);
        let gen = HPGenerator::random(&mut rng, 2, 2, 0.9);
        let psi = psi_from_phi(&phi_from_hp(&gen));
        let a = complex_matrix(&mut rng, 2, 2);
        let tau = psi.tau0(&a);
        let errs: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&h| {
                let fh = FlowHandle::new(gen.clone(), LatticeParams::new(2, 2, 1, h).unwrap(), Adaptedness::Identity)
                    .unwrap();
                let t1 = vacuum_semigroup_element(&fh, &a, 1).unwrap();
                ((t1 - a.clone()).scale_real(1.0 / h) - tau.clone()).spectral_norm()
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!(ratio > 1.6 && ratio < 2.5, "errors {errs:?}");
    }

    #[test]
    fn shift_examples() {
        let fh = random_flow(5, 1, 4, Adaptedness::Identity);
        let mut rng = rng_from_seed(17);
        let v = state_vector(&mut rng, fh.params());
        let a = complex_matrix(&mut rng, 2, 2);
        let op = |w: &StateVector| Ok(w.apply_initial(&a));
        let direct = op(&v).unwrap();
        assert!(shifted_operator_apply(&fh, 0, op, &v).unwrap().distance(&direct) < 1e-15);
        let same = shifted_operator_apply(&fh, 2, |w: &StateVector| Ok(w.clone()), &v).unwrap();
        assert!(same.distance(&v) < 1e-12 * v.norm());
        assert!(second_quantised_shift(5, op, &v).is_err());
    }

    #[test]
    fn cocycle_identity_on_lattice() {
        let mut rng = rng_from_seed(18);
        for d in 1..=2 {
            let fh = random_flow(6 + d as u64, d, 4, Adaptedness::Identity);
            for s in 0..4 {
                for t in 0..=(4 - s) {
                    let a = complex_matrix(&mut rng, 2, 2);
                    let r = cocycle_identity_check(&fh, &a, s, t, 2, &mut rng).unwrap();
                    assert!(r <= 1e-10, "s={s} t={t} residual {r}");
                }
            }
        }
    }

    #[test]
    fn vacuum_expectation_of_shift_is_flow_of_expectation() {
        let mut rng = rng_from_seed(19);
        let fh = random_flow(9, 1, 4, Adaptedness::Identity);
        let s = 2;
        let reduced = fh.restricted(2).unwrap();
        let g = complex_matrix(&mut rng, 4, 4);
        let a = complex_matrix(&mut rng, 2, 2);
        let op = |w: &StateVector| -> Result<StateVector> {
            Ok(w.apply_local(&g, 1).apply_initial(&a).apply_local(&g.adjoint(), 0))
        };
        // 𝔼(op) as an n×n matrix.
        let mut e = ComplexMatrix::zeros(2, 2);
        for q in 0..2 {
            let mut uq = vec![ZERO; 2];
            uq[q] = C64::new(1.0, 0.0);
            let img = op(&vacuum_vector(reduced.params(), &uq).unwrap()).unwrap();
            for p in 0..2 {
                e[(p, q)] = img.amplitudes()[p * reduced.params().noise_dim()];
            }
        }
        let vac = fh.with_mode(Adaptedness::Vacuum);
        for _ in 0..5 {
            let v = state_vector(&mut rng, fh.params());
            let pv = vacuum_projection(s, &v).unwrap();
            let lhs = vacuum_projection(s, &shifted_operator_apply(&fh, s, op, &pv).unwrap()).unwrap();
            let rhs = flow_apply(&vac, &e, s, &v).unwrap();
            assert!(lhs.distance(&rhs) <= 1e-10 * v.norm());
        }
    }
}
