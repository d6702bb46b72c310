//! Multiplier processes `M^c` driven by a coefficient column `c = (c0; c1..cd)`.
//!
//! On the lattice `M_{i+1} = (I + B_i P_i) M_i` with `M_0 = I` and
//! `B_i = h·j_i(c0) + √h Σ_k R_k(i)·j_i(c_k)`, where `R_k(i)` raises slice `i`
//! from the vacuum to colour `k`. Because `U_i` commutes with `P_i` and
//! `R_k(i)`, the interaction vector `y_i = U_i M_i v` obeys
//! `y_{i+1} = G^{(i)}(y_i + h·c0 P_i y_i + √h Σ_k R_k(i) c_k P_i y_i)`,
//! which is what [`MultiplierProcess::sweep`] iterates.

use rand::Rng;

use crate::error::{QfkError, Result};
use crate::flow::{apply_unitary_cocycle, flow_apply, shifted_operator_apply, Direction, FlowHandle};
use crate::fock::{vacuum_projection, vacuum_vector, LatticeParams, StateVector};
use crate::linalg::C64;
use crate::random::{state_vector, unit_vector, vacuum_future_vector};
use crate::structure::{Adaptedness, MultiplierCoeff};

#[derive(Debug, Clone)]
pub struct MultiplierProcess {
    coeff: MultiplierCoeff,
    flow: FlowHandle,
}

impl MultiplierProcess {
    pub fn new(coeff: MultiplierCoeff, flow: FlowHandle) -> Result<Self> {
        let p = flow.params();
        if coeff.n() != p.n || coeff.d() != p.d {
            return Err(QfkError::Dimension(format!(
                "coefficient has (n, d) = ({}, {}), flow has ({}, {})",
                coeff.n(),
                coeff.d(),
                p.n,
                p.d
            )));
        }
        Ok(Self { coeff, flow: flow.with_mode(Adaptedness::Identity) })
    }

    pub fn coeff(&self) -> &MultiplierCoeff {
        &self.coeff
    }

    pub fn flow(&self) -> &FlowHandle {
        &self.flow
    }

    pub fn params(&self) -> LatticeParams {
        self.flow.params()
    }

    /// The same process on a lattice with `slices` slices.
    pub fn restricted(&self, slices: usize) -> Result<Self> {
        Ok(Self { coeff: self.coeff.clone(), flow: self.flow.restricted(slices)? })
    }

    /// Adds `h·c0·P_i y + √h Σ_k R_k(i) c_k P_i y` to `y`. `P_i y` is supported on
    /// noise indices below the stride of slice `i`, so the update runs over those only.
    fn add_drive(&self, i: usize, y: &mut StateVector) {
        let p = y.params();
        let (n, r, s) = (p.n, p.noise_dim(), p.stride(i));
        let h = C64::new(p.h, 0.0);
        let sqrt_h = C64::new(p.h.sqrt(), 0.0);
        let amps = y.amplitudes_mut();
        let mut u = vec![C64::new(0.0, 0.0); n];
        for r0 in 0..s {
            for (q, uq) in u.iter_mut().enumerate() {
                *uq = amps[q * r + r0];
            }
            let mut add = |m: &crate::linalg::ComplexMatrix, w: C64, offset: usize| {
                for pp in 0..n {
                    let z: C64 = (0..n).map(|q| m[(pp, q)] * u[q]).sum();
                    amps[pp * r + r0 + offset] += w * z;
                }
            };
            add(self.coeff.c0(), h, 0);
            for (k, ck) in self.coeff.ck().iter().enumerate() {
                add(ck, sqrt_h, (k + 1) * s);
            }
        }
    }

    /// Calls `visit(i, y_i)` for `i = 0..=t_idx`, where `y_i = U_i M_i v`.
    pub fn sweep(
        &self,
        v: &StateVector,
        t_idx: usize,
        mut visit: impl FnMut(usize, &StateVector) -> Result<()>,
    ) -> Result<()> {
        let p = self.params();
        p.check_time(t_idx)?;
        if v.params() != p {
            return Err(QfkError::Dimension("state vector lives on a different lattice".into()));
        }
        let mut y = v.clone();
        visit(0, &y)?;
        for i in 0..t_idx {
            self.advance_mut(i, &mut y);
            visit(i + 1, &y)?;
        }
        Ok(())
    }

    /// `y_{i+1}` from `y_i`.
    pub fn advance(&self, i: usize, y: &StateVector) -> Result<StateVector> {
        y.params().check_slice(i)?;
        let mut next = y.clone();
        self.advance_mut(i, &mut next);
        Ok(next)
    }

    fn advance_mut(&self, i: usize, y: &mut StateVector) {
        self.add_drive(i, y);
        self.flow.cocycle().step_mut(i, y);
    }

    /// As [`Self::sweep`] for `v = u ⊗ Ω`, but `y_i` is handed out on the
    /// lattice with `max(i, 1)` slices, which is all it occupies.
    pub fn sweep_rooted(
        &self,
        u: &[C64],
        t_idx: usize,
        mut visit: impl FnMut(usize, &StateVector) -> Result<()>,
    ) -> Result<()> {
        let p = self.params();
        p.check_time(t_idx)?;
        let mut y = vacuum_vector(p.with_slices(1)?, u)?;
        visit(0, &y)?;
        for i in 0..t_idx {
            if y.params().slices < i + 1 {
                y = y.embed(p.with_slices(i + 1)?)?;
            }
            self.advance_mut(i, &mut y);
            visit(i + 1, &y)?;
        }
        Ok(())
    }

    /// `U_t M_t v`.
    pub fn interaction_vector(&self, t_idx: usize, v: &StateVector) -> Result<StateVector> {
        let mut last = None;
        self.sweep(v, t_idx, |i, y| {
            if i == t_idx {
                last = Some(y.clone());
            }
            Ok(())
        })?;
        Ok(last.expect("sweep visits t_idx"))
    }

    /// `M_t(u ⊗ Ω)` on the lattice with `max(t_idx, 1)` slices.
    pub fn apply_rooted(&self, t_idx: usize, u: &[C64]) -> Result<StateVector> {
        let mut last = None;
        self.sweep_rooted(u, t_idx, |i, y| {
            if i == t_idx {
                last = Some(y.clone());
            }
            Ok(())
        })?;
        let mut w = last.expect("sweep visits t_idx");
        for i in (0..t_idx).rev() {
            self.flow.cocycle().step_adjoint_mut(i, &mut w);
        }
        Ok(w)
    }

    /// `M_t v` for an arbitrary vector.
    pub fn apply(&self, t_idx: usize, v: &StateVector) -> Result<StateVector> {
        let y = self.interaction_vector(t_idx, v)?;
        apply_unitary_cocycle(&self.flow, t_idx, &y, Direction::Adjoint)
    }
}

/// `M_t v` for `v` with vacuum in every slice `>= t`.
pub fn multiplier_apply(mp: &MultiplierProcess, t_idx: usize, v: &StateVector) -> Result<StateVector> {
    mp.params().check_time(t_idx)?;
    if !v.is_vacuum_from(t_idx) {
        return Err(QfkError::NonVacuumFuture { from: t_idx });
    }
    mp.apply(t_idx, v)
}

/// `B_j w = h·j_j(c0)w + √h Σ_k R_k(j) j_j(c_k) w`, built from the flow directly.
fn heisenberg_drive(mp: &MultiplierProcess, j: usize, w: &StateVector) -> Result<StateVector> {
    let h = mp.params().h;
    let one = C64::new(1.0, 0.0);
    let mut out = flow_apply(&mp.flow, mp.coeff.c0(), j, w)?;
    out.scale_mut(C64::new(h, 0.0));
    for (k, ck) in mp.coeff.ck().iter().enumerate() {
        let raised = flow_apply(&mp.flow, ck, j, w)?.transition(j, 0, k + 1, one);
        out.axpy(C64::new(h.sqrt(), 0.0), &raised);
    }
    Ok(out)
}

/// Picard levels `X^{(0)}_t v, …, X^{(n_iter)}_t v` of `M_t − I`.
pub fn picard_levels(mp: &MultiplierProcess, t_idx: usize, v: &StateVector, n_iter: usize) -> Result<Vec<StateVector>> {
    mp.params().check_time(t_idx)?;
    // level[j] holds X^{(m)}_j v for j = 0..=t_idx.
    let mut previous: Vec<StateVector> = vec![v.clone(); t_idx + 1];
    let mut out = Vec::with_capacity(n_iter + 1);
    for _ in 0..=n_iter {
        let mut current = Vec::with_capacity(t_idx + 1);
        let mut acc = StateVector::zeros(mp.params());
        current.push(acc.clone());
        for (j, prev) in previous.iter().enumerate().take(t_idx) {
            let pj = vacuum_projection(j, prev)?;
            acc.add_assign(&heisenberg_drive(mp, j, &pj)?);
            current.push(acc.clone());
        }
        out.push(current[t_idx].clone());
        previous = current;
    }
    Ok(out)
}

/// `Σ_{m ≤ n_iter} X^{(m)}_t v`, which converges to `(M_t − I)v`.
pub fn picard_apply(mp: &MultiplierProcess, t_idx: usize, v: &StateVector, n_iter: usize) -> Result<StateVector> {
    let levels = picard_levels(mp, t_idx, v, n_iter)?;
    let mut sum = StateVector::zeros(mp.params());
    for l in &levels {
        sum.add_assign(l);
    }
    Ok(sum)
}

/// `max_u ‖M_{s+t}(uΩ) − J_s(M_t)M_s(uΩ)‖` over random unit `u`.
pub fn multiplier_cocycle_check<R: Rng + ?Sized>(
    mp: &MultiplierProcess,
    s_idx: usize,
    t_idx: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let p = mp.params();
    if s_idx + t_idx > p.slices {
        return Err(QfkError::SliceRange { index: s_idx + t_idx, slices: p.slices });
    }
    // Both sides of the identity for `u ⊗ Ω` live on the first `s + t` slices.
    let local = mp.restricted((s_idx + t_idx.max(1)).min(p.slices))?;
    let lp = local.params();
    let segment = if s_idx == 0 || t_idx == 0 { local.clone() } else { local.restricted(lp.slices - s_idx)? };
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let u = unit_vector(rng, p.n);
        let lhs = local.apply_rooted(s_idx + t_idx, &u)?.embed(lp)?;
        let ms = local.apply_rooted(s_idx, &u)?.embed(lp)?;
        // `J_s(M_0) = I`; with `s = N` there is no lattice left to shift onto.
        let rhs =
            if t_idx == 0 { ms } else { shifted_operator_apply(&local.flow, s_idx, |w| segment.apply(t_idx, w), &ms)? };
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

/// `max_v ‖M_t P_t v − P_t M_t v‖` over random unit vectors.
pub fn vacuum_commutation_check<R: Rng + ?Sized>(
    mp: &MultiplierProcess,
    t_idx: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut v = state_vector(rng, mp.params());
        let nrm = v.norm();
        v.scale_mut(C64::new(1.0 / nrm, 0.0));
        let lhs = mp.apply(t_idx, &vacuum_projection(t_idx, &v)?)?;
        let rhs = vacuum_projection(t_idx, &mp.apply(t_idx, &v)?)?;
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

/// `‖(M_{i+1} − M_i)v‖` for `i = 0..t_idx`.
pub fn increment_norms(mp: &MultiplierProcess, t_idx: usize, v: &StateVector) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(t_idx);
    let mut prev: Option<StateVector> = None;
    mp.sweep(v, t_idx, |i, y| {
        // ‖U_{i+1}(M_{i+1} − M_i)v‖ = ‖y_{i+1} − G^{(i)} y_i‖.
        if let Some(p) = prev.take() {
            out.push(y.distance(&mp.flow.cocycle().step(i - 1, &p)));
        }
        prev = Some(y.clone());
        Ok(())
    })?;
    Ok(out)
}

/// `√2·(tκ + √t·λ)·exp(2tλ² + 2t²κ²)` with `κ = ‖c0‖` and `λ = (Σ_k ‖c_k‖²)^{1/2}`.
pub fn norm_bound(coeff: &MultiplierCoeff, t: f64) -> f64 {
    let kappa = coeff.drift_norm();
    let lambda = coeff.noise_norm();
    std::f64::consts::SQRT_2
        * (t * kappa + t.sqrt() * lambda)
        * (2.0 * t * lambda * lambda + 2.0 * t * t * kappa * kappa).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorFamily {
    /// `u ⊗ Ω` with `u` a random unit vector.
    VacuumRooted,
    /// Random unit vectors with vacuum in every slice `>= t`.
    VacuumFuture,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBoundResult {
    pub observed: f64,
    pub bound: f64,
}

impl NormBoundResult {
    pub fn holds(&self) -> bool {
        self.observed <= self.bound * (1.0 + 1e-6)
    }
}

/// Largest observed `‖(M_t − I)v‖/‖v‖` against [`norm_bound`].
pub fn norm_bound_check<R: Rng + ?Sized>(
    mp: &MultiplierProcess,
    t_idx: usize,
    trials: usize,
    family: VectorFamily,
    rng: &mut R,
) -> Result<NormBoundResult> {
    let p = mp.params();
    p.check_time(t_idx)?;
    let mut observed = 0.0f64;
    match family {
        VectorFamily::VacuumRooted => {
            // ‖(M_t − I)(u ⊗ Ω)‖² = u*·K·u with K the Gram matrix of the basis images.
            let mut cols = Vec::with_capacity(p.n);
            for q in 0..p.n {
                let mut e = vec![C64::new(0.0, 0.0); p.n];
                e[q] = C64::new(1.0, 0.0);
                let w = mp.apply_rooted(t_idx, &e)?;
                cols.push(w.sub(&vacuum_vector(w.params(), &e)?));
            }
            let gram: Vec<Vec<C64>> = cols.iter().map(|a| cols.iter().map(|b| a.inner(b)).collect()).collect();
            for _ in 0..trials {
                let u = unit_vector(rng, p.n);
                let mut sq = C64::new(0.0, 0.0);
                for (a, row) in gram.iter().enumerate() {
                    for (b, k) in row.iter().enumerate() {
                        sq += u[a].conj() * k * u[b];
                    }
                }
                observed = observed.max(sq.re.max(0.0).sqrt());
            }
        }
        VectorFamily::VacuumFuture => {
            for _ in 0..trials {
                let v = vacuum_future_vector(rng, p, t_idx);
                observed = observed.max(mp.apply(t_idx, &v)?.distance(&v));
            }
        }
    }
    Ok(NormBoundResult { observed, bound: norm_bound(&mp.coeff, p.time(t_idx)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::vacuum_vector;
    use crate::random::{complex_matrix, complex_vector, rng_from_seed, unit_vector, vacuum_rooted_vector};
    use crate::structure::HPGenerator;

    fn process(seed: u64, d: usize, slices: usize, h: f64) -> MultiplierProcess {
        let mut rng = rng_from_seed(seed);
        let gen = HPGenerator::random(&mut rng, 2, d, 1.0);
        let flow = FlowHandle::new(gen, LatticeParams::new(2, d, slices, h).unwrap(), Adaptedness::Identity).unwrap();
        let c = MultiplierCoeff::new(
            complex_matrix(&mut rng, 2, 2).scale_real(0.7),
            (0..d).map(|_| complex_matrix(&mut rng, 2, 2).scale_real(0.7)).collect(),
        )
        .unwrap();
        MultiplierProcess::new(c, flow).unwrap()
    }

    fn trivial_flow(d: usize, slices: usize, h: f64) -> FlowHandle {
        FlowHandle::new(HPGenerator::trivial(2, d), LatticeParams::new(2, d, slices, h).unwrap(), Adaptedness::Identity)
            .unwrap()
    }

    #[test]
    fn zero_coefficient_is_identity() {
        let mut rng = rng_from_seed(20);
        let base = process(1, 1, 4, 0.1);
        let mp = MultiplierProcess::new(MultiplierCoeff::zero(2, 1), base.flow().clone()).unwrap();
        let v = state_vector(&mut rng, mp.params());
        for t in 0..=4 {
            assert!(mp.apply(t, &v).unwrap().distance(&v) <= 1e-12 * v.norm());
        }
    }

    #[test]
    fn creation_multiplier_matches_closed_form() {
        // Trivial flow, c = (0; b): the amplitude on particle set S is h^{|S|/2} b^{|S|} v.
        let (slices, h) = (5, 0.2);
        let mut rng = rng_from_seed(21);
        let b = complex_matrix(&mut rng, 2, 2);
        let mp =
            MultiplierProcess::new(MultiplierCoeff::creation(vec![b.clone()]).unwrap(), trivial_flow(1, slices, h))
                .unwrap();
        let u = complex_vector(&mut rng, 2);
        let v = vacuum_vector(mp.params(), &u).unwrap();
        let out = multiplier_apply(&mp, slices, &v).unwrap();
        let r = mp.params().noise_dim();
        for word in 0..r {
            let m = word.count_ones() as i32;
            let mut bu = u.clone();
            for _ in 0..m {
                bu = b.matvec(&bu);
            }
            for (p, &bp) in bu.iter().enumerate() {
                let want = bp * h.powf(m as f64 / 2.0);
                assert!((out.amplitudes()[p * r + word] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn one_step_vacuum_element() {
        let mp = process(2, 1, 3, 0.05);
        let mut rng = rng_from_seed(22);
        let u = unit_vector(&mut rng, 2);
        let w = unit_vector(&mut rng, 2);
        let uo = vacuum_vector(mp.params(), &u).unwrap();
        let wo = vacuum_vector(mp.params(), &w).unwrap();
        let lhs = uo.inner(&mp.apply(1, &wo).unwrap());
        let cw = mp.coeff().c0().matvec(&w);
        let dot = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>();
        let rhs = dot(&u, &w) + dot(&u, &cw) * 0.05;
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn rooted_sweep_matches_full_lattice_sweep() {
        let mp = process(11, 2, 4, 0.1);
        let mut rng = rng_from_seed(30);
        let u = unit_vector(&mut rng, 2);
        let v = vacuum_vector(mp.params(), &u).unwrap();
        let mut full = Vec::new();
        mp.sweep(&v, 4, |_, y| {
            full.push(y.clone());
            Ok(())
        })
        .unwrap();
        mp.sweep_rooted(&u, 4, |i, y| {
            assert_eq!(y.params().slices, i.max(1));
            assert!(y.embed(mp.params()).unwrap().distance(&full[i]) < 1e-14);
            Ok(())
        })
        .unwrap();
        for t in 0..=4 {
            let rooted = mp.apply_rooted(t, &u).unwrap().embed(mp.params()).unwrap();
            assert!(rooted.distance(&mp.apply(t, &v).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn validated_apply_rejects_future_particles() {
        let mp = process(3, 1, 3, 0.1);
        let mut rng = rng_from_seed(23);
        let v = state_vector(&mut rng, mp.params());
        assert!(matches!(multiplier_apply(&mp, 1, &v), Err(QfkError::NonVacuumFuture { from: 1 })));
        assert!(multiplier_apply(&mp, 4, &v).is_err());
    }

    #[test]
    fn axioms_m_i_and_m_ii() {
        let mut rng = rng_from_seed(24);
        let mp = process(4, 2, 3, 0.1);
        let v = state_vector(&mut rng, mp.params());
        assert_eq!(mp.apply(0, &v).unwrap(), v);
        for t in 0..=3 {
            assert!(vacuum_commutation_check(&mp, t, 3, &mut rng).unwrap() <= 1e-10);
            let w = vacuum_future_vector(&mut rng, mp.params(), t);
            assert!(mp.apply(t, &w).unwrap().sub(&w).is_vacuum_from(t));
        }
    }

    #[test]
    fn cocycle_axiom_m_iii() {
        let mut rng = rng_from_seed(25);
        for d in 1..=2 {
            let mp = process(5 + d as u64, d, 4, 0.1);
            for s in 0..4 {
                for t in 0..=(4 - s) {
                    let r = multiplier_cocycle_check(&mp, s, t, 2, &mut rng).unwrap();
                    assert!(r <= 1e-9, "s={s} t={t} residual {r}");
                }
            }
        }
        let mp = process(8, 1, 4, 0.1);
        assert_eq!(multiplier_cocycle_check(&mp, 0, 3, 2, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn increments_scale_like_sqrt_h() {
        let mut rng = rng_from_seed(26);
        let mut maxima = Vec::new();
        for &(slices, h) in &[(4usize, 0.1), (8, 0.05)] {
            let mp = process(9, 1, slices, h);
            let v = vacuum_rooted_vector(&mut rng, mp.params());
            let inc = increment_norms(&mp, slices, &v).unwrap();
            assert_eq!(inc.len(), slices);
            maxima.push(inc.iter().cloned().fold(0.0, f64::max) / h.sqrt());
        }
        // Same constant at both resolutions.
        assert!(maxima[1] < 1.5 * maxima[0] && maxima[1] > 0.5 * maxima[0], "{maxima:?}");
    }

    #[test]
    fn picard_pure_time_integral() {
        let mut rng = rng_from_seed(27);
        let c0 = complex_matrix(&mut rng, 2, 2);
        let mp =
            MultiplierProcess::new(MultiplierCoeff::drift(c0.clone(), 1).unwrap(), trivial_flow(1, 4, 0.1)).unwrap();
        let u = complex_vector(&mut rng, 2);
        let v = vacuum_vector(mp.params(), &u).unwrap();
        let x0 = picard_apply(&mp, 4, &v, 0).unwrap();
        let want = vacuum_vector(mp.params(), &c0.scale_real(0.4).matvec(&u)).unwrap();
        assert!(x0.distance(&want) < 1e-14);
    }

    #[test]
    fn picard_converges_to_recursion() {
        let mut rng = rng_from_seed(28);
        let mp = process(10, 1, 6, 0.1);
        let v = vacuum_rooted_vector(&mut rng, mp.params());
        let levels = picard_levels(&mp, 6, &v, 20).unwrap();
        let norms: Vec<f64> = levels.iter().map(|l| l.norm()).collect();
        assert!(norms[6..].iter().all(|x| *x == 0.0), "levels beyond t vanish: {norms:?}");
        for w in norms[1..5].windows(2) {
            assert!(w[1] < w[0]);
        }
        let sum = picard_apply(&mp, 6, &v, 20).unwrap();
        let want = mp.apply(6, &v).unwrap().sub(&v);
        assert!(sum.distance(&want) <= 1e-10);
    }

    #[test]
    fn norm_bound_examples() {
        let mut rng = rng_from_seed(29);
        let flow = trivial_flow(1, 10, 0.1);
        let zero = MultiplierProcess::new(MultiplierCoeff::zero(2, 1), flow.clone()).unwrap();
        let r = norm_bound_check(&zero, 10, 5, VectorFamily::VacuumRooted, &mut rng).unwrap();
        assert_eq!((r.observed, r.bound), (0.0, 0.0));

        let b = crate::linalg::pauli::x();
        let c = MultiplierCoeff::creation(vec![b]).unwrap();
        assert!((norm_bound(&c, 1.0) - std::f64::consts::SQRT_2 * 2f64.exp()).abs() < 1e-12);
        let mp = MultiplierProcess::new(c.clone(), flow).unwrap();
        for family in [VectorFamily::VacuumRooted, VectorFamily::VacuumFuture] {
            let r = norm_bound_check(&mp, 10, 20, family, &mut rng).unwrap();
            assert!(r.holds(), "{r:?}");
        }
        let mut probe = rng.clone();
        let gram = norm_bound_check(&mp, 7, 1, VectorFamily::VacuumRooted, &mut rng).unwrap();
        let v = vacuum_rooted_vector(&mut probe, mp.params());
        assert!((gram.observed - mp.apply(7, &v).unwrap().distance(&v)).abs() < 1e-13);
        let ts = [0.0, 0.1, 0.5, 1.0, 2.0];
        for w in ts.windows(2) {
            assert!(norm_bound(&c, w[0]) <= norm_bound(&c, w[1]));
        }
    }
}
