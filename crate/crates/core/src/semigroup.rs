//! Perturbed semigroups `𝒯^{c,d}_t(a) = 𝔼[(M^c_t)* j_t(a) M^d_t]` on the lattice,
//! the exact generator as a superoperator, and finite-difference checks.

use crate::error::{QfkError, Result};
use crate::flow::FlowHandle;
use crate::fock::{vacuum_vector, LatticeParams, StateVector};
use crate::linalg::{choi_matrix, min_eigenvalue, ComplexMatrix, Superoperator, C64, ZERO};
use crate::multiplier::MultiplierProcess;
use crate::structure::{phi_from_hp, psi_from_phi, tau_gen, HPGenerator, MultiplierCoeff, StructureBlocks};

#[derive(Debug, Clone)]
pub struct PerturbedSemigroup {
    flow: FlowHandle,
    left: MultiplierProcess,
    right: MultiplierProcess,
}

impl PerturbedSemigroup {
    pub fn new(flow: FlowHandle, c: MultiplierCoeff, d: MultiplierCoeff) -> Result<Self> {
        let left = MultiplierProcess::new(c, flow.clone())?;
        let right = MultiplierProcess::new(d, flow.clone())?;
        Ok(Self { flow, left, right })
    }

    /// Builds the flow of `gen` on `params` (identity-adapted) and both multipliers.
    pub fn from_parts(gen: HPGenerator, params: LatticeParams, c: MultiplierCoeff, d: MultiplierCoeff) -> Result<Self> {
        let flow = FlowHandle::new(gen, params, crate::structure::Adaptedness::Identity)?;
        Self::new(flow, c, d)
    }

    pub fn flow(&self) -> &FlowHandle {
        &self.flow
    }

    pub fn left(&self) -> &MultiplierProcess {
        &self.left
    }

    pub fn right(&self) -> &MultiplierProcess {
        &self.right
    }

    pub fn params(&self) -> LatticeParams {
        self.flow.params()
    }

    pub fn is_symmetric(&self) -> bool {
        self.left.coeff() == self.right.coeff()
    }

    /// Structure map `ψ` of the underlying flow.
    pub fn structure(&self) -> StructureBlocks {
        psi_from_phi(&phi_from_hp(self.flow.gen()))
    }

    /// The generator `τ` from the block formula, as a superoperator.
    pub fn exact_generator(&self) -> Result<Superoperator> {
        let psi = self.structure();
        let (c, d) = (self.left.coeff(), self.right.coeff());
        Superoperator::try_from_map(self.params().n, |x| tau_gen(&psi, c, d, x))
    }

    /// The same semigroup on a lattice with `slices` slices.
    pub fn restricted(&self, slices: usize) -> Result<Self> {
        Ok(Self {
            flow: self.flow.restricted(slices)?,
            left: self.left.restricted(slices)?,
            right: self.right.restricted(slices)?,
        })
    }

    /// The same flow and coefficients on a lattice with step `h`.
    pub fn with_step(&self, h: f64, slices: usize) -> Result<Self> {
        let p = self.params();
        let params = LatticeParams::new(p.n, p.d, slices, h)?;
        Self::from_parts(self.flow.gen().clone(), params, self.left.coeff().clone(), self.right.coeff().clone())
    }
}

fn basis_vectors(params: LatticeParams) -> Result<Vec<StateVector>> {
    (0..params.n)
        .map(|q| {
            let mut e = vec![ZERO; params.n];
            e[q] = C64::new(1.0, 0.0);
            vacuum_vector(params, &e)
        })
        .collect()
}

/// Superoperator `a ↦ [⟨y_p, (a ⊗ I) z_q⟩]_{pq}` from the interaction vectors.
fn superoperator_from_vectors(ys: &[StateVector], zs: &[StateVector]) -> Superoperator {
    let n = ys.len();
    let r = ys[0].params().noise_dim();
    // gram[((p·n + i)·n + q)·n + j] = Σ_w conj(y_p[i, w]) z_q[j, w]
    let mut gram = vec![ZERO; n * n * n * n];
    for p in 0..n {
        for i in 0..n {
            let yi = &ys[p].amplitudes()[i * r..(i + 1) * r];
            for q in 0..n {
                for j in 0..n {
                    let zj = &zs[q].amplitudes()[j * r..(j + 1) * r];
                    gram[((p * n + i) * n + q) * n + j] = yi.iter().zip(zj).map(|(a, b)| a.conj() * b).sum();
                }
            }
        }
    }
    Superoperator::from_map(n, |a| {
        ComplexMatrix::from_fn(n, n, |p, q| {
            let mut s = ZERO;
            for i in 0..n {
                for j in 0..n {
                    s += a[(i, j)] * gram[((p * n + i) * n + q) * n + j];
                }
            }
            s
        })
    })
}

/// Calls `visit(t, 𝒯_t)` for every lattice time `t = 0..=t_max` in one pass.
pub fn sweep_superoperators(
    ps: &PerturbedSemigroup,
    t_max: usize,
    mut visit: impl FnMut(usize, &Superoperator) -> Result<()>,
) -> Result<()> {
    let p = ps.params();
    p.check_time(t_max)?;
    let symmetric = ps.is_symmetric();
    // Interaction vectors at time t are vacuum beyond slice t, so they are
    // kept on a lattice that grows by one slice per step.
    let mut ys = basis_vectors(p.with_slices(1)?)?;
    let mut zs = if symmetric { Vec::new() } else { ys.clone() };
    for t in 0..=t_max {
        let right = if symmetric { &ys } else { &zs };
        visit(t, &superoperator_from_vectors(&ys, right))?;
        if t == t_max {
            break;
        }
        let grown = p.with_slices(t + 1)?;
        let step = |mp: &MultiplierProcess, y: &StateVector| mp.advance(t, &y.embed(grown)?);
        ys = ys.iter().map(|y| step(&ps.left, y)).collect::<Result<_>>()?;
        if !symmetric {
            zs = zs.iter().map(|z| step(&ps.right, z)).collect::<Result<_>>()?;
        }
    }
    Ok(())
}

/// `𝒯_t` for every `t = 0..=t_max`.
pub fn superoperators_up_to(ps: &PerturbedSemigroup, t_max: usize) -> Result<Vec<Superoperator>> {
    let mut out = Vec::with_capacity(t_max + 1);
    sweep_superoperators(ps, t_max, |_, s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

pub fn semigroup_superoperator(ps: &PerturbedSemigroup, t_idx: usize) -> Result<Superoperator> {
    let mut last = None;
    sweep_superoperators(ps, t_idx, |t, s| {
        if t == t_idx {
            last = Some(s.clone());
        }
        Ok(())
    })?;
    Ok(last.expect("sweep visits t_idx"))
}

/// `𝒯^{c,d}_t(a)`, with entries `⟨M^c_t e_pΩ, j_t(a) M^d_t e_qΩ⟩`.
pub fn semigroup_element(ps: &PerturbedSemigroup, a: &ComplexMatrix, t_idx: usize) -> Result<ComplexMatrix> {
    let n = ps.params().n;
    if a.shape() != (n, n) {
        return Err(QfkError::Dimension("semigroup argument must be n x n".into()));
    }
    Ok(semigroup_superoperator(ps, t_idx)?.apply(a))
}

fn semigroup_residual(st: &Superoperator, ss: &Superoperator, sst: &Superoperator) -> f64 {
    let n = st.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let e = ComplexMatrix::unit(n, i, j);
            let lhs = sst.apply(&e);
            let rhs = ss.apply(&st.apply(&e));
            worst = worst.max((lhs - rhs).spectral_norm());
        }
    }
    worst
}

/// `max_{ij} ‖𝒯_{s+t}(E_ij) − 𝒯_s(𝒯_t(E_ij))‖`.
pub fn semigroup_property_check(ps: &PerturbedSemigroup, s_idx: usize, t_idx: usize) -> Result<f64> {
    let p = ps.params();
    if s_idx + t_idx > p.slices {
        return Err(QfkError::SliceRange { index: s_idx + t_idx, slices: p.slices });
    }
    let all = superoperators_up_to(ps, s_idx + t_idx)?;
    Ok(semigroup_residual(&all[t_idx], &all[s_idx], &all[s_idx + t_idx]))
}

/// Largest semigroup-law residual over every `s + t ≤ N`.
pub fn semigroup_law_all_times(ps: &PerturbedSemigroup) -> Result<f64> {
    let all = superoperators_up_to(ps, ps.params().slices)?;
    let mut worst = 0.0f64;
    for s in 0..all.len() {
        for t in 0..all.len() - s {
            worst = worst.max(semigroup_residual(&all[t], &all[s], &all[s + t]));
        }
    }
    Ok(worst)
}

/// Minimum eigenvalue of the Choi matrix of `𝒯^{c,c}_t`.
pub fn cp_check(ps: &PerturbedSemigroup, t_idx: usize) -> Result<f64> {
    if !ps.is_symmetric() {
        return Err(QfkError::UnequalMultipliers);
    }
    let s = semigroup_superoperator(ps, t_idx)?;
    Ok(min_eigenvalue(&choi_matrix(ps.params().n, |x| s.apply(x))))
}

/// Minimum Choi eigenvalue over every lattice time.
pub fn cp_check_all_times(ps: &PerturbedSemigroup) -> Result<f64> {
    if !ps.is_symmetric() {
        return Err(QfkError::UnequalMultipliers);
    }
    let n = ps.params().n;
    let mut worst = f64::INFINITY;
    sweep_superoperators(ps, ps.params().slices, |_, s| {
        worst = worst.min(min_eigenvalue(&choi_matrix(n, |x| s.apply(x))));
        Ok(())
    })?;
    Ok(worst)
}

/// `max_x ‖𝒯_t(x)‖/‖x‖` over matrix units and `I`, plus `‖𝒯_t(I)‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractivityReport {
    pub max_ratio: f64,
    pub unit_image_norm: f64,
}

pub fn contractivity_report(ps: &PerturbedSemigroup, t_idx: usize) -> Result<ContractivityReport> {
    let s = semigroup_superoperator(ps, t_idx)?;
    let n = ps.params().n;
    let mut max_ratio = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            max_ratio = max_ratio.max(s.apply(&ComplexMatrix::unit(n, i, j)).spectral_norm());
        }
    }
    let unit_image_norm = s.apply(&ComplexMatrix::identity(n)).spectral_norm();
    Ok(ContractivityReport { max_ratio: max_ratio.max(unit_image_norm), unit_image_norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    /// `(𝒯_h − id)/h`.
    Euler,
    /// `2·D(h) − D(2h)`, where `D(k) = (𝒯_k − id)/k` is the one-step
    /// estimate on a lattice of step `k`; cancels the `O(h)` term.
    Richardson,
}

#[derive(Debug, Clone)]
pub struct GeneratorEstimate {
    pub tau_hat: Superoperator,
    pub tau_exact: Superoperator,
    pub error: f64,
    pub h: f64,
}

pub fn generator_fd(ps: &PerturbedSemigroup, scheme: FdScheme) -> Result<GeneratorEstimate> {
    let p = ps.params();
    let id = Superoperator::identity(p.n);
    let d1 = (&semigroup_superoperator(ps, 1)? - &id).scale(1.0 / p.h);
    let tau_hat = match scheme {
        FdScheme::Euler => d1,
        FdScheme::Richardson => {
            let coarse = ps.with_step(2.0 * p.h, 1)?;
            let d2 = (&semigroup_superoperator(&coarse, 1)? - &id).scale(1.0 / (2.0 * p.h));
            &d1.scale(2.0) - &d2
        }
    };
    let tau_exact = ps.exact_generator()?;
    let error = tau_hat.distance(&tau_exact);
    Ok(GeneratorEstimate { tau_hat, tau_exact, error, h: p.h })
}

/// `exp(t·τ)(a)`.
pub fn oracle_semigroup(tau: &Superoperator, t: f64, a: &ComplexMatrix) -> ComplexMatrix {
    tau.scale(t).exp().apply(a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log2(e(h_k)/e(h_{k+1}))`; `None` when both errors are at round-off level.
    pub orders: Vec<Option<f64>>,
}

impl ConvergenceTable {
    pub const EXACT_TOL: f64 = 1e-12;

    pub fn from_errors(h: Vec<f64>, errors: Vec<f64>) -> Self {
        let orders = errors
            .windows(2)
            .zip(h.windows(2))
            .map(|(e, hh)| {
                if e[0] <= Self::EXACT_TOL && e[1] <= Self::EXACT_TOL {
                    None
                } else {
                    Some((e[0] / e[1]).ln() / (hh[0] / hh[1]).ln())
                }
            })
            .collect();
        Self { h, errors, orders }
    }

    /// True when every error is at round-off level.
    pub fn is_exact(&self) -> bool {
        self.errors.iter().all(|e| *e <= Self::EXACT_TOL)
    }
}

/// Checks that `ladder` has at least three entries, each half the previous one.
pub fn validate_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < 3 {
        return Err(QfkError::Invalid(format!("ladder needs at least 3 step sizes, got {}", ladder.len())));
    }
    if ladder.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(QfkError::Invalid("ladder step sizes must be positive".into()));
    }
    for w in ladder.windows(2) {
        if (w[0] / w[1] - 2.0).abs() > 1e-9 {
            return Err(QfkError::Invalid(format!("ladder must halve at each step ({} -> {})", w[0], w[1])));
        }
    }
    Ok(())
}

/// `‖𝒯_t(a) − exp(tτ)(a)‖` for each `h` in the ladder.
pub fn convergence_study(
    gen: &HPGenerator,
    c: &MultiplierCoeff,
    d: &MultiplierCoeff,
    ladder: &[f64],
    t: f64,
    a: &ComplexMatrix,
) -> Result<ConvergenceTable> {
    validate_ladder(ladder)?;
    let mut errors = Vec::with_capacity(ladder.len());
    let mut oracle = None;
    for &h in ladder {
        let params = LatticeParams::with_horizon(gen.n(), gen.d(), t, h)?;
        let ps = PerturbedSemigroup::from_parts(gen.clone(), params, c.clone(), d.clone())?;
        let target = match &oracle {
            Some(o) => o,
            None => oracle.insert(oracle_semigroup(&ps.exact_generator()?, t, a)),
        };
        let lattice = semigroup_element(&ps, a, params.slices)?;
        errors.push((lattice - target.clone()).spectral_norm());
    }
    Ok(ConvergenceTable::from_errors(ladder.to_vec(), errors))
}

/// Euler generator error `‖τ̂_h − τ‖` for each `h` in the ladder.
pub fn generator_convergence(
    gen: &HPGenerator,
    c: &MultiplierCoeff,
    d: &MultiplierCoeff,
    ladder: &[f64],
) -> Result<ConvergenceTable> {
    validate_ladder(ladder)?;
    let errors = ladder
        .iter()
        .map(|&h| {
            let params = LatticeParams::new(gen.n(), gen.d(), 1, h)?;
            let ps = PerturbedSemigroup::from_parts(gen.clone(), params, c.clone(), d.clone())?;
            Ok(generator_fd(&ps, FdScheme::Euler)?.error)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_errors(ladder.to_vec(), errors))
}
