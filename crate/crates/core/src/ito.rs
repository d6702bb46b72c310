//! Vacuum-adapted quantum stochastic integrals of step integrands and the
//! product formula for them.
//!
//! An integrand acts, slice by slice, on a column `(v_0; v_1..v_d)` of
//! vectors that are vacuum from slice `i` on. The increment of `∫GdΛ` at
//! slice `i` is `Σ_{αβ} f_α f_β E_α(i) G_{αβ} E^β(i) P_{i+1}` with
//! `f_0 = √h` and `f_k = 1`, where `E^β(i)` reads letter `β` at slice `i`
//! and `E_α(i)` writes letter `α` there.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{QfkError, Result};
use crate::fock::{vacuum_projection, vacuum_vector, LatticeParams, StateVector};
use crate::linalg::{re, ComplexMatrix, C64};
use crate::random::{state_vector, unit_vector};

type BlockFn = Arc<dyn Fn(usize, &[StateVector]) -> Result<Vec<StateVector>>>;

#[derive(Clone)]
enum Repr {
    Matrices(Vec<ComplexMatrix>),
    Operator(BlockFn),
}

/// A step integrand process on a fixed lattice.
#[derive(Clone)]
pub struct BlockIntegrand {
    params: LatticeParams,
    repr: Repr,
}

impl fmt::Debug for BlockIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Matrices(_) => "matrices",
            Repr::Operator(_) => "operator",
        };
        f.debug_struct("BlockIntegrand").field("params", &self.params).field("kind", &kind).finish()
    }
}

/// `‖k‖_{1,t}`, `‖l‖_{2,t}`, `‖m‖_{2,t}`, `‖n‖_{∞,t}` of a matrix integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentNorms {
    pub k: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl ComponentNorms {
    pub fn total(&self) -> f64 {
        self.k + self.l + self.m + self.n
    }
}

fn slot_factor(h: f64, alpha: usize) -> C64 {
    if alpha == 0 {
        re(h.sqrt())
    } else {
        re(1.0)
    }
}

fn apply_matrix_block(g: &ComplexMatrix, n: usize, column: &[StateVector]) -> Vec<StateVector> {
    let params = column[0].params();
    let width = column.len();
    (0..width)
        .map(|a| {
            let mut out = StateVector::zeros(params);
            for (b, v) in column.iter().enumerate() {
                let blk = g.block(a * n, b * n, n, n);
                if blk.max_abs() != 0.0 {
                    out.add_assign(&v.apply_initial(&blk));
                }
            }
            out
        })
        .collect()
}

impl BlockIntegrand {
    /// One `(1+d)n`-square matrix per slice, acting on the initial space.
    pub fn from_matrices(params: LatticeParams, mats: Vec<ComplexMatrix>) -> Result<Self> {
        if mats.len() != params.slices {
            return Err(QfkError::Dimension(format!("{} slice matrices for {} slices", mats.len(), params.slices)));
        }
        let m = params.n * params.local_dim();
        if let Some(bad) = mats.iter().find(|g| g.shape() != (m, m)) {
            return Err(QfkError::Dimension(format!("slice block is {:?}, want {m}x{m}", bad.shape())));
        }
        Ok(Self { params, repr: Repr::Matrices(mats) })
    }

    pub fn constant(params: LatticeParams, g: ComplexMatrix) -> Result<Self> {
        Self::from_matrices(params, vec![g; params.slices])
    }

    pub fn zero(params: LatticeParams) -> Self {
        let m = params.n * params.local_dim();
        Self { params, repr: Repr::Matrices(vec![ComplexMatrix::zeros(m, m); params.slices]) }
    }

    /// `[[x, 0], [0, 0]]` on every slice.
    pub fn pure_time(params: LatticeParams, x: &ComplexMatrix) -> Result<Self> {
        let m = params.n * params.local_dim();
        let mut g = ComplexMatrix::zeros(m, m);
        g.set_block(0, 0, x);
        Self::constant(params, g)
    }

    /// `[[0, 0], [b, 0]]` on every slice, `b` stacked from one block per colour.
    pub fn pure_creation(params: LatticeParams, b: &[ComplexMatrix]) -> Result<Self> {
        if b.len() != params.d {
            return Err(QfkError::Dimension(format!("{} creation blocks for d = {}", b.len(), params.d)));
        }
        let n = params.n;
        let mut g = ComplexMatrix::zeros(n * params.local_dim(), n * params.local_dim());
        for (k, bk) in b.iter().enumerate() {
            g.set_block((k + 1) * n, 0, bk);
        }
        Self::constant(params, g)
    }

    /// An integrand given by its action on slice columns.
    pub fn from_operator(
        params: LatticeParams,
        f: impl Fn(usize, &[StateVector]) -> Result<Vec<StateVector>> + 'static,
    ) -> Self {
        Self { params, repr: Repr::Operator(Arc::new(f)) }
    }

    pub fn params(&self) -> LatticeParams {
        self.params
    }

    pub fn matrices(&self) -> Option<&[ComplexMatrix]> {
        match &self.repr {
            Repr::Matrices(m) => Some(m),
            Repr::Operator(_) => None,
        }
    }

    /// `G_i` applied to a column whose entries are vacuum from slice `i` on.
    pub fn apply_block(&self, i: usize, column: &[StateVector]) -> Result<Vec<StateVector>> {
        self.params.check_slice(i)?;
        if column.len() != self.params.local_dim() {
            return Err(QfkError::Dimension(format!(
                "column of {} entries, want {}",
                column.len(),
                self.params.local_dim()
            )));
        }
        match &self.repr {
            Repr::Matrices(m) => Ok(apply_matrix_block(&m[i], self.params.n, column)),
            Repr::Operator(f) => f(i, column),
        }
    }

    /// `G†`, the slicewise adjoint.
    pub fn adjoint(&self) -> Result<Self> {
        match &self.repr {
            Repr::Matrices(m) => {
                Ok(Self { params: self.params, repr: Repr::Matrices(m.iter().map(|g| g.adjoint()).collect()) })
            }
            Repr::Operator(_) => Err(QfkError::Invalid("adjoint is only available for matrix integrands".into())),
        }
    }

    /// `GΔ ≡ 0`: no annihilation or gauge columns.
    pub fn is_creation_only(&self) -> Option<bool> {
        let n = self.params.n;
        self.matrices().map(|ms| ms.iter().all(|g| g.block(0, n, g.rows(), g.cols() - n).max_abs() == 0.0))
    }

    /// `G(id ⊗ X)` for an operator `X` on the full space.
    pub fn compose_right(&self, x: impl Fn(&StateVector) -> Result<StateVector> + 'static) -> Self {
        let g = self.clone();
        Self::from_operator(self.params, move |i, col| {
            let moved = col.iter().map(&x).collect::<Result<Vec<_>>>()?;
            g.apply_block(i, &moved)
        })
    }

    pub fn component_norms(&self, t_idx: usize) -> Result<ComponentNorms> {
        self.params.check_time(t_idx)?;
        let ms = self.matrices().ok_or_else(|| QfkError::Invalid("component norms need a matrix integrand".into()))?;
        let (n, h) = (self.params.n, self.params.h);
        let dn = self.params.d * n;
        let mut out = ComponentNorms { k: 0.0, l: 0.0, m: 0.0, n: 0.0 };
        for g in &ms[..t_idx] {
            out.k += h * g.block(0, 0, n, n).spectral_norm();
            out.l += h * g.block(n, 0, dn, n).spectral_norm().powi(2);
            out.m += h * g.block(0, n, n, dn).spectral_norm().powi(2);
            out.n = out.n.max(g.block(n, n, dn, dn).spectral_norm());
        }
        out.l = out.l.sqrt();
        out.m = out.m.sqrt();
        Ok(out)
    }

    /// `‖G‖_t`.
    pub fn norm(&self, t_idx: usize) -> Result<f64> {
        Ok(self.component_norms(t_idx)?.total())
    }
}

fn check_lattice(g: &BlockIntegrand, v: &StateVector) -> Result<()> {
    if g.params != v.params() {
        return Err(QfkError::Dimension("integrand and vector live on different lattices".into()));
    }
    Ok(())
}

/// `(∫_s^t G dΛ) v`.
pub fn discrete_integral_range(g: &BlockIntegrand, s_idx: usize, t_idx: usize, v: &StateVector) -> Result<StateVector> {
    check_lattice(g, v)?;
    let p = g.params;
    p.check_time(t_idx)?;
    if s_idx > t_idx {
        return Err(QfkError::Invalid(format!("integration range {s_idx}..{t_idx} is reversed")));
    }
    let mut out = StateVector::zeros(p);
    for i in s_idx..t_idx {
        let w = vacuum_projection(i + 1, v)?;
        let column: Vec<StateVector> = (0..p.local_dim()).map(|b| w.transition(i, b, 0, slot_factor(p.h, b))).collect();
        for (a, x) in g.apply_block(i, &column)?.iter().enumerate() {
            out.add_assign(&x.transition(i, 0, a, slot_factor(p.h, a)));
        }
    }
    Ok(out)
}

/// `(∫_0^t G dΛ) v`.
pub fn discrete_integral(g: &BlockIntegrand, t_idx: usize, v: &StateVector) -> Result<StateVector> {
    discrete_integral_range(g, 0, t_idx, v)
}

fn zero_column(params: LatticeParams) -> Vec<StateVector> {
    vec![StateVector::zeros(params); params.local_dim()]
}

/// Column with `x` in the vacuum entry and zeros elsewhere.
fn vacuum_entry(x: StateVector) -> Vec<StateVector> {
    let mut col = zero_column(x.params());
    col[0] = x;
    col
}

fn add_columns(acc: &mut [StateVector], col: &[StateVector]) {
    for (a, c) in acc.iter_mut().zip(col) {
        a.add_assign(c);
    }
}

fn check_factors(factors: &[&BlockIntegrand]) -> Result<LatticeParams> {
    let p = factors[0].params;
    if factors.iter().any(|g| g.params != p) {
        return Err(QfkError::Invalid("integrands are on misaligned lattices".into()));
    }
    Ok(p)
}

/// `H = (id⊗Z)Δ^⊥G' + GΔ^⊥(id⊗Z') + GΔG'` with `Z`, `Z'` the running integrals.
pub fn ito_product_integrand(g: &BlockIntegrand, g2: &BlockIntegrand) -> Result<BlockIntegrand> {
    let p = check_factors(&[g, g2])?;
    let (g, g2) = (g.clone(), g2.clone());
    Ok(BlockIntegrand::from_operator(p, move |i, col| {
        let z = |x: &StateVector| discrete_integral(&g, i, x);
        let z2 = |x: &StateVector| discrete_integral(&g2, i, x);
        let mut out = zero_column(p);
        let mut w = g2.apply_block(i, col)?;
        out[0].add_assign(&z(&w[0])?);
        add_columns(&mut out, &g.apply_block(i, &vacuum_entry(z2(&col[0])?))?);
        w[0] = StateVector::zeros(p);
        add_columns(&mut out, &g.apply_block(i, &w)?);
        Ok(out)
    }))
}

/// Integrand of `Z Z' Z''`: the six-term expansion.
pub fn ito_triple_integrand(g: &BlockIntegrand, g2: &BlockIntegrand, g3: &BlockIntegrand) -> Result<BlockIntegrand> {
    let p = check_factors(&[g, g2, g3])?;
    let (g, g2, g3) = (g.clone(), g2.clone(), g3.clone());
    Ok(BlockIntegrand::from_operator(p, move |i, col| {
        let z = |x: &StateVector| discrete_integral(&g, i, x);
        let z2 = |x: &StateVector| discrete_integral(&g2, i, x);
        let z3 = |x: &StateVector| discrete_integral(&g3, i, x);
        let zero = StateVector::zeros(p);
        let mut out = zero_column(p);

        // (id⊗ZZ')Δ^⊥G'' and (id⊗Z)Δ^⊥G'ΔG''.
        let mut w3 = g3.apply_block(i, col)?;
        out[0].add_assign(&z(&z2(&w3[0])?)?);
        w3[0] = zero.clone();
        let w23 = g2.apply_block(i, &w3)?;
        out[0].add_assign(&z(&w23[0])?);

        // (id⊗Z)Δ^⊥G'Δ^⊥(id⊗Z'') and GΔG'Δ^⊥(id⊗Z'').
        let mut w2 = g2.apply_block(i, &vacuum_entry(z3(&col[0])?))?;
        out[0].add_assign(&z(&w2[0])?);
        w2[0] = zero.clone();
        add_columns(&mut out, &g.apply_block(i, &w2)?);

        // GΔ^⊥(id⊗Z'Z'').
        add_columns(&mut out, &g.apply_block(i, &vacuum_entry(z2(&z3(&col[0])?)?))?);

        // GΔG'ΔG''.
        let mut w = w23;
        w[0] = zero;
        add_columns(&mut out, &g.apply_block(i, &w)?);
        Ok(out)
    }))
}

/// `max_u ‖Z_t Z'_t (uΩ) − (∫HdΛ)_t (uΩ)‖` for two or three factors.
pub fn ito_residual(factors: &[BlockIntegrand], t_idx: usize, us: &[Vec<C64>]) -> Result<f64> {
    let h = match factors {
        [a, b] => ito_product_integrand(a, b)?,
        [a, b, c] => ito_triple_integrand(a, b, c)?,
        _ => return Err(QfkError::Invalid(format!("product formula takes 2 or 3 factors, got {}", factors.len()))),
    };
    let p = h.params;
    let mut worst = 0.0f64;
    for u in us {
        let v = vacuum_vector(p, u)?;
        let mut lhs = v.clone();
        for g in factors.iter().rev() {
            lhs = discrete_integral(g, t_idx, &lhs)?;
        }
        let rhs = discrete_integral(&h, t_idx, &v)?;
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItoVerification {
    pub h: f64,
    pub residual_coarse: f64,
    pub residual_fine: f64,
}

impl ItoVerification {
    pub fn ratio(&self) -> f64 {
        self.residual_coarse / self.residual_fine
    }
}

/// Product-formula residuals for constant matrix integrands at steps `h` and `h/2`.
pub fn ito_verify<R: Rng + ?Sized>(
    blocks: &[ComplexMatrix],
    n: usize,
    d: usize,
    t: f64,
    h: f64,
    trials: usize,
    rng: &mut R,
) -> Result<ItoVerification> {
    let us: Vec<Vec<C64>> = (0..trials).map(|_| unit_vector(rng, n)).collect();
    let mut residuals = [0.0; 2];
    for (slot, step) in residuals.iter_mut().zip([h, h / 2.0]) {
        let params = LatticeParams::with_horizon(n, d, t, step)?;
        let factors = blocks.iter().map(|g| BlockIntegrand::constant(params, g.clone())).collect::<Result<Vec<_>>>()?;
        *slot = ito_residual(&factors, params.slices, &us)?;
    }
    Ok(ItoVerification { h, residual_coarse: residuals[0], residual_fine: residuals[1] })
}

/// `max_v ‖(∫_s^t GdΛ) X v − (∫_s^t G(id⊗X)dΛ) v‖` over random unit vectors.
pub fn inside_integral_check<R: Rng + ?Sized>(
    g: &BlockIntegrand,
    x: impl Fn(&StateVector) -> Result<StateVector> + Clone + 'static,
    s_idx: usize,
    t_idx: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    match g.is_creation_only() {
        Some(true) => {}
        Some(false) => return Err(QfkError::IntegrandNotCreationOnly),
        None => return Err(QfkError::Invalid("creation-only test needs a matrix integrand".into())),
    }
    let inside = g.compose_right(x.clone());
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut v = state_vector(rng, g.params);
        v.scale_mut(re(1.0 / v.norm()));
        let lhs = discrete_integral_range(g, s_idx, t_idx, &x(&v)?)?;
        let rhs = discrete_integral_range(&inside, s_idx, t_idx, &v)?;
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

/// `max_{u,v} |⟨(∫GdΛ)u, v⟩ − ⟨u, (∫G†dΛ)v⟩|` over random unit vectors.
pub fn adjoint_check<R: Rng + ?Sized>(g: &BlockIntegrand, t_idx: usize, trials: usize, rng: &mut R) -> Result<f64> {
    let ga = g.adjoint()?;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let u = state_vector(rng, g.params);
        let v = state_vector(rng, g.params);
        let lhs = discrete_integral(g, t_idx, &u)?.inner(&v);
        let rhs = u.inner(&discrete_integral(&ga, t_idx, &v)?);
        worst = worst.max((lhs - rhs).norm() / (u.norm() * v.norm()));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralNormEstimate {
    pub observed: f64,
    pub bound: f64,
}

impl IntegralNormEstimate {
    pub fn holds(&self) -> bool {
        self.observed <= self.bound * (1.0 + 1e-12)
    }
}

/// Largest `‖(∫_0^t GdΛ)v‖` over random unit vectors against `‖G‖_t`.
pub fn integral_norm_check<R: Rng + ?Sized>(
    g: &BlockIntegrand,
    t_idx: usize,
    trials: usize,
    rng: &mut R,
) -> Result<IntegralNormEstimate> {
    let bound = g.norm(t_idx)?;
    let mut observed = 0.0f64;
    for _ in 0..trials {
        let v = state_vector(rng, g.params);
        observed = observed.max(discrete_integral(g, t_idx, &v)?.norm() / v.norm());
    }
    Ok(IntegralNormEstimate { observed, bound })
}

/// Smallest `Re⟨v, Z*Z v⟩` over random unit vectors, with `Z*` the integral of `G†`.
pub fn positivity_check<R: Rng + ?Sized>(g: &BlockIntegrand, t_idx: usize, trials: usize, rng: &mut R) -> Result<f64> {
    let ga = g.adjoint()?;
    let mut lowest = f64::INFINITY;
    for _ in 0..trials {
        let mut v = state_vector(rng, g.params);
        v.scale_mut(re(1.0 / v.norm()));
        let zv = discrete_integral(g, t_idx, &v)?;
        lowest = lowest.min(v.inner(&discrete_integral(&ga, t_idx, &zv)?).re);
    }
    Ok(lowest)
}

/// `⟨f̂ ⊗ u, G (ĝ ⊗ v)⟩` with `f̂ = (1; f)`.
pub fn exponential_pairing(g: &ComplexMatrix, u: &[C64], f: &[C64], v: &[C64], gv: &[C64]) -> C64 {
    let hat = |x: &[C64], w: &[C64]| -> Vec<C64> {
        let mut out = w.to_vec();
        for xk in x {
            out.extend(w.iter().map(|z| z * xk));
        }
        out
    };
    let lhs = hat(f, u);
    let rhs = g.matvec(&hat(gv, v));
    lhs.iter().zip(&rhs).map(|(a, b)| a.conj() * b).sum()
}

/// `∫_0^t ⟨f̂ ⊗ u, G (ĝ ⊗ v)⟩ e^{s⟨f, g⟩} ds` for constant `G` and constant `f`, `g ∈ C^d`.
pub fn exponential_element_continuous(g: &ComplexMatrix, t: f64, u: &[C64], f: &[C64], v: &[C64], gv: &[C64]) -> C64 {
    let coeff = exponential_pairing(g, u, f, v, gv);
    let rate: C64 = f.iter().zip(gv).map(|(a, b)| a.conj() * b).sum();
    if rate.norm() < 1e-14 {
        coeff * t
    } else {
        coeff * ((rate * t).exp() - 1.0) / rate
    }
}
