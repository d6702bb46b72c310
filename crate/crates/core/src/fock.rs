//! Repeated-interaction model of Boson Fock space.
//!
//! The noise is a chain of `N` slices, each a `(1+d)`-level system whose
//! letter `0` is the vacuum and letter `k ≥ 1` a single particle of colour
//! `k`. A [`StateVector`] lives on `C^n ⊗ (C^{1+d})^{⊗N}`; its flat index is
//! `p·(1+d)^N + Σ_i w_i·(1+d)^i`, so the initial-space index is slowest and
//! slice 0 fastest.
//!
//! Scalings follow the Itô table: creation and annihilation carry `√h`,
//! time carries `h`, gauge carries 1.

use crate::error::{QfkError, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

/// Largest lattice (in complex amplitudes) the crate will allocate.
pub const AMPLITUDE_BUDGET: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    /// Initial-space dimension.
    pub n: usize,
    /// Multiplicity (number of noise colours).
    pub d: usize,
    /// Number of time slices.
    pub slices: usize,
    /// Time step.
    pub h: f64,
}

impl LatticeParams {
    pub fn new(n: usize, d: usize, slices: usize, h: f64) -> Result<Self> {
        if n == 0 {
            return Err(QfkError::Lattice("initial dimension n must be positive".into()));
        }
        if d == 0 {
            return Err(QfkError::Lattice("multiplicity d must be positive".into()));
        }
        if slices == 0 {
            return Err(QfkError::Lattice("slice count N must be positive".into()));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(QfkError::Lattice(format!("time step h must be positive and finite, got {h}")));
        }
        let amplitudes = (n as u128).saturating_mul(((1 + d) as u128).saturating_pow(slices as u32));
        if amplitudes > AMPLITUDE_BUDGET as u128 {
            return Err(QfkError::MemoryBudget { amplitudes, budget: AMPLITUDE_BUDGET });
        }
        Ok(Self { n, d, slices, h })
    }

    /// Lattice covering `[0, horizon)` with step `h`; the horizon must be a whole number of steps.
    pub fn with_horizon(n: usize, d: usize, horizon: f64, h: f64) -> Result<Self> {
        let slices = steps_for(horizon, h)?;
        Self::new(n, d, slices, h)
    }

    /// Same step and dimensions, different slice count.
    pub fn with_slices(&self, slices: usize) -> Result<Self> {
        Self::new(self.n, self.d, slices, self.h)
    }

    pub fn local_dim(&self) -> usize {
        1 + self.d
    }

    pub fn noise_dim(&self) -> usize {
        self.stride(self.slices)
    }

    pub fn dimension(&self) -> usize {
        self.n * self.noise_dim()
    }

    /// `(1+d)^i`, the index stride of slice `i`.
    pub fn stride(&self, i: usize) -> usize {
        self.local_dim().pow(i as u32)
    }

    pub fn horizon(&self) -> f64 {
        self.slices as f64 * self.h
    }

    pub fn time(&self, slice: usize) -> f64 {
        slice as f64 * self.h
    }

    pub fn check_slice(&self, i: usize) -> Result<()> {
        if i < self.slices {
            Ok(())
        } else {
            Err(QfkError::SliceRange { index: i, slices: self.slices })
        }
    }

    pub fn check_time(&self, t_idx: usize) -> Result<()> {
        if t_idx <= self.slices {
            Ok(())
        } else {
            Err(QfkError::SliceRange { index: t_idx, slices: self.slices })
        }
    }

    fn check_color(&self, k: usize) -> Result<()> {
        if (1..=self.d).contains(&k) {
            Ok(())
        } else {
            Err(QfkError::Invalid(format!("colour {k} outside 1..={}", self.d)))
        }
    }
}

/// Number of steps of size `h` in `t`, rejecting non-integral ratios.
pub fn steps_for(t: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && t >= 0.0 && t.is_finite()) {
        return Err(QfkError::Misaligned { time: t, step: h });
    }
    let ratio = t / h;
    let steps = ratio.round();
    if (steps * h - t).abs() > 1e-12 * t.max(1.0) {
        return Err(QfkError::Misaligned { time: t, step: h });
    }
    Ok(steps as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceOperatorKind {
    Create(usize),
    Annihilate(usize),
    /// `Gauge(to, from)` maps letter `from` to letter `to`.
    Gauge(usize, usize),
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    params: LatticeParams,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zeros(params: LatticeParams) -> Self {
        Self { params, amps: vec![ZERO; params.dimension()] }
    }

    pub fn from_amplitudes(params: LatticeParams, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != params.dimension() {
            return Err(QfkError::Dimension(format!(
                "{} amplitudes for a lattice of dimension {}",
                amps.len(),
                params.dimension()
            )));
        }
        Ok(Self { params, amps })
    }

    /// `u ⊗ noise`.
    pub fn product(params: LatticeParams, u: &[C64], noise: &[C64]) -> Result<Self> {
        if u.len() != params.n || noise.len() != params.noise_dim() {
            return Err(QfkError::Dimension("product factors do not match the lattice".into()));
        }
        let mut amps = Vec::with_capacity(params.dimension());
        for &up in u {
            amps.extend(noise.iter().map(|&z| up * z));
        }
        Ok(Self { params, amps })
    }

    pub fn params(&self) -> LatticeParams {
        self.params
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    /// Splits a flat index into (initial index, noise index).
    pub fn split_index(&self, idx: usize) -> (usize, usize) {
        let r = self.params.noise_dim();
        (idx / r, idx % r)
    }

    /// Letter of slice `i` in the noise word with index `r`.
    pub fn letter(&self, r: usize, i: usize) -> usize {
        (r / self.params.stride(i)) % self.params.local_dim()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.params, other.params);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn axpy(&mut self, alpha: C64, x: &Self) {
        debug_assert_eq!(self.params, x.params);
        for (a, b) in self.amps.iter_mut().zip(&x.amps) {
            *a += alpha * b;
        }
    }

    pub fn add_assign(&mut self, x: &Self) {
        self.axpy(C64::new(1.0, 0.0), x);
    }

    pub fn scale_mut(&mut self, s: C64) {
        for a in &mut self.amps {
            *a *= s;
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.scale_mut(s);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        out
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// True when every amplitude with a particle in some slice `>= from` is exactly zero.
    pub fn is_vacuum_from(&self, from: usize) -> bool {
        let cut = self.params.stride(from.min(self.params.slices));
        let r = self.params.noise_dim();
        self.amps.iter().enumerate().all(|(idx, z)| idx % r < cut || *z == ZERO)
    }

    /// Norm of the part with a particle in some slice `>= from`.
    pub fn future_norm(&self, from: usize) -> f64 {
        let cut = self.params.stride(from.min(self.params.slices));
        let r = self.params.noise_dim();
        self.amps.iter().enumerate().filter(|(idx, _)| idx % r >= cut).map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(a ⊗ I) v` for an operator on the initial space.
    pub fn apply_initial(&self, a: &ComplexMatrix) -> Self {
        let n = self.params.n;
        assert_eq!(a.shape(), (n, n), "initial-space operator shape");
        let r = self.params.noise_dim();
        let mut out = vec![ZERO; self.amps.len()];
        for p in 0..n {
            let dst = &mut out[p * r..(p + 1) * r];
            for q in 0..n {
                let coef = a[(p, q)];
                if coef == ZERO {
                    continue;
                }
                let src = &self.amps[q * r..(q + 1) * r];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += coef * s;
                }
            }
        }
        Self { params: self.params, amps: out }
    }

    /// Applies an operator on `C^{1+d} ⊗ C^n` (colour-major block layout,
    /// local index `α·n + p`) to the initial space and slice `i`.
    pub fn apply_local(&self, op: &ComplexMatrix, i: usize) -> Self {
        let mut out = self.clone();
        out.apply_local_mut(op, i);
        out
    }

    /// In-place form of [`Self::apply_local`].
    pub fn apply_local_mut(&mut self, op: &ComplexMatrix, i: usize) {
        let p = self.params;
        let (n, ld) = (p.n, p.local_dim());
        assert_eq!(op.shape(), (n * ld, n * ld), "local operator shape");
        assert!(i < p.slices, "slice out of range");
        let r = p.noise_dim();
        let s = p.stride(i);
        let block = s * ld;
        let m = n * ld;
        let mut x = vec![ZERO; m];
        let ops = op.as_slice();
        for hi in (0..r).step_by(block) {
            for lo in 0..s {
                let r0 = hi + lo;
                for a in 0..ld {
                    for q in 0..n {
                        x[a * n + q] = self.amps[q * r + r0 + a * s];
                    }
                }
                for a in 0..ld {
                    for q in 0..n {
                        let row = &ops[(a * n + q) * m..(a * n + q + 1) * m];
                        self.amps[q * r + r0 + a * s] = row.iter().zip(&x).map(|(u, v)| u * v).sum();
                    }
                }
            }
        }
    }

    /// Embeds into a lattice with more slices (same `n`, `d`, `h`), vacuum in the new slices.
    pub fn embed(&self, params: LatticeParams) -> Result<Self> {
        let p = self.params;
        if params.n != p.n || params.d != p.d || params.h != p.h || params.slices < p.slices {
            return Err(QfkError::Dimension("embedding target must extend the lattice".into()));
        }
        if params == p {
            return Ok(self.clone());
        }
        let (r_small, r_big) = (p.noise_dim(), params.noise_dim());
        let mut amps = vec![ZERO; params.dimension()];
        for q in 0..p.n {
            amps[q * r_big..q * r_big + r_small].copy_from_slice(&self.amps[q * r_small..(q + 1) * r_small]);
        }
        Ok(Self { params, amps })
    }

    /// Moves letter `from` to letter `to` in slice `i` with weight `factor`; all
    /// components whose slice-`i` letter is not `from` are annihilated.
    pub fn transition(&self, i: usize, from: usize, to: usize, factor: C64) -> Self {
        let p = self.params;
        let r = p.noise_dim();
        let s = p.stride(i);
        let ld = p.local_dim();
        let mut out = vec![ZERO; self.amps.len()];
        for q in 0..p.n {
            let base = q * r;
            for hi in (0..r).step_by(s * ld) {
                for lo in 0..s {
                    let src = base + hi + lo + from * s;
                    let dst = base + hi + lo + to * s;
                    out[dst] = factor * self.amps[src];
                }
            }
        }
        Self { params: self.params, amps: out }
    }
}

/// `u ⊗ Ω`.
pub fn vacuum_vector(params: LatticeParams, u: &[C64]) -> Result<StateVector> {
    if u.len() != params.n {
        return Err(QfkError::Dimension(format!("initial vector has length {}, want {}", u.len(), params.n)));
    }
    let mut v = StateVector::zeros(params);
    let r = params.noise_dim();
    for (q, &z) in u.iter().enumerate() {
        v.amps[q * r] = z;
    }
    Ok(v)
}

/// `P_i`: keeps only components that are vacuum in every slice `>= i`.
pub fn vacuum_projection(i: usize, v: &StateVector) -> Result<StateVector> {
    v.params.check_time(i)?;
    let cut = v.params.stride(i);
    let r = v.params.noise_dim();
    let mut out = v.clone();
    for (idx, z) in out.amps.iter_mut().enumerate() {
        if idx % r >= cut {
            *z = ZERO;
        }
    }
    Ok(out)
}

pub fn apply_slice(kind: SliceOperatorKind, i: usize, v: &StateVector) -> Result<StateVector> {
    let p = v.params;
    p.check_slice(i)?;
    let sqrt_h = C64::new(p.h.sqrt(), 0.0);
    Ok(match kind {
        SliceOperatorKind::Create(k) => {
            p.check_color(k)?;
            v.transition(i, 0, k, sqrt_h)
        }
        SliceOperatorKind::Annihilate(k) => {
            p.check_color(k)?;
            v.transition(i, k, 0, sqrt_h)
        }
        SliceOperatorKind::Gauge(to, from) => {
            p.check_color(to)?;
            p.check_color(from)?;
            v.transition(i, from, to, C64::new(1.0, 0.0))
        }
        SliceOperatorKind::Time => v.scaled(C64::new(p.h, 0.0)),
    })
}

/// Noise factor `⊗_i (1, √h·f_i)` of a step function taking the value
/// `values[i] ∈ C^d` on slice `i`.
pub fn discrete_exponential(params: LatticeParams, values: &[Vec<C64>]) -> Result<Vec<C64>> {
    if values.len() != params.slices || values.iter().any(|f| f.len() != params.d) {
        return Err(QfkError::Dimension("step function must give one C^d value per slice".into()));
    }
    let sqrt_h = params.h.sqrt();
    let mut noise = vec![C64::new(1.0, 0.0)];
    for f in values {
        let mut slice = Vec::with_capacity(params.local_dim());
        slice.push(C64::new(1.0, 0.0));
        slice.extend(f.iter().map(|z| z * sqrt_h));
        // New slice index is the slower one.
        let mut next = Vec::with_capacity(noise.len() * slice.len());
        for s in &slice {
            next.extend(noise.iter().map(|z| z * s));
        }
        noise = next;
    }
    Ok(noise)
}

/// Second quantised right shift by `s` slices.
pub fn shift_slices(s: usize, v: &StateVector) -> Result<StateVector> {
    let p = v.params;
    if s > p.slices {
        return Err(QfkError::SliceRange { index: s, slices: p.slices });
    }
    let keep = p.slices - s;
    if !v.is_vacuum_from(keep) {
        return Err(QfkError::NonVacuumFuture { from: keep });
    }
    let r = p.noise_dim();
    let factor = p.stride(s);
    let limit = p.stride(keep);
    let mut out = StateVector::zeros(p);
    for q in 0..p.n {
        for w in 0..limit {
            out.amps[q * r + w * factor] = v.amps[q * r + w];
        }
    }
    Ok(out)
}

/// `⟨u, P_i A(P_i w)⟩`.
pub fn conditional_expectation(
    i: usize,
    u: &StateVector,
    w: &StateVector,
    a: impl FnOnce(&StateVector) -> Result<StateVector>,
) -> Result<C64> {
    let pw = vacuum_projection(i, w)?;
    let apw = a(&pw)?;
    let papw = vacuum_projection(i, &apw)?;
    Ok(u.inner(&papw))
}
