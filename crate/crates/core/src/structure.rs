//! Block-matrix calculus on `k̂ ⊗ C^n` with `k̂ = C ⊕ C^d`.
//!
//! Block matrices are `(1+d)n × (1+d)n` in colour-major order: local index
//! `α·n + p`, with `α = 0` the vacuum (time) sector. A flow is parametrised
//! by Hudson–Parthasarathy data `(H, L, W)`; its structure map `φ` and the
//! vacuum-adapted form `ψ = φ + Δ(I⊗x)Δ` are stored as their images on the
//! matrix units, so arbitrary linear block maps are representable too.

use crate::error::{QfkError, Result};
use crate::linalg::{kron, ComplexMatrix, HermitianMatrix, UnitaryMatrix, C64, I};

/// `Δ = diag(0, I_{dn})`.
pub fn delta_projection(n: usize, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros((1 + d) * n, (1 + d) * n);
    for i in n..(1 + d) * n {
        m[(i, i)] = C64::new(1.0, 0.0);
    }
    m
}

/// `Δ^⊥ = diag(I_n, 0)`.
pub fn delta_perp(n: usize, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros((1 + d) * n, (1 + d) * n);
    for i in 0..n {
        m[(i, i)] = C64::new(1.0, 0.0);
    }
    m
}

/// `E_ω`: the `(1+d)n × n` embedding of the vacuum sector.
pub fn e_omega(n: usize, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros((1 + d) * n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(1.0, 0.0);
    }
    m
}

/// `ι(x) = I_{1+d} ⊗ x`.
pub fn iota(x: &ComplexMatrix, d: usize) -> ComplexMatrix {
    kron(&ComplexMatrix::identity(1 + d), x)
}

/// `π(x) = W*(I_d ⊗ x)W`.
pub fn pi_apply(w: &UnitaryMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = x.ensure_square()?;
    let dim = w.dim();
    if !dim.is_multiple_of(n) || dim == 0 {
        return Err(QfkError::Dimension(format!("W of size {dim} is not d·n for n = {n}")));
    }
    let amp = kron(&ComplexMatrix::identity(dim / n), x);
    Ok(w.matrix().adjoint() * amp * w.matrix())
}

/// Stacks `d` matrices `n × n` into a `(dn) × n` column.
pub fn stack_column(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n = blocks[0].cols();
    let mut m = ComplexMatrix::zeros(blocks.len() * n, n);
    for (k, b) in blocks.iter().enumerate() {
        m.set_block(k * n, 0, b);
    }
    m
}

/// Hudson–Parthasarathy data: Hamiltonian `H`, couplings `L_1..L_d` and gauge unitary `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPGenerator {
    n: usize,
    d: usize,
    h: HermitianMatrix,
    l: Vec<ComplexMatrix>,
    w: UnitaryMatrix,
}

impl HPGenerator {
    pub const COCYCLE_TOL: f64 = 1e-10;

    pub fn new(h: HermitianMatrix, l: Vec<ComplexMatrix>, w: UnitaryMatrix) -> Result<Self> {
        let n = h.dim();
        let d = l.len();
        if d == 0 {
            return Err(QfkError::Dimension("at least one coupling L_k is required".into()));
        }
        if l.iter().any(|lk| lk.shape() != (n, n)) {
            return Err(QfkError::Dimension(format!("couplings must be {n}x{n}")));
        }
        if w.dim() != d * n {
            return Err(QfkError::Dimension(format!("W must be {0}x{0}, got {1}", d * n, w.dim())));
        }
        let gen = Self { n, d, h, l, w };
        let residual = gen.cocycle_residual();
        if residual > Self::COCYCLE_TOL {
            return Err(QfkError::CocycleCondition(residual));
        }
        Ok(gen)
    }

    /// `H = 0`, `L = 0`, `W = I`.
    pub fn trivial(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            h: HermitianMatrix::zeros(n),
            l: vec![ComplexMatrix::zeros(n, n); d],
            w: UnitaryMatrix::identity(d * n),
        }
    }

    /// Gaussian subordination of `Ad(e^{itH̃})`: `d = 1`, `H = 0`, `W = I`, `L = −iH̃`.
    pub fn gaussian_subordination(htilde: &HermitianMatrix) -> Self {
        let n = htilde.dim();
        Self {
            n,
            d: 1,
            h: HermitianMatrix::zeros(n),
            l: vec![htilde.matrix().scale(-I)],
            w: UnitaryMatrix::identity(n),
        }
    }

    /// Random instance with `‖H‖`, `‖L_k‖` of order one and `W = exp(iK)`, `‖K‖ = gauge_angle`.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, d: usize, gauge_angle: f64) -> Self {
        let h = crate::random::hermitian(rng, n);
        let l = (0..d).map(|_| crate::random::complex_matrix(rng, n, n).scale_real(0.5)).collect();
        let w = if gauge_angle == 0.0 {
            UnitaryMatrix::identity(d * n)
        } else {
            crate::random::unitary(rng, d * n, gauge_angle)
        };
        Self::new(h, l, w).expect("random HP data is consistent")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn hamiltonian(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn couplings(&self) -> &[ComplexMatrix] {
        &self.l
    }

    pub fn gauge(&self) -> &UnitaryMatrix {
        &self.w
    }

    /// `L_blk`, the couplings stacked as a `(dn) × n` column.
    pub fn l_block(&self) -> ComplexMatrix {
        stack_column(&self.l)
    }

    /// `Σ_k L_k* L_k`.
    pub fn l_star_l(&self) -> ComplexMatrix {
        let lb = self.l_block();
        lb.adjoint() * lb
    }

    /// `K = −iH − ½ Σ L_k*L_k`.
    pub fn k(&self) -> ComplexMatrix {
        self.h.matrix().scale(-I) - self.l_star_l().scale_real(0.5)
    }

    /// `r = −W* L_blk`.
    pub fn r_block(&self) -> ComplexMatrix {
        -(self.w.matrix().adjoint() * self.l_block())
    }

    /// `F = [[K, −L*W], [L, W − I]]`.
    pub fn f_matrix(&self) -> ComplexMatrix {
        let (n, d) = (self.n, self.d);
        let lb = self.l_block();
        let mut f = ComplexMatrix::zeros((1 + d) * n, (1 + d) * n);
        f.set_block(0, 0, &self.k());
        f.set_block(0, n, &-(lb.adjoint() * self.w.matrix()));
        f.set_block(n, 0, &lb);
        f.set_block(n, n, &(self.w.matrix() - &ComplexMatrix::identity(d * n)));
        f
    }

    /// `max(‖F + F* + F*ΔF‖, ‖F + F* + FΔF*‖)`.
    pub fn cocycle_residual(&self) -> f64 {
        let f = self.f_matrix();
        let fs = f.adjoint();
        let delta = delta_projection(self.n, self.d);
        let iso = &f + &fs + &fs * &delta * &f;
        let coiso = &f + &fs + &f * &delta * &fs;
        iso.max_abs().max(coiso.max_abs())
    }

    pub fn pi(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        pi_apply(&self.w, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adaptedness {
    /// Identity-adapted structure map `φ`.
    Identity,
    /// Vacuum-adapted structure map `ψ`.
    Vacuum,
}

/// A linear block map `x ↦ (1+d)n × (1+d)n`, tagged as `φ` or `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureBlocks {
    n: usize,
    d: usize,
    form: Adaptedness,
    /// Image of the matrix unit `E_pq` at index `p·n + q`.
    images: Vec<ComplexMatrix>,
}

impl StructureBlocks {
    pub fn from_map(n: usize, d: usize, form: Adaptedness, mut f: impl FnMut(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let images = (0..n * n)
            .map(|idx| {
                let img = f(&ComplexMatrix::unit(n, idx / n, idx % n));
                assert_eq!(img.shape(), ((1 + d) * n, (1 + d) * n), "block map image shape");
                img
            })
            .collect();
        Self { n, d, form, images }
    }

    /// The zero block map in the given form.
    pub fn zero(n: usize, d: usize, form: Adaptedness) -> Self {
        Self::from_map(n, d, form, |_| ComplexMatrix::zeros((1 + d) * n, (1 + d) * n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn form(&self) -> Adaptedness {
        self.form
    }

    /// Evaluates the stored map (`φ` or `ψ`, depending on [`Self::form`]).
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.shape(), (self.n, self.n), "argument shape");
        let m = (1 + self.d) * self.n;
        let mut out = ComplexMatrix::zeros(m, m);
        for (idx, img) in self.images.iter().enumerate() {
            let coef = x[(idx / self.n, idx % self.n)];
            if coef != C64::new(0.0, 0.0) {
                out = out + img.scale(coef);
            }
        }
        out
    }

    /// `ψ(x) − φ(x) = diag(0, I_d ⊗ x)`.
    fn vacuum_shift(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let delta = delta_projection(self.n, self.d);
        &delta * iota(x, self.d) * &delta
    }

    pub fn phi(&self, x: &ComplexMatrix) -> ComplexMatrix {
        match self.form {
            Adaptedness::Identity => self.apply(x),
            Adaptedness::Vacuum => self.apply(x) - self.vacuum_shift(x),
        }
    }

    pub fn psi(&self, x: &ComplexMatrix) -> ComplexMatrix {
        match self.form {
            Adaptedness::Identity => self.apply(x) + self.vacuum_shift(x),
            Adaptedness::Vacuum => self.apply(x),
        }
    }

    /// `τ0(x)`, the vacuum-vacuum block.
    pub fn tau0(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.psi(x).block(0, 0, self.n, self.n)
    }

    /// `δ0(x)`, the `(dn) × n` creation column.
    pub fn delta0(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.psi(x).block(self.n, 0, self.d * self.n, self.n)
    }

    /// `δ0†(x)`, the `n × (dn)` annihilation row.
    pub fn delta0_dagger(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.psi(x).block(0, self.n, self.n, self.d * self.n)
    }

    /// `π0(x)`, the gauge block of `ψ`.
    pub fn pi0(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.psi(x).block(self.n, self.n, self.d * self.n, self.d * self.n)
    }

    /// `‖φ(xy) − φ(x)ι(y) − ι(x)φ(y) − φ(x)Δφ(y)‖_max`.
    pub fn multiplicativity_residual(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
        let delta = delta_projection(self.n, self.d);
        let (px, py) = (self.phi(x), self.phi(y));
        let lhs = self.phi(&(x * y));
        let rhs = &px * iota(y, self.d) + iota(x, self.d) * &py + &px * &delta * &py;
        (lhs - rhs).max_abs()
    }
}

/// `φ(x) = F*ι(x) + ι(x)F + F*Δι(x)ΔF`.
pub fn phi_from_hp(gen: &HPGenerator) -> StructureBlocks {
    let (n, d) = (gen.n, gen.d);
    let f = gen.f_matrix();
    let fs = f.adjoint();
    let delta = delta_projection(n, d);
    StructureBlocks::from_map(n, d, Adaptedness::Identity, |x| {
        let ix = iota(x, d);
        &fs * &ix + &ix * &f + &fs * &delta * &ix * &delta * &f
    })
}

/// Re-expresses the block map in vacuum-adapted form `ψ`.
pub fn psi_from_phi(blocks: &StructureBlocks) -> StructureBlocks {
    match blocks.form {
        Adaptedness::Vacuum => blocks.clone(),
        Adaptedness::Identity => StructureBlocks::from_map(blocks.n, blocks.d, Adaptedness::Vacuum, |x| blocks.psi(x)),
    }
}

/// The column `c = (c0; c1; …; cd)` with entries in `M_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierCoeff {
    c0: ComplexMatrix,
    ck: Vec<ComplexMatrix>,
}

impl MultiplierCoeff {
    pub fn new(c0: ComplexMatrix, ck: Vec<ComplexMatrix>) -> Result<Self> {
        let n = c0.ensure_square()?;
        if ck.is_empty() {
            return Err(QfkError::Dimension("coefficient needs at least one noise component".into()));
        }
        if ck.iter().any(|c| c.shape() != (n, n)) {
            return Err(QfkError::Dimension(format!("noise components must be {n}x{n}")));
        }
        Ok(Self { c0, ck })
    }

    pub fn zero(n: usize, d: usize) -> Self {
        Self { c0: ComplexMatrix::zeros(n, n), ck: vec![ComplexMatrix::zeros(n, n); d] }
    }

    /// `(c0; 0; …; 0)`.
    pub fn drift(c0: ComplexMatrix, d: usize) -> Result<Self> {
        let n = c0.ensure_square()?;
        Self::new(c0, vec![ComplexMatrix::zeros(n, n); d])
    }

    /// `(0; b_1; …; b_d)`.
    pub fn creation(b: Vec<ComplexMatrix>) -> Result<Self> {
        let n = b.first().map_or(0, |m| m.rows());
        Self::new(ComplexMatrix::zeros(n, n), b)
    }

    /// Splits a `(1+d)n × n` column.
    pub fn from_column(col: &ComplexMatrix, n: usize) -> Result<Self> {
        if n == 0 || col.cols() != n || !col.rows().is_multiple_of(n) || col.rows() < 2 * n {
            return Err(QfkError::Dimension("column is not (1+d)n x n".into()));
        }
        let d = col.rows() / n - 1;
        let c0 = col.block(0, 0, n, n);
        let ck = (1..=d).map(|k| col.block(k * n, 0, n, n)).collect();
        Self::new(c0, ck)
    }

    pub fn n(&self) -> usize {
        self.c0.rows()
    }

    pub fn d(&self) -> usize {
        self.ck.len()
    }

    pub fn c0(&self) -> &ComplexMatrix {
        &self.c0
    }

    pub fn ck(&self) -> &[ComplexMatrix] {
        &self.ck
    }

    pub fn column(&self) -> ComplexMatrix {
        let n = self.n();
        let mut m = ComplexMatrix::zeros((1 + self.d()) * n, n);
        m.set_block(0, 0, &self.c0);
        for (k, c) in self.ck.iter().enumerate() {
            m.set_block((k + 1) * n, 0, c);
        }
        m
    }

    /// The stacked noise part `(c1; …; cd)`.
    pub fn noise_column(&self) -> ComplexMatrix {
        stack_column(&self.ck)
    }

    /// `‖c0‖`.
    pub fn drift_norm(&self) -> f64 {
        self.c0.spectral_norm()
    }

    /// `(Σ_k ‖c_k‖²)^{1/2}`.
    pub fn noise_norm(&self) -> f64 {
        self.ck.iter().map(|c| c.spectral_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.c0.max_abs() == 0.0 && self.ck.iter().all(|c| c.max_abs() == 0.0)
    }
}

fn check_dims(blocks: &StructureBlocks, c: &MultiplierCoeff, d: &MultiplierCoeff, x: &ComplexMatrix) -> Result<()> {
    let (n, dd) = (blocks.n, blocks.d);
    if c.n() != n || d.n() != n || c.d() != dd || d.d() != dd || x.shape() != (n, n) {
        return Err(QfkError::Dimension(format!("generator inputs must share n = {n}, d = {dd}")));
    }
    Ok(())
}

/// `τ(x) = E^ωψ(x)E_ω + c*Δψ(x)E_ω + E^ωψ(x)Δd + c*Δψ(x)Δd + c*E_ω x + x E^ω d`.
pub fn tau_gen(
    blocks: &StructureBlocks,
    c: &MultiplierCoeff,
    d: &MultiplierCoeff,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_dims(blocks, c, d, x)?;
    let (n, dd) = (blocks.n, blocks.d);
    let psi = blocks.psi(x);
    let delta = delta_projection(n, dd);
    let e = e_omega(n, dd);
    let es = e.adjoint();
    let cs = c.column().adjoint();
    let dc = d.column();
    let dpsi = &delta * &psi;
    let psid = &psi * &delta;
    Ok(&es * &psi * &e
        + &cs * &dpsi * &e
        + &es * &psid * &dc
        + &cs * &dpsi * &delta * &dc
        + &cs * &e * x
        + x * &es * &dc)
}

/// The component form `τ0 + Σ_k c_k*δ0_k + δ0†·l_d + l_c*π0·l_d + c0*x + x·d0`.
pub fn tau_block(
    blocks: &StructureBlocks,
    c: &MultiplierCoeff,
    d: &MultiplierCoeff,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_dims(blocks, c, d, x)?;
    let n = blocks.n;
    let lc = c.noise_column();
    let ld = d.noise_column();
    let delta0 = blocks.delta0(x);
    let mut out = blocks.tau0(x);
    for (k, ck) in c.ck().iter().enumerate() {
        out = out + ck.adjoint() * delta0.block(k * n, 0, n, n);
    }
    out = out + blocks.delta0_dagger(x) * &ld;
    out = out + lc.adjoint() * blocks.pi0(x) * &ld;
    out = out + c.c0().adjoint() * x + x * d.c0();
    Ok(out)
}

/// `(−ih − ½Σ l_k*l_k; l_1; …; l_d)`.
pub fn unitary_conj_coeff(h: &HermitianMatrix, l: &[ComplexMatrix]) -> Result<MultiplierCoeff> {
    let n = h.dim();
    if l.is_empty() || l.iter().any(|lk| lk.shape() != (n, n)) {
        return Err(QfkError::Dimension(format!("need at least one {n}x{n} coupling")));
    }
    let lsl = l.iter().fold(ComplexMatrix::zeros(n, n), |acc, lk| acc + lk.adjoint() * lk);
    let c0 = h.matrix().scale(-I) - lsl.scale_real(0.5);
    MultiplierCoeff::new(c0, l.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{anticommutator, commutator, pauli};
    use crate::random::{complex_matrix, hermitian, rng_from_seed};
    use proptest::prelude::*;

    fn herm(m: ComplexMatrix) -> HermitianMatrix {
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn pi_examples() {
        let mut rng = rng_from_seed(1);
        let x = complex_matrix(&mut rng, 2, 2);
        let id2 = UnitaryMatrix::identity(2);
        assert!((pi_apply(&id2, &x).unwrap() - x.clone()).max_abs() < 1e-15);
        let w = crate::random::unitary(&mut rng, 4, 1.3);
        assert!((pi_apply(&w, &ComplexMatrix::identity(2)).unwrap() - ComplexMatrix::identity(4)).max_abs() < 1e-12);
        let sx = UnitaryMatrix::new(pauli::x()).unwrap();
        assert!((pi_apply(&sx, &pauli::z()).unwrap() + pauli::z()).max_abs() < 1e-15);
        let y = complex_matrix(&mut rng, 2, 2);
        let lhs = pi_apply(&w, &(&x * &y)).unwrap();
        let rhs = pi_apply(&w, &x).unwrap() * pi_apply(&w, &y).unwrap();
        assert!((lhs - rhs).max_abs() < 1e-12);
        assert!(pi_apply(&id2, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn trivial_flow_has_zero_phi() {
        let blocks = phi_from_hp(&HPGenerator::trivial(2, 2));
        let mut rng = rng_from_seed(2);
        let x = complex_matrix(&mut rng, 2, 2);
        assert_eq!(blocks.phi(&x).max_abs(), 0.0);
        let psi = psi_from_phi(&blocks);
        let want = &delta_projection(2, 2) * iota(&x, 2) * &delta_projection(2, 2);
        assert!((psi.psi(&x) - want).max_abs() < 1e-15);
    }

    #[test]
    fn phi_hand_evaluated_example() {
        // L = iσ_z: block (1,1) of φ(σ_x) is −σ_x + σ_zσ_xσ_z = −2σ_x.
        let gen =
            HPGenerator::new(HermitianMatrix::zeros(2), vec![pauli::z().scale(I)], UnitaryMatrix::identity(2)).unwrap();
        let phi = phi_from_hp(&gen).phi(&pauli::x());
        assert!((phi.block(0, 0, 2, 2) + pauli::x().scale_real(2.0)).max_abs() < 1e-14);
    }

    #[test]
    fn cocycle_condition_rejected() {
        let err =
            HPGenerator::new(HermitianMatrix::zeros(2), vec![ComplexMatrix::zeros(2, 2)], UnitaryMatrix::identity(2));
        assert!(err.is_ok());
        assert!(HPGenerator::new(HermitianMatrix::zeros(2), vec![], UnitaryMatrix::identity(2)).is_err());
        assert!(HPGenerator::new(
            HermitianMatrix::zeros(2),
            vec![ComplexMatrix::zeros(2, 2)],
            UnitaryMatrix::identity(4)
        )
        .is_err());
    }

    #[test]
    fn block_identification_on_random_generators() {
        let mut rng = rng_from_seed(3);
        for _ in 0..30 {
            let gen = HPGenerator::random(&mut rng, 2, 2, 1.0);
            let (n, d) = (2, 2);
            let phi = phi_from_hp(&gen);
            let x = complex_matrix(&mut rng, n, n);
            let px = phi.phi(&x);
            let r = gen.r_block();
            let pi = gen.pi(&x).unwrap();
            let h = gen.hamiltonian().matrix();
            let lb = gen.l_block();
            let lsl = gen.l_star_l();
            let b11 = commutator(h, &x).scale(I) - anticommutator(&lsl, &x).scale_real(0.5)
                + lb.adjoint() * kron(&ComplexMatrix::identity(d), &x) * &lb;
            assert!((px.block(0, 0, n, n) - b11).max_abs() < 1e-12);
            assert!((px.block(n, 0, d * n, n) - (&r * &x - &pi * &r)).max_abs() < 1e-12);
            assert!((px.block(0, n, n, d * n) - (&x * r.adjoint() - r.adjoint() * &pi)).max_abs() < 1e-12);
            assert!((px.block(n, n, d * n, d * n) - (&pi - &kron(&ComplexMatrix::identity(d), &x))).max_abs() < 1e-12);
            assert!(gen.cocycle_residual() < 1e-12);
        }
    }

    #[test]
    fn psi_examples() {
        let mut rng = rng_from_seed(4);
        let gen = HPGenerator::random(&mut rng, 2, 1, 0.8);
        let phi = phi_from_hp(&gen);
        let psi = psi_from_phi(&phi);
        let e = e_omega(2, 1);
        for _ in 0..10 {
            let x = complex_matrix(&mut rng, 2, 2);
            let diff = psi.psi(&x) - phi.phi(&x);
            let want = &delta_projection(2, 1) * iota(&x, 1) * &delta_projection(2, 1);
            assert!((diff - want).max_abs() < 1e-14);
            let t_psi = e.adjoint() * psi.psi(&x) * &e;
            let t_phi = e.adjoint() * phi.phi(&x) * &e;
            assert!((t_psi - t_phi).max_abs() < 1e-14);
            assert!((psi.pi0(&x) - gen.pi(&x).unwrap()).max_abs() < 1e-12);
            assert_eq!(psi.phi(&x).max_abs(), phi.phi(&x).max_abs());
        }
    }

    #[test]
    fn tau_gen_special_cases() {
        let mut rng = rng_from_seed(5);
        let gen = HPGenerator::random(&mut rng, 2, 1, 0.5);
        let psi = psi_from_phi(&phi_from_hp(&gen));
        let x = complex_matrix(&mut rng, 2, 2);
        let zero = MultiplierCoeff::zero(2, 1);
        let t = tau_gen(&psi, &zero, &zero, &x).unwrap();
        assert!((t - psi.tau0(&x)).max_abs() < 1e-14);

        let c0 = complex_matrix(&mut rng, 2, 2);
        let drift = MultiplierCoeff::drift(c0.clone(), 1).unwrap();
        let null = StructureBlocks::zero(2, 1, Adaptedness::Vacuum);
        let t = tau_gen(&null, &drift, &drift, &x).unwrap();
        assert!((t - (c0.adjoint() * &x + &x * &c0)).max_abs() < 1e-14);

        let hp = hermitian(&mut rng, 2);
        let l = vec![complex_matrix(&mut rng, 2, 2)];
        let c = unitary_conj_coeff(&hp, &l).unwrap();
        let t = tau_gen(&psi, &c, &c, &ComplexMatrix::identity(2)).unwrap();
        assert!(t.max_abs() < 1e-12);

        let bad = MultiplierCoeff::zero(2, 2);
        assert!(tau_gen(&psi, &bad, &zero, &x).is_err());
    }

    #[test]
    fn unitary_conj_examples() {
        let c = unitary_conj_coeff(&HermitianMatrix::zeros(2), &[ComplexMatrix::zeros(2, 2)]).unwrap();
        assert!(c.is_zero());
        let h = herm(pauli::z());
        let c = unitary_conj_coeff(&h, &[pauli::x()]).unwrap();
        let want = pauli::z().scale(-I) - ComplexMatrix::identity(2).scale_real(0.5);
        assert!((c.c0() - &want).max_abs() < 1e-15);
        assert!(unitary_conj_coeff(&h, &[]).is_err());
    }

    #[test]
    fn coefficient_column_round_trip() {
        let mut rng = rng_from_seed(6);
        let c = MultiplierCoeff::new(complex_matrix(&mut rng, 3, 3), vec![complex_matrix(&mut rng, 3, 3); 2]).unwrap();
        let back = MultiplierCoeff::from_column(&c.column(), 3).unwrap();
        assert_eq!(back, c);
        assert!(MultiplierCoeff::new(ComplexMatrix::zeros(2, 2), vec![ComplexMatrix::zeros(3, 3)]).is_err());
        assert!(MultiplierCoeff::from_column(&ComplexMatrix::zeros(2, 2), 2).is_err());
    }

    fn instance(seed: u64, d: usize) -> (StructureBlocks, MultiplierCoeff, MultiplierCoeff, ComplexMatrix) {
        let mut rng = rng_from_seed(seed);
        let gen = HPGenerator::random(&mut rng, 2, d, 0.9);
        let psi = psi_from_phi(&phi_from_hp(&gen));
        let mk = |rng: &mut crate::random::QfkRng| {
            MultiplierCoeff::new(complex_matrix(rng, 2, 2), (0..d).map(|_| complex_matrix(rng, 2, 2)).collect())
                .unwrap()
        };
        let c = mk(&mut rng);
        let dd = mk(&mut rng);
        let x = complex_matrix(&mut rng, 2, 2);
        (psi, c, dd, x)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hp_data_satisfies_cocycle_condition(seed in any::<u64>(), d in 1usize..3, angle in 0.0f64..3.0) {
            let mut rng = rng_from_seed(seed);
            let gen = HPGenerator::random(&mut rng, 2, d, angle);
            prop_assert!(gen.cocycle_residual() <= 1e-10);
        }

        #[test]
        fn phi_is_multiplicative_and_star_preserving(seed in any::<u64>(), d in 1usize..3) {
            let mut rng = rng_from_seed(seed);
            let gen = HPGenerator::random(&mut rng, 2, d, 1.1);
            let phi = phi_from_hp(&gen);
            let x = complex_matrix(&mut rng, 2, 2);
            let y = complex_matrix(&mut rng, 2, 2);
            prop_assert!(phi.multiplicativity_residual(&x, &y) <= 1e-10);
            prop_assert!((phi.phi(&x).adjoint() - phi.phi(&x.adjoint())).max_abs() <= 1e-12);
            prop_assert!(phi.phi(&ComplexMatrix::identity(2)).max_abs() <= 1e-12);
        }

        #[test]
        fn tau_gen_equals_tau_block(seed in any::<u64>(), d in 1usize..3) {
            let (psi, c, dd, x) = instance(seed, d);
            let a = tau_gen(&psi, &c, &dd, &x).unwrap();
            let b = tau_block(&psi, &c, &dd, &x).unwrap();
            prop_assert!((a - b).max_abs() <= 1e-12);
        }

        #[test]
        fn tau_gen_hermiticity(seed in any::<u64>(), d in 1usize..3) {
            let (psi, c, dd, x) = instance(seed, d);
            let lhs = tau_gen(&psi, &c, &dd, &x).unwrap().adjoint();
            let rhs = tau_gen(&psi, &dd, &c, &x.adjoint()).unwrap();
            prop_assert!((lhs - rhs).max_abs() <= 1e-12);
        }
    }
}
