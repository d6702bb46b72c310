//! Closed-form references for the commutative examples: Gaussian
//! subordination of `α_s = Ad(e^{isH̃})`, and the generators obtained by
//! perturbing it with `ρ_b δ` or with the symmetric pair built from `b`.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{QfkError, Result};
use crate::linalg::{
    anticommutator, commutator, hermitian_eigen, ComplexMatrix, HermitianMatrix, UnitaryMatrix, C64, I,
};
use crate::structure::StructureBlocks;

/// The inner automorphism group `α_s(x) = e^{isH̃} x e^{−isH̃}`.
#[derive(Debug, Clone)]
pub struct AutomorphismGroup {
    htilde: HermitianMatrix,
    eigenvalues: Vec<f64>,
    eigenbasis: UnitaryMatrix,
}

impl AutomorphismGroup {
    pub fn new(htilde: HermitianMatrix) -> Self {
        let (eigenvalues, vecs) = hermitian_eigen(htilde.matrix());
        let eigenbasis = UnitaryMatrix::new(vecs).expect("Jacobi eigenvectors are orthonormal");
        Self { htilde, eigenvalues, eigenbasis }
    }

    pub fn htilde(&self) -> &HermitianMatrix {
        &self.htilde
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &UnitaryMatrix {
        &self.eigenbasis
    }

    /// `x` in the eigenbasis of `H̃`.
    fn to_eigen(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let v = self.eigenbasis.matrix();
        v.adjoint() * x * v
    }

    fn out_of_eigen(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let v = self.eigenbasis.matrix();
        v * x * v.adjoint()
    }

    /// `α_s(x)`, computed in the eigenbasis.
    pub fn alpha(&self, s: f64, x: &ComplexMatrix) -> ComplexMatrix {
        let xe = self.to_eigen(x);
        let lam = &self.eigenvalues;
        let rotated = ComplexMatrix::from_fn(xe.rows(), xe.cols(), |j, k| {
            xe[(j, k)] * C64::from_polar(1.0, s * (lam[j] - lam[k]))
        });
        self.out_of_eigen(&rotated)
    }

    /// `max ‖α_s(x) − exp(isH̃) x exp(−isH̃)‖` against the matrix exponential.
    pub fn reconstruction_residual(&self, s: f64, x: &ComplexMatrix) -> Result<f64> {
        let u = crate::linalg::matrix_exp(&self.htilde.matrix().scale(I * s))?;
        Ok((self.alpha(s, x) - &u * x * u.adjoint()).max_abs())
    }
}

/// `δ(x) = i[H̃, x]`.
pub fn delta_apply(ag: &AutomorphismGroup, x: &ComplexMatrix) -> ComplexMatrix {
    commutator(ag.htilde.matrix(), x).scale(I)
}

/// Entry `(j, k)` in the eigenbasis is damped by `e^{−(λ_j − λ_k)² t/2}`.
pub fn gaussian_semigroup(ag: &AutomorphismGroup, t: f64, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(QfkError::Invalid(format!("time must be nonnegative, got {t}")));
    }
    let ae = ag.to_eigen(a);
    let lam = &ag.eigenvalues;
    let damped = ComplexMatrix::from_fn(ae.rows(), ae.cols(), |j, k| {
        let gap = lam[j] - lam[k];
        ae[(j, k)] * (-gap * gap * t / 2.0).exp()
    });
    Ok(ag.out_of_eigen(&damped))
}

/// `𝔼[α_B(a)]` for `B ~ N(0, t)` by Gauss–Hermite quadrature with `nodes` points.
pub fn gauss_hermite_check(ag: &AutomorphismGroup, t: f64, a: &ComplexMatrix, nodes: usize) -> Result<ComplexMatrix> {
    if nodes < 20 {
        return Err(QfkError::Invalid(format!("Gauss-Hermite rule needs at least 20 nodes, got {nodes}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(QfkError::Invalid(format!("time must be nonnegative, got {t}")));
    }
    let rule = GaussHermite::new(NonZeroUsize::new(nodes).expect("nodes >= 20"));
    let scale = (2.0 * t).sqrt();
    let norm = std::f64::consts::PI.sqrt();
    let mut acc = ComplexMatrix::zeros(a.rows(), a.cols());
    for &(x, w) in rule.as_node_weight_pairs() {
        acc = acc + ag.alpha(scale * x, a).scale_real(w / norm);
    }
    Ok(acc)
}

/// Sample mean of `α_B(a)` over `samples` draws of `B ~ N(0, t)`. Demonstration only.
pub fn monte_carlo_gaussian<R: Rng + ?Sized>(
    ag: &AutomorphismGroup,
    t: f64,
    a: &ComplexMatrix,
    samples: usize,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if samples == 0 {
        return Err(QfkError::Invalid("need at least one sample".into()));
    }
    let normal = Normal::new(0.0, t.sqrt()).map_err(|e| QfkError::Invalid(e.to_string()))?;
    let mut acc = ComplexMatrix::zeros(a.rows(), a.cols());
    for _ in 0..samples {
        acc = acc + ag.alpha(normal.sample(rng), a);
    }
    Ok(acc.scale_real(1.0 / samples as f64))
}

/// `½δ²(x) + δ(x)·b`.
pub fn ls_generator(ag: &AutomorphismGroup, b: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let dx = delta_apply(ag, x);
    delta_apply(ag, &dx).scale_real(0.5) + &dx * b
}

/// `½δ²(x) + bδ(x) + δ(x)b + bxb − ½b²x − ½xb²` for self-adjoint `b`.
pub fn bp_generator(ag: &AutomorphismGroup, b: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let b = HermitianMatrix::new(b.clone())?.into_inner();
    let dx = delta_apply(ag, x);
    let b2 = &b * &b;
    Ok(delta_apply(ag, &dx).scale_real(0.5) + &b * &dx + &dx * &b + &b * x * &b
        - anticommutator(&b2, x).scale_real(0.5))
}

/// `τ0 + λ_{l*}δ0 + ρ_l δ0† + λ_{l*}ρ_l π0 + i[h,·] − ½{l*l,·}` for a single noise colour.
pub fn unitary_conjugation_generator(
    blocks: &StructureBlocks,
    h: &HermitianMatrix,
    l: &ComplexMatrix,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if blocks.d() != 1 {
        return Err(QfkError::Dimension("unitary-conjugation reference is stated for d = 1".into()));
    }
    let ls = l.adjoint();
    Ok(blocks.tau0(x)
        + &ls * blocks.delta0(x)
        + blocks.delta0_dagger(x) * l
        + &ls * blocks.pi0(x) * l
        + commutator(h.matrix(), x).scale(I)
        - anticommutator(&(&ls * l), x).scale_real(0.5))
}
