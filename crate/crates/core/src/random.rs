//! Seeded randomness shared by tests, checks and the CLI.
//!
//! The repository-wide generator is ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, which expands a 64-bit seed with a PCG32
//! stream. Both are portable, so a seed reproduces the same draws on every
//! platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::fock::{LatticeParams, StateVector};
use crate::linalg::{matrix_exp, ComplexMatrix, HermitianMatrix, UnitaryMatrix, C64, I};

pub type QfkRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> QfkRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len).map(|_| normal_c64(rng)).collect()
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    let mut v = complex_vector(rng, len);
    let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= nrm;
    }
    v
}

/// Matrix with independent standard complex Gaussian entries.
pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| normal_c64(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    let a = complex_matrix(rng, n, n);
    let h = (&a + &a.adjoint()).scale_real(0.5);
    HermitianMatrix::new(h).expect("symmetrised matrix is Hermitian")
}

/// Unitary `exp(i·H)` for a Gaussian Hermitian `H` scaled to spectral norm `angle`.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize, angle: f64) -> UnitaryMatrix {
    let h = hermitian(rng, n).into_inner();
    let nrm = h.spectral_norm().max(1e-12);
    let u = matrix_exp(&h.scale(I * (angle / nrm))).expect("square");
    UnitaryMatrix::new(u).expect("exponential of anti-Hermitian matrix is unitary")
}

/// Gaussian state vector, unnormalised.
pub fn state_vector<R: Rng + ?Sized>(rng: &mut R, params: LatticeParams) -> StateVector {
    StateVector::from_amplitudes(params, complex_vector(rng, params.dimension())).expect("length matches params")
}

/// Unit vector whose noise part is vacuum in every slice `>= from`.
pub fn vacuum_future_vector<R: Rng + ?Sized>(rng: &mut R, params: LatticeParams, from: usize) -> StateVector {
    let v = state_vector(rng, params);
    let mut v = crate::fock::vacuum_projection(from.min(params.slices), &v).expect("in range");
    let nrm = v.norm();
    v.scale_mut(C64::new(1.0 / nrm, 0.0));
    v
}

/// `u ⊗ Ω` for a random unit `u` in the initial space.
pub fn vacuum_rooted_vector<R: Rng + ?Sized>(rng: &mut R, params: LatticeParams) -> StateVector {
    let u = unit_vector(rng, params.n);
    crate::fock::vacuum_vector(params, &u).expect("length matches")
}
