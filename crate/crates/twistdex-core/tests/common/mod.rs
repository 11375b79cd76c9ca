#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistdex_core::ktheory::{conjugate, random_invertible};
use twistdex_core::linalg::{self, c64, real_diag, GradedSpace, Mat};
use twistdex_core::*;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// Odd selfadjoint `[[0, T*], [T, 0]]` with `T = 1 + s·X`, so σ_min(D) ≥ 1 − s‖X‖.
pub fn odd_dirac(rng: &mut ChaCha8Rng, half: usize, s: f64) -> Mat {
    let t = linalg::identity(half) + random_mat(rng, half, half).map(|z| z * s);
    let mut d = linalg::zeros(2 * half, 2 * half);
    d.view_mut((half, 0), (half, half)).copy_from(&t);
    d.view_mut((0, half), (half, half)).copy_from(&t.adjoint());
    d
}

/// Positive definite even element `1 + s·(X + X*)` blockwise.
pub fn positive_even(rng: &mut ChaCha8Rng, half: usize, s: f64) -> Mat {
    let mut k = linalg::zeros(2 * half, 2 * half);
    for b in 0..2 {
        let x = random_mat(rng, half, half);
        let h = linalg::identity(half) + (&x + x.adjoint()).map(|z| z * s);
        k.view_mut((b * half, b * half), (half, half)).copy_from(&h);
    }
    k
}

/// Conformal deformation of an ordinary triple on `M_h ⊕ M_h` acting on `ℂ^h ⊕ ℂ^h`.
pub fn conformal_triple(seed: u64, half: usize) -> TwistedTriple {
    let mut r = rng(seed);
    let space = GradedSpace::new(half, half).unwrap();
    let d = odd_dirac(&mut r, half, 0.3);
    let base = TwistedTriple::new(MatrixAlgebra::full_even(space), d, Automorphism::Identity).unwrap();
    let k = positive_even(&mut r, half, 0.2);
    base.conformal_deformation(&k).unwrap()
}

/// Coordinate projection conjugated by a random invertible in `M_q(𝒜)`.
pub fn skew_idempotent(t: &TwistedTriple, q: usize, pattern: &[bool], seed: u64) -> Idempotent {
    let e = Idempotent::coordinate(t.space(), q, pattern).unwrap();
    let g = random_invertible(t.algebra(), &ElementSampler::new(seed), q, 0.4);
    conjugate(&e, &g).unwrap()
}

/// Space `(2, 1)`, 𝒜 spanned by `diag(1,1,0)` and `diag(0,0,1)`, σ swapping them.
pub fn swap_triple(d: Mat) -> TwistedTriple {
    let space = GradedSpace::new(2, 1).unwrap();
    let b0 = real_diag(&[1.0, 1.0, 0.0]);
    let b1 = real_diag(&[0.0, 0.0, 1.0]);
    let alg = MatrixAlgebra::new(space, vec![b0.clone()]).unwrap();
    let sigma = Automorphism::linear(vec![b0.clone(), b1.clone()], vec![b1, b0]).unwrap();
    TwistedTriple::new(alg, d, sigma).unwrap()
}

pub fn swap_dirac() -> Mat {
    linalg::real_rows(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 2.0], &[1.0, 2.0, 0.0]])
}

/// `σ = Ad(h)` for a positive even `h`, given as a linear map on the
/// elementary basis of `M_h ⊕ M_h` with root `Ad(h^{1/2})`.
pub fn linear_triple(seed: u64, half: usize) -> TwistedTriple {
    let mut r = rng(seed);
    let space = GradedSpace::new(half, half).unwrap();
    let alg = MatrixAlgebra::full_even(space);
    let h = positive_even(&mut r, half, 0.2);
    let h_inv = h.clone().try_inverse().unwrap();
    let root = linalg::hermitian_sqrt(&h).unwrap();
    let root_inv = root.clone().try_inverse().unwrap();
    let basis: Vec<Mat> = alg.generators().to_vec();
    let images = basis.iter().map(|b| &h * b * &h_inv).collect();
    let roots = basis.iter().map(|b| &root * b * &root_inv).collect();
    let lin = twistdex_core::algebra::LinearAutomorphism::new(basis, images).unwrap().with_root(roots).unwrap();
    let d = odd_dirac(&mut r, half, 0.3);
    TwistedTriple::new(alg, d, Automorphism::Linear(lin)).unwrap()
}
