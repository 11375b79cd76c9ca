//! Seeded generators for operators and homotopy families.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chern::PolynomialPiece;
use crate::linalg::{self, c64, GradedSpace, Mat};

#[derive(Clone, Debug)]
pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Entries uniform in `[−½, ½] + i[−½, ½]`.
    pub fn complex_matrix(&mut self, rows: usize, cols: usize) -> Mat {
        let rng = &mut self.rng;
        Mat::from_fn(rows, cols, |_, _| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    /// Odd selfadjoint `D` with off-diagonal block `T`. When `n⁺ = n⁻`,
    /// `T = 1 + spread·X/‖X‖`, so `σ_min(D) ≥ 1 − spread`; otherwise `T = X`.
    pub fn odd_dirac(&mut self, space: &GradedSpace, spread: f64) -> Mat {
        let (p, m) = (space.dim_plus(), space.dim_minus());
        let x = self.complex_matrix(m, p);
        let t = if p == m {
            let nx = linalg::op_norm(&x).max(f64::MIN_POSITIVE);
            linalg::identity(p) + x.map(|z| z * (spread / nx))
        } else {
            x
        };
        place_odd(space, &t)
    }

    /// Odd selfadjoint `V` with `‖V‖ = norm`.
    pub fn odd_perturbation(&mut self, space: &GradedSpace, norm: f64) -> Mat {
        let x = self.complex_matrix(space.dim_minus(), space.dim_plus());
        let v = place_odd(space, &x);
        let nv = linalg::op_norm(&v);
        if nv == 0.0 {
            v
        } else {
            v.map(|z| z * (norm / nv))
        }
    }

    /// Even positive `1 + spread·Y` with `Y` hermitian of norm one in each
    /// graded block; eigenvalues lie in `[1 − spread, 1 + spread]`.
    pub fn positive_even(&mut self, space: &GradedSpace, spread: f64) -> Mat {
        let n = space.dim();
        let mut y = linalg::zeros(n, n);
        for plus in [true, false] {
            let idx = space.indices(plus);
            if idx.is_empty() {
                continue;
            }
            let x = self.complex_matrix(idx.len(), idx.len());
            let h = &x + x.adjoint();
            let nh = linalg::op_norm(&h).max(f64::MIN_POSITIVE);
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    y[(i, j)] = h[(a, b)] / nh;
                }
            }
        }
        linalg::identity(n) + y.map(|z| z * spread)
    }

    /// C¹ piecewise-cubic Hermite family on `pieces` equal intervals with
    /// `V(0) = 0` and knot values and slopes of norm `norm`.
    pub fn hermite_family(&mut self, space: &GradedSpace, pieces: usize, norm: f64) -> Vec<PolynomialPiece> {
        let pieces = pieces.max(1);
        let n = space.dim();
        let mut values = Vec::with_capacity(pieces + 1);
        let mut slopes = Vec::with_capacity(pieces + 1);
        values.push(linalg::zeros(n, n));
        slopes.push(self.odd_perturbation(space, norm));
        for _ in 0..pieces {
            values.push(self.odd_perturbation(space, norm));
            slopes.push(self.odd_perturbation(space, norm));
        }
        let h = 1.0 / pieces as f64;
        (0..pieces)
            .map(|i| {
                let (va, vb, ma, mb) = (&values[i], &values[i + 1], &slopes[i], &slopes[i + 1]);
                let c2 = ((vb - va).map(|z| z * (3.0 / h)) - ma.map(|z| z * 2.0) - mb).map(|z| z / h);
                let c3 = ((va - vb).map(|z| z * (2.0 / h)) + ma + mb).map(|z| z / (h * h));
                let end = if i + 1 == pieces { 1.0 } else { (i + 1) as f64 * h };
                PolynomialPiece { start: i as f64 * h, end, coefficients: alloc::vec![va.clone(), ma.clone(), c2, c3] }
            })
            .collect()
    }
}

/// `[[0, T*], [T, 0]]` in the grading's index layout.
fn place_odd(space: &GradedSpace, t: &Mat) -> Mat {
    let n = space.dim();
    let plus = space.plus_indices();
    let minus = space.minus_indices();
    let mut d = linalg::zeros(n, n);
    for (a, &i) in minus.iter().enumerate() {
        for (b, &j) in plus.iter().enumerate() {
            d[(i, j)] = t[(a, b)];
            d[(j, i)] = t[(a, b)].conj();
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Automorphism, MatrixAlgebra};
    use crate::chern::HomotopyFamily;
    use crate::triple::TwistedTriple;

    #[test]
    fn dirac_is_odd_selfadjoint_and_conditioned() {
        let s = GradedSpace::new(3, 3).unwrap();
        let d = Generator::new(1).odd_dirac(&s, 0.3);
        assert!(linalg::distance(&d, &d.adjoint()) < 1e-15);
        assert!(s.oddness_defect(&d) < 1e-15);
        assert!(*linalg::singular_values(&d).last().unwrap() >= 0.7 - 1e-12);
    }

    #[test]
    fn positive_even_spectrum() {
        let s = GradedSpace::new(2, 3).unwrap();
        let k = Generator::new(2).positive_even(&s, 0.4);
        let (vals, _) = linalg::hermitian_eigen(&k).unwrap();
        assert!(vals[0] >= 0.6 - 1e-12 && vals[vals.len() - 1] <= 1.4 + 1e-12);
        assert!(s.evenness_defect(&k) < 1e-15);
    }

    #[test]
    fn hermite_family_is_c1() {
        let s = GradedSpace::new(2, 2).unwrap();
        let mut g = Generator::new(3);
        let d = g.odd_dirac(&s, 0.3);
        let t = TwistedTriple::new(MatrixAlgebra::full_even(s.clone()), d, Automorphism::Identity).unwrap();
        let pieces = g.hermite_family(&s, 3, 0.2);
        let fam = HomotopyFamily::new(t, pieces).unwrap();
        assert!(fam.min_singular_on_grid(65) > 0.1);
        assert!(fam.v(0.0).iter().all(|z| z.norm() == 0.0));
    }
}
