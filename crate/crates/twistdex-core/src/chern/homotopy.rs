//! Piecewise-polynomial operator homotopies `D_t = D + V(t)` and the
//! transgression cochain `η` with `Bη = (2k+1)c_k⁻¹(τ^{D₁} − τ^{D₀})`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{chern_constant, tau2k, vanishing, IdentityResidual};
use crate::algebra::{Automorphism, ElementSampler};
use crate::cyclic::{self, Cochain, Eval};
use crate::error::{Error, Result};
use crate::ktheory::Idempotent;
use crate::linalg::{self, c64, fro_norm, GradedSpace, Mat};
use crate::quadrature;
use crate::triple::{DoubledTriple, TwistedTriple};

/// `V(t) = Σ_i c_i (t − start)^i` on `[start, end]`, degree ≤ 3.
#[derive(Clone, Debug)]
pub struct PolynomialPiece {
    pub start: f64,
    pub end: f64,
    pub coefficients: Vec<Mat>,
}

impl PolynomialPiece {
    pub fn value(&self, t: f64) -> Mat {
        let s = t - self.start;
        let mut acc = self.coefficients.last().cloned().expect("nonempty piece");
        for c in self.coefficients.iter().rev().skip(1) {
            acc = acc.map(|z| z * s) + c;
        }
        acc
    }

    pub fn derivative(&self, t: f64) -> Mat {
        let s = t - self.start;
        let n = self.coefficients[0].nrows();
        let mut acc = linalg::zeros(n, n);
        for (i, c) in self.coefficients.iter().enumerate().skip(1).rev() {
            acc = acc.map(|z| z * s) + c.map(|z| z * i as f64);
        }
        acc
    }
}

/// A C¹ family `D_t = D + V(t)`, `t ∈ [0, 1]`, of odd selfadjoint operators.
#[derive(Clone, Debug)]
pub struct HomotopyFamily {
    base: TwistedTriple,
    pieces: Vec<PolynomialPiece>,
}

const JOIN_TOL: f64 = 1e-12;

impl HomotopyFamily {
    pub fn new(base: TwistedTriple, pieces: Vec<PolynomialPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidFamily("no pieces".into()));
        }
        let n = base.dim();
        let space = base.space();
        for (i, p) in pieces.iter().enumerate() {
            if p.coefficients.is_empty() || p.coefficients.len() > 4 {
                return Err(Error::InvalidFamily(format!(
                    "piece {i} has {} coefficients; degree must be between 0 and 3",
                    p.coefficients.len()
                )));
            }
            if !(p.end > p.start) {
                return Err(Error::InvalidFamily(format!("piece {i} has an empty interval")));
            }
            for c in &p.coefficients {
                if c.nrows() != n || c.ncols() != n {
                    return Err(Error::InvalidFamily(format!("piece {i} coefficient is not {n}×{n}")));
                }
                linalg::ensure_finite(c)?;
                let scale = fro_norm(c).max(1.0);
                if linalg::distance(c, &c.adjoint()) > JOIN_TOL * scale {
                    return Err(Error::InvalidFamily(format!("piece {i} has a non-selfadjoint coefficient")));
                }
                if space.oddness_defect(c) > JOIN_TOL {
                    return Err(Error::InvalidFamily(format!("piece {i} has a non-odd coefficient")));
                }
            }
        }
        if pieces[0].start.abs() > JOIN_TOL || (pieces[pieces.len() - 1].end - 1.0).abs() > JOIN_TOL {
            return Err(Error::InvalidFamily("pieces must cover [0, 1]".into()));
        }
        for w in pieces.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if (a.end - b.start).abs() > JOIN_TOL {
                return Err(Error::InvalidFamily(format!("gap between pieces at t = {}", a.end)));
            }
            let s = fro_norm(&a.value(a.end)).max(1.0);
            if linalg::distance(&a.value(a.end), &b.value(b.start)) > 1e-10 * s
                || linalg::distance(&a.derivative(a.end), &b.derivative(b.start)) > 1e-10 * s
            {
                return Err(Error::InvalidFamily(format!("family is not C¹ at t = {}", a.end)));
            }
        }
        Ok(Self { base, pieces })
    }

    /// `D̃_t = D̃₀ + tJ` on the invertible double, with `D̃₀ = diag(D, −D)`
    /// and `D̃₁ = D̃`.
    pub fn doubling(doubled: &DoubledTriple) -> Result<Self> {
        let base = doubled.triple().with_dirac(doubled.d_tilde_zero())?;
        let n = base.dim();
        let piece = PolynomialPiece { start: 0.0, end: 1.0, coefficients: vec![linalg::zeros(n, n), doubled.j()] };
        Self::new(base, vec![piece])
    }

    /// Straight line from `D` to `D + V`.
    pub fn linear(base: TwistedTriple, v: Mat) -> Result<Self> {
        let n = base.dim();
        let piece = PolynomialPiece { start: 0.0, end: 1.0, coefficients: vec![linalg::zeros(n, n), v] };
        Self::new(base, vec![piece])
    }

    pub fn base(&self) -> &TwistedTriple {
        &self.base
    }

    pub fn pieces(&self) -> &[PolynomialPiece] {
        &self.pieces
    }

    fn piece(&self, t: f64) -> &PolynomialPiece {
        self.pieces.iter().find(|p| t <= p.end + JOIN_TOL).unwrap_or(&self.pieces[self.pieces.len() - 1])
    }

    pub fn v(&self, t: f64) -> Mat {
        self.piece(t).value(t)
    }

    pub fn v_dot(&self, t: f64) -> Mat {
        self.piece(t).derivative(t)
    }

    pub fn d_at(&self, t: f64) -> Mat {
        self.base.d() + self.v(t)
    }

    pub fn triple_at(&self, t: f64) -> Result<TwistedTriple> {
        self.base.with_dirac(self.d_at(t))
    }

    /// Smallest singular value of `D_t` over `points` equally spaced times.
    pub fn min_singular_on_grid(&self, points: usize) -> f64 {
        let points = points.max(2);
        (0..points)
            .map(|i| {
                let t = i as f64 / (points - 1) as f64;
                linalg::singular_values(&self.d_at(t)).last().copied().unwrap_or(0.0)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Quadrature nodes aligned with the piece boundaries; `panels` panels
    /// per unit length.
    fn nodes(&self, panels: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let np = libm::ceil(panels as f64 * (p.end - p.start)).max(1.0) as usize;
            out.extend(quadrature::simpson_nodes(p.start, p.end, np));
        }
        out
    }

    /// `η(a⁰,…,a^{2k+1}) = Σ_j ∫₀¹ Str(α_j(a⁰) X₁ ⋯ δ_t(a^j) ⋯ X_{2k+1}) dt`, with
    /// `X_l = D_t⁻¹[D_t, a^l]_σ`, `δ_t(a) = D_t⁻¹[V̇D_t⁻¹, σ(a)]D_t`,
    /// `α_j = id` for even `j` and `D_t⁻¹σ(·)D_t` for odd `j`.
    pub fn transgression(&self, k: usize, panels: usize) -> Result<Cochain> {
        let mut nodes = Vec::new();
        for (t, w) in self.nodes(panels) {
            let d = self.d_at(t);
            let d_inv = linalg::inverse(&d).map_err(|_| Error::InvalidFamily(format!("D_t is not invertible at t = {t}")))?;
            let v_dot = self.v_dot(t);
            nodes.push(Node { w, d, d_inv, v_dot });
        }
        let data = Arc::new(Transgression { nodes, sigma: self.base.sigma().clone(), space: self.base.space().clone() });
        let m = 2 * k + 1;
        Ok(Cochain::new(m, self.base.dim(), move |a| data.eval(a)))
    }
}

struct Node {
    w: f64,
    d: Mat,
    d_inv: Mat,
    v_dot: Mat,
}

struct Transgression {
    nodes: Vec<Node>,
    sigma: Automorphism,
    space: GradedSpace,
}

impl Transgression {
    fn eval(&self, a: &[Mat]) -> Eval {
        let m = a.len() - 1;
        let sa: Vec<Mat> = a.iter().map(|x| self.sigma.apply(x)).collect();
        let mut acc = Eval::zero();
        for node in &self.nodes {
            let xs: Vec<Mat> = (1..=m).map(|l| &node.d_inv * (&node.d * &a[l] - &sa[l] * &node.d)).collect();
            let vd = &node.v_dot * &node.d_inv;
            let rho0 = &node.d_inv * &sa[0] * &node.d;
            // prefix[l] = X₁⋯X_l, suffix[l] = X_{l+1}⋯X_m
            let n = node.d.nrows();
            let mut prefix = vec![linalg::identity(n)];
            for x in &xs {
                let p = prefix.last().unwrap() * x;
                prefix.push(p);
            }
            let mut suffix = vec![linalg::identity(n); m + 1];
            for l in (0..m).rev() {
                suffix[l] = &xs[l] * &suffix[l + 1];
            }
            let norms: Vec<f64> = xs.iter().map(fro_norm).collect();
            for j in 1..=m {
                let delta = &node.d_inv * (&vd * &sa[j] - &sa[j] * &vd) * &node.d;
                let a0 = if j % 2 == 0 { &a[0] } else { &rho0 };
                let prod = a0 * &prefix[j - 1] * &delta * &suffix[j];
                let mut scale = fro_norm(a0) * fro_norm(&delta);
                for (l, nx) in norms.iter().enumerate() {
                    if l + 1 != j {
                        scale *= nx;
                    }
                }
                acc = acc + Eval::new(self.space.supertrace(&prod), scale) * node.w;
            }
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct HomotopyReport {
    pub k: usize,
    pub panels: usize,
    /// `(t, ⟨τ^{D_t}, e⟩)` on the grid
    pub pairings: Vec<(f64, f64)>,
    pub pairing_drift: f64,
    pub min_singular: f64,
    /// `Bη − (2k+1)c_k⁻¹(τ^{D₁} − τ^{D₀})` at `panels`
    pub transgression: IdentityResidual,
    /// summed absolute transgression residual at `panels` and `2·panels`
    pub coarse_error: f64,
    pub fine_error: f64,
    pub decay_ratio: f64,
    /// `bη` at `panels`
    pub b_eta: IdentityResidual,
}

/// Pairing constancy along the grid plus the sampled transgression identity.
pub fn homotopy_invariance_check(
    family: &HomotopyFamily,
    e: &Idempotent,
    k: usize,
    sampler: &ElementSampler,
    samples: usize,
    panels: usize,
    grid: usize,
) -> Result<HomotopyReport> {
    if k == 0 {
        return Err(Error::Domain("homotopy check needs k ≥ 1".into()));
    }
    let base = family.base();
    if e.n() != base.dim() {
        return Err(Error::Dimension(format!("idempotent over n = {}, family has dimension {}", e.n(), base.dim())));
    }
    let grid = grid.max(2);
    let min_singular = family.min_singular_on_grid(4 * grid);
    if min_singular < 1e-8 {
        return Err(Error::InvalidFamily(format!("D_t is not invertible along the path (σ_min = {min_singular:.3e})")));
    }
    let mut pairings = Vec::with_capacity(grid);
    for i in 0..grid {
        let t = i as f64 / (grid - 1) as f64;
        let tau = tau2k(&family.triple_at(t)?, k)?;
        pairings.push((t, cyclic::pair_cyclic_cocycle(&tau.cochain, e)?.value.re));
    }
    let p0 = pairings[0].1;
    let pairing_drift = pairings.iter().map(|p| (p.1 - p0).abs()).fold(0.0, f64::max);

    let alg = base.algebra();
    let tuples = sampler.derive(0x7a).sample_tuples(alg, samples, 2 * k + 1);
    let tuples_b = sampler.derive(0x7b).sample_tuples(alg, samples, 2 * k + 3);
    let t0 = tau2k(&family.triple_at(0.0)?, k)?.cochain;
    let t1 = tau2k(&family.triple_at(1.0)?, k)?.cochain;
    let rhs = t1.sub(&t0)?.scaled(c64((2 * k + 1) as f64 / chern_constant(k), 0.0));
    let coarse_eta = family.transgression(k, panels)?;
    let fine_eta = family.transgression(k, 2 * panels)?;
    let coarse = cyclic::connes_b(&coarse_eta)?.sub(&rhs)?;
    let fine = cyclic::connes_b(&fine_eta)?.sub(&rhs)?;
    let transgression = vanishing("transgression", "Bη = (2k+1)c_k⁻¹(τ^{D₁} − τ^{D₀})", &coarse, &tuples)?;
    let mut coarse_error = 0.0;
    let mut fine_error = 0.0;
    for t in &tuples {
        coarse_error += coarse.eval(t)?.value.norm();
        fine_error += fine.eval(t)?.value.norm();
    }
    let decay_ratio = if fine_error > 0.0 { coarse_error / fine_error } else { f64::INFINITY };
    let b_eta = vanishing("b-eta", "bη = 0", &cyclic::hochschild_b(&coarse_eta), &tuples_b)?;
    Ok(HomotopyReport { k, panels, pairings, pairing_drift, min_singular, transgression, coarse_error, fine_error, decay_ratio, b_eta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MatrixAlgebra;
    use crate::linalg::real_rows;

    #[test]
    fn piece_evaluation() {
        let one = linalg::identity(1);
        let p = PolynomialPiece {
            start: 0.5,
            end: 1.0,
            coefficients: vec![one.clone(), one.map(|z| z * 2.0), one.clone(), one.map(|z| z * 3.0)],
        };
        // 1 + 2s + s² + 3s³ at s = 0.25
        let s: f64 = 0.25;
        assert!((p.value(0.75)[(0, 0)].re - (1.0 + 2.0 * s + s * s + 3.0 * s * s * s)).abs() < 1e-15);
        assert!((p.derivative(0.75)[(0, 0)].re - (2.0 + 2.0 * s + 9.0 * s * s)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_families() {
        let s = GradedSpace::new(1, 1).unwrap();
        let d = real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let t = TwistedTriple::new(MatrixAlgebra::diagonal(s), d, Automorphism::Identity).unwrap();
        let even = linalg::real_diag(&[1.0, 0.0]);
        assert!(matches!(HomotopyFamily::linear(t.clone(), even), Err(Error::InvalidFamily(_))));
        let odd = real_rows(&[&[0.0, 0.2], &[0.2, 0.0]]);
        let bad = PolynomialPiece { start: 0.0, end: 0.5, coefficients: vec![linalg::zeros(2, 2), odd.clone()] };
        assert!(matches!(HomotopyFamily::new(t.clone(), vec![bad]), Err(Error::InvalidFamily(_))));
        let a = PolynomialPiece { start: 0.0, end: 0.5, coefficients: vec![linalg::zeros(2, 2), odd.clone()] };
        let b = PolynomialPiece { start: 0.5, end: 1.0, coefficients: vec![odd.map(|z| z * 0.5)] };
        assert!(matches!(HomotopyFamily::new(t, vec![a, b]), Err(Error::InvalidFamily(_))));
    }
}
