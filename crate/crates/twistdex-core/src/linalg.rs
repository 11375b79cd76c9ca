//! Dense complex linear algebra with a ℤ₂-grading.
//!
//! Rank decisions follow one policy everywhere: a singular value counts when
//! it exceeds `tol · max(σ_max, scale) · max(rows, cols)`, where `scale` is an
//! ambient norm (zero unless the caller supplies one).

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

/// Default relative threshold for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Relative threshold used to classify the parity of an operator.
pub const PARITY_TOL: f64 = 1e-12;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> Mat {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Diagonal matrix with real entries.
pub fn real_diag(d: &[f64]) -> Mat {
    let mut m = zeros(d.len(), d.len());
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = c64(x, 0.0);
    }
    m
}

/// Matrix from real row-major rows.
pub fn real_rows(rows: &[&[f64]]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    Mat::from_fn(r, c, |i, j| c64(rows[i][j], 0.0))
}

pub fn is_finite(m: &Mat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: &Mat) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("non-finite entry in {}×{} matrix", m.nrows(), m.ncols())))
    }
}

pub fn fro_norm(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt_libm()
}

pub fn trace(m: &Mat) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Largest singular value; zero for empty matrices.
pub fn op_norm(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub(crate) trait RealExt {
    fn sqrt_libm(self) -> f64;
}

impl RealExt for f64 {
    fn sqrt_libm(self) -> f64 {
        libm::sqrt(self)
    }
}

/// Singular value decomposition with values sorted in decreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Mat,
    pub singular_values: Vec<f64>,
    pub v_t: Mat,
}

/// Eigenvalues of `[[0, M], [M*, 0]]` in decreasing order, with eigenvectors.
fn jordan_wielandt(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    let (r, c) = m.shape();
    let mut h = zeros(r + c, r + c);
    h.view_mut((0, r), (r, c)).copy_from(m);
    h.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    let (mut vals, vecs) = hermitian_eigen(&h)?;
    vals.reverse();
    let order: Vec<usize> = (0..r + c).rev().collect();
    Ok((vals, vecs.select_columns(order.iter())))
}

/// Orthonormal columns spanning the complement of the orthonormal columns of `q`.
fn complete_basis(q: &Mat) -> Result<Mat> {
    let n = q.nrows();
    let missing = n - q.ncols();
    if missing == 0 {
        return Ok(q.clone());
    }
    let proj = identity(n) - q * q.adjoint();
    let (_, vecs) = hermitian_eigen(&proj)?;
    let mut out = zeros(n, n);
    out.columns_mut(0, q.ncols()).copy_from(q);
    out.columns_mut(q.ncols(), missing).copy_from(&vecs.columns(n - missing, missing));
    Ok(out)
}

pub fn svd(m: &Mat) -> Result<Svd> {
    ensure_finite(m)?;
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(Svd { u: identity(r), singular_values: Vec::new(), v_t: identity(c) });
    }
    let k = r.min(c);
    let (vals, vecs) = jordan_wielandt(m)?;
    let singular_values: Vec<f64> = vals[..k].iter().map(|&s| s.max(0.0)).collect();
    // Singular vectors below `floor` come from the orthonormal completion.
    let floor = 1e3 * f64::EPSILON * singular_values[0] * (r + c) as f64;
    let kept = singular_values.iter().take_while(|&&s| s > floor).count();
    let mut u = zeros(r, kept);
    let mut v = zeros(c, kept);
    for j in 0..kept {
        let x = vecs.view((0, j), (r, 1));
        let y = vecs.view((r, j), (c, 1));
        u.set_column(j, &x.map(|z| z / C64::from(x.norm())).column(0));
        v.set_column(j, &y.map(|z| z / C64::from(y.norm())).column(0));
    }
    let u = complete_basis(&u)?;
    let v = complete_basis(&v)?;
    Ok(Svd { u, singular_values, v_t: v.adjoint() })
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Vec::new();
    }
    match jordan_wielandt(m) {
        Ok((vals, _)) => vals[..r.min(c)].iter().map(|&s| s.max(0.0)).collect(),
        Err(_) => alloc::vec![f64::NAN; r.min(c)],
    }
}

/// Outcome of a rank decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankDecision {
    pub rank: usize,
    pub threshold: f64,
    pub sigma_max: f64,
    /// Some singular value sits within a factor 10 of the threshold.
    pub ambiguous: bool,
}

pub fn rank_decision(sv: &[f64], rows: usize, cols: usize, tol: f64) -> RankDecision {
    rank_decision_against(sv, rows, cols, tol, 0.0)
}

/// Threshold `tol · max(σ_max, scale) · max(rows, cols)`; a block negligible
/// next to `scale` has rank zero.
pub fn rank_decision_against(sv: &[f64], rows: usize, cols: usize, tol: f64, scale: f64) -> RankDecision {
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = tol * sigma_max.max(scale) * rows.max(cols) as f64;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let ambiguous = threshold > 0.0 && sv.iter().any(|&s| s > threshold / 10.0 && s < threshold * 10.0);
    RankDecision { rank, threshold, sigma_max, ambiguous }
}

/// Rank decision that accepts empty matrices (rank 0).
pub fn rank_of(m: &Mat, tol: f64) -> Result<RankDecision> {
    ensure_finite(m)?;
    Ok(rank_decision(&singular_values(m), m.nrows(), m.ncols(), tol))
}

/// [`rank_of`] with the threshold measured against `max(σ_max, scale)`.
pub fn rank_against(m: &Mat, tol: f64, scale: f64) -> Result<RankDecision> {
    ensure_finite(m)?;
    Ok(rank_decision_against(&singular_values(m), m.nrows(), m.ncols(), tol, scale))
}

/// Number of singular values above `tol · σ_max · max(rows, cols)`.
pub fn numerical_rank(m: &Mat, tol: f64) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Domain("numerical rank of an empty matrix".into()));
    }
    Ok(rank_of(m, tol)?.rank)
}

/// `cols − rank`.
pub fn kernel_dim(m: &Mat, tol: f64) -> Result<usize> {
    Ok(m.ncols() - rank_of(m, tol)?.rank)
}

/// Orthonormal basis of the column space, as columns.
pub fn orthonormal_range(m: &Mat, tol: f64) -> Result<(Mat, RankDecision)> {
    orthonormal_range_against(m, tol, 0.0)
}

/// [`orthonormal_range`] with the threshold measured against `max(σ_max, scale)`.
pub fn orthonormal_range_against(m: &Mat, tol: f64, scale: f64) -> Result<(Mat, RankDecision)> {
    let dec = svd(m)?;
    let rd = rank_decision_against(&dec.singular_values, m.nrows(), m.ncols(), tol, scale);
    Ok((dec.u.columns(0, rd.rank).into_owned(), rd))
}

/// `(Σ σᵢ^p)^{1/p}` over the singular values.
pub fn schatten_norm(m: &Mat, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("Schatten exponent must be ≥ 1, got {p}")));
    }
    ensure_finite(m)?;
    let sv = singular_values(m);
    let smax = match sv.first() {
        Some(&s) if s > 0.0 => s,
        _ => return Ok(0.0),
    };
    let sum: f64 = sv.iter().map(|s| libm::pow(s / smax, p)).sum();
    Ok(smax * libm::pow(sum, 1.0 / p))
}

/// Moore–Penrose inverse, singular values below the rank threshold dropped.
pub fn pseudo_inverse(m: &Mat, tol: f64) -> Result<Mat> {
    let (r, c) = m.shape();
    let dec = svd(m)?;
    let rd = rank_decision(&dec.singular_values, r, c, tol);
    let mut out = zeros(c, r);
    for k in 0..rd.rank {
        let inv = 1.0 / dec.singular_values[k];
        let v = dec.v_t.row(k).adjoint();
        let u = dec.u.column(k).adjoint();
        out += (v * u).map(|z| z * inv);
    }
    Ok(out)
}

/// Eigen-decomposition of the Hermitian part `(m + m*)/2`, eigenvalues ascending.
pub fn hermitian_eigen(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigen-decomposition of {}×{} matrix", m.nrows(), m.ncols())));
    }
    ensure_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let h = (m + m.adjoint()).map(|z| z * 0.5);
    let (vals, vecs) = jacobi_eigen(h)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let vecs = vecs.select_columns(order.iter());
    Ok((order.iter().map(|&i| vals[i]).collect(), vecs))
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// Cyclic Jacobi on a Hermitian matrix: `a = V diag(λ) V*`, unsorted.
fn jacobi_eigen(mut a: Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.nrows();
    let mut v = identity(n);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let nb = b.norm();
                let diag = libm::sqrt((a[(p, p)].re * a[(q, q)].re).abs());
                if nb <= f64::EPSILON * diag || nb < f64::MIN_POSITIVE / f64::EPSILON {
                    continue;
                }
                rotated = true;
                let phase = b / C64::from(nb);
                let zeta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * nb);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    let root = libm::sqrt(1.0 + zeta * zeta);
                    if zeta >= 0.0 {
                        1.0 / (zeta + root)
                    } else {
                        -1.0 / (-zeta + root)
                    }
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // G = [[c, s], [−s·φ̄, c·φ̄]] on (p, q); a ← G* a G, v ← v G.
                let g = [[C64::from(c), C64::from(s)], [-phase.conj() * s, phase.conj() * c]];
                rotate_columns(&mut a, p, q, &g);
                rotate_columns(&mut v, p, q, &g);
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = g[0][0].conj() * x + g[1][0].conj() * y;
                    a[(q, k)] = g[0][1].conj() * x + g[1][1].conj() * y;
                }
                a[(p, q)] = C64::from(0.0);
                a[(q, p)] = C64::from(0.0);
                a[(p, p)] = C64::from(a[(p, p)].re);
                a[(q, q)] = C64::from(a[(q, q)].re);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    if !converged || vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("Hermitian eigen-decomposition of {n}×{n} matrix did not converge")));
    }
    Ok((vals, v))
}

fn rotate_columns(m: &mut Mat, p: usize, q: usize, g: &[[C64; 2]; 2]) {
    for k in 0..m.nrows() {
        let (x, y) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = x * g[0][0] + y * g[1][0];
        m[(k, q)] = x * g[0][1] + y * g[1][1];
    }
}

fn spectral_apply(vals: &[f64], vecs: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let n = vecs.nrows();
    let mut out = zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let fl = f(lam);
        if fl == 0.0 {
            continue;
        }
        let v = vecs.column(k);
        out += (v * v.adjoint()).map(|z| z * fl);
    }
    (&out + out.adjoint()).map(|z| z * 0.5)
}

/// Partial inverse of a selfadjoint matrix through its eigenvalues.
///
/// Eigenvalues with `|λ| ≤ tol · max|λ| · n` are treated as zero.
pub fn hermitian_partial_inverse(m: &Mat, tol: f64) -> Result<Mat> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let lmax = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thr = tol * lmax * m.nrows() as f64;
    Ok(spectral_apply(&vals, &vecs, |l| if l.abs() > thr { 1.0 / l } else { 0.0 }))
}

/// Checks that `m` is Hermitian positive definite with
/// `λ_min > rel · λ_max`; returns the eigenpairs.
pub fn positive_definite_eigen(m: &Mat, rel: f64) -> Result<(Vec<f64>, Mat)> {
    let herm_defect = fro_norm(&(m - m.adjoint()));
    if herm_defect > 1e-10 * fro_norm(m).max(1.0) {
        return Err(Error::Domain(format!("matrix is not Hermitian (defect {herm_defect:.3e})")));
    }
    let (vals, vecs) = hermitian_eigen(m)?;
    let (lmin, lmax) = match (vals.first(), vals.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Domain("empty matrix".into())),
    };
    if !(lmax > 0.0 && lmin > rel * lmax) {
        return Err(Error::Domain(format!("not positive definite: λ_min = {lmin:.3e}, λ_max = {lmax:.3e}")));
    }
    Ok((vals, vecs))
}

/// Positive square root of a Hermitian positive-definite matrix.
pub fn hermitian_sqrt(m: &Mat) -> Result<Mat> {
    let (vals, vecs) = positive_definite_eigen(m, 1e-8)?;
    Ok(spectral_apply(&vals, &vecs, |l| l.sqrt_libm()))
}

/// `m^s` for Hermitian positive-definite `m` and real `s`.
pub fn hermitian_power(m: &Mat, s: f64) -> Result<Mat> {
    let (vals, vecs) = positive_definite_eigen(m, 1e-8)?;
    Ok(spectral_apply(&vals, &vecs, |l| libm::pow(l, s)))
}

/// Inverse of a square matrix by LU; singular input is an error.
pub fn inverse(m: &Mat) -> Result<Mat> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("inverse of {}×{} matrix", m.nrows(), m.ncols())));
    }
    ensure_finite(m)?;
    if m.nrows() == 0 {
        return Ok(zeros(0, 0));
    }
    let inv = m.clone().try_inverse().ok_or_else(|| Error::Numeric("matrix is singular".into()))?;
    ensure_finite(&inv)?;
    Ok(inv)
}

/// Condition number `σ_max / σ_min` in the operator norm.
pub fn condition_number(m: &Mat) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn block_diag(blocks: &[Mat]) -> Mat {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(r, c);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        out.view_mut((i, j), b.shape()).copy_from(b);
        i += b.nrows();
        j += b.ncols();
    }
    out
}

/// `m ⊗ 1_q` laid out as `q` diagonal copies of `m`.
pub fn amplify(m: &Mat, q: usize) -> Mat {
    let blocks: Vec<Mat> = (0..q).map(|_| m.clone()).collect();
    block_diag(&blocks)
}

pub fn select(m: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    m.select_rows(rows.iter()).select_columns(cols.iter())
}

/// Frobenius norm of `a − b`.
pub fn distance(a: &Mat, b: &Mat) -> f64 {
    fro_norm(&(a - b))
}

/// ℤ₂-graded space `ℂ^n` with a diagonal grading.
///
/// The grading is stored per basis vector, so amplified and doubled spaces
/// keep their natural block ordering.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedSpace {
    signs: Vec<bool>,
}

impl GradedSpace {
    /// `ℂ^{n⁺} ⊕ ℂ^{n⁻}` with the even part first.
    pub fn new(dim_plus: usize, dim_minus: usize) -> Result<Self> {
        let mut signs = Vec::with_capacity(dim_plus + dim_minus);
        signs.extend(core::iter::repeat(true).take(dim_plus));
        signs.extend(core::iter::repeat(false).take(dim_minus));
        Self::from_signs(signs)
    }

    /// `true` marks a basis vector of ℋ⁺.
    pub fn from_signs(signs: Vec<bool>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Domain("graded space must have dimension ≥ 1".into()));
        }
        Ok(Self { signs })
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn dim_plus(&self) -> usize {
        self.signs.iter().filter(|&&s| s).count()
    }

    pub fn dim_minus(&self) -> usize {
        self.dim() - self.dim_plus()
    }

    pub fn signs(&self) -> &[bool] {
        &self.signs
    }

    pub fn plus_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.signs[i]).collect()
    }

    pub fn minus_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| !self.signs[i]).collect()
    }

    pub fn indices(&self, plus: bool) -> Vec<usize> {
        if plus {
            self.plus_indices()
        } else {
            self.minus_indices()
        }
    }

    /// The grading operator γ.
    pub fn gamma(&self) -> Mat {
        real_diag(&self.signs.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect::<Vec<_>>())
    }

    /// ℋ^q as `q` consecutive copies of ℋ.
    pub fn amplify(&self, q: usize) -> Result<Self> {
        Self::from_signs(self.signs.repeat(q))
    }

    /// ℋ ⊕ ℋ with grading `(γ, −γ)`.
    pub fn doubled(&self) -> Self {
        let mut signs = self.signs.clone();
        signs.extend(self.signs.iter().map(|s| !s));
        Self { signs }
    }

    /// `Tr(γ m)`.
    pub fn supertrace(&self, m: &Mat) -> C64 {
        self.signs.iter().enumerate().map(|(i, &s)| if s { m[(i, i)] } else { -m[(i, i)] }).sum()
    }

    /// The block of `m` mapping the `from` part into the `to` part.
    pub fn block(&self, m: &Mat, from_plus: bool, to_plus: bool) -> Mat {
        select(m, &self.indices(to_plus), &self.indices(from_plus))
    }

    /// Frobenius norms of the diagonal and off-diagonal graded parts.
    pub fn parity_defects(&self, m: &Mat) -> (f64, f64) {
        let (mut diag, mut off) = (0.0, 0.0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let w = m[(i, j)].norm_sqr();
                if self.signs[i] == self.signs[j] {
                    diag += w;
                } else {
                    off += w;
                }
            }
        }
        (diag.sqrt_libm(), off.sqrt_libm())
    }

    /// Off-diagonal defect relative to `max(1, ‖m‖)`.
    pub fn evenness_defect(&self, m: &Mat) -> f64 {
        self.parity_defects(m).1 / fro_norm(m).max(1.0)
    }

    /// Diagonal defect relative to `max(1, ‖m‖)`.
    pub fn oddness_defect(&self, m: &Mat) -> f64 {
        self.parity_defects(m).0 / fro_norm(m).max(1.0)
    }

    fn check_square(&self, m: &Mat) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::Dimension(format!("expected {0}×{0} matrix, got {1}×{2}", self.dim(), m.nrows(), m.ncols())));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// A matrix acting on a graded space, with its parity classified at
/// construction. The zero operator is classified as even.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedOperator {
    space: GradedSpace,
    matrix: Mat,
    parity: Parity,
}

impl GradedOperator {
    pub fn new(space: GradedSpace, matrix: Mat) -> Result<Self> {
        space.check_square(&matrix)?;
        ensure_finite(&matrix)?;
        let (diag, off) = space.parity_defects(&matrix);
        let scale = fro_norm(&matrix).max(f64::MIN_POSITIVE);
        let parity = if off <= PARITY_TOL * scale {
            Parity::Even
        } else if diag <= PARITY_TOL * scale {
            Parity::Odd
        } else {
            Parity::None
        };
        Ok(Self { space, matrix, parity })
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_even(&self) -> bool {
        self.space.evenness_defect(&self.matrix) <= PARITY_TOL
    }

    pub fn is_odd(&self) -> bool {
        self.space.oddness_defect(&self.matrix) <= PARITY_TOL
    }

    /// `Tr(block⁺⁺) − Tr(block⁻⁻)`.
    pub fn supertrace(&self) -> C64 {
        self.space.supertrace(&self.matrix)
    }

    /// Block `ℋ^{from} → ℋ^{to}`.
    pub fn block(&self, from_plus: bool, to_plus: bool) -> Mat {
        self.space.block(&self.matrix, from_plus, to_plus)
    }
}

pub fn supertrace(t: &GradedOperator) -> C64 {
    t.supertrace()
}
