//! The datum `(𝒜, ℋ, D)_σ`, its validator, conformal deformation and the
//! unital invertible double.

use alloc::format;
use alloc::vec::Vec;

use crate::algebra::{self, Automorphism, ElementSampler, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, fro_norm, GradedOperator, GradedSpace, Mat};

/// A twisted spectral triple on a finite-dimensional graded space.
///
/// Construction only checks shapes; [`TwistedTriple::validate`] reports the
/// selfadjointness, oddness and automorphism residuals.
#[derive(Clone, Debug)]
pub struct TwistedTriple {
    algebra: MatrixAlgebra,
    d: Mat,
    sigma: Automorphism,
    nominal_summability: f64,
    rank_tol: f64,
    d_inv: Mat,
    min_singular: f64,
    d_norm: f64,
}

impl TwistedTriple {
    pub fn new(algebra: MatrixAlgebra, d: Mat, sigma: Automorphism) -> Result<Self> {
        let n = algebra.dim();
        if d.nrows() != n || d.ncols() != n {
            return Err(Error::Dimension(format!("D is {}×{}, space has dimension {n}", d.nrows(), d.ncols())));
        }
        linalg::ensure_finite(&d)?;
        let mut t = Self {
            algebra,
            d,
            sigma,
            nominal_summability: 1.0,
            rank_tol: linalg::DEFAULT_RANK_TOL,
            d_inv: linalg::zeros(0, 0),
            min_singular: 0.0,
            d_norm: 0.0,
        };
        t.refresh()?;
        Ok(t)
    }

    /// Like [`TwistedTriple::new`] but rejects non-selfadjoint or non-odd `D`.
    pub fn new_checked(algebra: MatrixAlgebra, d: Mat, sigma: Automorphism) -> Result<Self> {
        let t = Self::new(algebra, d, sigma)?;
        let sa = t.selfadjoint_defect();
        if sa > 1e-12 {
            return Err(Error::Domain(format!("D is not selfadjoint (defect {sa:.3e})")));
        }
        let odd = t.space().oddness_defect(&t.d);
        if odd > linalg::PARITY_TOL {
            return Err(Error::Domain(format!("D is not odd (defect {odd:.3e})")));
        }
        Ok(t)
    }

    fn refresh(&mut self) -> Result<()> {
        let sv = linalg::singular_values(&self.d);
        self.d_norm = sv.first().copied().unwrap_or(0.0);
        let rd = linalg::rank_decision(&sv, self.d.nrows(), self.d.ncols(), self.rank_tol);
        self.min_singular = if rd.rank == sv.len() { sv.last().copied().unwrap_or(0.0) } else { 0.0 };
        self.d_inv = if self.selfadjoint_defect() <= 1e-12 {
            linalg::hermitian_partial_inverse(&self.d, self.rank_tol)?
        } else {
            linalg::pseudo_inverse(&self.d, self.rank_tol)?
        };
        Ok(())
    }

    pub fn with_summability(mut self, p: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::Domain(format!("summability must be positive, got {p}")));
        }
        self.nominal_summability = p;
        Ok(self)
    }

    pub fn with_rank_tol(mut self, tol: f64) -> Result<Self> {
        self.rank_tol = tol;
        self.refresh()?;
        Ok(self)
    }

    /// Same algebra, automorphism and tolerances with a different operator.
    pub fn with_dirac(&self, d: Mat) -> Result<Self> {
        let mut t = Self::new(self.algebra.clone(), d, self.sigma.clone())?;
        t.nominal_summability = self.nominal_summability;
        t.rank_tol = self.rank_tol;
        t.refresh()?;
        Ok(t)
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    pub fn space(&self) -> &GradedSpace {
        self.algebra.space()
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn d(&self) -> &Mat {
        &self.d
    }

    pub fn d_operator(&self) -> GradedOperator {
        GradedOperator::new(self.space().clone(), self.d.clone()).expect("validated at construction")
    }

    pub fn sigma(&self) -> &Automorphism {
        &self.sigma
    }

    /// Partial inverse of `D` (the inverse when `D` is invertible).
    pub fn d_inv(&self) -> &Mat {
        &self.d_inv
    }

    pub fn d_norm(&self) -> f64 {
        self.d_norm
    }

    /// Smallest singular value, or zero when `D` is numerically singular.
    pub fn min_singular(&self) -> f64 {
        self.min_singular
    }

    pub fn is_invertible(&self) -> bool {
        self.min_singular > 0.0
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn nominal_summability(&self) -> f64 {
        self.nominal_summability
    }

    /// `max(1, ⌈(p − 1)/2⌉)`.
    pub fn default_degree(&self) -> usize {
        let k = libm::ceil((self.nominal_summability - 1.0) / 2.0);
        if k < 1.0 {
            1
        } else {
            k as usize
        }
    }

    /// `‖D − D*‖ / max(1, ‖D‖)`.
    pub fn selfadjoint_defect(&self) -> f64 {
        linalg::distance(&self.d, &self.d.adjoint()) / fro_norm(&self.d).max(1.0)
    }

    pub fn require_invertible(&self) -> Result<()> {
        if self.is_invertible() {
            Ok(())
        } else {
            Err(Error::RequiresInvertible("D is singular at the rank tolerance; pass to the invertible double".into()))
        }
    }

    /// `[D, a]_σ = D a − σ(a) D`.
    pub fn twisted_commutator(&self, a: &Mat) -> Mat {
        &self.d * a - self.sigma.apply(a) * &self.d
    }

    pub fn twisted_commutator_op(&self, a: &GradedOperator) -> Result<GradedOperator> {
        GradedOperator::new(self.space().clone(), self.twisted_commutator(a.matrix()))
    }

    /// `D⁻¹[D, a]_σ = a − D⁻¹σ(a)D` for invertible `D`.
    pub fn x(&self, a: &Mat) -> Mat {
        &self.d_inv * self.twisted_commutator(a)
    }

    /// `(𝒜, ℋ, kDk)` twisted by `σ(a) = k² a k⁻²`.
    pub fn conformal_deformation(&self, k: &Mat) -> Result<Self> {
        if !self.sigma.is_identity() {
            return Err(Error::Domain("conformal deformation requires σ = id".into()));
        }
        let n = self.dim();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::InvalidConformalFactor(format!("k is {}×{}, expected {n}×{n}", k.nrows(), k.ncols())));
        }
        if self.space().evenness_defect(k) > 1e-12 {
            return Err(Error::InvalidConformalFactor("k is not even".into()));
        }
        linalg::positive_definite_eigen(k, 1e-8).map_err(|e| Error::InvalidConformalFactor(format!("{e}")))?;
        let lam = k[(0, 0)];
        let scalar = linalg::distance(k, &linalg::identity(n).map(|z| z * lam)) <= 1e-15 * fro_norm(k);
        let sigma = if scalar { Automorphism::Identity } else { Automorphism::inner(self.space(), k.clone())? };
        let mut t = Self::new(self.algebra.clone(), k * &self.d * k, sigma)?;
        t.nominal_summability = self.nominal_summability;
        t.rank_tol = self.rank_tol;
        t.refresh()?;
        Ok(t)
    }

    pub fn invertible_double(&self) -> DoubledTriple {
        DoubledTriple::new(self)
    }

    pub fn validate(&self, sampler: &ElementSampler, count: usize) -> ValidationReport {
        let samples = sampler.sample(&self.algebra, count.max(1));
        let space = self.space();
        let mut evenness = 0.0f64;
        for a in samples.iter().chain(self.algebra.generators()) {
            evenness = evenness.max(space.evenness_defect(a));
        }
        let aut = algebra::automorphism_residuals(&self.sigma, space, &samples);
        let mut commutator_oddness = 0.0f64;
        for a in &samples {
            commutator_oddness = commutator_oddness.max(space.oddness_defect(&self.twisted_commutator(a)));
        }
        ValidationReport {
            selfadjoint: self.selfadjoint_defect(),
            oddness: space.oddness_defect(&self.d),
            evenness,
            involution: aut.involution,
            multiplicativity: aut.multiplicativity,
            sigma_evenness: aut.evenness,
            sigma_unit: aut.unit,
            commutator_oddness,
            sigma_validation_partial: !self.sigma.fully_validated(),
        }
    }
}

/// Residuals of the triple axioms; the compact-resolvent condition holds
/// trivially in finite dimension and is not reported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationReport {
    pub selfadjoint: f64,
    pub oddness: f64,
    pub evenness: f64,
    pub involution: f64,
    pub multiplicativity: f64,
    pub sigma_evenness: f64,
    pub sigma_unit: f64,
    pub commutator_oddness: f64,
    pub sigma_validation_partial: bool,
}

impl ValidationReport {
    pub fn worst_structural(&self) -> f64 {
        self.selfadjoint.max(self.oddness).max(self.evenness)
    }

    pub fn worst_automorphism(&self) -> f64 {
        self.involution.max(self.multiplicativity).max(self.sigma_evenness).max(self.sigma_unit)
    }

    pub fn passed(&self) -> bool {
        self.worst_structural() <= 1e-12 && self.worst_automorphism() <= 1e-9 && self.commutator_oddness <= 1e-9
    }
}

/// The triple over `𝒜 ⊕ ℂ` on `ℋ ⊕ ℋ` with `D̃ = [[D, 1], [1, −D]]`,
/// grading `(γ, −γ)` and `π̃(a + λ) = diag(a, 0) + λ`.
#[derive(Clone, Debug)]
pub struct DoubledTriple {
    base: TwistedTriple,
    triple: TwistedTriple,
}

impl DoubledTriple {
    pub fn new(base: &TwistedTriple) -> Self {
        let n = base.dim();
        let space = base.space().doubled();
        let mut gens: Vec<Mat> = base.algebra().generators().iter().map(algebra::embed).collect();
        gens.push(algebra::embed(&linalg::identity(n)));
        let alg = MatrixAlgebra::new(space, gens).expect("embedded generators stay even");
        let one = linalg::identity(n);
        let mut d = linalg::zeros(2 * n, 2 * n);
        d.view_mut((0, 0), (n, n)).copy_from(base.d());
        d.view_mut((0, n), (n, n)).copy_from(&one);
        d.view_mut((n, 0), (n, n)).copy_from(&one);
        d.view_mut((n, n), (n, n)).copy_from(&(-base.d()));
        let triple = TwistedTriple::new(alg, d, base.sigma().doubled())
            .and_then(|t| t.with_rank_tol(base.rank_tol()))
            .and_then(|t| t.with_summability(base.nominal_summability()))
            .expect("doubled operator is finite");
        Self { base: base.clone(), triple }
    }

    pub fn base(&self) -> &TwistedTriple {
        &self.base
    }

    /// The doubled triple with operator `D̃`.
    pub fn triple(&self) -> &TwistedTriple {
        &self.triple
    }

    pub fn d_tilde(&self) -> &Mat {
        self.triple.d()
    }

    /// `D̃₀ = diag(D, −D)`.
    pub fn d_tilde_zero(&self) -> Mat {
        linalg::block_diag(&[self.base.d().clone(), -self.base.d()])
    }

    /// `J = [[0, 1], [1, 0]]`.
    pub fn j(&self) -> Mat {
        let n = self.base.dim();
        let mut j = linalg::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = c64(1.0, 0.0);
            j[(n + i, i)] = c64(1.0, 0.0);
        }
        j
    }

    /// `π̃(a) = diag(a, 0)` for `a ∈ 𝒜`.
    pub fn embed(&self, a: &Mat) -> Mat {
        algebra::embed(a)
    }

    /// Entrywise `π̃` on a `q×q` block matrix over ℋ.
    pub fn embed_blocks(&self, m: &Mat) -> Mat {
        let n = self.base.dim();
        let q = m.nrows() / n;
        let mut out = linalg::zeros(2 * n * q, 2 * n * q);
        for i in 0..q {
            for j in 0..q {
                out.view_mut((2 * n * i, 2 * n * j), (n, n)).copy_from(&m.view((n * i, n * j), (n, n)));
            }
        }
        out
    }

    /// `‖D̃² − (D̃₀² + 1)‖`.
    pub fn square_defect(&self) -> f64 {
        let d0 = self.d_tilde_zero();
        let lhs = self.d_tilde() * self.d_tilde();
        let rhs = &d0 * &d0 + linalg::identity(2 * self.base.dim());
        linalg::distance(&lhs, &rhs)
    }

    /// `‖γ̃D̃ + D̃γ̃‖`.
    pub fn anticommutator_defect(&self) -> f64 {
        let g = self.triple.space().gamma();
        fro_norm(&(&g * self.d_tilde() + self.d_tilde() * &g))
    }

    /// `‖σ̃(π̃e) D̃_q π̃(e) − π̃(σ(e) D_q e)‖` for a realized `q×q` block matrix `e`.
    pub fn restriction_defect(&self, e: &Mat) -> f64 {
        let n = self.base.dim();
        let q = e.nrows() / n;
        let se = self.base.sigma().apply_blocks(e, n);
        let dq = linalg::amplify(self.base.d(), q);
        let base_side = self.embed_blocks(&(&se * dq * e));
        let pe = self.embed_blocks(e);
        let spe = self.triple.sigma().apply_blocks(&pe, 2 * n);
        let dtq = linalg::amplify(self.d_tilde(), q);
        linalg::distance(&(spe * dtq * pe), &base_side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_diag, real_rows};

    fn canonical() -> TwistedTriple {
        let s = GradedSpace::new(1, 1).unwrap();
        let d = real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        TwistedTriple::new(MatrixAlgebra::scalars(s), d, Automorphism::Identity).unwrap()
    }

    #[test]
    fn canonical_triple_validates() {
        let t = canonical();
        let r = t.validate(&ElementSampler::new(1), 5);
        assert_eq!(r.selfadjoint, 0.0);
        assert_eq!(r.oddness, 0.0);
        assert!(r.passed());
        assert!(t.is_invertible());
    }

    #[test]
    fn diagonal_entry_breaks_oddness() {
        let s = GradedSpace::new(1, 1).unwrap();
        let d = real_rows(&[&[1e-3, 1.0], &[1.0, 0.0]]);
        let t = TwistedTriple::new(MatrixAlgebra::scalars(s), d, Automorphism::Identity).unwrap();
        let r = t.validate(&ElementSampler::new(1), 5);
        assert!(r.oddness > 1e-4);
        assert!(!r.passed());
    }

    #[test]
    fn commutator_of_unit_vanishes() {
        let t = canonical();
        assert!(fro_norm(&t.twisted_commutator(&linalg::identity(2))) == 0.0);
    }

    #[test]
    fn scalar_conformal_factor() {
        let t = canonical();
        let k = real_diag(&[3.0, 3.0]);
        let c = t.conformal_deformation(&k).unwrap();
        assert!(c.sigma().is_identity());
        assert!(linalg::distance(c.d(), &t.d().map(|z| z * 9.0)) < 1e-14);
        let unit = t.conformal_deformation(&linalg::identity(2)).unwrap();
        assert!(linalg::distance(unit.d(), t.d()) == 0.0);
        assert!(matches!(t.conformal_deformation(&real_diag(&[1.0, -1.0])), Err(Error::InvalidConformalFactor(_))));
    }

    #[test]
    fn double_of_zero_operator_is_j() {
        let s = GradedSpace::new(1, 1).unwrap();
        let t = TwistedTriple::new(MatrixAlgebra::scalars(s), linalg::zeros(2, 2), Automorphism::Identity).unwrap();
        assert!(!t.is_invertible());
        let dt = t.invertible_double();
        assert!(linalg::distance(dt.d_tilde(), &dt.j()) == 0.0);
        let sq = dt.d_tilde() * dt.d_tilde();
        assert!(linalg::distance(&sq, &linalg::identity(4)) == 0.0);
        assert!(dt.anticommutator_defect() == 0.0);
    }

    #[test]
    fn double_smallest_singular_value() {
        let s = GradedSpace::new(1, 1).unwrap();
        let d = real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]);
        let t = TwistedTriple::new(MatrixAlgebra::scalars(s), d, Automorphism::Identity).unwrap();
        let dt = t.invertible_double();
        let expected = (0.25f64 + 1.0).sqrt();
        assert!((dt.triple().min_singular() - expected).abs() < 1e-12);
        assert!(dt.square_defect() < 1e-14);
    }
}
