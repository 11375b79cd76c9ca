//! Matrices over the algebra, idempotents in `M_q(𝒜)`, their σ-translates,
//! equivalences and the σ-selfadjoint conjugate of a ribbon triple.

use alloc::format;
use alloc::vec::Vec;

use crate::algebra::{Automorphism, ElementSampler, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, fro_norm, GradedSpace, Mat, C64};
use crate::triple::TwistedTriple;

/// Tolerance on `‖E² − E‖ / max(1, ‖E‖)`.
pub const IDEMPOTENT_TOL: f64 = 1e-10;

/// A `q×q` matrix with entries in `M_n(ℂ)`, stored as its realization on
/// ℋ^q (block `(i, j)` is entry `(i, j)`).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    n: usize,
    q: usize,
    realized: Mat,
}

impl BlockMatrix {
    pub fn new(n: usize, q: usize, realized: Mat) -> Result<Self> {
        if n == 0 || realized.nrows() != n * q || realized.ncols() != n * q {
            return Err(Error::Dimension(format!(
                "expected {0}×{0} realization for q = {q}, n = {n}; got {1}×{2}",
                n * q,
                realized.nrows(),
                realized.ncols()
            )));
        }
        linalg::ensure_finite(&realized)?;
        Ok(Self { n, q, realized })
    }

    /// From row-major entries.
    pub fn from_entries(n: usize, entries: &[Vec<Mat>]) -> Result<Self> {
        let q = entries.len();
        let mut m = linalg::zeros(n * q, n * q);
        for (i, row) in entries.iter().enumerate() {
            if row.len() != q {
                return Err(Error::Dimension(format!("row {i} has {} entries, expected {q}", row.len())));
            }
            for (j, x) in row.iter().enumerate() {
                if x.nrows() != n || x.ncols() != n {
                    return Err(Error::Dimension(format!("entry ({i},{j}) is {}×{}, expected {n}×{n}", x.nrows(), x.ncols())));
                }
                m.view_mut((i * n, j * n), (n, n)).copy_from(x);
            }
        }
        Self::new(n, q, m)
    }

    pub fn identity(n: usize, q: usize) -> Self {
        Self { n, q, realized: linalg::identity(n * q) }
    }

    pub fn zero(n: usize, q: usize) -> Self {
        Self { n, q, realized: linalg::zeros(n * q, n * q) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn realized(&self) -> &Mat {
        &self.realized
    }

    pub fn entry(&self, i: usize, j: usize) -> Mat {
        self.realized.view((i * self.n, j * self.n), (self.n, self.n)).into_owned()
    }

    /// The entry, or `None` when it is exactly zero.
    pub(crate) fn nonzero_entry(&self, i: usize, j: usize) -> Option<Mat> {
        let v = self.realized.view((i * self.n, j * self.n), (self.n, self.n));
        if v.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            None
        } else {
            Some(v.into_owned())
        }
    }

    pub fn adjoint(&self) -> Self {
        Self { n: self.n, q: self.q, realized: self.realized.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { n: self.n, q: self.q, realized: &self.realized * &other.realized })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { n: self.n, q: self.q, realized: &self.realized + &other.realized })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { n: self.n, q: self.q, realized: self.realized.map(|z| z * c) }
    }

    pub fn sub_scalar(&self, c: C64) -> Self {
        let mut r = self.realized.clone();
        for i in 0..r.nrows() {
            r[(i, i)] -= c;
        }
        Self { n: self.n, q: self.q, realized: r }
    }

    /// Entrywise σ.
    pub fn apply(&self, sigma: &Automorphism) -> Self {
        Self { n: self.n, q: self.q, realized: sigma.apply_blocks(&self.realized, self.n) }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = linalg::inverse(&self.realized).map_err(|_| Error::Domain("block matrix is singular".into()))?;
        Ok(Self { n: self.n, q: self.q, realized: inv })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.q != other.q {
            return Err(Error::Dimension(format!("block shapes differ: (n={}, q={}) vs (n={}, q={})", self.n, self.q, other.n, other.q)));
        }
        Ok(())
    }
}

/// An even idempotent `e ∈ M_q(𝒜)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Idempotent {
    m: BlockMatrix,
}

impl Idempotent {
    /// Checks `E² = E` and evenness of every entry.
    pub fn new(m: BlockMatrix, space: &GradedSpace) -> Result<Self> {
        if space.dim() != m.n() {
            return Err(Error::Dimension(format!("idempotent over n = {}, space has dimension {}", m.n(), space.dim())));
        }
        let e = m.realized();
        let res = linalg::distance(&(e * e), e) / fro_norm(e).max(1.0);
        if res > IDEMPOTENT_TOL {
            return Err(Error::NotIdempotent(res));
        }
        let sq = space.amplify(m.q())?;
        let defect = sq.evenness_defect(e);
        if defect > IDEMPOTENT_TOL {
            return Err(Error::Domain(format!("idempotent entries are not even (defect {defect:.3e})")));
        }
        Ok(Self { m })
    }

    pub fn identity(n: usize, q: usize) -> Self {
        Self { m: BlockMatrix::identity(n, q) }
    }

    pub fn zero(n: usize, q: usize) -> Self {
        Self { m: BlockMatrix::zero(n, q) }
    }

    /// Coordinate projection on ℋ^q selecting the basis vectors flagged in `pattern`.
    pub fn coordinate(space: &GradedSpace, q: usize, pattern: &[bool]) -> Result<Self> {
        let n = space.dim();
        if pattern.len() != n * q {
            return Err(Error::Dimension(format!("pattern has length {}, expected {}", pattern.len(), n * q)));
        }
        let d: Vec<f64> = pattern.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::new(BlockMatrix::new(n, q, linalg::real_diag(&d))?, space)
    }

    pub fn block(&self) -> &BlockMatrix {
        &self.m
    }

    pub fn realized(&self) -> &Mat {
        self.m.realized()
    }

    pub fn n(&self) -> usize {
        self.m.n()
    }

    pub fn q(&self) -> usize {
        self.m.q()
    }

    pub fn residual(&self) -> f64 {
        let e = self.realized();
        linalg::distance(&(e * e), e)
    }

    /// `(dim eℋ⁺^q, dim eℋ⁻^q)`.
    pub fn graded_ranks(&self, space: &GradedSpace, tol: f64) -> Result<(usize, usize)> {
        let sq = space.amplify(self.q())?;
        let e = self.realized();
        let scale = linalg::op_norm(e);
        let p = linalg::rank_against(&sq.block(e, true, true), tol, scale)?.rank;
        let m = linalg::rank_against(&sq.block(e, false, false), tol, scale)?.rank;
        Ok((p, m))
    }

    /// `π̃(e)` over the doubled triple.
    pub fn embedded(&self, doubled: &crate::triple::DoubledTriple) -> Result<Self> {
        let r = doubled.embed_blocks(self.realized());
        Self::new(BlockMatrix::new(2 * self.n(), self.q(), r)?, doubled.triple().space())
    }
}

/// `(𝒜, ℋ^q, D ⊗ 1_q)` with entrywise σ.
#[derive(Clone, Debug)]
pub struct AmplifiedTriple<'a> {
    base: &'a TwistedTriple,
    q: usize,
    space: GradedSpace,
    dq: Mat,
    dq_inv: Mat,
}

impl<'a> AmplifiedTriple<'a> {
    pub fn new(base: &'a TwistedTriple, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("q must be ≥ 1".into()));
        }
        Ok(Self { base, q, space: base.space().amplify(q)?, dq: linalg::amplify(base.d(), q), dq_inv: linalg::amplify(base.d_inv(), q) })
    }

    pub fn base(&self) -> &TwistedTriple {
        self.base
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn dq(&self) -> &Mat {
        &self.dq
    }

    pub fn dq_inv(&self) -> &Mat {
        &self.dq_inv
    }

    pub fn sigma(&self, m: &Mat) -> Mat {
        self.base.sigma().apply_blocks(m, self.base.dim())
    }

    /// `[D ⊗ 1_q, m]_σ`.
    pub fn twisted_commutator(&self, m: &Mat) -> Mat {
        &self.dq * m - self.sigma(m) * &self.dq
    }
}

/// `σ(e)`, entrywise.
pub fn sigma_of_idempotent(t: &TwistedTriple, e: &Idempotent) -> Result<Idempotent> {
    check_base(t, e)?;
    Idempotent::new(e.block().apply(t.sigma()), t.space())
}

/// `σ(e)*`, the idempotent whose compression computes the cokernels.
pub fn sigma_adjoint_idempotent(t: &TwistedTriple, e: &Idempotent) -> Result<Idempotent> {
    check_base(t, e)?;
    Idempotent::new(e.block().apply(t.sigma()).adjoint(), t.space())
}

fn check_base(t: &TwistedTriple, e: &Idempotent) -> Result<()> {
    if e.n() != t.dim() {
        return Err(Error::Dimension(format!("idempotent over n = {}, triple has dimension {}", e.n(), t.dim())));
    }
    Ok(())
}

/// Output of the σ-selfadjoint conjugation with its residuals.
#[derive(Clone, Debug)]
pub struct SelfadjointConjugate {
    pub p: Idempotent,
    pub g: BlockMatrix,
    pub g_inv: BlockMatrix,
    /// `‖p² − p‖ / max(1, ‖p‖)`
    pub idempotent_residual: f64,
    /// `‖σ(p)* − p‖ / max(1, ‖p‖)`
    pub sigma_selfadjoint_residual: f64,
    /// `‖g⁻¹pg − e‖ / max(1, ‖g⁻¹‖‖p‖‖g‖)`
    pub conjugation_residual: f64,
    /// `‖g(1 + p − e) − 1‖`
    pub inverse_residual: f64,
    /// condition number of `b = 1 + σ(a)*a`
    pub b_condition: f64,
}

impl SelfadjointConjugate {
    pub fn worst(&self) -> f64 {
        self.idempotent_residual.max(self.sigma_selfadjoint_residual).max(self.conjugation_residual).max(self.inverse_residual)
    }
}

/// `p = eσ(e)*b⁻¹` with `a = e − σ(e)*`, `b = 1 + σ(a)*a`, and `g = 1 − p + e`.
///
/// Requires a ribbon σ.
pub fn sigma_selfadjoint_conjugate(t: &TwistedTriple, e: &Idempotent) -> Result<SelfadjointConjugate> {
    t.sigma().ribbon_square_root()?;
    selfadjoint_conjugate_unchecked(t, e)
}

/// The same construction without the ribbon precondition; fails when `b`
/// is numerically singular.
pub fn selfadjoint_conjugate_unchecked(t: &TwistedTriple, e: &Idempotent) -> Result<SelfadjointConjugate> {
    check_base(t, e)?;
    let sigma = t.sigma();
    let em = e.block();
    let n = em.n();
    let q = em.q();
    let sharp = |x: &BlockMatrix| x.apply(sigma).adjoint();
    let e_sharp = sharp(em);
    let a = em.add(&e_sharp.scale(c64(-1.0, 0.0)))?;
    let b = BlockMatrix::identity(n, q).add(&sharp(&a).mul(&a)?)?;
    let b_condition = linalg::condition_number(b.realized());
    if !(b_condition < 1e12) {
        return Err(Error::RibbonConstruction(format!("b = 1 + σ(a)*a is singular (condition {b_condition:.3e})")));
    }
    let b_inv = b.inverse().map_err(|_| Error::RibbonConstruction("b is singular".into()))?;
    let p = em.mul(&e_sharp)?.mul(&b_inv)?;
    let one = BlockMatrix::identity(n, q);
    let g = one.add(&p.scale(c64(-1.0, 0.0)))?.add(em)?;
    let g_inv = one.add(&p)?.add(&em.scale(c64(-1.0, 0.0)))?;
    let pr = p.realized();
    let pn = fro_norm(pr).max(1.0);
    let idempotent_residual = linalg::distance(&(pr * pr), pr) / pn;
    let sigma_selfadjoint_residual = linalg::distance(sharp(&p).realized(), pr) / pn;
    let conj = g_inv.realized() * pr * g.realized();
    let cscale = (fro_norm(g_inv.realized()) * fro_norm(pr) * fro_norm(g.realized())).max(1.0);
    let conjugation_residual = linalg::distance(&conj, em.realized()) / cscale;
    let inverse_residual = linalg::distance(&(g.realized() * g_inv.realized()), one.realized());
    let p = Idempotent::new(p, t.space())?;
    Ok(SelfadjointConjugate {
        p,
        g,
        g_inv,
        idempotent_residual,
        sigma_selfadjoint_residual,
        conjugation_residual,
        inverse_residual,
        b_condition,
    })
}

/// `e ⊕ f` in `M_{q+q'}(𝒜)`.
pub fn direct_sum(e: &Idempotent, f: &Idempotent) -> Result<Idempotent> {
    if e.n() != f.n() {
        return Err(Error::Domain(format!("direct sum over different triples (n = {} vs {})", e.n(), f.n())));
    }
    let r = linalg::block_diag(&[e.realized().clone(), f.realized().clone()]);
    Ok(Idempotent { m: BlockMatrix::new(e.n(), e.q() + f.q(), r)? })
}

/// `g⁻¹ e g`.
pub fn conjugate(e: &Idempotent, g: &BlockMatrix) -> Result<Idempotent> {
    if g.n() != e.n() || g.q() != e.q() {
        return Err(Error::Dimension("conjugating element has the wrong shape".into()));
    }
    let gi = g.inverse()?;
    let m = gi.mul(e.block())?.mul(g)?;
    let r = m.realized();
    let res = linalg::distance(&(r * r), r) / fro_norm(r).max(1.0);
    if res > IDEMPOTENT_TOL {
        return Err(Error::NotIdempotent(res));
    }
    Ok(Idempotent { m })
}

/// `1 + s·x` with `x` a sampled element of `M_q(𝒜)` and `s` chosen so that
/// `‖s·x‖ = strength`; invertible whenever `strength < 1`.
pub fn random_invertible(alg: &MatrixAlgebra, sampler: &ElementSampler, q: usize, strength: f64) -> BlockMatrix {
    let n = alg.dim();
    let xs = sampler.sample(alg, q * q);
    let mut m = linalg::zeros(n * q, n * q);
    for i in 0..q {
        for j in 0..q {
            m.view_mut((i * n, j * n), (n, n)).copy_from(&xs[i * q + j]);
        }
    }
    let norm = linalg::op_norm(&m);
    let s = if norm > 0.0 { strength / norm } else { 0.0 };
    let realized = linalg::identity(n * q) + m.map(|z| z * s);
    BlockMatrix { n, q, realized }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_rows;

    fn space(p: usize, m: usize) -> GradedSpace {
        GradedSpace::new(p, m).unwrap()
    }

    fn triple(sigma: Automorphism, s: GradedSpace) -> TwistedTriple {
        let n = s.dim();
        TwistedTriple::new(MatrixAlgebra::full_even(s), linalg::zeros(n, n), sigma).unwrap()
    }

    #[test]
    fn identity_sigma_fixes_idempotents() {
        let s = space(2, 2);
        let t = triple(Automorphism::Identity, s.clone());
        let e = Idempotent::coordinate(&s, 1, &[true, false, true, true]).unwrap();
        assert_eq!(sigma_of_idempotent(&t, &e).unwrap(), e);
        let one = Idempotent::identity(4, 2);
        let sig = Automorphism::inner(&s, linalg::real_diag(&[2.0, 1.0, 3.0, 1.0])).unwrap();
        let t2 = triple(sig, s);
        assert!(linalg::distance(sigma_of_idempotent(&t2, &one).unwrap().realized(), one.realized()) < 1e-12);
    }

    #[test]
    fn rejects_non_idempotent() {
        let s = space(1, 1);
        let m = BlockMatrix::new(2, 1, linalg::real_diag(&[2.0, 0.0])).unwrap();
        assert!(matches!(Idempotent::new(m, &s), Err(Error::NotIdempotent(_))));
    }

    #[test]
    fn classical_selfadjoint_conjugate() {
        let s = space(2, 0);
        let t = triple(Automorphism::Identity, s.clone());
        let e = Idempotent::new(BlockMatrix::new(2, 1, real_rows(&[&[1.0, 1.0], &[0.0, 0.0]])).unwrap(), &s).unwrap();
        let out = sigma_selfadjoint_conjugate(&t, &e).unwrap();
        // Direct arithmetic: a = e − e*, b = 1 + a*a, p = e e* b⁻¹.
        let em = e.realized();
        let a = em - em.adjoint();
        let b = linalg::identity(2) + a.adjoint() * &a;
        let p = em * em.adjoint() * b.try_inverse().unwrap();
        assert!(linalg::distance(out.p.realized(), &p) < 1e-14);
        assert!(linalg::distance(&p, &p.adjoint()) < 1e-14);
        assert!(linalg::distance(&(&p * &p), &p) < 1e-14);
        assert!(out.worst() < 1e-14);
    }

    #[test]
    fn sigma_selfadjoint_input_is_fixed() {
        let s = space(1, 1);
        let sig = Automorphism::inner(&s, linalg::real_diag(&[2.0, 0.5])).unwrap();
        let t = triple(sig, s.clone());
        let e = Idempotent::coordinate(&s, 1, &[true, false]).unwrap();
        let out = sigma_selfadjoint_conjugate(&t, &e).unwrap();
        assert!(linalg::distance(out.p.realized(), e.realized()) < 1e-14);
        assert!(linalg::distance(out.g.realized(), &linalg::identity(2)) < 1e-14);
    }

    #[test]
    fn direct_sum_of_units() {
        let s1 = Idempotent::identity(3, 1);
        let sum = direct_sum(&s1, &s1).unwrap();
        assert_eq!(sum, Idempotent::identity(3, 2));
        assert!(direct_sum(&s1, &Idempotent::identity(2, 1)).is_err());
    }

    #[test]
    fn scalar_conjugation_is_trivial() {
        let s = space(2, 1);
        let e = Idempotent::coordinate(&s, 1, &[true, false, true]).unwrap();
        let g = BlockMatrix::identity(3, 1).scale(c64(2.5, 1.0));
        assert!(linalg::distance(conjugate(&e, &g).unwrap().realized(), e.realized()) < 1e-14);
        assert!(conjugate(&e, &BlockMatrix::zero(3, 1)).is_err());
    }
}
