//! Compressions `D_{e,σ} = σ(e)(D ⊗ 1_q)` on `eℋ^q`, their graded Fredholm
//! indices, the adjoint identification and the parametrix.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ktheory::{sigma_adjoint_idempotent, sigma_of_idempotent, AmplifiedTriple, Idempotent};
use crate::linalg::{self, fro_norm, GradedSpace, Mat, C64};
use crate::triple::TwistedTriple;

/// Orthonormal bases (columns in ℋ^q coordinates) of the even and odd parts
/// of the range of an even idempotent.
#[derive(Clone, Debug)]
pub struct GradedRange {
    pub plus: Mat,
    pub minus: Mat,
    pub ambiguous: bool,
}

impl GradedRange {
    pub fn of(space: &GradedSpace, e: &Mat, tol: f64) -> Result<Self> {
        let all: Vec<usize> = (0..space.dim()).collect();
        let ep = linalg::select(e, &all, &space.plus_indices());
        let em = linalg::select(e, &all, &space.minus_indices());
        let scale = linalg::op_norm(e);
        let (plus, dp) = range_or_empty(&ep, tol, scale)?;
        let (minus, dm) = range_or_empty(&em, tol, scale)?;
        Ok(Self { plus, minus, ambiguous: dp || dm })
    }

    pub fn dim_plus(&self) -> usize {
        self.plus.ncols()
    }

    pub fn dim_minus(&self) -> usize {
        self.minus.ncols()
    }

    /// `[plus | minus]`.
    pub fn combined(&self) -> Mat {
        let rows = self.plus.nrows();
        let mut m = linalg::zeros(rows, self.plus.ncols() + self.minus.ncols());
        m.view_mut((0, 0), (rows, self.plus.ncols())).copy_from(&self.plus);
        m.view_mut((0, self.plus.ncols()), (rows, self.minus.ncols())).copy_from(&self.minus);
        m
    }
}

fn range_or_empty(m: &Mat, tol: f64, scale: f64) -> Result<(Mat, bool)> {
    if m.ncols() == 0 {
        return Ok((linalg::zeros(m.nrows(), 0), false));
    }
    let (u, d) = linalg::orthonormal_range_against(m, tol, scale)?;
    Ok((u, d.ambiguous))
}

fn rank(m: &Mat, tol: f64, scale: f64) -> Result<(usize, bool)> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok((0, false));
    }
    let d = linalg::rank_against(m, tol, scale)?;
    Ok((d.rank, d.ambiguous))
}

/// `D_{e,σ}` in orthonormal coordinates.
#[derive(Clone, Debug)]
pub struct CompressedOperator {
    pub domain: GradedRange,
    pub codomain: GradedRange,
    /// `eℋ⁺ → σ(e)ℋ⁻`
    pub block_plus: Mat,
    /// `eℋ⁻ → σ(e)ℋ⁺`
    pub block_minus: Mat,
    /// `‖σ(e)D_q U_dom − U_cod B‖`
    pub reconstruction_residual: f64,
    pub reconstruction_scale: f64,
    /// `‖σ(e)D_q‖`, the reference for rank decisions on the blocks
    pub operator_norm: f64,
}

impl CompressedOperator {
    /// `U_cod* σ(e)D_q U_dom` with both gradings, used for the adjoint check.
    pub fn full(&self) -> Mat {
        let (dp, dm) = (self.domain.dim_plus(), self.domain.dim_minus());
        let (cp, cm) = (self.codomain.dim_plus(), self.codomain.dim_minus());
        let mut m = linalg::zeros(cp + cm, dp + dm);
        m.view_mut((cp, 0), (cm, dp)).copy_from(&self.block_plus);
        m.view_mut((0, dp), (cp, dm)).copy_from(&self.block_minus);
        m
    }
}

pub fn compress(t: &TwistedTriple, e: &Idempotent) -> Result<CompressedOperator> {
    let amp = AmplifiedTriple::new(t, e.q())?;
    let se = sigma_of_idempotent(t, e)?;
    let op = se.realized() * amp.dq();
    let tol = t.rank_tol();
    let domain = GradedRange::of(amp.space(), e.realized(), tol)?;
    let codomain = GradedRange::of(amp.space(), se.realized(), tol)?;
    let image_plus = &op * &domain.plus;
    let image_minus = &op * &domain.minus;
    let block_plus = codomain.minus.adjoint() * &image_plus;
    let block_minus = codomain.plus.adjoint() * &image_minus;
    let reconstruction_residual =
        linalg::distance(&image_plus, &(&codomain.minus * &block_plus)) + linalg::distance(&image_minus, &(&codomain.plus * &block_minus));
    let reconstruction_scale = fro_norm(&op).max(1.0);
    let operator_norm = linalg::op_norm(&op);
    Ok(CompressedOperator { domain, codomain, block_plus, block_minus, reconstruction_residual, reconstruction_scale, operator_norm })
}

/// Kernel and cokernel dimensions of `D_{e,σ}` and its half-integer index.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexReport {
    pub ker_plus: usize,
    pub ker_minus: usize,
    /// kernel of the minus block of `D_{σ(e)*,σ}`
    pub ker_star_minus: usize,
    /// kernel of the plus block of `D_{σ(e)*,σ}`
    pub ker_star_plus: usize,
    pub coker_plus: usize,
    pub coker_minus: usize,
    pub ind_plus: i64,
    pub ind_minus: i64,
    pub index: f64,
    /// `dim eℋ⁺ − dim σ(e)ℋ⁻`
    pub dimension_ind_plus: i64,
    /// `dim eℋ⁻ − dim σ(e)ℋ⁺`
    pub dimension_ind_minus: i64,
    /// every rank decision and both cross-checks agree
    pub consistent: bool,
    pub ambiguous: bool,
}

impl IndexReport {
    pub fn dimension_index(&self) -> f64 {
        (self.dimension_ind_plus - self.dimension_ind_minus) as f64 / 2.0
    }
}

pub fn fredholm_index(t: &TwistedTriple, e: &Idempotent) -> Result<IndexReport> {
    let tol = t.rank_tol();
    let c = compress(t, e)?;
    let f = sigma_adjoint_idempotent(t, e)?;
    let cf = compress(t, &f)?;
    let (rp, ap) = rank(&c.block_plus, tol, c.operator_norm)?;
    let (rm, am) = rank(&c.block_minus, tol, c.operator_norm)?;
    let (rsp, asp) = rank(&cf.block_plus, tol, cf.operator_norm)?;
    let (rsm, asm) = rank(&cf.block_minus, tol, cf.operator_norm)?;
    let ker_plus = c.block_plus.ncols() - rp;
    let ker_minus = c.block_minus.ncols() - rm;
    let ker_star_plus = cf.block_plus.ncols() - rsp;
    let ker_star_minus = cf.block_minus.ncols() - rsm;
    let coker_plus = c.block_plus.nrows() - rp;
    let coker_minus = c.block_minus.nrows() - rm;
    let ind_plus = ker_plus as i64 - ker_star_minus as i64;
    let ind_minus = ker_minus as i64 - ker_star_plus as i64;
    let dimension_ind_plus = c.domain.dim_plus() as i64 - c.codomain.dim_minus() as i64;
    let dimension_ind_minus = c.domain.dim_minus() as i64 - c.codomain.dim_plus() as i64;
    let consistent =
        coker_plus == ker_star_minus && coker_minus == ker_star_plus && ind_plus == dimension_ind_plus && ind_minus == dimension_ind_minus;
    let ambiguous = ap || am || asp || asm || c.domain.ambiguous || c.codomain.ambiguous;
    Ok(IndexReport {
        ker_plus,
        ker_minus,
        ker_star_minus,
        ker_star_plus,
        coker_plus,
        coker_minus,
        ind_plus,
        ind_minus,
        index: (ind_plus - ind_minus) as f64 / 2.0,
        dimension_ind_plus,
        dimension_ind_minus,
        consistent,
        ambiguous,
    })
}

/// `ind_D[e]`, the half-integer index alone.
pub fn index_map(t: &TwistedTriple, e: &Idempotent) -> Result<f64> {
    Ok(fredholm_index(t, e)?.index)
}

/// `½(Str e + Str σ(e))`, the closed-form value of the index in finite
/// dimensions.
pub fn supertrace_formula(t: &TwistedTriple, e: &Idempotent) -> Result<f64> {
    let sq = t.space().amplify(e.q())?;
    let se = sigma_of_idempotent(t, e)?;
    Ok(0.5 * (sq.supertrace(e.realized()).re + sq.supertrace(se.realized()).re))
}

#[derive(Clone, Debug)]
pub struct ResidualCheck {
    pub residual: f64,
    pub scale: f64,
}

impl ResidualCheck {
    pub fn ratio(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol * self.scale.max(1.0)
    }
}

/// `D_{e,σ}* = S_e⁻¹ D_{σ(e)*,σ} S_{σ(e)}`, where `S_e : eℋ → (e*ℋ)` is `ξ ↦ e*ξ`.
#[derive(Clone, Debug)]
pub struct AdjointCheck {
    pub identity: ResidualCheck,
    /// `‖S_e⁻¹ − (W*U)*‖`, the pairing form of the identification
    pub pairing_defect: f64,
    pub s_e_condition: f64,
}

pub fn adjoint_identity_check(t: &TwistedTriple, e: &Idempotent) -> Result<AdjointCheck> {
    let amp = AmplifiedTriple::new(t, e.q())?;
    let tol = t.rank_tol();
    let c = compress(t, e)?;
    let u_dom = c.domain.combined();
    let u_cod = c.codomain.combined();
    let m = c.full();
    let em = e.realized();
    let se = sigma_of_idempotent(t, e)?;
    let e_star = em.adjoint();
    let se_star = se.realized().adjoint();
    let w_dom = GradedRange::of(amp.space(), &e_star, tol)?.combined();
    let w_cod = GradedRange::of(amp.space(), &se_star, tol)?.combined();
    if w_dom.ncols() != u_dom.ncols() || w_cod.ncols() != u_cod.ncols() {
        return Err(Error::Numeric("range dimensions of e and e* disagree".into()));
    }
    let s_e = w_dom.adjoint() * &e_star * &u_dom;
    let s_se = w_cod.adjoint() * &se_star * &u_cod;
    let n = w_dom.adjoint() * &e_star * amp.dq() * &w_cod;
    let s_e_inv =
        if s_e.nrows() == 0 { s_e.clone() } else { linalg::inverse(&s_e).map_err(|_| Error::Numeric("S_e is singular".into()))? };
    let rhs = &s_e_inv * &n * &s_se;
    let residual = linalg::distance(&m.adjoint(), &rhs);
    let scale = fro_norm(&m) + fro_norm(&s_e_inv) * fro_norm(&n) * fro_norm(&s_se);
    let pairing_defect = linalg::distance(&s_e_inv, &(u_dom.adjoint() * &w_dom));
    let s_e_condition = if s_e.nrows() == 0 { 1.0 } else { linalg::condition_number(&s_e) };
    Ok(AdjointCheck { identity: ResidualCheck { residual, scale }, pairing_defect, s_e_condition })
}

/// `Q = eD_q⁻¹` on `σ(e)ℋ^q`, with both remainder identities.
#[derive(Clone, Debug)]
pub struct ParametrixCheck {
    /// `D_{e,σ}Q − 1 = σ(e)[D_q, e]_σ D_q⁻¹ σ(e)`
    pub left: ResidualCheck,
    /// `Q D_{e,σ} − 1 = −e D_q⁻¹ [D_q, e]_σ e`
    pub right: ResidualCheck,
}

pub fn parametrix_check(t: &TwistedTriple, e: &Idempotent) -> Result<ParametrixCheck> {
    t.require_invertible()?;
    let amp = AmplifiedTriple::new(t, e.q())?;
    let c = compress(t, e)?;
    let u_dom = c.domain.combined();
    let u_cod = c.codomain.combined();
    let m = c.full();
    let em = e.realized();
    let se = amp.sigma(em);
    let comm = amp.twisted_commutator(em);
    let qc = u_dom.adjoint() * em * amp.dq_inv() * &u_cod;
    let id_cod = linalg::identity(u_cod.ncols());
    let id_dom = linalg::identity(u_dom.ncols());
    let rl = u_cod.adjoint() * &se * &comm * amp.dq_inv() * &se * &u_cod;
    let rr = -(u_dom.adjoint() * em * amp.dq_inv() * &comm * em * &u_dom);
    let mq = &m * &qc;
    let qm = &qc * &m;
    let left =
        ResidualCheck { residual: linalg::distance(&(&mq - &id_cod), &rl), scale: fro_norm(&mq) + fro_norm(&id_cod) + fro_norm(&rl) };
    let right =
        ResidualCheck { residual: linalg::distance(&(&qm - &id_dom), &rr), scale: fro_norm(&qm) + fro_norm(&id_dom) + fro_norm(&rr) };
    Ok(ParametrixCheck { left, right })
}

/// `ind T = Tr((1 − ST)^N) − Tr((1 − TS)^N)` for `T = D⁺_{e,σ}` and
/// `S` the even part of the parametrix.
#[derive(Clone, Debug)]
pub struct TraceFormula {
    pub power: usize,
    pub value: C64,
    /// `dim ker T − dim coker T`
    pub index: i64,
    pub residual: f64,
}

pub fn trace_formula(t: &TwistedTriple, e: &Idempotent, power: usize) -> Result<TraceFormula> {
    t.require_invertible()?;
    if power == 0 {
        return Err(Error::Domain("trace-formula power must be ≥ 1".into()));
    }
    let amp = AmplifiedTriple::new(t, e.q())?;
    let c = compress(t, e)?;
    let tm = &c.block_plus;
    let s = c.domain.plus.adjoint() * e.realized() * amp.dq_inv() * &c.codomain.minus;
    let one_minus = |m: Mat| linalg::identity(m.nrows()) - m;
    let st = one_minus(&s * tm);
    let ts = one_minus(tm * &s);
    let value = linalg::trace(&matrix_power(&st, power)) - linalg::trace(&matrix_power(&ts, power));
    let (r, _) = rank(tm, t.rank_tol(), c.operator_norm)?;
    let index = (tm.ncols() - r) as i64 - (tm.nrows() - r) as i64;
    let residual = (value - C64::new(index as f64, 0.0)).norm();
    Ok(TraceFormula { power, value, index, residual })
}

fn matrix_power(m: &Mat, p: usize) -> Mat {
    let mut acc = linalg::identity(m.nrows());
    for _ in 0..p {
        acc = &acc * m;
    }
    acc
}

/// `dim eℋ⁺`, `dim eℋ⁻` of an idempotent, with a clear error on misuse.
pub fn graded_range_dims(t: &TwistedTriple, e: &Idempotent) -> Result<(usize, usize)> {
    if e.n() != t.dim() {
        return Err(Error::Dimension(format!("idempotent over n = {}, triple has dimension {}", e.n(), t.dim())));
    }
    e.graded_ranks(t.space(), t.rank_tol())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Automorphism, MatrixAlgebra};
    use crate::ktheory::BlockMatrix;
    use crate::linalg::real_rows;

    fn canonical() -> TwistedTriple {
        let s = GradedSpace::new(1, 1).unwrap();
        let d = real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        TwistedTriple::new(MatrixAlgebra::diagonal(s), d, Automorphism::Identity).unwrap()
    }

    #[test]
    fn unit_on_canonical_triple_has_index_zero() {
        let t = canonical();
        let r = fredholm_index(&t, &Idempotent::identity(2, 1)).unwrap();
        assert_eq!((r.ker_plus, r.ker_minus, r.index), (0, 0, 0.0));
        assert!(r.consistent);
    }

    #[test]
    fn even_projection_on_canonical() {
        let t = canonical();
        let s = t.space().clone();
        let e = Idempotent::coordinate(&s, 1, &[true, false]).unwrap();
        let r = fredholm_index(&t, &e).unwrap();
        assert_eq!((r.ker_plus, r.ker_star_minus, r.ind_plus, r.ind_minus), (1, 0, 1, -1));
        assert_eq!(r.index, 1.0);
        assert_eq!(supertrace_formula(&t, &e).unwrap(), 1.0);
    }

    #[test]
    fn zero_dirac_counts_dimensions() {
        let s = GradedSpace::new(2, 1).unwrap();
        let t = TwistedTriple::new(MatrixAlgebra::full_even(s), linalg::zeros(3, 3), Automorphism::Identity).unwrap();
        let r = fredholm_index(&t, &Idempotent::identity(3, 1)).unwrap();
        assert_eq!((r.ker_plus, r.ker_minus, r.index), (2, 1, 1.0));
    }

    #[test]
    fn parametrix_and_adjoint_on_canonical() {
        let t = canonical();
        let e = Idempotent::new(BlockMatrix::identity(2, 2), t.space()).unwrap();
        let p = parametrix_check(&t, &e).unwrap();
        assert!(p.left.passes(1e-12) && p.right.passes(1e-12));
        let a = adjoint_identity_check(&t, &e).unwrap();
        assert!(a.identity.passes(1e-12));
        let tf = trace_formula(&t, &e, 3).unwrap();
        assert!(tf.residual < 1e-12);
    }

    #[test]
    fn parametrix_requires_invertible() {
        let s = GradedSpace::new(1, 1).unwrap();
        let t = TwistedTriple::new(MatrixAlgebra::scalars(s), linalg::zeros(2, 2), Automorphism::Identity).unwrap();
        assert!(matches!(parametrix_check(&t, &Idempotent::identity(2, 1)), Err(Error::RequiresInvertible(_))));
    }
}
