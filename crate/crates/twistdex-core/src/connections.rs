//! Finitely generated projective modules `eℋ^q`, σ-connections and the
//! coupled operators `D_∇`.

use alloc::format;
use alloc::vec::Vec;

use crate::chern;
use crate::error::{Error, Result};
use crate::index::{self, GradedRange};
use crate::ktheory::{sigma_of_idempotent, AmplifiedTriple, Idempotent};
use crate::linalg::{self, fro_norm, Mat, C64};
use crate::triple::TwistedTriple;

type DVector = nalgebra::DVector<C64>;

/// The module `e𝒜^q` together with its realization `eℋ^q`.
#[derive(Clone, Debug)]
pub struct ProjectiveModule {
    e: Idempotent,
    sigma_e: Idempotent,
    domain: GradedRange,
    codomain: GradedRange,
}

impl ProjectiveModule {
    pub fn new(t: &TwistedTriple, e: &Idempotent) -> Result<Self> {
        let sigma_e = sigma_of_idempotent(t, e)?;
        let sq = t.space().amplify(e.q())?;
        let domain = GradedRange::of(&sq, e.realized(), t.rank_tol())?;
        let codomain = GradedRange::of(&sq, sigma_e.realized(), t.rank_tol())?;
        Ok(Self { e: e.clone(), sigma_e, domain, codomain })
    }

    pub fn idempotent(&self) -> &Idempotent {
        &self.e
    }

    pub fn sigma_idempotent(&self) -> &Idempotent {
        &self.sigma_e
    }

    pub fn q(&self) -> usize {
        self.e.q()
    }

    pub fn domain(&self) -> &GradedRange {
        &self.domain
    }

    pub fn codomain(&self) -> &GradedRange {
        &self.codomain
    }

    /// `U_e : (ζ_j) ↦ Σ_j e_{·j} ζ_j`, the tuple map onto `eℋ^q`.
    pub fn u_e(&self, tuple: &DVector) -> DVector {
        self.e.realized() * tuple
    }

    /// `U_e⁻¹`: a vector of `eℋ^q` read as a tuple.
    pub fn u_e_inv(&self, v: &DVector) -> DVector {
        v.clone()
    }

    /// `‖U_e U_e⁻¹ − 1‖` on an orthonormal basis of `eℋ^q`.
    pub fn roundtrip_residual(&self) -> f64 {
        let u = self.domain.combined();
        let mut worst = 0.0f64;
        for c in 0..u.ncols() {
            let v: DVector = u.column(c).into_owned();
            worst = worst.max((self.u_e(&self.u_e_inv(&v)) - &v).norm());
        }
        worst
    }

    /// `‖U*E*U − 1‖`: the hermitian structure `⟨eξ, eη⟩` read in coordinates.
    pub fn gram_defect(&self) -> f64 {
        let u = self.domain.combined();
        let g = u.adjoint() * self.e.realized().adjoint() * &u;
        linalg::distance(&g, &linalg::identity(u.ncols()))
    }

    /// `(rank e*U, dim eℋ^q)`; the metric `ξ ↦ e*ξ` is nondegenerate when equal.
    pub fn metric_rank(&self, tol: f64) -> Result<(usize, usize)> {
        let u = self.domain.combined();
        if u.ncols() == 0 {
            return Ok((0, 0));
        }
        let r = linalg::rank_against(&(self.e.realized().adjoint() * &u), tol, linalg::op_norm(self.e.realized()))?.rank;
        Ok((r, u.ncols()))
    }
}

/// Entry `(i, j) += a[D, b]_σ` of a one-form in `M_q(Ω¹_D)`.
#[derive(Clone, Debug)]
pub struct OneFormTerm {
    pub i: usize,
    pub j: usize,
    pub a: Mat,
    pub b: Mat,
}

/// The Grassmannian σ-connection plus an optional bounded perturbation.
#[derive(Clone, Debug)]
pub struct SigmaConnection {
    module: ProjectiveModule,
    perturbation: Vec<OneFormTerm>,
}

impl SigmaConnection {
    pub fn module(&self) -> &ProjectiveModule {
        &self.module
    }

    pub fn perturbation(&self) -> &[OneFormTerm] {
        &self.perturbation
    }

    pub fn is_grassmannian(&self) -> bool {
        self.perturbation.is_empty()
    }
}

pub fn grassmannian_connection(module: ProjectiveModule) -> SigmaConnection {
    SigmaConnection { module, perturbation: Vec::new() }
}

pub fn perturbed_connection(module: ProjectiveModule, terms: Vec<OneFormTerm>) -> Result<SigmaConnection> {
    let q = module.q();
    let n = module.e.n();
    for t in &terms {
        if t.i >= q || t.j >= q {
            return Err(Error::InvalidConnection(format!("one-form entry ({}, {}) outside a {q}×{q} matrix", t.i, t.j)));
        }
        if t.a.nrows() != n || t.a.ncols() != n || t.b.nrows() != n || t.b.ncols() != n {
            return Err(Error::InvalidConnection(format!("one-form factors must be {n}×{n}")));
        }
    }
    Ok(SigmaConnection { module, perturbation: terms })
}

/// `D_∇` realized on tuples and compressed to `eℋ^q → σ(e)ℋ^q`.
#[derive(Clone, Debug)]
pub struct CoupledOperator {
    pub realized: Mat,
    pub block_plus: Mat,
    pub block_minus: Mat,
    /// `‖(1 − σ(e)) D_∇ U‖`
    pub range_defect: f64,
}

/// Builds `D_∇ ζ = Σ_j σ(e_{·j}) D ζ_j + ∇-terms` entry by entry.
pub fn couple_operator(t: &TwistedTriple, conn: &SigmaConnection) -> Result<CoupledOperator> {
    let m = &conn.module;
    let n = t.dim();
    let q = m.q();
    if m.e.n() != n {
        return Err(Error::Dimension(format!("module over n = {}, triple has dimension {n}", m.e.n())));
    }
    let e = m.e.block();
    let se = m.sigma_e.block();
    let d = t.d();
    let mut r = linalg::zeros(n * q, n * q);
    for l in 0..q {
        for j in 0..q {
            let mut blk = se.entry(l, j) * d;
            for i in 0..q {
                blk += se.entry(l, i) * t.twisted_commutator(&e.entry(i, j));
            }
            r.view_mut((l * n, j * n), (n, n)).copy_from(&blk);
        }
    }
    if !conn.perturbation.is_empty() {
        let mut w = linalg::zeros(n * q, n * q);
        for term in &conn.perturbation {
            let v = &term.a * t.twisted_commutator(&term.b);
            let mut view = w.view_mut((term.i * n, term.j * n), (n, n));
            view += v;
        }
        r += se.realized() * w * e.realized();
    }
    let u = m.domain.combined();
    let ru = &r * &u;
    let leak = &ru - se.realized() * &ru;
    let range_defect = fro_norm(&leak);
    if range_defect > 1e-9 * fro_norm(&ru).max(1.0) {
        return Err(Error::InvalidConnection(format!("D_∇ leaves σ(e)ℋ^q (defect {range_defect:.3e})")));
    }
    let block_plus = m.codomain.minus.adjoint() * &r * &m.domain.plus;
    let block_minus = m.codomain.plus.adjoint() * &r * &m.domain.minus;
    Ok(CoupledOperator { realized: r, block_plus, block_minus, range_defect })
}

/// `‖D_∇|_{eℋ^q} − σ(e)D_q|_{eℋ^q}‖` relative to `‖D_q‖`.
pub fn grassmannian_equality_residual(t: &TwistedTriple, conn: &SigmaConnection) -> Result<f64> {
    let op = couple_operator(t, conn)?;
    let amp = AmplifiedTriple::new(t, conn.module.q())?;
    let u = conn.module.domain.combined();
    let direct = conn.module.sigma_e.realized() * amp.dq() * &u;
    Ok(linalg::distance(&(&op.realized * &u), &direct) / fro_norm(amp.dq()).max(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoupledIndex {
    pub ker_plus: usize,
    pub coker_plus: usize,
    pub ker_minus: usize,
    pub coker_minus: usize,
    pub index: f64,
}

pub fn coupled_index(t: &TwistedTriple, conn: &SigmaConnection) -> Result<CoupledIndex> {
    let op = couple_operator(t, conn)?;
    let tol = t.rank_tol();
    let scale = linalg::op_norm(&op.realized);
    let r = |m: &Mat| -> Result<usize> {
        if m.nrows() == 0 || m.ncols() == 0 {
            Ok(0)
        } else {
            Ok(linalg::rank_against(m, tol, scale)?.rank)
        }
    };
    let rp = r(&op.block_plus)?;
    let rm = r(&op.block_minus)?;
    let ker_plus = op.block_plus.ncols() - rp;
    let coker_plus = op.block_plus.nrows() - rp;
    let ker_minus = op.block_minus.ncols() - rm;
    let coker_minus = op.block_minus.nrows() - rm;
    let ip = ker_plus as i64 - coker_plus as i64;
    let im = ker_minus as i64 - coker_minus as i64;
    Ok(CoupledIndex { ker_plus, coker_plus, ker_minus, coker_minus, index: (ip - im) as f64 / 2.0 })
}

/// `ind D_∇`, `ind_D[e]` and `⟨τ̄₂ₖ, [e]⟩` side by side.
#[derive(Clone, Debug)]
pub struct ConnectionIndexReport {
    pub coupled: f64,
    pub index_map: f64,
    pub pairing: C64,
    pub disagreement: f64,
}

pub fn connection_index_theorem(t: &TwistedTriple, conn: &SigmaConnection, k: usize) -> Result<ConnectionIndexReport> {
    let coupled = coupled_index(t, conn)?.index;
    let index_map = index::index_map(t, &conn.module.e)?;
    let pairing = chern::tau_bar_pairing(t, &conn.module.e, k)?.value;
    let disagreement = (coupled - index_map).abs().max((pairing - C64::new(coupled, 0.0)).norm());
    Ok(ConnectionIndexReport { coupled, index_map, pairing, disagreement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Automorphism, MatrixAlgebra};
    use crate::linalg::{real_diag, real_rows, GradedSpace};

    fn conformal() -> TwistedTriple {
        let s = GradedSpace::new(1, 1).unwrap();
        let d = real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let t = TwistedTriple::new(MatrixAlgebra::diagonal(s), d, Automorphism::Identity).unwrap();
        t.conformal_deformation(&real_diag(&[2.0, 0.5])).unwrap()
    }

    #[test]
    fn grassmannian_matches_compression() {
        let t = conformal();
        let e = Idempotent::coordinate(t.space(), 2, &[true, false, true, true]).unwrap();
        let m = ProjectiveModule::new(&t, &e).unwrap();
        assert!(m.roundtrip_residual() < 1e-14);
        assert!(m.gram_defect() < 1e-14);
        let c = grassmannian_connection(m);
        assert!(grassmannian_equality_residual(&t, &c).unwrap() < 1e-12);
        let ci = coupled_index(&t, &c).unwrap();
        assert_eq!(ci.index, index::index_map(&t, &e).unwrap());
    }

    #[test]
    fn perturbation_keeps_index() {
        let t = conformal();
        let e = Idempotent::identity(2, 1);
        let m = ProjectiveModule::new(&t, &e).unwrap();
        let term = OneFormTerm { i: 0, j: 0, a: real_diag(&[0.3, -0.2]), b: real_diag(&[1.0, 2.0]) };
        let c = perturbed_connection(m.clone(), vec![term]).unwrap();
        assert_eq!(coupled_index(&t, &c).unwrap().index, index::index_map(&t, &e).unwrap());
        let bad = OneFormTerm { i: 1, j: 0, a: real_diag(&[1.0, 1.0]), b: real_diag(&[1.0, 1.0]) };
        assert!(matches!(perturbed_connection(m, vec![bad]), Err(Error::InvalidConnection(_))));
    }
}
