//! Chern characters `τ₂ₖ`, the auxiliary cochains `φ_m`, `ψ_m`, the
//! invertible-double variant `τ̄₂ₖ` and homotopy invariance.

mod homotopy;

pub use homotopy::{homotopy_invariance_check, HomotopyFamily, HomotopyReport, PolynomialPiece};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::algebra::{self, Automorphism, ElementSampler};
use crate::cyclic::{self, Cochain, Eval};
use crate::error::{Error, Result};
use crate::ktheory::{AmplifiedTriple, Idempotent};
use crate::linalg::{self, fro_norm, GradedSpace, Mat};
use crate::triple::{DoubledTriple, TwistedTriple};

/// `c_k = ½ (−1)^k k!/(2k)!`.
pub fn chern_constant(k: usize) -> f64 {
    0.5 / cyclic::pairing_constant(k)
}

/// The data the cochain evaluators close over.
#[derive(Clone, Debug)]
pub(crate) struct Kernel {
    pub d: Mat,
    pub d_inv: Mat,
    pub sigma: Automorphism,
    pub space: GradedSpace,
}

impl Kernel {
    pub fn of(t: &TwistedTriple) -> Self {
        Self { d: t.d().clone(), d_inv: t.d_inv().clone(), sigma: t.sigma().clone(), space: t.space().clone() }
    }

    pub fn comm(&self, a: &Mat) -> Mat {
        &self.d * a - self.sigma.apply(a) * &self.d
    }

    /// `D⁻¹[D, a]_σ`.
    pub fn x(&self, a: &Mat) -> Mat {
        &self.d_inv * self.comm(a)
    }

    /// `Str(f₀ f₁ ⋯)` with scale `Π‖f_i‖`.
    pub fn str_product(&self, factors: &[Mat]) -> Eval {
        let mut p = factors[0].clone();
        let mut scale = fro_norm(&factors[0]);
        for f in &factors[1..] {
            p = &p * f;
            scale *= fro_norm(f);
        }
        Eval::new(self.space.supertrace(&p), scale)
    }
}

/// A Chern cochain with its normalizing constant.
#[derive(Clone, Debug)]
pub struct ChernCocycle {
    pub k: usize,
    pub constant: f64,
    pub cochain: Cochain,
}

/// `τ₂ₖ(a⁰,…,a^{2k}) = c_k Str(D⁻¹[D,a⁰]_σ ⋯ D⁻¹[D,a^{2k}]_σ)`.
pub fn tau2k(t: &TwistedTriple, k: usize) -> Result<ChernCocycle> {
    t.require_invertible()?;
    if k == 0 {
        return Err(Error::Domain("τ₂ₖ needs k ≥ 1".into()));
    }
    Ok(tau_from_kernel(Kernel::of(t), t.dim(), k, None))
}

fn tau_from_kernel(kern: Kernel, dim: usize, k: usize, embed: Option<usize>) -> ChernCocycle {
    let c = chern_constant(k);
    let cochain = Cochain::new(2 * k, dim, move |a| {
        let xs: Vec<Mat> = a
            .iter()
            .map(|x| match embed {
                Some(_) => kern.x(&algebra::embed(x)),
                None => kern.x(x),
            })
            .collect();
        kern.str_product(&xs) * c
    });
    // τ̄ is cyclic but not normalized with respect to the unit of 𝒜.
    let cochain = cochain.with_claims(true, embed.is_none());
    ChernCocycle { k, constant: c, cochain }
}

/// `φ_m(a⁰,…,a^m) = Str(a⁰ D⁻¹[D,a¹]_σ ⋯ D⁻¹[D,a^m]_σ)`.
pub fn phi_m(t: &TwistedTriple, m: usize) -> Result<Cochain> {
    t.require_invertible()?;
    let kern = Kernel::of(t);
    Ok(Cochain::new(m, t.dim(), move |a| {
        let mut f = Vec::with_capacity(a.len());
        f.push(a[0].clone());
        f.extend(a[1..].iter().map(|x| kern.x(x)));
        kern.str_product(&f)
    }))
}

/// `ψ_m(a⁰,…,a^m) = Str(σ(a⁰) [D,a¹]_σ D⁻¹ ⋯ [D,a^m]_σ D⁻¹)`.
pub fn psi_m(t: &TwistedTriple, m: usize) -> Result<Cochain> {
    t.require_invertible()?;
    let kern = Kernel::of(t);
    Ok(Cochain::new(m, t.dim(), move |a| {
        let mut f = Vec::with_capacity(a.len());
        f.push(kern.sigma.apply(&a[0]));
        f.extend(a[1..].iter().map(|x| kern.comm(x) * &kern.d_inv));
        kern.str_product(&f)
    }))
}

/// `−φ_m(D⁻¹σ(a⁰)D, a¹, …, a^m)`, an independent route to `ψ_m`.
pub fn psi_m_via_phi(t: &TwistedTriple, m: usize) -> Result<Cochain> {
    let phi = phi_m(t, m)?;
    let kern = Kernel::of(t);
    Ok(Cochain::new(m, t.dim(), move |a| {
        let mut args = a.to_vec();
        args[0] = &kern.d_inv * kern.sigma.apply(&a[0]) * &kern.d;
        -phi.call(&args)
    }))
}

/// `½ Str((D_q⁻¹[D_q, e]_σ)^{2k+1})`, equal to `⟨τ₂ₖ, [e]⟩`.
pub fn supertrace_index(t: &TwistedTriple, e: &Idempotent, k: usize) -> Result<Eval> {
    t.require_invertible()?;
    let amp = AmplifiedTriple::new(t, e.q())?;
    let x = amp.dq_inv() * amp.twisted_commutator(e.realized());
    let mut p = x.clone();
    for _ in 0..2 * k {
        p = &p * &x;
    }
    let nx = fro_norm(&x);
    Ok(Eval::new(amp.space().supertrace(&p) * 0.5, 0.5 * libm::pow(nx, (2 * k + 1) as f64)))
}

/// `⟨τ₂ₖ, [e]⟩` through the generic pairing.
pub fn chern_pairing(t: &TwistedTriple, e: &Idempotent, k: usize) -> Result<Eval> {
    cyclic::pair_cyclic_cocycle(&tau2k(t, k)?.cochain, e)
}

/// One sampled identity: worst `|lhs − rhs| / scale` over the tuples.
#[derive(Clone, Debug)]
pub struct IdentityResidual {
    pub name: String,
    pub formula: &'static str,
    pub ratio: f64,
    pub residual: f64,
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub k: usize,
    pub entries: Vec<IdentityResidual>,
}

impl LemmaReport {
    pub fn worst(&self) -> f64 {
        self.entries.iter().map(|e| e.ratio).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityResidual> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Worst ratio of `phi` (expected to vanish) over tuples.
pub(crate) fn vanishing(name: &str, formula: &'static str, phi: &Cochain, tuples: &[Vec<Mat>]) -> Result<IdentityResidual> {
    let mut out = IdentityResidual { name: name.into(), formula, ratio: 0.0, residual: 0.0, scale: 0.0 };
    for tup in tuples {
        let v = phi.eval(tup)?;
        let r = v.relative();
        if r >= out.ratio {
            out.ratio = r;
            out.residual = v.value.norm();
            out.scale = v.scale;
        }
    }
    Ok(out)
}

/// Samples the cocycle, cyclicity, normalization and `b`/`B` relations
/// between `τ₂ₖ`, `φ` and `ψ`.
pub fn lemma_relations(t: &TwistedTriple, k: usize, sampler: &ElementSampler, count: usize) -> Result<LemmaReport> {
    if k == 0 {
        return Err(Error::Domain("relations need k ≥ 1".into()));
    }
    let alg = t.algebra();
    let tau = tau2k(t, k)?.cochain;
    let ck_inv = 1.0 / chern_constant(k);
    let m = 2 * k;
    let t_m = sampler.derive(m as u64).sample_tuples(alg, count, m + 1);
    let t_m1 = sampler.derive(m as u64 + 1).sample_tuples(alg, count, m + 2);
    let odd = linalg::c64((2 * k + 1) as f64 * ck_inv, 0.0);
    let tau_odd = tau.scaled(odd);

    let mut entries = Vec::new();
    entries.push(vanishing("b-tau", "bτ₂ₖ = 0", &cyclic::hochschild_b(&tau), &t_m1)?);
    entries.push(vanishing("t-tau", "Tτ₂ₖ = τ₂ₖ", &cyclic::cyclic_t(&tau).sub(&tau)?, &t_m)?);
    entries.push(IdentityResidual {
        name: "normalized-tau".into(),
        formula: "τ₂ₖ(a⁰,…,1,…) = 0",
        ratio: cyclic::normalization_defect(&tau, &t_m)?,
        residual: 0.0,
        scale: 0.0,
    });
    let phi_odd = phi_m(t, m + 1)?;
    let psi_odd = psi_m(t, m + 1)?;
    entries.push(vanishing("B-phi", "Bφ₂ₖ₊₁ = (2k+1)c_k⁻¹τ₂ₖ", &cyclic::connes_b(&phi_odd)?.sub(&tau_odd)?, &t_m)?);
    entries.push(vanishing("B-psi", "Bψ₂ₖ₊₁ = −(2k+1)c_k⁻¹τ₂ₖ", &cyclic::connes_b(&psi_odd)?.add(&tau_odd)?, &t_m)?);
    let phi_even = phi_m(t, m)?;
    let psi_even = psi_m(t, m)?;
    let phi_prev = phi_m(t, m - 1)?;
    let psi_prev = psi_m(t, m - 1)?;
    entries.push(vanishing("b-phi", "bφ₂ₖ₋₁ = φ₂ₖ", &cyclic::hochschild_b(&phi_prev).sub(&phi_even)?, &t_m)?);
    entries.push(vanishing("b-psi", "bψ₂ₖ₋₁ = −ψ₂ₖ", &cyclic::hochschild_b(&psi_prev).add(&psi_even)?, &t_m)?);
    let split = tau.scaled(linalg::c64(ck_inv, 0.0)).sub(&phi_even.add(&psi_even)?)?;
    entries.push(vanishing("tau-split", "c_k⁻¹τ₂ₖ = φ₂ₖ + ψ₂ₖ", &split, &t_m)?);
    entries.push(vanishing("psi-via-phi", "ψ_m = −φ_m(D⁻¹σ(a⁰)D, …)", &psi_even.sub(&psi_m_via_phi(t, m)?)?, &t_m)?);
    Ok(LemmaReport { k, entries })
}

/// `τ̄₂ₖ = τ₂ₖ^{D̃} ∘ π̃`, defined for any `D`.
pub fn tau_bar_2k(t: &TwistedTriple, k: usize) -> Result<ChernCocycle> {
    if k == 0 {
        return Err(Error::Domain("τ̄₂ₖ needs k ≥ 1".into()));
    }
    let doubled = DoubledTriple::new(t);
    Ok(tau_bar_from(&doubled, k))
}

pub fn tau_bar_from(doubled: &DoubledTriple, k: usize) -> ChernCocycle {
    tau_from_kernel(Kernel::of(doubled.triple()), doubled.base().dim(), k, Some(2 * doubled.base().dim()))
}

/// `⟨τ̄₂ₖ, [e]⟩`.
pub fn tau_bar_pairing(t: &TwistedTriple, e: &Idempotent, k: usize) -> Result<Eval> {
    if e.n() != t.dim() {
        return Err(Error::Dimension(format!("idempotent over n = {}, triple has dimension {}", e.n(), t.dim())));
    }
    cyclic::pair_cyclic_cocycle(&tau_bar_2k(t, k)?.cochain, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MatrixAlgebra;
    use crate::linalg::{real_rows, C64};

    fn canonical() -> TwistedTriple {
        let s = GradedSpace::new(1, 1).unwrap();
        let d = real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        TwistedTriple::new(MatrixAlgebra::diagonal(s), d, Automorphism::Identity).unwrap()
    }

    #[test]
    fn constants() {
        assert_eq!(chern_constant(1), -0.25);
        assert!((chern_constant(2) - 0.5 * 2.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn tau_vanishes_on_units() {
        let t = canonical();
        let tau = tau2k(&t, 1).unwrap().cochain;
        let one = linalg::identity(2);
        assert_eq!(tau.value(&[one.clone(), one.clone(), one]).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn pairing_of_even_projection() {
        let t = canonical();
        let e = Idempotent::coordinate(t.space(), 1, &[true, false]).unwrap();
        let p = chern_pairing(&t, &e, 1).unwrap();
        assert!((p.value - C64::new(1.0, 0.0)).norm() < 1e-14);
        let s = supertrace_index(&t, &e, 1).unwrap();
        assert!((s.value - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn requires_invertible() {
        let s = GradedSpace::new(1, 1).unwrap();
        let t = TwistedTriple::new(MatrixAlgebra::scalars(s), linalg::zeros(2, 2), Automorphism::Identity).unwrap();
        assert!(matches!(tau2k(&t, 1), Err(Error::RequiresInvertible(_))));
        assert!(tau_bar_2k(&t, 1).is_ok());
    }

    #[test]
    fn relations_hold_on_canonical() {
        let t = canonical();
        let r = lemma_relations(&t, 1, &ElementSampler::new(3), 3).unwrap();
        assert!(r.worst() < 1e-12, "{r:?}");
    }

    #[test]
    fn tau_bar_on_zero_dirac() {
        let s = GradedSpace::new(2, 1).unwrap();
        let t = TwistedTriple::new(MatrixAlgebra::full_even(s), linalg::zeros(3, 3), Automorphism::Identity).unwrap();
        let p = tau_bar_pairing(&t, &Idempotent::identity(3, 1), 1).unwrap();
        assert!((p.value - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
