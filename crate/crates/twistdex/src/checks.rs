//! Check suites. Each suite exercises one operation on a built scenario and
//! emits one record per verified statement.

use std::time::Instant;

use serde_json::{json, Value};
use twistdex_core::chern::{self, HomotopyFamily, PolynomialPiece};
use twistdex_core::connections::{self, OneFormTerm, ProjectiveModule};
use twistdex_core::cyclic::{self, Cochain};
use twistdex_core::generate::Generator;
use twistdex_core::index::{self, fredholm_index};
use twistdex_core::ktheory::{self, Idempotent};
use twistdex_core::linalg::{self, fro_norm, C64};
use twistdex_core::{Error, Result, TwistedTriple};

use crate::report::{CheckRecord, Status};
use crate::scenario::{self, Built, FamilySpec};

type Runner = fn(&Built, &mut Sink) -> Result<()>;

/// A named suite and the operation it traces to.
pub struct Suite {
    pub name: &'static str,
    pub operation: &'static str,
    pub anchor: &'static str,
    pub summary: &'static str,
    run: Runner,
}

pub const SUITES: &[Suite] = &[
    Suite {
        name: "validate",
        operation: "validateTriple",
        anchor: "D = D*, γD = −Dγ, σ(a)* = σ⁻¹(a*)",
        summary: "triple axioms and automorphism residuals",
        run: validate,
    },
    Suite {
        name: "conformal",
        operation: "conformalDeformation",
        anchor: "[kDk, a]_σ = k[D, kak⁻¹]k, σ(a) = k²ak⁻²",
        summary: "conformal deformation identity and validators on (𝒜, ℋ, kDk)",
        run: conformal,
    },
    Suite {
        name: "index",
        operation: "fredholmIndex",
        anchor: "ind D_{e,σ} = ½(ind D⁺_{e,σ} − ind D⁻_{e,σ})",
        summary: "kernel-count index against graded dimension counts",
        run: index_suite,
    },
    Suite {
        name: "index-formula",
        operation: "tau2k",
        anchor: "ind D_{e,σ} = ½Str((D⁻¹[D,e]_σ)^{2k+1}) = ⟨τ₂ₖ, [e]⟩",
        summary: "index, supertrace formula and Chern pairing agree for each k",
        run: index_formula,
    },
    Suite {
        name: "trace-formula",
        operation: "parametrixCheck",
        anchor: "ind T = Tr((1 − ST)^N) − Tr((1 − TS)^N)",
        summary: "trace formula for N = 1, 2, 3 with the explicit parametrix",
        run: trace_formula,
    },
    Suite {
        name: "adjoint",
        operation: "adjointIdentityCheck",
        anchor: "(D_{e,σ})* = S_e⁻¹ D_{σ(e)*,σ} S_{σ(e)}",
        summary: "adjoint of the compressed operator",
        run: adjoint,
    },
    Suite {
        name: "parametrix",
        operation: "parametrixCheck",
        anchor: "D_{e,σ}Q − 1 = σ(e)[D,e]_σD⁻¹σ(e), QD_{e,σ} − 1 = −eD⁻¹[D,e]_σe",
        summary: "left and right parametrix remainders",
        run: parametrix,
    },
    Suite {
        name: "cocycles",
        operation: "lemmaRelations",
        anchor: "bτ₂ₖ = 0, Tτ₂ₖ = τ₂ₖ, Bφ₂ₖ₊₁ = −Bψ₂ₖ₊₁ = (2k+1)c_k⁻¹τ₂ₖ",
        summary: "b² = B² = bB + Bb = 0 and the φ/ψ relations on sampled tuples",
        run: cocycles,
    },
    Suite {
        name: "pairing",
        operation: "pairCyclicCocycle",
        anchor: "⟨φ, [e]⟩ = (−1)^k (2k)!/k! tr#φ(e, …, e)",
        summary: "periodicity, normalized vs cyclic pairing, normalization contract",
        run: pairing,
    },
    Suite {
        name: "tau-bar",
        operation: "tauBar2k",
        anchor: "⟨τ̄₂ₖ, [e]⟩ = ind D_{e,σ}; τ̄₂ₖ ~ τ₂ₖ for invertible D",
        summary: "invertible double and the pairing of τ̄₂ₖ",
        run: tau_bar,
    },
    Suite {
        name: "homotopy",
        operation: "homotopyInvarianceCheck",
        anchor: "Bη = (2k+1)c_k⁻¹(τ₂ₖ(1) − τ₂ₖ(0)), bη = 0",
        summary: "pairing constancy, transgression and its quadrature decay",
        run: homotopy,
    },
    Suite {
        name: "connections",
        operation: "connectionIndexTheorem",
        anchor: "ind D_∇ = ind_{D,σ}[e] = ⟨Ch(D)_σ, [ℰ]⟩",
        summary: "Grassmannian equality and index of coupled operators",
        run: connections_suite,
    },
    Suite {
        name: "ktheory",
        operation: "conjugate",
        anchor: "ind_{D,σ}[geg⁻¹] = ind_{D,σ}[e], ind[e ⊕ f] = ind[e] + ind[f]",
        summary: "index under conjugation and direct sums",
        run: ktheory_suite,
    },
    Suite {
        name: "ribbon",
        operation: "sigmaSelfadjointConjugate",
        anchor: "p = geg⁻¹, σ(p)* = p; ribbon σ gives integer indices",
        summary: "σ-selfadjoint conjugates and integrality",
        run: ribbon,
    },
];

pub fn suite(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

/// The `--list-checks` traceability table.
pub fn traceability_table() -> String {
    let mut out = format!("{:<14} {:<26} {}\n", "suite", "operation", "anchor");
    for s in SUITES {
        out.push_str(&format!("{:<14} {:<26} {}\n", s.name, s.operation, s.anchor));
    }
    out
}

/// Runs one suite; an error escaping the suite becomes a failing record.
pub fn run_suite(suite: &'static Suite, built: &Built) -> Vec<CheckRecord> {
    let mut sink = Sink::new(suite, &built.scenario.name);
    if let Err(e) = (suite.run)(built, &mut sink) {
        sink.error("suite", &e);
    }
    sink.records
}

pub struct Sink<'a> {
    suite: &'static Suite,
    scenario: &'a str,
    records: Vec<CheckRecord>,
    clock: Instant,
}

impl<'a> Sink<'a> {
    pub fn new(suite: &'static Suite, scenario: &'a str) -> Self {
        Self { suite, scenario, records: Vec::new(), clock: Instant::now() }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        subject: String,
        anchor: &str,
        values: Value,
        residual: f64,
        scale: f64,
        tolerance: f64,
        status: Status,
        message: Option<String>,
    ) {
        let wall_time_ms = self.clock.elapsed().as_secs_f64() * 1e3;
        self.records.push(CheckRecord {
            record: "check",
            scenario: self.scenario.to_string(),
            check: self.suite.name.to_string(),
            subject,
            anchor: anchor.to_string(),
            values,
            residual,
            scale,
            tolerance,
            pass: status != Status::Fail,
            status,
            message,
            wall_time_ms,
        });
        self.clock = Instant::now();
    }

    /// Passes when `residual ≤ tolerance·scale`.
    fn measured(&mut self, subject: impl Into<String>, anchor: &str, values: Value, residual: f64, scale: f64, tolerance: f64) {
        let ok = residual.is_finite() && scale.is_finite() && residual <= tolerance * scale;
        self.decided(subject, anchor, values, residual, scale, tolerance, ok);
    }

    #[allow(clippy::too_many_arguments)]
    fn decided(&mut self, subject: impl Into<String>, anchor: &str, values: Value, residual: f64, scale: f64, tolerance: f64, ok: bool) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(subject.into(), anchor, values, residual, scale, tolerance, status, None);
    }

    fn skipped(&mut self, subject: impl Into<String>, reason: &str) {
        let anchor = self.suite.anchor;
        self.push(subject.into(), anchor, json!({}), 0.0, 0.0, 0.0, Status::Skipped, Some(reason.to_string()));
    }

    fn error(&mut self, subject: impl Into<String>, err: &Error) {
        let anchor = self.suite.anchor;
        self.push(subject.into(), anchor, json!({}), f64::NAN, 0.0, 0.0, Status::Fail, Some(err.to_string()));
    }

    /// Runs `f`, turning an error into a failing record for `subject`.
    fn attempt(&mut self, subject: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.error(subject, &e);
        }
    }
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn no_idempotents(b: &Built, s: &mut Sink) -> bool {
    if b.idempotents.is_empty() {
        s.skipped("idempotents", "scenario declares no idempotents");
        true
    } else {
        false
    }
}

fn validate(b: &Built, s: &mut Sink) -> Result<()> {
    let t = &b.triple;
    let tol = &b.tolerances;
    let r = t.validate(&b.sampler.derive(1), b.scenario.samples);
    s.measured(
        "structure",
        "D = D*, γD = −Dγ, γa = aγ",
        json!({
            "selfadjoint": r.selfadjoint,
            "oddness": r.oddness,
            "evenness": r.evenness,
            "minSingular": t.min_singular(),
            "invertible": t.is_invertible(),
        }),
        r.worst_structural(),
        1.0,
        tol.structural,
    );
    s.measured(
        "automorphism",
        "σ(ab) = σ(a)σ(b), σ(a)* = σ⁻¹(a*), σ(1) = 1",
        json!({
            "kind": t.sigma().kind(),
            "involution": r.involution,
            "multiplicativity": r.multiplicativity,
            "evenness": r.sigma_evenness,
            "unit": r.sigma_unit,
            "sampledOnly": r.sigma_validation_partial,
        }),
        r.worst_automorphism(),
        1.0,
        tol.automorphism,
    );
    s.measured(
        "commutators",
        "[D, a]_σ = Da − σ(a)D is odd",
        json!({"oddness": r.commutator_oddness}),
        r.commutator_oddness,
        1.0,
        tol.automorphism,
    );
    Ok(())
}

fn conformal(b: &Built, s: &mut Sink) -> Result<()> {
    let (Some(base), Some(k)) = (&b.undeformed, &b.conformal_k) else {
        s.skipped("deformation", "scenario has no conformal factor");
        return Ok(());
    };
    let t = &b.triple;
    let k_inv = linalg::inverse(k)?;
    let samples = b.sampler.derive(2).sample(t.algebra(), b.scenario.samples);
    let (mut worst, mut residual, mut scale) = (-1.0f64, 0.0, 1.0);
    for a in &samples {
        let lhs = t.twisted_commutator(a);
        let rhs = k * base.twisted_commutator(&(k * a * &k_inv)) * k;
        let r = linalg::distance(&lhs, &rhs);
        let sc = fro_norm(&(t.d() * a)) + fro_norm(&(t.sigma().apply(a) * t.d()));
        let ratio = r / sc.max(f64::MIN_POSITIVE);
        if ratio > worst {
            (worst, residual, scale) = (ratio, r, sc);
        }
    }
    s.measured(
        "commutator",
        "[kDk, a]_σ = k[D, kak⁻¹]k",
        json!({"samples": samples.len(), "worstRatio": worst}),
        residual,
        scale,
        b.tolerances.conformal,
    );
    let r = t.validate(&b.sampler.derive(3), b.scenario.samples);
    s.decided(
        "deformed-triple",
        "(𝒜, ℋ, kDk)_σ is a twisted spectral triple",
        json!({"structural": r.worst_structural(), "automorphism": r.worst_automorphism(), "commutatorOddness": r.commutator_oddness}),
        r.worst_structural().max(r.worst_automorphism()).max(r.commutator_oddness),
        1.0,
        b.tolerances.automorphism,
        r.worst_structural() <= b.tolerances.structural
            && r.worst_automorphism() <= b.tolerances.automorphism
            && r.commutator_oddness <= b.tolerances.automorphism,
    );
    let k2 = k * k;
    let k2_inv = linalg::inverse(&k2)?;
    let mut twist = 0.0f64;
    for a in &samples {
        let direct = &k2 * a * &k2_inv;
        twist = twist.max(linalg::distance(&t.sigma().apply(a), &direct) / fro_norm(&direct).max(f64::MIN_POSITIVE));
    }
    s.measured("twist", "σ(a) = k²ak⁻²", json!({"kind": t.sigma().kind()}), twist, 1.0, b.tolerances.conformal);
    Ok(())
}

fn index_suite(b: &Built, s: &mut Sink) -> Result<()> {
    if no_idempotents(b, s) {
        return Ok(());
    }
    let t = &b.triple;
    let tol = &b.tolerances;
    for (name, e) in &b.idempotents {
        s.attempt(name, |s| {
            let r = fredholm_index(t, e)?;
            let c = index::compress(t, e)?;
            let residual = (r.index - r.dimension_index()).abs();
            let recon_ok = c.reconstruction_residual <= tol.operator_identity * c.reconstruction_scale.max(1.0);
            s.decided(
                name.as_str(),
                "ind D_{e,σ} = ½(ind D⁺_{e,σ} − ind D⁻_{e,σ})",
                json!({
                    "kerPlus": r.ker_plus,
                    "kerMinus": r.ker_minus,
                    "kerStarPlus": r.ker_star_plus,
                    "kerStarMinus": r.ker_star_minus,
                    "cokerPlus": r.coker_plus,
                    "cokerMinus": r.coker_minus,
                    "indPlus": r.ind_plus,
                    "indMinus": r.ind_minus,
                    "index": r.index,
                    "dimensionIndex": r.dimension_index(),
                    "consistent": r.consistent,
                    "ambiguous": r.ambiguous,
                    "reconstruction": c.reconstruction_residual,
                }),
                residual,
                1.0,
                tol.index,
                residual <= tol.index && r.consistent && !r.ambiguous && recon_ok,
            );
            Ok(())
        });
    }
    Ok(())
}

fn singular(b: &Built, s: &mut Sink) -> bool {
    if b.triple.is_invertible() {
        false
    } else {
        s.skipped("dirac", "D is not invertible; see the tau-bar suite");
        true
    }
}

fn index_formula(b: &Built, s: &mut Sink) -> Result<()> {
    if no_idempotents(b, s) || singular(b, s) {
        return Ok(());
    }
    let t = &b.triple;
    for (name, e) in &b.idempotents {
        s.attempt(name, |s| {
            let kernel = fredholm_index(t, e)?.index;
            let mut per_k = serde_json::Map::new();
            let mut residual = 0.0f64;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &k in &b.scenario.degrees {
                let st = chern::supertrace_index(t, e, k)?.value;
                let pr = chern::chern_pairing(t, e, k)?.value;
                let target = C64::new(kernel, 0.0);
                residual = residual.max((st - target).norm()).max((pr - target).norm());
                for v in [st.re, pr.re] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                per_k.insert(format!("k={k}"), json!({"supertrace": complex(st), "pairing": complex(pr)}));
            }
            let spread = hi - lo;
            s.measured(
                name.as_str(),
                "ind D_{e,σ} = ½Str((D⁻¹[D,e]_σ)^{2k+1}) = ⟨τ₂ₖ, [e]⟩",
                json!({"kernelIndex": kernel, "degrees": per_k, "spreadAcrossK": spread}),
                residual.max(spread),
                1.0,
                b.tolerances.index,
            );
            Ok(())
        });
    }
    Ok(())
}

fn trace_formula(b: &Built, s: &mut Sink) -> Result<()> {
    if no_idempotents(b, s) || singular(b, s) {
        return Ok(());
    }
    let t = &b.triple;
    for (name, e) in &b.idempotents {
        s.attempt(name, |s| {
            let ind_plus = fredholm_index(t, e)?.ind_plus;
            for power in 1..=3 {
                let tf = index::trace_formula(t, e, power)?;
                s.decided(
                    format!("{name}/N={power}"),
                    "ind T = Tr((1 − ST)^N) − Tr((1 − TS)^N)",
                    json!({"trace": complex(tf.value), "index": tf.index, "kernelIndexPlus": ind_plus}),
                    tf.residual,
                    1.0,
                    b.tolerances.trace_formula,
                    tf.residual <= b.tolerances.trace_formula && tf.index == ind_plus,
                );
            }
            Ok(())
        });
    }
    Ok(())
}

fn adjoint(b: &Built, s: &mut Sink) -> Result<()> {
    if no_idempotents(b, s) {
        return Ok(());
    }
    let tol = b.tolerances.operator_identity;
    for (name, e) in &b.idempotents {
        s.attempt(name, |s| {
            let a = index::adjoint_identity_check(&b.triple, e)?;
            let scale = a.identity.scale.max(1.0);
            s.decided(
                name.as_str(),
                "(D_{e,σ})* = S_e⁻¹ D_{σ(e)*,σ} S_{σ(e)}",
                json!({"pairingDefect": a.pairing_defect, "sCondition": a.s_e_condition}),
                a.identity.residual,
                scale,
                tol,
                a.identity.residual <= tol * scale && a.pairing_defect <= tol,
            );
            Ok(())
        });
    }
    Ok(())
}

fn parametrix(b: &Built, s: &mut Sink) -> Result<()> {
    if no_idempotents(b, s) || singular(b, s) {
        return Ok(());
    }
    let tol = b.tolerances.operator_identity;
    for (name, e) in &b.idempotents {
        s.attempt(name, |s| {
            let p = index::parametrix_check(&b.triple, e)?;
            s.measured(format!("{name}/left"), "D_{e,σ}Q − 1 = σ(e)[D,e]_σD⁻¹σ(e)", json!({}), p.left.residual, p.left.scale.max(1.0), tol);
            s.measured(format!("{name}/right"), "QD_{e,σ} − 1 = −eD⁻¹[D,e]_σe", json!({}), p.right.residual, p.right.scale.max(1.0), tol);
            Ok(())
        });
    }
    Ok(())
}

/// The triple itself, or its invertible double when `D` is singular.
fn invertible_model(b: &Built) -> (TwistedTriple, bool) {
    if b.triple.is_invertible() {
        (b.triple.clone(), false)
    } else {
        (b.triple.invertible_double().triple().clone(), true)
    }
}

fn cocycles(b: &Built, s: &mut Sink) -> Result<()> {
    let (t, on_double) = invertible_model(b);
    let tol = b.tolerances.cocycle;
    let count = b.scenario.samples;
    for &k in &b.scenario.degrees {
        let sampler = b.sampler.derive(20 + k as u64);
        let rep = chern::lemma_relations(&t, k, &sampler, count)?;
        for entry in &rep.entries {
            s.measured(
                format!("k={k}/{}", entry.name),
                entry.formula,
                json!({"tuples": count, "onDouble": on_double, "absResidual": entry.residual, "absScale": entry.scale}),
                entry.ratio,
                1.0,
                tol,
            );
        }
        let m = 2 * k;
        let alg = t.algebra();
        let phi_even = chern::phi_m(&t, m)?;
        let phi_odd = chern::phi_m(&t, m + 1)?;
        let bb = cyclic::hochschild_b(&cyclic::hochschild_b(&phi_even));
        let big_bb = cyclic::connes_b(&cyclic::connes_b(&phi_odd)?)?;
        let mixed = cyclic::hochschild_b(&cyclic::connes_b(&phi_odd)?).add(&cyclic::connes_b(&cyclic::hochschild_b(&phi_odd))?)?;
        let operators: [(&str, &str, &Cochain); 3] =
            [("b-squared", "b²φ₂ₖ = 0", &bb), ("B-squared", "B²φ₂ₖ₊₁ = 0", &big_bb), ("bB+Bb", "(bB + Bb)φ₂ₖ₊₁ = 0", &mixed)];
        for (i, (name, formula, phi)) in operators.into_iter().enumerate() {
            let tuples = sampler.derive(40 + i as u64).sample_tuples(alg, count, phi.arity());
            let ratio = cyclic::max_relative(phi, &tuples)?;
            s.measured(format!("k={k}/{name}"), formula, json!({"tuples": count, "onDouble": on_double}), ratio, 1.0, tol);
        }
    }
    Ok(())
}

fn pairing(b: &Built, s: &mut Sink) -> Result<()> {
    let t = &b.triple;
    let tol = b.tolerances.pairing;
    for &k in &b.scenario.degrees {
        let bar = chern::tau_bar_2k(t, k)?.cochain;
        let contract = cyclic::pair_normalized_even(std::slice::from_ref(&bar), &Idempotent::identity(t.dim(), 1));
        let rejected = matches!(contract, Err(Error::ContractViolation(_)));
        s.decided(
            format!("k={k}/normalization-contract"),
            "(b, B) pairing accepts normalized cochains only",
            json!({"tauBarClaimsNormalized": bar.claims_normalized(), "rejected": rejected}),
            if rejected { 0.0 } else { 1.0 },
            1.0,
            0.0,
            rejected,
        );
        let tau = if t.is_invertible() { Some(chern::tau2k(t, k)?.cochain) } else { None };
        for (name, e) in &b.idempotents {
            s.attempt(name, |s| {
                let p = cyclic::pair_cyclic_cocycle(&bar, e)?;
                let ps = cyclic::pair_cyclic_cocycle(&cyclic::periodicity_s(&bar), e)?;
                s.measured(
                    format!("{name}/k={k}/periodicity"),
                    "⟨Sτ̄₂ₖ, [e]⟩ = ⟨τ̄₂ₖ, [e]⟩",
                    json!({"pairing": complex(p.value), "periodic": complex(ps.value)}),
                    (p.value - ps.value).norm(),
                    1.0,
                    tol,
                );
                if let Some(tau) = &tau {
                    let cyc = cyclic::pair_cyclic_cocycle(tau, e)?;
                    let norm = cyclic::pair_normalized_even(std::slice::from_ref(tau), e)?;
                    s.measured(
                        format!("{name}/k={k}/normalized"),
                        "⟨(τ₂ₖ), [e]⟩ normalized = ⟨τ₂ₖ, [e]⟩ cyclic",
                        json!({"cyclic": complex(cyc.value), "normalized": complex(norm.value)}),
                        (cyc.value - norm.value).norm(),
                        1.0,
                        tol,
                    );
                }
                Ok(())
            });
        }
    }
    Ok(())
}

fn tau_bar(b: &Built, s: &mut Sink) -> Result<()> {
    let t = &b.triple;
    let tol = &b.tolerances;
    let doubled = t.invertible_double();
    let defect = doubled.square_defect().max(doubled.anticommutator_defect());
    let scale = 1.0 + fro_norm(t.d()).powi(2);
    s.measured(
        "double",
        "D̃² = D̃₀² + 1, γ̃D̃ = −D̃γ̃",
        json!({"squareDefect": doubled.square_defect(), "anticommutatorDefect": doubled.anticommutator_defect(), "minSingular": doubled.triple().min_singular()}),
        defect,
        scale,
        tol.operator_identity,
    );
    for (name, e) in &b.idempotents {
        s.attempt(name, |s| {
            let r = doubled.restriction_defect(e.realized());
            s.measured(
                format!("{name}/restriction"),
                "σ̃(π̃e)D̃π̃(e) = π̃(σ(e)De)",
                json!({}),
                r,
                1.0 + fro_norm(e.realized()).powi(2) * fro_norm(t.d()).max(1.0),
                tol.operator_identity,
            );
            let kernel = fredholm_index(t, e)?.index;
            for &k in &b.scenario.degrees {
                let bar = chern::tau_bar_pairing(t, e, k)?.value;
                s.measured(
                    format!("{name}/k={k}"),
                    "⟨τ̄₂ₖ, [e]⟩ = ind D_{e,σ}",
                    json!({"tauBar": complex(bar), "kernelIndex": kernel}),
                    (bar - C64::new(kernel, 0.0)).norm(),
                    1.0,
                    tol.index,
                );
                if t.is_invertible() {
                    let tau = chern::chern_pairing(t, e, k)?.value;
                    s.measured(
                        format!("{name}/k={k}/tau"),
                        "⟨τ̄₂ₖ, [e]⟩ = ⟨τ₂ₖ, [e]⟩",
                        json!({"tauBar": complex(bar), "tau": complex(tau)}),
                        (bar - tau).norm(),
                        1.0,
                        tol.pairing,
                    );
                }
            }
            Ok(())
        });
    }
    Ok(())
}

fn polynomial_family(b: &Built, i: usize, spec: &FamilySpec) -> Result<HomotopyFamily> {
    let t = &b.triple;
    let n = t.dim();
    match spec {
        FamilySpec::Doubling => HomotopyFamily::doubling(&t.invertible_double()),
        FamilySpec::RandomPolynomial { pieces, norm, seed } => {
            let mut g = Generator::new(seed.unwrap_or_else(|| b.stream(200 + i as u64)));
            HomotopyFamily::new(t.clone(), g.hermite_family(t.space(), *pieces, *norm))
        }
        FamilySpec::Explicit { pieces } => {
            let mut out = Vec::with_capacity(pieces.len());
            for p in pieces {
                let mut coefficients = Vec::with_capacity(p.coefficients.len());
                for (j, c) in p.coefficients.iter().enumerate() {
                    let m = scenario::to_matrix(c, n, &format!("coefficient {j}")).map_err(Error::InvalidFamily)?;
                    coefficients.push(m);
                }
                out.push(PolynomialPiece { start: p.start, end: p.end, coefficients });
            }
            HomotopyFamily::new(t.clone(), out)
        }
    }
}

fn homotopy(b: &Built, s: &mut Sink) -> Result<()> {
    let Some(h) = &b.scenario.homotopy else {
        s.skipped("families", "scenario has no homotopy section");
        return Ok(());
    };
    if no_idempotents(b, s) {
        return Ok(());
    }
    let tol = &b.tolerances;
    let t = &b.triple;
    let selected: Vec<&(String, Idempotent)> =
        b.idempotents.iter().filter(|(n, _)| h.idempotents.is_empty() || h.idempotents.contains(n)).collect();
    for (i, spec) in h.families.iter().enumerate() {
        let label = match spec {
            FamilySpec::Doubling => "doubling".to_string(),
            FamilySpec::RandomPolynomial { .. } => format!("polynomial-{i}"),
            FamilySpec::Explicit { .. } => format!("explicit-{i}"),
        };
        let doubling = matches!(spec, FamilySpec::Doubling);
        if doubling && !t.is_invertible() {
            s.skipped(label, "the doubling path starts at diag(D, −D) and needs invertible D");
            continue;
        }
        let family = match polynomial_family(b, i, spec) {
            Ok(f) => f,
            Err(e) => {
                s.error(label, &e);
                continue;
            }
        };
        let doubled = t.invertible_double();
        for (name, e) in &selected {
            for &k in &h.degrees {
                let subject = format!("{label}/{name}/k={k}");
                s.attempt(&subject.clone(), |s| {
                    let pe = if doubling { e.embedded(&doubled)? } else { e.clone() };
                    let sampler = b.sampler.derive(300 + i as u64);
                    let rep = chern::homotopy_invariance_check(&family, &pe, k, &sampler, b.scenario.samples, h.panels, h.grid)?;
                    let pairings: Vec<f64> = rep.pairings.iter().map(|p| p.1).collect();
                    s.measured(
                        format!("{subject}/drift"),
                        "t ↦ ⟨τ₂ₖ(D_t), [e]⟩ is constant",
                        json!({"grid": h.grid, "pairings": pairings, "minSingular": rep.min_singular}),
                        rep.pairing_drift,
                        1.0,
                        tol.drift,
                    );
                    s.measured(
                        format!("{subject}/transgression"),
                        rep.transgression.formula,
                        json!({"panels": rep.panels, "absResidual": rep.transgression.residual, "absScale": rep.transgression.scale}),
                        rep.transgression.ratio,
                        1.0,
                        tol.transgression,
                    );
                    s.decided(
                        format!("{subject}/decay"),
                        "Simpson error falls ≥ 8× when panels double",
                        json!({"coarse": rep.coarse_error, "fine": rep.fine_error, "ratio": rep.decay_ratio}),
                        rep.fine_error,
                        rep.coarse_error,
                        1.0 / tol.decay,
                        rep.decay_ratio >= tol.decay,
                    );
                    s.measured(
                        format!("{subject}/b-eta"),
                        rep.b_eta.formula,
                        json!({"absResidual": rep.b_eta.residual, "absScale": rep.b_eta.scale}),
                        rep.b_eta.ratio,
                        1.0,
                        tol.transgression,
                    );
                    if doubling {
                        let tau = chern::chern_pairing(t, e, k)?.value.re;
                        let bar = chern::tau_bar_pairing(t, e, k)?.value.re;
                        let p0 = pairings[0];
                        let p1 = pairings[pairings.len() - 1];
                        s.measured(
                            format!("{subject}/endpoints"),
                            "⟨τ₂ₖ(D̃₀), [π̃e]⟩ = ⟨τ₂ₖ, [e]⟩, ⟨τ₂ₖ(D̃), [π̃e]⟩ = ⟨τ̄₂ₖ, [e]⟩",
                            json!({"start": p0, "end": p1, "tau": tau, "tauBar": bar}),
                            (p0 - tau).abs().max((p1 - bar).abs()),
                            1.0,
                            tol.pairing,
                        );
                    }
                    Ok(())
                });
            }
        }
    }
    Ok(())
}

/// Two random one-form entries `a[D, b]_σ` scaled to operator norm `strength`.
fn random_one_form(b: &Built, q: usize, tag: u64, strength: f64) -> Vec<OneFormTerm> {
    let t = &b.triple;
    let elems = b.sampler.derive(tag).sample(t.algebra(), 4);
    (0..2)
        .map(|j| {
            let h = b.stream(tag * 8 + j as u64);
            let (i, jj) = ((h % q as u64) as usize, ((h >> 32) % q as u64) as usize);
            let bb = elems[2 * j + 1].clone();
            let norm = linalg::op_norm(&elems[2 * j]) * linalg::op_norm(&t.twisted_commutator(&bb));
            let a = if norm > 0.0 { elems[2 * j].map(|z| z * (strength / norm)) } else { elems[2 * j].clone() };
            OneFormTerm { i, j: jj, a, b: bb }
        })
        .collect()
}

fn connections_suite(b: &Built, s: &mut Sink) -> Result<()> {
    if b.scenario.connections.is_empty() {
        s.skipped("connections", "scenario declares no connections");
        return Ok(());
    }
    let t = &b.triple;
    let tol = &b.tolerances;
    let k = b.scenario.degrees[0];
    for (ci, spec) in b.scenario.connections.iter().enumerate() {
        let name = &spec.idempotent;
        let Some(e) = b.idempotent(name) else {
            s.error(name.as_str(), &Error::InvalidConnection(format!("unknown idempotent {name:?}")));
            continue;
        };
        s.attempt(name, |s| {
            let module = ProjectiveModule::new(t, e)?;
            let (rank, dim) = module.metric_rank(t.rank_tol())?;
            let roundtrip = module.roundtrip_residual();
            let gram = module.gram_defect();
            s.decided(
                format!("{name}/module"),
                "U_eU_e⁻¹ = 1, ⟨eξ, eη⟩ nondegenerate",
                json!({"roundtrip": roundtrip, "gramDefect": gram, "metricRank": rank, "dimension": dim}),
                roundtrip.max(gram),
                1.0,
                tol.operator_identity,
                roundtrip <= tol.operator_identity && gram <= tol.operator_identity && rank == dim,
            );
            let grass = connections::grassmannian_connection(module.clone());
            let eq = connections::grassmannian_equality_residual(t, &grass)?;
            s.measured(format!("{name}/grassmannian"), "D_∇₀ = σ(e)(D ⊗ 1) on eℋ^q", json!({}), eq, 1.0, tol.grassmannian);
            let mut conns = vec![("grassmannian".to_string(), grass)];
            for p in 0..spec.perturbations {
                let terms = random_one_form(b, e.q(), 600 + 64 * ci as u64 + p as u64, spec.strength);
                conns.push((format!("perturbed-{p}"), connections::perturbed_connection(module.clone(), terms)?));
            }
            for (label, conn) in &conns {
                let rep = connections::connection_index_theorem(t, conn, k)?;
                s.measured(
                    format!("{name}/{label}"),
                    "ind D_∇ = ind_{D,σ}[e] = ⟨Ch(D)_σ, [ℰ]⟩",
                    json!({"coupled": rep.coupled, "indexMap": rep.index_map, "pairing": complex(rep.pairing)}),
                    rep.disagreement,
                    1.0,
                    tol.index,
                );
            }
            Ok(())
        });
    }
    Ok(())
}

/// `2·index` as an exact integer, if within `tol` of one.
fn twice(index: f64, tol: f64) -> Option<i64> {
    let x = 2.0 * index;
    let r = x.round();
    ((x - r).abs() <= tol).then_some(r as i64)
}

fn ktheory_suite(b: &Built, s: &mut Sink) -> Result<()> {
    if no_idempotents(b, s) {
        return Ok(());
    }
    let t = &b.triple;
    let tol = b.tolerances.integrality;
    const CONJUGATIONS: usize = 10;
    for (ei, (name, e)) in b.idempotents.iter().enumerate() {
        s.attempt(name, |s| {
            let base = twice(fredholm_index(t, e)?.index, tol);
            let mut indices = Vec::with_capacity(CONJUGATIONS);
            let mut mismatches = 0usize;
            for j in 0..CONJUGATIONS {
                let sampler = b.sampler.derive(500 + 16 * ei as u64 + j as u64);
                let g = ktheory::random_invertible(t.algebra(), &sampler, e.q(), 0.5);
                let f = ktheory::conjugate(e, &g)?;
                let i = fredholm_index(t, &f)?.index;
                indices.push(i);
                if base.is_none() || twice(i, tol) != base {
                    mismatches += 1;
                }
            }
            s.decided(
                format!("{name}/conjugation"),
                "ind_{D,σ}[geg⁻¹] = ind_{D,σ}[e]",
                json!({"index": base.map(|x| x as f64 / 2.0), "conjugated": indices}),
                mismatches as f64,
                1.0,
                0.0,
                mismatches == 0,
            );
            Ok(())
        });
    }
    for (i, (a, e)) in b.idempotents.iter().enumerate() {
        for (c, f) in b.idempotents.iter().skip(i) {
            let subject = format!("{a}+{c}");
            s.attempt(&subject.clone(), |s| {
                let sum = ktheory::direct_sum(e, f)?;
                let ie = twice(fredholm_index(t, e)?.index, tol);
                let if_ = twice(fredholm_index(t, f)?.index, tol);
                let is = twice(fredholm_index(t, &sum)?.index, tol);
                let ok = matches!((ie, if_, is), (Some(x), Some(y), Some(z)) if x + y == z);
                s.decided(
                    format!("{subject}/direct-sum"),
                    "ind[e ⊕ f] = ind[e] + ind[f]",
                    json!({"e": ie.map(|x| x as f64 / 2.0), "f": if_.map(|x| x as f64 / 2.0), "sum": is.map(|x| x as f64 / 2.0)}),
                    if ok { 0.0 } else { 1.0 },
                    1.0,
                    0.0,
                    ok,
                );
                Ok(())
            });
        }
    }
    Ok(())
}

fn ribbon(b: &Built, s: &mut Sink) -> Result<()> {
    if no_idempotents(b, s) {
        return Ok(());
    }
    let t = &b.triple;
    let tol = &b.tolerances;
    if t.sigma().ribbon_square_root().is_err() {
        let mut halves = Vec::new();
        for (name, e) in &b.idempotents {
            let i = fredholm_index(t, e)?.index;
            if (i - i.round()).abs() > tol.integrality {
                halves.push(name.clone());
            }
        }
        s.skipped(
            "ribbon",
            &format!(
                "σ has no declared ribbon root; non-integer indices: {}",
                if halves.is_empty() { "none".into() } else { halves.join(", ") }
            ),
        );
        return Ok(());
    }
    for (name, e) in &b.idempotents {
        s.attempt(name, |s| {
            let c = ktheory::sigma_selfadjoint_conjugate(t, e)?;
            let ie = fredholm_index(t, e)?.index;
            let ip = fredholm_index(t, &c.p)?.index;
            s.decided(
                format!("{name}/conjugate"),
                "p² = p, σ(p)* = p, g⁻¹pg = e",
                json!({
                    "idempotent": c.idempotent_residual,
                    "sigmaSelfadjoint": c.sigma_selfadjoint_residual,
                    "conjugation": c.conjugation_residual,
                    "inverse": c.inverse_residual,
                    "bCondition": c.b_condition,
                    "indexE": ie,
                    "indexP": ip,
                }),
                c.worst(),
                1.0,
                tol.ribbon,
                c.worst() <= tol.ribbon && ie == ip,
            );
            let bar = chern::tau_bar_pairing(t, e, b.scenario.degrees[0])?.value;
            let off = (ie - ie.round()).abs().max((bar.re - bar.re.round()).abs()).max(bar.im.abs());
            s.measured(
                format!("{name}/integrality"),
                "ribbon σ: ind D_{e,σ} ∈ ℤ",
                json!({"index": ie, "tauBar": complex(bar)}),
                off,
                1.0,
                tol.integrality,
            );
            Ok(())
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_are_unique_and_traceable() {
        let mut names: Vec<_> = SUITES.iter().map(|s| s.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), SUITES.len());
        let table = traceability_table();
        for s in SUITES {
            assert!(table.contains(s.operation), "{}", s.name);
            assert!(!s.anchor.is_empty());
        }
    }

    #[test]
    fn twice_rounds_half_integers() {
        assert_eq!(twice(0.5, 1e-8), Some(1));
        assert_eq!(twice(-1.0, 1e-8), Some(-2));
        assert_eq!(twice(0.3, 1e-8), None);
    }
}
