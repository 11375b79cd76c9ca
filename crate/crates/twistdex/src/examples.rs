//! The curated scenario corpus written by `--emit-examples`.

use std::path::{Path, PathBuf};

use crate::scenario::*;

fn scenario(name: &str, description: &str, exercises: &[&str], seed: u64, plus: usize, minus: usize) -> Scenario {
    Scenario {
        format_version: FORMAT_VERSION,
        name: name.into(),
        description: description.into(),
        exercises: exercises.iter().map(|s| s.to_string()).collect(),
        seed,
        space: SpaceSpec { plus, minus },
        algebra: AlgebraSpec::FullEven,
        dirac: DiracSpec::RandomOddSelfadjoint { spread: 0.3 },
        automorphism: AutomorphismSpec::Identity,
        conformal: None,
        idempotents: Vec::new(),
        connections: Vec::new(),
        homotopy: None,
        checks: Vec::new(),
        tolerances: Tolerances::default(),
        degrees: vec![1],
        samples: 8,
    }
}

fn checks(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn conjugated(name: &str, q: usize, pattern: &[u8]) -> IdempotentSpec {
    IdempotentSpec {
        name: name.into(),
        q,
        source: IdempotentSource::Conjugated { pattern: pattern.iter().map(|&b| b == 1).collect(), strength: 0.4 },
    }
}

fn coordinate(name: &str, q: usize, pattern: &[u8]) -> IdempotentSpec {
    IdempotentSpec { name: name.into(), q, source: IdempotentSource::Coordinate { pattern: pattern.iter().map(|&b| b == 1).collect() } }
}

fn real(rows: &[&[f64]]) -> MatrixSpec {
    rows.iter().map(|r| r.iter().map(|&x| Complex::Real(x)).collect()).collect()
}

fn diag(d: &[f64]) -> MatrixSpec {
    (0..d.len()).map(|i| (0..d.len()).map(|j| Complex::Real(if i == j { d[i] } else { 0.0 })).collect()).collect()
}

fn random_positive() -> ElementSpec {
    ElementSpec::RandomPositive { spread: 0.2 }
}

const INDEX_SUITES: &[&str] = &[
    "validate",
    "index",
    "index-formula",
    "trace-formula",
    "adjoint",
    "parametrix",
    "cocycles",
    "pairing",
    "tau-bar",
    "ktheory",
    "ribbon",
];

/// `ℂ` acting on `ℂ ⊕ ℂ` with `D = [[0, 1], [1, 0]]`.
pub fn minimal() -> Scenario {
    let mut s = scenario("minimal", "Scalars on C+C with the flip operator.", &["index of the unit vanishes: ind D_{1,id} = 0"], 0, 1, 1);
    s.algebra = AlgebraSpec::Scalars;
    s.dirac = DiracSpec::Explicit { matrix: real(&[&[0.0, 1.0], &[1.0, 0.0]]) };
    s.idempotents = vec![IdempotentSpec { name: "one".into(), q: 1, source: IdempotentSource::Identity }];
    s.checks = checks(&["validate", "index", "index-formula", "trace-formula", "adjoint", "parametrix", "tau-bar", "ktheory", "ribbon"]);
    s
}

pub fn identity_twist() -> Scenario {
    let mut s = scenario(
        "identity-twist",
        "Untwisted triple over M3 + M3 with skew idempotents.",
        &["ind D_e = ½Str((D⁻¹[D,e])^{2k+1}) = ⟨τ₂ₖ, [e]⟩ for k = 1, 2, 3", "ind T = Tr((1 − ST)^N) − Tr((1 − TS)^N)"],
        11,
        3,
        3,
    );
    s.idempotents = vec![conjugated("p", 1, &[1, 1, 0, 1, 0, 0]), conjugated("r", 2, &[1, 0, 1, 0, 0, 0, 1, 1, 0, 0, 1, 0])];
    s.checks = checks(INDEX_SUITES);
    s.degrees = vec![1, 2, 3];
    s
}

pub fn conformal_inner() -> Scenario {
    let mut s = scenario(
        "conformal-inner",
        "Conformal deformation (A, H, kDk) twisted by Ad(k²).",
        &[
            "[kDk, a]_σ = k[D, kak⁻¹]k with σ(a) = k²ak⁻²",
            "index formulas for an inner (ribbon) twist",
            "ind D_∇ = ind_{D,σ}[e] = ⟨Ch(D)_σ, [ℰ]⟩",
        ],
        21,
        2,
        2,
    );
    s.conformal = Some(ConformalSpec { k: random_positive() });
    s.idempotents = vec![conjugated("e", 1, &[1, 0, 1, 1]), conjugated("f", 2, &[1, 0, 0, 0, 1, 0, 1, 0])];
    s.connections = vec![ConnectionSpec { idempotent: "e".into(), perturbations: 5, strength: 0.3 }];
    let mut c = vec!["conformal"];
    c.extend_from_slice(INDEX_SUITES);
    c.push("connections");
    s.checks = checks(&c);
    s.degrees = vec![1, 2, 3];
    s
}

pub fn inner_twist() -> Scenario {
    let mut s = scenario(
        "inner-twist",
        "Random D twisted by Ad(k²) without deforming D.",
        &["Fredholm index of D_{e,σ} for an inner automorphism", "cocycle relations of τ₂ₖ, φ and ψ"],
        31,
        2,
        2,
    );
    s.automorphism = AutomorphismSpec::Inner { k: random_positive() };
    s.idempotents = vec![conjugated("e", 1, &[1, 1, 1, 0]), conjugated("f", 2, &[0, 1, 1, 0, 1, 1, 0, 1])];
    s.checks = checks(INDEX_SUITES);
    s.degrees = vec![1, 2];
    s
}

/// `σ = Ad(h)` given only as a linear map, with a declared root.
pub fn linear_ribbon() -> Scenario {
    let mut s = scenario(
        "linear-ribbon",
        "Linear automorphism Ad(h) on M2 + M2 with declared ribbon root Ad(h^½).",
        &["ribbon σ: σ-selfadjoint conjugate p = geg⁻¹ and integer index", "index formulas for a linear twist"],
        41,
        2,
        2,
    );
    s.automorphism = AutomorphismSpec::Conjugation { h: random_positive(), declare_root: true };
    s.idempotents = vec![conjugated("e", 1, &[1, 0, 1, 1]), conjugated("f", 2, &[1, 1, 0, 0, 1, 0, 1, 0])];
    let mut c = INDEX_SUITES.to_vec();
    c.push("connections");
    s.checks = checks(&c);
    s.connections = vec![ConnectionSpec { idempotent: "f".into(), perturbations: 5, strength: 0.3 }];
    s.degrees = vec![1, 2, 3];
    s
}

/// The swap of `diag(1,1,0)` and `diag(0,0,1)`: not ribbon, half-integer index.
pub fn linear_swap() -> Scenario {
    let mut s = scenario(
        "linear-swap",
        "Non-ribbon linear twist swapping the two minimal projections of C + C on C² + C.",
        &["without a ribbon structure the index can be a half-integer: ind = ½", "⟨τ̄₂ₖ, [e]⟩ = ind D_{e,σ} for singular D"],
        51,
        2,
        1,
    );
    let b0 = diag(&[1.0, 1.0, 0.0]);
    let b1 = diag(&[0.0, 0.0, 1.0]);
    s.algebra = AlgebraSpec::Generated { generators: vec![b0.clone()] };
    s.dirac = DiracSpec::Explicit { matrix: real(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 2.0], &[1.0, 2.0, 0.0]]) };
    s.automorphism = AutomorphismSpec::Linear { basis: vec![b0.clone(), b1.clone()], images: vec![b1, b0], root: None };
    s.idempotents = vec![
        coordinate("e", 1, &[1, 1, 0]),
        coordinate("f", 1, &[0, 0, 1]),
        IdempotentSpec { name: "one".into(), q: 1, source: IdempotentSource::Identity },
    ];
    s.connections = vec![ConnectionSpec { idempotent: "e".into(), perturbations: 5, strength: 0.3 }];
    s.checks = checks(&["validate", "index", "adjoint", "pairing", "tau-bar", "connections", "ktheory", "ribbon"]);
    s
}

pub fn singular_dirac() -> Scenario {
    let mut s = scenario(
        "singular-dirac",
        "Rank-one D on C³ + C twisted by Ad(k²).",
        &["⟨τ̄₂ₖ, [e]⟩ = ind D_{e,σ} when D is not invertible", "cocycle relations on the invertible double"],
        61,
        3,
        1,
    );
    s.automorphism = AutomorphismSpec::Inner { k: random_positive() };
    s.idempotents = vec![conjugated("e", 1, &[1, 1, 0, 1]), conjugated("f", 2, &[1, 0, 0, 0, 0, 1, 1, 1])];
    s.connections = vec![ConnectionSpec { idempotent: "e".into(), perturbations: 5, strength: 0.3 }];
    s.checks =
        checks(&["validate", "index", "index-formula", "adjoint", "cocycles", "pairing", "tau-bar", "connections", "ktheory", "ribbon"]);
    s.degrees = vec![1, 2];
    s
}

pub fn zero_dirac() -> Scenario {
    let mut s = scenario(
        "zero-dirac",
        "D = 0 on C³ + C over the diagonal algebra, twisted by a diagonal Ad(k²).",
        &["with D = 0 the index is ½(Str e + Str σ(e))", "⟨τ̄₂ₖ, [e]⟩ = ind D_{e,σ}"],
        71,
        3,
        1,
    );
    s.algebra = AlgebraSpec::Diagonal;
    s.dirac = DiracSpec::Zero;
    s.automorphism = AutomorphismSpec::Inner { k: ElementSpec::Explicit { matrix: diag(&[1.0, 2.0, 3.0, 0.5]) } };
    s.idempotents = vec![coordinate("e", 1, &[1, 1, 0, 1]), coordinate("g", 2, &[1, 0, 0, 1, 0, 1, 1, 0])];
    s.connections = vec![ConnectionSpec { idempotent: "g".into(), perturbations: 5, strength: 0.3 }];
    s.checks = checks(&["validate", "index", "adjoint", "pairing", "tau-bar", "connections", "ktheory", "ribbon"]);
    s
}

pub fn doubling_homotopy() -> Scenario {
    let mut s = scenario(
        "doubling-homotopy",
        "The path D̃_t = D̃₀ + tJ on the invertible double of a conformally twisted triple.",
        &["⟨τ₂ₖ(D̃_t), [e]⟩ is constant in t", "Bη = (2k+1)c_k⁻¹(τ₂ₖ(1) − τ₂ₖ(0)) and bη = 0"],
        81,
        2,
        2,
    );
    s.conformal = Some(ConformalSpec { k: random_positive() });
    s.idempotents = vec![conjugated("e", 1, &[1, 0, 1, 1])];
    s.homotopy =
        Some(HomotopySpec { families: vec![FamilySpec::Doubling], idempotents: Vec::new(), panels: 64, grid: 17, degrees: vec![1] });
    s.checks = checks(&["homotopy", "tau-bar"]);
    s.samples = 4;
    s
}

pub fn polynomial_homotopy() -> Scenario {
    let mut s = scenario(
        "polynomial-homotopy",
        "Three seeded C¹ piecewise-cubic paths D + V(t) under a ribbon linear twist.",
        &["homotopy invariance of ⟨τ₂ₖ(D_t), [e]⟩", "transgression converges at the Simpson rate"],
        91,
        2,
        2,
    );
    s.automorphism = AutomorphismSpec::Conjugation { h: random_positive(), declare_root: true };
    s.idempotents = vec![conjugated("e", 1, &[1, 1, 1, 0])];
    s.homotopy = Some(HomotopySpec {
        families: (1..=3).map(|pieces| FamilySpec::RandomPolynomial { pieces, norm: 0.15, seed: None }).collect(),
        idempotents: Vec::new(),
        panels: 64,
        grid: 17,
        degrees: vec![1],
    });
    s.checks = checks(&["validate", "homotopy"]);
    s.samples = 4;
    s
}

pub fn connections() -> Scenario {
    let mut s = scenario(
        "connections",
        "Grassmannian and perturbed σ-connections on eA^q for an inner twist.",
        &["D_∇₀ = D_{e,σ} for the Grassmannian connection", "ind D_∇ = ind_{D,σ}[e] = ⟨Ch(D)_σ, [ℰ]⟩"],
        101,
        2,
        2,
    );
    s.automorphism = AutomorphismSpec::Inner { k: random_positive() };
    s.idempotents = vec![conjugated("e", 1, &[1, 1, 0, 1]), conjugated("f", 2, &[1, 0, 0, 0, 1, 0, 1, 0])];
    s.connections = vec![
        ConnectionSpec { idempotent: "e".into(), perturbations: 5, strength: 0.3 },
        ConnectionSpec { idempotent: "f".into(), perturbations: 5, strength: 0.3 },
    ];
    s.checks = checks(&["index", "connections"]);
    s
}

pub fn corpus() -> Vec<Scenario> {
    vec![
        minimal(),
        identity_twist(),
        conformal_inner(),
        inner_twist(),
        linear_ribbon(),
        linear_swap(),
        singular_dirac(),
        zero_dirac(),
        doubling_homotopy(),
        polynomial_homotopy(),
        connections(),
    ]
}

/// Writes `<name>.json` for every corpus scenario.
pub fn emit(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for s in corpus() {
        let path = dir.join(format!("{}.json", s.name));
        std::fs::write(&path, s.to_json_pretty() + "\n")?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_valid_and_named() {
        let c = corpus();
        assert!(c.len() >= 8);
        for s in &c {
            s.validate().unwrap_or_else(|e| panic!("{}: {e}", s.name));
            assert!(!s.exercises.is_empty(), "{}", s.name);
            let again = Scenario::from_json(&s.to_json_pretty(), &s.name).unwrap();
            assert_eq!(again.to_json_pretty(), s.to_json_pretty());
        }
        let mut names: Vec<_> = c.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), c.len());
    }

    fn keys(v: &serde_json::Value, out: &mut Vec<String>) {
        match v {
            serde_json::Value::Object(m) => {
                for (k, x) in m {
                    out.push(k.clone());
                    keys(x, out);
                }
            }
            serde_json::Value::Array(a) => a.iter().for_each(|x| keys(x, out)),
            _ => {}
        }
    }

    #[test]
    fn field_names_are_camel_case() {
        for s in corpus() {
            let mut found = Vec::new();
            keys(&serde_json::to_value(&s).unwrap(), &mut found);
            assert!(found.iter().all(|k| !k.contains('_')), "{}: {found:?}", s.name);
        }
    }

    #[test]
    fn has_ribbon_and_non_ribbon_linear_cases() {
        let c = corpus();
        let linear_ribbon = c.iter().any(|s| matches!(s.automorphism, AutomorphismSpec::Conjugation { declare_root: true, .. }));
        let linear_plain = c.iter().any(|s| matches!(s.automorphism, AutomorphismSpec::Linear { root: None, .. }));
        assert!(linear_ribbon && linear_plain);
    }
}
