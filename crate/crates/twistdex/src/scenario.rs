//! Scenario files: serde model, validation and construction of core objects.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use twistdex_core::algebra::LinearAutomorphism;
use twistdex_core::generate::Generator;
use twistdex_core::ktheory::{self, BlockMatrix};
use twistdex_core::linalg::{self, c64};
use twistdex_core::{Automorphism, ElementSampler, GradedSpace, Idempotent, Mat, MatrixAlgebra, TwistedTriple};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{}: cannot read: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse { origin: String, line: usize, column: usize, message: String },
    #[error("{origin}: {message}")]
    Invalid { origin: String, message: String },
    #[error("{origin}: cannot build scenario: {source}")]
    Build {
        origin: String,
        #[source]
        source: twistdex_core::Error,
    },
}

impl ScenarioError {
    /// Parse and validation problems are input errors; build failures are numeric.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, ScenarioError::Build { .. })
    }
}

/// A complex number written `[re, im]` or as a bare real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Pair([f64; 2]),
    Real(f64),
}

impl Complex {
    pub fn value(self) -> twistdex_core::C64 {
        match self {
            Complex::Pair([re, im]) => c64(re, im),
            Complex::Real(re) => c64(re, 0.0),
        }
    }
}

/// Row-major nested arrays.
pub type MatrixSpec = Vec<Vec<Complex>>;

pub fn matrix_spec(m: &Mat) -> MatrixSpec {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let z = m[(i, j)];
                    if z.im == 0.0 {
                        Complex::Real(z.re)
                    } else {
                        Complex::Pair([z.re, z.im])
                    }
                })
                .collect()
        })
        .collect()
}

/// An `n×n` matrix from its spec; the error names `what`.
pub fn to_matrix(spec: &MatrixSpec, n: usize, what: &str) -> Result<Mat, String> {
    if spec.len() != n || spec.iter().any(|r| r.len() != n) {
        return Err(format!("{what} must be a {n}×{n} matrix"));
    }
    let m = Mat::from_fn(n, n, |i, j| spec[i][j].value());
    if !linalg::is_finite(&m) {
        return Err(format!("{what} has non-finite entries"));
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Scenario {
    pub format_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Statements this scenario exercises, in words.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exercises: Vec<String>,
    pub seed: u64,
    pub space: SpaceSpec,
    #[serde(default)]
    pub algebra: AlgebraSpec,
    pub dirac: DiracSpec,
    #[serde(default)]
    pub automorphism: AutomorphismSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub idempotents: Vec<IdempotentSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub connections: Vec<ConnectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homotopy: Option<HomotopySpec>,
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Chern degrees `k` used by the index-formula, cocycle and pairing suites.
    #[serde(default = "default_degrees")]
    pub degrees: Vec<usize>,
    /// Sampled algebra elements or tuples per identity.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_degrees() -> Vec<usize> {
    vec![1]
}

fn default_samples() -> usize {
    8
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SpaceSpec {
    pub plus: usize,
    pub minus: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgebraSpec {
    Scalars,
    Diagonal,
    #[default]
    FullEven,
    Generated {
        generators: Vec<MatrixSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiracSpec {
    Explicit {
        matrix: MatrixSpec,
    },
    RandomOddSelfadjoint {
        #[serde(default = "default_spread")]
        spread: f64,
    },
    Zero,
}

fn default_spread() -> f64 {
    0.3
}

/// An even positive element, given or drawn as `1 + spread·Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ElementSpec {
    Explicit {
        matrix: MatrixSpec,
    },
    RandomPositive {
        #[serde(default = "default_element_spread")]
        spread: f64,
    },
}

fn default_element_spread() -> f64 {
    0.2
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AutomorphismSpec {
    #[default]
    Identity,
    /// `σ(a) = k² a k⁻²`.
    Inner { k: ElementSpec },
    /// σ given on a basis of 𝒜, with an optional declared square root.
    Linear {
        basis: Vec<MatrixSpec>,
        images: Vec<MatrixSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        root: Option<Vec<MatrixSpec>>,
    },
    /// `σ = Ad(h)` presented as a linear map on the algebra generators,
    /// with root `Ad(h^{1/2})` when `declareRoot` is set.
    Conjugation {
        h: ElementSpec,
        #[serde(default, rename = "declareRoot")]
        declare_root: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConformalSpec {
    pub k: ElementSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IdempotentSpec {
    pub name: String,
    #[serde(default = "one")]
    pub q: usize,
    pub source: IdempotentSource,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum IdempotentSource {
    Identity,
    /// Diagonal projection onto the flagged basis vectors of `ℋ^q`.
    Coordinate {
        pattern: Vec<bool>,
    },
    /// `q×q` matrix of `n×n` entries.
    Explicit {
        entries: Vec<Vec<MatrixSpec>>,
    },
    /// A coordinate projection conjugated by a random invertible in `M_q(𝒜)`.
    Conjugated {
        pattern: Vec<bool>,
        #[serde(default = "default_strength")]
        strength: f64,
    },
}

fn default_strength() -> f64 {
    0.4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConnectionSpec {
    pub idempotent: String,
    /// Number of randomly perturbed connections besides the Grassmannian one.
    #[serde(default)]
    pub perturbations: usize,
    #[serde(default = "default_connection_strength")]
    pub strength: f64,
}

fn default_connection_strength() -> f64 {
    0.3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct HomotopySpec {
    pub families: Vec<FamilySpec>,
    /// Idempotents paired along the path; all of them when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub idempotents: Vec<String>,
    #[serde(default = "default_panels")]
    pub panels: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_degrees")]
    pub degrees: Vec<usize>,
}

fn default_panels() -> usize {
    64
}

fn default_grid() -> usize {
    17
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `D̃_t = D̃₀ + tJ` on the invertible double.
    Doubling,
    /// Seeded C¹ piecewise-cubic `D + V(t)`.
    RandomPolynomial {
        pieces: usize,
        norm: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// `D + Σ cᵢ (t − start)ⁱ` on each piece.
    Explicit { pieces: Vec<PieceSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PieceSpec {
    pub start: f64,
    pub end: f64,
    pub coefficients: Vec<MatrixSpec>,
}

/// Tolerances; any subset may be overridden in a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative singular-value cutoff for ranks and kernels.
    pub rank: f64,
    pub structural: f64,
    pub automorphism: f64,
    pub index: f64,
    pub trace_formula: f64,
    pub operator_identity: f64,
    pub cocycle: f64,
    pub pairing: f64,
    pub transgression: f64,
    pub decay: f64,
    pub drift: f64,
    pub grassmannian: f64,
    pub ribbon: f64,
    pub conformal: f64,
    pub integrality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: linalg::DEFAULT_RANK_TOL,
            structural: 1e-12,
            automorphism: 1e-9,
            index: 1e-8,
            trace_formula: 1e-8,
            operator_identity: 1e-10,
            cocycle: 1e-8,
            pairing: 1e-8,
            transgression: 1e-6,
            decay: 8.0,
            drift: 1e-8,
            grassmannian: 1e-10,
            ribbon: 1e-9,
            conformal: 1e-10,
            integrality: 1e-8,
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| {
            let (line, column) = (e.line().max(1), e.column().max(1));
            ScenarioError::Parse { origin: origin.to_string(), line, column, message: e.to_string() }
        })?;
        s.validate().map_err(|message| ScenarioError::Invalid { origin: origin.to_string(), message })?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization is infallible")
    }

    pub fn dim(&self) -> usize {
        self.space.plus + self.space.minus
    }

    /// Structural checks that need no numerics.
    pub fn validate(&self) -> Result<(), String> {
        if self.format_version != FORMAT_VERSION {
            return Err(format!("unsupported formatVersion {} (expected {FORMAT_VERSION})", self.format_version));
        }
        if self.name.trim().is_empty() {
            return Err("name must be nonempty".into());
        }
        let n = self.dim();
        if n == 0 {
            return Err("space must have positive dimension".into());
        }
        if self.checks.is_empty() {
            return Err("checks must name at least one suite".into());
        }
        for c in &self.checks {
            if crate::checks::suite(c).is_none() {
                return Err(format!("unknown check suite {c:?}; see --list-checks"));
            }
        }
        if self.degrees.is_empty() || self.degrees.contains(&0) {
            return Err("degrees must be a nonempty list of k ≥ 1".into());
        }
        if self.samples == 0 {
            return Err("samples must be positive".into());
        }
        if self.conformal.is_some() && self.automorphism != AutomorphismSpec::Identity {
            return Err("conformal deformation requires the identity automorphism".into());
        }
        let mut names = BTreeSet::new();
        for e in &self.idempotents {
            if !names.insert(e.name.as_str()) {
                return Err(format!("duplicate idempotent name {:?}", e.name));
            }
            if e.q == 0 {
                return Err(format!("idempotent {:?}: q must be positive", e.name));
            }
            match &e.source {
                IdempotentSource::Coordinate { pattern } | IdempotentSource::Conjugated { pattern, .. } => {
                    if pattern.len() != n * e.q {
                        return Err(format!("idempotent {:?}: pattern needs {} flags, got {}", e.name, n * e.q, pattern.len()));
                    }
                }
                IdempotentSource::Explicit { entries } => {
                    if entries.len() != e.q || entries.iter().any(|r| r.len() != e.q) {
                        return Err(format!("idempotent {:?}: entries must be {q}×{q}", e.name, q = e.q));
                    }
                }
                IdempotentSource::Identity => {}
            }
        }
        for c in &self.connections {
            if !names.contains(c.idempotent.as_str()) {
                return Err(format!("connection refers to unknown idempotent {:?}", c.idempotent));
            }
        }
        if let Some(h) = &self.homotopy {
            if h.families.is_empty() {
                return Err("homotopy needs at least one family".into());
            }
            if h.panels == 0 || h.grid < 2 {
                return Err("homotopy needs panels ≥ 1 and grid ≥ 2".into());
            }
            if h.degrees.is_empty() || h.degrees.contains(&0) {
                return Err("homotopy degrees must be k ≥ 1".into());
            }
            for name in &h.idempotents {
                if !names.contains(name.as_str()) {
                    return Err(format!("homotopy refers to unknown idempotent {name:?}"));
                }
            }
        }
        Ok(())
    }

    /// Builds every core object. `seed` replaces the file's seed when given.
    pub fn build(&self, seed: Option<u64>, rank_tol: Option<f64>) -> Result<Built, ScenarioError> {
        let origin = self.name.clone();
        let invalid = |message: String| ScenarioError::Invalid { origin: origin.clone(), message };
        let core = |source: twistdex_core::Error| ScenarioError::Build { origin: origin.clone(), source };

        let seed = seed.unwrap_or(self.seed);
        let mut tolerances = self.tolerances;
        if let Some(tol) = rank_tol {
            tolerances.rank = tol;
        }
        let n = self.dim();
        let space = GradedSpace::new(self.space.plus, self.space.minus).map_err(core)?;
        let algebra = match &self.algebra {
            AlgebraSpec::Scalars => MatrixAlgebra::scalars(space.clone()),
            AlgebraSpec::Diagonal => MatrixAlgebra::diagonal(space.clone()),
            AlgebraSpec::FullEven => MatrixAlgebra::full_even(space.clone()),
            AlgebraSpec::Generated { generators } => {
                let gens = generators
                    .iter()
                    .enumerate()
                    .map(|(i, g)| to_matrix(g, n, &format!("generator {i}")))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(&invalid)?;
                MatrixAlgebra::new(space.clone(), gens).map_err(core)?
            }
        };

        let mut dirac_gen = Generator::new(stream(seed, 1));
        let d = match &self.dirac {
            DiracSpec::Explicit { matrix } => to_matrix(matrix, n, "dirac.matrix").map_err(&invalid)?,
            DiracSpec::RandomOddSelfadjoint { spread } => dirac_gen.odd_dirac(&space, *spread),
            DiracSpec::Zero => linalg::zeros(n, n),
        };

        let mut twist_gen = Generator::new(stream(seed, 2));
        let mut element = |spec: &ElementSpec, what: &str| -> Result<Mat, ScenarioError> {
            match spec {
                ElementSpec::Explicit { matrix } => to_matrix(matrix, n, what).map_err(&invalid),
                ElementSpec::RandomPositive { spread } => Ok(twist_gen.positive_even(&space, *spread)),
            }
        };
        let sigma = match &self.automorphism {
            AutomorphismSpec::Identity => Automorphism::Identity,
            AutomorphismSpec::Inner { k } => Automorphism::inner(&space, element(k, "automorphism.k")?).map_err(core)?,
            AutomorphismSpec::Linear { basis, images, root } => {
                let read = |ms: &Vec<MatrixSpec>, what: &str| {
                    ms.iter()
                        .enumerate()
                        .map(|(i, m)| to_matrix(m, n, &format!("{what}[{i}]")))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(&invalid)
                };
                let mut lin = LinearAutomorphism::new(read(basis, "basis")?, read(images, "images")?).map_err(core)?;
                if let Some(r) = root {
                    lin = lin.with_root(read(r, "root")?).map_err(core)?;
                }
                Automorphism::Linear(lin)
            }
            AutomorphismSpec::Conjugation { h, declare_root } => {
                let h = element(h, "automorphism.h")?;
                conjugation_automorphism(&algebra, &h, *declare_root).map_err(core)?
            }
        };
        let conformal_k = match &self.conformal {
            Some(c) => Some(element(&c.k, "conformal.k")?),
            None => None,
        };

        let base = TwistedTriple::new(algebra, d, sigma).map_err(core)?.with_rank_tol(tolerances.rank).map_err(core)?;
        let (triple, undeformed) = match &conformal_k {
            Some(k) => (base.conformal_deformation(k).map_err(core)?, Some(base)),
            None => (base, None),
        };

        let sampler = ElementSampler::new(stream(seed, 3));
        let mut idempotents = Vec::with_capacity(self.idempotents.len());
        for (i, spec) in self.idempotents.iter().enumerate() {
            let e = build_idempotent(&triple, spec, &sampler.derive(100 + i as u64)).map_err(|err| match err {
                BuildIdempotent::Input(message) => invalid(format!("idempotent {:?}: {message}", spec.name)),
                BuildIdempotent::Core(source) => core(source),
            })?;
            idempotents.push((spec.name.clone(), e));
        }

        Ok(Built { scenario: self.clone(), seed, tolerances, triple, undeformed, conformal_k, sampler, idempotents })
    }
}

/// The objects a scenario describes, ready for the check suites.
#[derive(Clone, Debug)]
pub struct Built {
    pub scenario: Scenario,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub triple: TwistedTriple,
    /// The triple before conformal deformation, if one was applied.
    pub undeformed: Option<TwistedTriple>,
    pub conformal_k: Option<Mat>,
    pub sampler: ElementSampler,
    pub idempotents: Vec<(String, Idempotent)>,
}

impl Built {
    pub fn idempotent(&self, name: &str) -> Option<&Idempotent> {
        self.idempotents.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    /// Independent deterministic stream for a component of the run.
    pub fn stream(&self, tag: u64) -> u64 {
        stream(self.seed, tag)
    }
}

/// splitmix64 of `seed ⊕ tag`.
pub fn stream(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn conjugation_automorphism(alg: &MatrixAlgebra, h: &Mat, declare_root: bool) -> twistdex_core::Result<Automorphism> {
    let space = alg.space();
    if space.evenness_defect(h) > 1e-12 {
        return Err(twistdex_core::Error::InvalidAutomorphism("h is not even".into()));
    }
    linalg::positive_definite_eigen(h, 1e-8)?;
    let h_inv = linalg::inverse(h)?;
    let mut basis: Vec<Mat> = vec![alg.unit()];
    basis.extend(alg.generators().iter().cloned());
    let basis = independent(basis);
    let images = basis.iter().map(|b| h * b * &h_inv).collect();
    let mut lin = LinearAutomorphism::new(basis.clone(), images)?;
    if declare_root {
        let r = linalg::hermitian_sqrt(h)?;
        let r_inv = linalg::inverse(&r)?;
        lin = lin.with_root(basis.iter().map(|b| &r * b * &r_inv).collect())?;
    }
    Ok(Automorphism::Linear(lin))
}

/// Greedy linearly independent subset.
fn independent(ms: Vec<Mat>) -> Vec<Mat> {
    let mut kept: Vec<Mat> = Vec::new();
    for m in ms {
        let mut trial = kept.clone();
        trial.push(m.clone());
        let n = m.nrows();
        let flat = Mat::from_fn(n * n, trial.len(), |r, c| trial[c][(r % n, r / n)]);
        if linalg::numerical_rank(&flat, linalg::DEFAULT_RANK_TOL).unwrap_or(0) == trial.len() {
            kept.push(m);
        }
    }
    kept
}

enum BuildIdempotent {
    Input(String),
    Core(twistdex_core::Error),
}

impl From<twistdex_core::Error> for BuildIdempotent {
    fn from(e: twistdex_core::Error) -> Self {
        BuildIdempotent::Core(e)
    }
}

fn build_idempotent(t: &TwistedTriple, spec: &IdempotentSpec, sampler: &ElementSampler) -> Result<Idempotent, BuildIdempotent> {
    let n = t.dim();
    let q = spec.q;
    Ok(match &spec.source {
        IdempotentSource::Identity => Idempotent::identity(n, q),
        IdempotentSource::Coordinate { pattern } => Idempotent::coordinate(t.space(), q, pattern)?,
        IdempotentSource::Explicit { entries } => {
            let mut rows = Vec::with_capacity(q);
            for (i, row) in entries.iter().enumerate() {
                let mut r = Vec::with_capacity(q);
                for (j, m) in row.iter().enumerate() {
                    r.push(to_matrix(m, n, &format!("entry ({i}, {j})")).map_err(BuildIdempotent::Input)?);
                }
                rows.push(r);
            }
            Idempotent::new(BlockMatrix::from_entries(n, &rows)?, t.space())?
        }
        IdempotentSource::Conjugated { pattern, strength } => {
            let e = Idempotent::coordinate(t.space(), q, pattern)?;
            let g = ktheory::random_invertible(t.algebra(), sampler, q, *strength);
            ktheory::conjugate(&e, &g)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "formatVersion": 1,
        "name": "minimal",
        "seed": 0,
        "space": {"plus": 1, "minus": 1},
        "algebra": {"kind": "scalars"},
        "dirac": {"kind": "explicit", "matrix": [[0, 1], [[1, 0], 0]]},
        "idempotents": [{"name": "one", "source": {"kind": "identity"}}],
        "checks": ["validate", "index"]
    }"#;

    #[test]
    fn parses_mixed_complex_notation() {
        let s = Scenario::from_json(MINIMAL, "minimal.json").unwrap();
        let b = s.build(None, None).unwrap();
        assert_eq!(b.triple.d()[(0, 1)], c64(1.0, 0.0));
        assert_eq!(b.triple.d()[(1, 0)], c64(1.0, 0.0));
        assert_eq!(b.tolerances, Tolerances::default());
    }

    #[test]
    fn reports_location_of_syntax_errors() {
        let broken = MINIMAL.replace("\"seed\": 0,", "\"seed\": 0");
        match Scenario::from_json(&broken, "x.json") {
            Err(ScenarioError::Parse { line, column, .. }) => {
                assert_eq!(line, 5);
                assert!(column >= 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_suites_and_bad_patterns() {
        let bad = MINIMAL.replace("\"index\"", "\"nonsense\"");
        assert!(matches!(Scenario::from_json(&bad, "x"), Err(ScenarioError::Invalid { .. })));
        let bad = MINIMAL.replace("{\"kind\": \"identity\"}", "{\"kind\": \"coordinate\", \"pattern\": [true]}");
        assert!(matches!(Scenario::from_json(&bad, "x"), Err(ScenarioError::Invalid { .. })));
    }

    #[test]
    fn roundtrips_through_json() {
        let s = Scenario::from_json(MINIMAL, "m").unwrap();
        let again = Scenario::from_json(&s.to_json_pretty(), "m").unwrap();
        assert_eq!(again.to_json_pretty(), s.to_json_pretty());
    }

    #[test]
    fn conjugation_twist_has_declared_root() {
        let mut s = Scenario::from_json(MINIMAL, "m").unwrap();
        s.space = SpaceSpec { plus: 2, minus: 2 };
        s.algebra = AlgebraSpec::FullEven;
        s.dirac = DiracSpec::RandomOddSelfadjoint { spread: 0.3 };
        s.automorphism = AutomorphismSpec::Conjugation { h: ElementSpec::RandomPositive { spread: 0.2 }, declare_root: true };
        s.idempotents.clear();
        let b = s.build(Some(4), None).unwrap();
        assert!(b.triple.sigma().ribbon_square_root().is_ok());
        assert!(b.triple.validate(&b.sampler, 4).passed());
    }

    #[test]
    fn streams_differ() {
        assert_ne!(stream(1, 1), stream(1, 2));
        assert_ne!(stream(1, 1), stream(2, 1));
    }
}
