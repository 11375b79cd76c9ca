//! Unital *-algebras of even matrices, their automorphisms σ, ribbon square
//! roots and seeded sampling of algebra elements.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, fro_norm, GradedOperator, GradedSpace, Mat};

/// Defect tolerance for generator evenness.
const EVEN_TOL: f64 = 1e-12;

/// A unital algebra given by even generators on a graded space.
///
/// The unit is always a member. Membership of arbitrary matrices is never
/// decided; identities are checked on sampled words in the generators.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    space: GradedSpace,
    generators: Vec<Mat>,
}

impl MatrixAlgebra {
    pub fn new(space: GradedSpace, generators: Vec<Mat>) -> Result<Self> {
        let n = space.dim();
        for (i, g) in generators.iter().enumerate() {
            if g.nrows() != n || g.ncols() != n {
                return Err(Error::Dimension(format!("generator {i} is {}×{}, expected {n}×{n}", g.nrows(), g.ncols())));
            }
            linalg::ensure_finite(g)?;
            let defect = space.evenness_defect(g);
            if defect > EVEN_TOL {
                return Err(Error::Domain(format!("generator {i} is not even (defect {defect:.3e})")));
            }
        }
        Ok(Self { space, generators })
    }

    /// `ℂ·1`.
    pub fn scalars(space: GradedSpace) -> Self {
        Self { space, generators: Vec::new() }
    }

    /// All even matrices `M_{n⁺}(ℂ) ⊕ M_{n⁻}(ℂ)`, generated by elementary matrices.
    pub fn full_even(space: GradedSpace) -> Self {
        let n = space.dim();
        let mut generators = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if space.signs()[i] == space.signs()[j] {
                    let mut e = linalg::zeros(n, n);
                    e[(i, j)] = c64(1.0, 0.0);
                    generators.push(e);
                }
            }
        }
        Self { space, generators }
    }

    /// Diagonal matrices.
    pub fn diagonal(space: GradedSpace) -> Self {
        let n = space.dim();
        let generators = (0..n)
            .map(|i| {
                let mut e = linalg::zeros(n, n);
                e[(i, i)] = c64(1.0, 0.0);
                e
            })
            .collect();
        Self { space, generators }
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn generators(&self) -> &[Mat] {
        &self.generators
    }

    pub fn unit(&self) -> Mat {
        linalg::identity(self.dim())
    }
}

/// `σ(a) = k² a k⁻²` for an even positive invertible `k`.
#[derive(Clone, Debug)]
pub struct InnerTwist {
    k: Mat,
    k2: Mat,
    k2_inv: Mat,
}

impl InnerTwist {
    pub fn k(&self) -> &Mat {
        &self.k
    }
}

/// An automorphism known by its values on a linearly independent spanning
/// set of the algebra; other elements are expanded by least squares.
#[derive(Clone, Debug)]
pub struct LinearAutomorphism {
    dim: usize,
    basis: Vec<Mat>,
    images: Vec<Mat>,
    forward: Mat,
    backward: Mat,
    root: Option<Box<LinearAutomorphism>>,
}

fn flatten(ms: &[Mat], n: usize) -> Mat {
    Mat::from_fn(n * n, ms.len(), |r, c| ms[c][(r % n, r / n)])
}

fn combine(ms: &[Mat], coeffs: impl Iterator<Item = linalg::C64>, n: usize) -> Mat {
    let mut out = linalg::zeros(n, n);
    for (m, c) in ms.iter().zip(coeffs) {
        out += m.map(|z| z * c);
    }
    out
}

impl LinearAutomorphism {
    pub fn new(basis: Vec<Mat>, images: Vec<Mat>) -> Result<Self> {
        if basis.is_empty() || basis.len() != images.len() {
            return Err(Error::InvalidAutomorphism(format!(
                "need matching nonempty basis and images, got {} and {}",
                basis.len(),
                images.len()
            )));
        }
        let n = basis[0].nrows();
        if basis.iter().chain(images.iter()).any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::InvalidAutomorphism("basis and images must be square of equal size".into()));
        }
        let fb = flatten(&basis, n);
        let fi = flatten(&images, n);
        for (name, f) in [("basis", &fb), ("images", &fi)] {
            let rank = linalg::rank_of(f, linalg::DEFAULT_RANK_TOL)?.rank;
            if rank != basis.len() {
                return Err(Error::InvalidAutomorphism(format!("{name} is linearly dependent (rank {rank} < {})", basis.len())));
            }
        }
        let forward = linalg::pseudo_inverse(&fb, linalg::DEFAULT_RANK_TOL)?;
        let backward = linalg::pseudo_inverse(&fi, linalg::DEFAULT_RANK_TOL)?;
        Ok(Self { dim: n, basis, images, forward, backward, root: None })
    }

    /// Declares a square root τ by its values on the same basis.
    ///
    /// Requires `τ(τ(bᵢ)) = σ(bᵢ)` and `τ(bᵢ)* = τ⁻¹(bᵢ*)` to `1e-9` relative.
    pub fn with_root(mut self, root_images: Vec<Mat>) -> Result<Self> {
        let tau = LinearAutomorphism::new(self.basis.clone(), root_images)?;
        for (b, s) in self.basis.iter().zip(&self.images) {
            let scale = fro_norm(s).max(1.0);
            let twice = tau.apply(&tau.apply(b));
            if linalg::distance(&twice, s) > 1e-9 * scale {
                return Err(Error::InvalidAutomorphism("declared root does not square to σ".into()));
            }
            let lhs = tau.apply(b).adjoint();
            let rhs = tau.apply_inverse(&b.adjoint());
            if linalg::distance(&lhs, &rhs) > 1e-9 * fro_norm(b).max(1.0) {
                return Err(Error::InvalidAutomorphism("declared root violates τ(a)* = τ⁻¹(a*)".into()));
            }
        }
        self.root = Some(Box::new(tau));
        Ok(self)
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    pub fn images(&self) -> &[Mat] {
        &self.images
    }

    pub fn root(&self) -> Option<&LinearAutomorphism> {
        self.root.as_deref()
    }

    fn coefficients(&self, inv: &Mat, a: &Mat) -> nalgebra::DVector<linalg::C64> {
        let v = nalgebra::DVector::from_iterator(self.dim * self.dim, a.iter().copied());
        inv * v
    }

    pub fn apply(&self, a: &Mat) -> Mat {
        let c = self.coefficients(&self.forward, a);
        combine(&self.images, c.iter().copied(), self.dim)
    }

    pub fn apply_inverse(&self, a: &Mat) -> Mat {
        let c = self.coefficients(&self.backward, a);
        combine(&self.basis, c.iter().copied(), self.dim)
    }

    /// Distance from `a` to the span of the basis.
    pub fn membership_residual(&self, a: &Mat) -> f64 {
        let c = self.coefficients(&self.forward, a);
        linalg::distance(&combine(&self.basis, c.iter().copied(), self.dim), a)
    }

    pub fn inverse(&self) -> Self {
        Self {
            dim: self.dim,
            basis: self.images.clone(),
            images: self.basis.clone(),
            forward: self.backward.clone(),
            backward: self.forward.clone(),
            root: self.root.as_ref().map(|r| Box::new(r.inverse())),
        }
    }

    fn doubled(&self) -> Self {
        let n = self.dim;
        let mut basis: Vec<Mat> = self.basis.iter().map(embed).collect();
        let mut images: Vec<Mat> = self.images.iter().map(embed).collect();
        basis.push(linalg::identity(2 * n));
        images.push(linalg::identity(2 * n));
        let fb = flatten(&basis, 2 * n);
        let fi = flatten(&images, 2 * n);
        let forward = linalg::pseudo_inverse(&fb, linalg::DEFAULT_RANK_TOL).expect("finite embedded basis");
        let backward = linalg::pseudo_inverse(&fi, linalg::DEFAULT_RANK_TOL).expect("finite embedded images");
        Self { dim: 2 * n, basis, images, forward, backward, root: self.root.as_ref().map(|r| Box::new(r.doubled())) }
    }
}

/// `diag(a, 0)` on ℋ ⊕ ℋ.
pub fn embed(a: &Mat) -> Mat {
    linalg::block_diag(&[a.clone(), linalg::zeros(a.nrows(), a.ncols())])
}

/// A regular automorphism σ with `σ(a)* = σ⁻¹(a*)`.
#[derive(Clone, Debug)]
pub enum Automorphism {
    Identity,
    Inner(InnerTwist),
    Linear(LinearAutomorphism),
}

impl Automorphism {
    /// `σ(a) = k² a k⁻²`; `k` must be even and Hermitian positive definite.
    pub fn inner(space: &GradedSpace, k: Mat) -> Result<Self> {
        if k.nrows() != space.dim() || k.ncols() != space.dim() {
            return Err(Error::InvalidAutomorphism(format!("k is {}×{}, space has dimension {}", k.nrows(), k.ncols(), space.dim())));
        }
        if space.evenness_defect(&k) > EVEN_TOL {
            return Err(Error::InvalidAutomorphism("k is not even".into()));
        }
        linalg::positive_definite_eigen(&k, 1e-8).map_err(|e| Error::InvalidAutomorphism(format!("{e}")))?;
        let k2 = &k * &k;
        let k2_inv = linalg::inverse(&k2).map_err(|_| Error::InvalidAutomorphism("k is singular".into()))?;
        Ok(Automorphism::Inner(InnerTwist { k, k2, k2_inv }))
    }

    pub fn linear(basis: Vec<Mat>, images: Vec<Mat>) -> Result<Self> {
        Ok(Automorphism::Linear(LinearAutomorphism::new(basis, images)?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Automorphism::Identity => "identity",
            Automorphism::Inner(_) => "inner",
            Automorphism::Linear(_) => "linear",
        }
    }

    /// Linear automorphisms are validated only on sampled elements.
    pub fn fully_validated(&self) -> bool {
        !matches!(self, Automorphism::Linear(_))
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Automorphism::Identity)
    }

    pub fn apply(&self, a: &Mat) -> Mat {
        match self {
            Automorphism::Identity => a.clone(),
            Automorphism::Inner(t) => &t.k2 * a * &t.k2_inv,
            Automorphism::Linear(l) => l.apply(a),
        }
    }

    pub fn apply_inverse(&self, a: &Mat) -> Mat {
        match self {
            Automorphism::Identity => a.clone(),
            Automorphism::Inner(t) => &t.k2_inv * a * &t.k2,
            Automorphism::Linear(l) => l.apply_inverse(a),
        }
    }

    /// Entrywise σ on a `q×q` block matrix over ℋ.
    pub fn apply_blocks(&self, m: &Mat, n: usize) -> Mat {
        if self.is_identity() {
            return m.clone();
        }
        let q = m.nrows() / n;
        let mut out = linalg::zeros(m.nrows(), m.ncols());
        for i in 0..q {
            for j in 0..q {
                let blk = m.view((i * n, j * n), (n, n)).into_owned();
                out.view_mut((i * n, j * n), (n, n)).copy_from(&self.apply(&blk));
            }
        }
        out
    }

    pub fn inverse(&self) -> Self {
        match self {
            Automorphism::Identity => Automorphism::Identity,
            Automorphism::Inner(t) => {
                let k_inv = linalg::inverse(&t.k).expect("k is invertible by construction");
                Automorphism::Inner(InnerTwist { k: k_inv, k2: t.k2_inv.clone(), k2_inv: t.k2.clone() })
            }
            Automorphism::Linear(l) => Automorphism::Linear(l.inverse()),
        }
    }

    /// A square root τ with `τ∘τ = σ` and `τ(a)* = τ⁻¹(a*)`.
    pub fn ribbon_square_root(&self) -> Result<Self> {
        match self {
            Automorphism::Identity => Ok(Automorphism::Identity),
            Automorphism::Inner(t) => {
                let r = linalg::hermitian_sqrt(&t.k)?;
                let r2 = t.k.clone();
                let r2_inv = linalg::inverse(&r2)?;
                Ok(Automorphism::Inner(InnerTwist { k: r, k2: r2, k2_inv: r2_inv }))
            }
            Automorphism::Linear(l) => match l.root() {
                Some(r) => Ok(Automorphism::Linear(r.clone())),
                None => Err(Error::NoRibbonStructure),
            },
        }
    }

    /// σ̃ on the augmented algebra acting on ℋ ⊕ ℋ: `σ̃(diag(a,0) + λ) = diag(σ(a),0) + λ`.
    pub fn doubled(&self) -> Self {
        match self {
            Automorphism::Identity => Automorphism::Identity,
            Automorphism::Inner(t) => {
                let n = t.k.nrows();
                let one = linalg::identity(n);
                Automorphism::Inner(InnerTwist {
                    k: linalg::block_diag(&[t.k.clone(), one.clone()]),
                    k2: linalg::block_diag(&[t.k2.clone(), one.clone()]),
                    k2_inv: linalg::block_diag(&[t.k2_inv.clone(), one]),
                })
            }
            Automorphism::Linear(l) => Automorphism::Linear(l.doubled()),
        }
    }
}

/// `σ(a)` as a graded operator.
pub fn apply_automorphism(sigma: &Automorphism, a: &GradedOperator) -> Result<GradedOperator> {
    GradedOperator::new(a.space().clone(), sigma.apply(a.matrix()))
}

/// Worst relative residuals of the automorphism axioms over samples.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AutomorphismResiduals {
    /// `‖σ(ab) − σ(a)σ(b)‖ / (‖σ(a)‖‖σ(b)‖)`
    pub multiplicativity: f64,
    /// `‖σ(a)* − σ⁻¹(a*)‖ / ‖a‖`-type ratio
    pub involution: f64,
    /// off-diagonal defect of σ(a)
    pub evenness: f64,
    /// `‖σ(1) − 1‖`
    pub unit: f64,
}

pub fn automorphism_residuals(sigma: &Automorphism, space: &GradedSpace, samples: &[Mat]) -> AutomorphismResiduals {
    let mut r = AutomorphismResiduals::default();
    let n = space.dim();
    r.unit = linalg::distance(&sigma.apply(&linalg::identity(n)), &linalg::identity(n));
    for (i, a) in samples.iter().enumerate() {
        let b = &samples[(i + 1) % samples.len()];
        let sa = sigma.apply(a);
        let sb = sigma.apply(b);
        let scale = (fro_norm(&sa) * fro_norm(&sb)).max(1e-300);
        r.multiplicativity = r.multiplicativity.max(linalg::distance(&sigma.apply(&(a * b)), &(&sa * &sb)) / scale);
        let lhs = sa.adjoint();
        let rhs = sigma.apply_inverse(&a.adjoint());
        let scale = fro_norm(&lhs).max(fro_norm(&rhs)).max(1e-300);
        r.involution = r.involution.max(linalg::distance(&lhs, &rhs) / scale);
        r.evenness = r.evenness.max(space.evenness_defect(&sa));
    }
    r
}

/// Deterministic generator of algebra elements.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementSampler {
    pub seed: u64,
    pub max_word_length: usize,
    pub coefficient_scale: f64,
}

impl ElementSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, max_word_length: 3, coefficient_scale: 1.0 }
    }

    pub fn with_word_length(mut self, len: usize) -> Self {
        self.max_word_length = len;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.coefficient_scale = scale;
        self
    }

    /// The same sampler on an independent stream.
    pub fn derive(&self, stream: u64) -> Self {
        let mixed = self.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
        Self { seed: mixed, ..self.clone() }
    }

    pub fn sample(&self, alg: &MatrixAlgebra, count: usize) -> Vec<Mat> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count).map(|_| self.one(alg, &mut rng)).collect()
    }

    /// `count` tuples of length `arity`, drawn from one stream.
    pub fn sample_tuples(&self, alg: &MatrixAlgebra, count: usize, arity: usize) -> Vec<Vec<Mat>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count).map(|_| (0..arity).map(|_| self.one(alg, &mut rng)).collect()).collect()
    }

    fn coeff(&self, rng: &mut ChaCha8Rng) -> linalg::C64 {
        let re = 2.0 * rng.random::<f64>() - 1.0;
        let im = 2.0 * rng.random::<f64>() - 1.0;
        c64(re, im) * self.coefficient_scale
    }

    fn one(&self, alg: &MatrixAlgebra, rng: &mut ChaCha8Rng) -> Mat {
        let n = alg.dim();
        let c0 = self.coeff(rng);
        let mut out = linalg::identity(n).map(|z| z * c0);
        let gens = alg.generators();
        if self.max_word_length == 0 || gens.is_empty() {
            return out;
        }
        for g in gens {
            let c = self.coeff(rng);
            out += g.map(|z| z * c);
        }
        if self.max_word_length >= 2 {
            for _ in 0..gens.len().min(8) {
                let len = rng.random_range(2..=self.max_word_length);
                let mut w = gens[rng.random_range(0..gens.len())].clone();
                for _ in 1..len {
                    w = &w * &gens[rng.random_range(0..gens.len())];
                }
                let c = self.coeff(rng);
                out += w.map(|z| z * c);
            }
        }
        out
    }
}

/// `sampler`-determined list of `count` elements of `alg`.
pub fn sample_elements(alg: &MatrixAlgebra, sampler: &ElementSampler, count: usize) -> Vec<Mat> {
    sampler.sample(alg, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_diag, real_rows};

    fn space(p: usize, m: usize) -> GradedSpace {
        GradedSpace::new(p, m).unwrap()
    }

    #[test]
    fn identity_and_unit_inner() {
        let s = space(2, 2);
        let alg = MatrixAlgebra::full_even(s.clone());
        let a = &ElementSampler::new(1).sample(&alg, 1)[0];
        assert_eq!(Automorphism::Identity.apply(a), *a);
        let one = Automorphism::inner(&s, linalg::identity(4)).unwrap();
        assert!(linalg::distance(&one.apply(a), a) < 1e-14);
    }

    #[test]
    fn inner_two_by_two() {
        let s = space(2, 0);
        let k = real_diag(&[2.0, 1.0]);
        let sigma = Automorphism::inner(&s, k).unwrap();
        let a = real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        // k² a k⁻² scales the (0,1) entry by 4/1.
        let expected = real_rows(&[&[0.0, 4.0], &[0.0, 0.0]]);
        assert!(linalg::distance(&sigma.apply(&a), &expected) < 1e-14);
    }

    #[test]
    fn inner_rejects_bad_k() {
        let s = space(1, 1);
        assert!(Automorphism::inner(&s, real_diag(&[1.0, 0.0])).is_err());
        assert!(Automorphism::inner(&s, real_rows(&[&[1.0, 0.5], &[0.5, 1.0]])).is_err());
    }

    #[test]
    fn diagonal_ribbon_root() {
        let s = space(1, 1);
        let sigma = Automorphism::inner(&s, real_diag(&[4.0, 1.0])).unwrap();
        match sigma.ribbon_square_root().unwrap() {
            Automorphism::Inner(t) => assert!(linalg::distance(t.k(), &real_diag(&[2.0, 1.0])) < 1e-12),
            _ => panic!("expected inner root"),
        }
        assert!(matches!(Automorphism::Identity.ribbon_square_root(), Ok(Automorphism::Identity)));
    }

    #[test]
    fn swap_has_no_root() {
        let s = space(2, 1);
        let b0 = real_diag(&[1.0, 1.0, 0.0]);
        let b1 = real_diag(&[0.0, 0.0, 1.0]);
        let sigma = Automorphism::linear(vec![b0.clone(), b1.clone()], vec![b1, b0]).unwrap();
        assert!(matches!(sigma.ribbon_square_root(), Err(Error::NoRibbonStructure)));
        let alg = MatrixAlgebra::new(s.clone(), vec![real_diag(&[1.0, 1.0, 0.0])]).unwrap();
        let r = automorphism_residuals(&sigma, &s, &ElementSampler::new(4).sample(&alg, 6));
        assert!(r.multiplicativity < 1e-12 && r.involution < 1e-12 && r.evenness < 1e-12);
    }

    #[test]
    fn sampler_examples() {
        let s = space(1, 1);
        let alg = MatrixAlgebra::full_even(s.clone());
        let scalars = ElementSampler::new(5).with_word_length(0).sample(&alg, 3);
        for a in &scalars {
            let lam = a[(0, 0)];
            assert!(linalg::distance(a, &linalg::identity(2).map(|z| z * lam)) < 1e-15);
        }
        let s2 = ElementSampler::new(9);
        assert_eq!(s2.sample(&alg, 4), s2.sample(&alg, 4));
    }

    #[test]
    fn sampled_m2_elements_span() {
        let alg = MatrixAlgebra::full_even(space(2, 0));
        let xs = ElementSampler::new(17).sample(&alg, 4);
        let flat = Mat::from_fn(4, 4, |r, c| xs[c][(r % 2, r / 2)]);
        let gram = flat.adjoint() * &flat;
        assert_eq!(linalg::numerical_rank(&gram, 1e-9).unwrap(), 4);
    }

    #[test]
    fn doubled_inner_acts_on_embedding() {
        let s = space(1, 1);
        let sigma = Automorphism::inner(&s, real_diag(&[3.0, 0.5])).unwrap();
        let alg = MatrixAlgebra::full_even(s);
        let a = ElementSampler::new(2).sample(&alg, 1).remove(0);
        let d = sigma.doubled();
        assert!(linalg::distance(&d.apply(&embed(&a)), &embed(&sigma.apply(&a))) < 1e-12);
        let one = linalg::identity(4);
        assert!(linalg::distance(&d.apply(&one), &one) < 1e-12);
    }
}
