//! Multilinear cochains on the algebra as lazy evaluators, the cyclic
//! operators `b`, `T`, `A`, `B₀`, `B`, `S`, and pairings with `K₀`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::ktheory::{BlockMatrix, Idempotent};
use crate::linalg::{self, c64, Mat, C64};

/// A cochain value together with the magnitude of the terms that were
/// summed to produce it.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Eval {
    pub value: C64,
    pub scale: f64,
}

impl Eval {
    pub fn new(value: C64, scale: f64) -> Self {
        Self { value, scale }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `|value| / scale`, or `|value|` for a vanishing scale.
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value.norm() / self.scale
        } else {
            self.value.norm()
        }
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.value.norm() <= tol * self.scale
    }
}

impl Add for Eval {
    type Output = Eval;
    fn add(self, o: Eval) -> Eval {
        Eval::new(self.value + o.value, self.scale + o.scale)
    }
}

impl Sub for Eval {
    type Output = Eval;
    fn sub(self, o: Eval) -> Eval {
        Eval::new(self.value - o.value, self.scale + o.scale)
    }
}

impl Neg for Eval {
    type Output = Eval;
    fn neg(self) -> Eval {
        Eval::new(-self.value, self.scale)
    }
}

impl Mul<C64> for Eval {
    type Output = Eval;
    fn mul(self, c: C64) -> Eval {
        Eval::new(self.value * c, self.scale * c.norm())
    }
}

impl Mul<f64> for Eval {
    type Output = Eval;
    fn mul(self, c: f64) -> Eval {
        Eval::new(self.value * c, self.scale * c.abs())
    }
}

impl core::iter::Sum for Eval {
    fn sum<I: Iterator<Item = Eval>>(iter: I) -> Eval {
        iter.fold(Eval::zero(), |a, b| a + b)
    }
}

type Evaluator = Arc<dyn Fn(&[Mat]) -> Eval + Send + Sync>;

/// An `(m+1)`-linear functional on `M_n(ℂ)`, evaluated on demand.
#[derive(Clone)]
pub struct Cochain {
    degree: usize,
    dim: usize,
    eval: Evaluator,
    cyclic: bool,
    normalized: bool,
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cochain")
            .field("degree", &self.degree)
            .field("dim", &self.dim)
            .field("cyclic", &self.cyclic)
            .field("normalized", &self.normalized)
            .finish()
    }
}

impl Cochain {
    /// A degree-`m` cochain on `n×n` matrices; `f` receives `m+1` arguments.
    pub fn new<F>(degree: usize, dim: usize, f: F) -> Self
    where
        F: Fn(&[Mat]) -> Eval + Send + Sync + 'static,
    {
        Self { degree, dim, eval: Arc::new(f), cyclic: false, normalized: false }
    }

    /// From a plain value function; the scale is the product of Frobenius norms.
    pub fn from_values<F>(degree: usize, dim: usize, f: F) -> Self
    where
        F: Fn(&[Mat]) -> C64 + Send + Sync + 'static,
    {
        Self::new(degree, dim, move |a| {
            let v = f(a);
            let s: f64 = a.iter().map(linalg::fro_norm).product();
            Eval::new(v, s.max(v.norm()))
        })
    }

    /// Records which structural properties the cochain is known to have.
    pub fn with_claims(mut self, cyclic: bool, normalized: bool) -> Self {
        self.cyclic = cyclic;
        self.normalized = normalized;
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn arity(&self) -> usize {
        self.degree + 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn claims_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn claims_normalized(&self) -> bool {
        self.normalized
    }

    pub fn eval(&self, args: &[Mat]) -> Result<Eval> {
        if args.len() != self.arity() {
            return Err(Error::Dimension(format!("degree-{} cochain takes {} arguments, got {}", self.degree, self.arity(), args.len())));
        }
        if let Some(a) = args.iter().find(|a| a.nrows() != self.dim || a.ncols() != self.dim) {
            return Err(Error::Dimension(format!("cochain argument is {}×{}, expected {}×{}", a.nrows(), a.ncols(), self.dim, self.dim)));
        }
        Ok(self.call(args))
    }

    pub fn value(&self, args: &[Mat]) -> Result<C64> {
        Ok(self.eval(args)?.value)
    }

    pub(crate) fn call(&self, args: &[Mat]) -> Eval {
        (self.eval)(args)
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.compatible(other)?;
        let (f, g) = (self.clone(), other.clone());
        Ok(Cochain::new(self.degree, self.dim, move |a| f.call(a) + g.call(a))
            .with_claims(self.cyclic && other.cyclic, self.normalized && other.normalized))
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.compatible(other)?;
        let (f, g) = (self.clone(), other.clone());
        Ok(Cochain::new(self.degree, self.dim, move |a| f.call(a) - g.call(a))
            .with_claims(self.cyclic && other.cyclic, self.normalized && other.normalized))
    }

    pub fn scaled(&self, c: C64) -> Cochain {
        let f = self.clone();
        Cochain::new(self.degree, self.dim, move |a| f.call(a) * c).with_claims(self.cyclic, self.normalized)
    }

    fn compatible(&self, other: &Cochain) -> Result<()> {
        if self.degree != other.degree || self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "cochains differ: degree {} on n = {} vs degree {} on n = {}",
                self.degree, self.dim, other.degree, other.dim
            )));
        }
        Ok(())
    }
}

/// `bφ(a⁰,…,a^{m+1}) = Σ_{j=0}^{m} (−1)^j φ(…, a^j a^{j+1}, …) + (−1)^{m+1} φ(a^{m+1}a⁰, a¹, …, a^m)`.
pub fn hochschild_b(phi: &Cochain) -> Cochain {
    let f = phi.clone();
    let m = phi.degree;
    Cochain::new(m + 1, phi.dim, move |a| {
        let mut acc = Eval::zero();
        let mut args: Vec<Mat> = Vec::with_capacity(m + 1);
        for j in 0..=m {
            args.clear();
            args.extend_from_slice(&a[..j]);
            args.push(&a[j] * &a[j + 1]);
            args.extend_from_slice(&a[j + 2..]);
            acc = acc + f.call(&args) * sign(j);
        }
        args.clear();
        args.push(&a[m + 1] * &a[0]);
        args.extend_from_slice(&a[1..=m]);
        acc + f.call(&args) * sign(m + 1)
    })
}

/// `Tφ(a⁰,…,a^m) = (−1)^m φ(a^m, a⁰, …, a^{m−1})`.
pub fn cyclic_t(phi: &Cochain) -> Cochain {
    let f = phi.clone();
    let m = phi.degree;
    Cochain::new(m, phi.dim, move |a| f.call(&rotate(a)) * sign(m))
}

fn rotate(a: &[Mat]) -> Vec<Mat> {
    let m = a.len() - 1;
    let mut r = Vec::with_capacity(a.len());
    r.push(a[m].clone());
    r.extend_from_slice(&a[..m]);
    r
}

/// `A = Σ_{i=0}^{m} Tⁱ`.
pub fn normalizer_a(phi: &Cochain) -> Cochain {
    let f = phi.clone();
    let m = phi.degree;
    Cochain::new(m, phi.dim, move |a| {
        let mut acc = Eval::zero();
        let mut args = a.to_vec();
        for i in 0..=m {
            acc = acc + f.call(&args) * sign(i * m);
            args = rotate(&args);
        }
        acc
    })
}

/// `B₀φ(a⁰,…,a^{m−1}) = φ(1, a⁰, …, a^{m−1})`.
pub fn b_zero(phi: &Cochain) -> Result<Cochain> {
    if phi.degree == 0 {
        return Err(Error::Domain("B₀ needs degree ≥ 1".into()));
    }
    let f = phi.clone();
    let n = phi.dim;
    Ok(Cochain::new(phi.degree - 1, n, move |a| {
        let mut args = Vec::with_capacity(a.len() + 1);
        args.push(linalg::identity(n));
        args.extend_from_slice(a);
        f.call(&args)
    }))
}

/// `B = A B₀ (1 − T)`.
pub fn connes_b(phi: &Cochain) -> Result<Cochain> {
    let one_minus_t = phi.sub(&cyclic_t(phi))?;
    Ok(normalizer_a(&b_zero(&one_minus_t)?))
}

/// The periodicity map, degree `m → m + 2`:
/// `Sφ = 1/((m+1)(m+2)) Σ_{j=1}^{m+1} (−1)^j S_jφ`, with
/// `S_jφ(a⁰,…,a^{m+2}) = Σ_{l=0}^{j−2} (−1)^l φ(…, a^l a^{l+1}, …, a^j a^{j+1}, …)
/// + (−1)^{j+1} φ(…, a^{j−1} a^j a^{j+1}, …)`.
pub fn periodicity_s(phi: &Cochain) -> Cochain {
    let f = phi.clone();
    let m = phi.degree;
    let norm = 1.0 / ((m + 1) * (m + 2)) as f64;
    Cochain::new(m + 2, phi.dim, move |a| {
        let mut acc = Eval::zero();
        for j in 1..=m + 1 {
            let mut sj = Eval::zero();
            for l in 0..j.saturating_sub(1) {
                let mut args = Vec::with_capacity(m + 1);
                args.extend_from_slice(&a[..l]);
                args.push(&a[l] * &a[l + 1]);
                args.extend_from_slice(&a[l + 2..j]);
                args.push(&a[j] * &a[j + 1]);
                args.extend_from_slice(&a[j + 2..]);
                sj = sj + f.call(&args) * sign(l);
            }
            let mut args = Vec::with_capacity(m + 1);
            args.extend_from_slice(&a[..j - 1]);
            args.push(&a[j - 1] * &a[j] * &a[j + 1]);
            args.extend_from_slice(&a[j + 2..]);
            sj = sj + f.call(&args) * sign(j + 1);
            acc = acc + sj * sign(j);
        }
        acc * norm
    })
}

fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `tr#φ(x⁰,…,x^m) = Σ φ(x⁰_{i₀i₁}, x¹_{i₁i₂}, …, x^m_{i_m i₀})` over `M_q(𝒜)`.
pub fn tr_sharp(phi: &Cochain, xs: &[&BlockMatrix]) -> Result<Eval> {
    if xs.len() != phi.arity() {
        return Err(Error::Dimension(format!("tr# needs {} arguments, got {}", phi.arity(), xs.len())));
    }
    let q = xs[0].q();
    if xs.iter().any(|x| x.q() != q || x.n() != phi.dim) {
        return Err(Error::Dimension("tr# arguments have mismatched shapes".into()));
    }
    let m = phi.degree;
    let mut idx: Vec<usize> = alloc::vec![0; m + 1];
    let mut acc = Eval::zero();
    'outer: loop {
        let mut args = Vec::with_capacity(m + 1);
        let mut skip = false;
        for k in 0..=m {
            match xs[k].nonzero_entry(idx[k], idx[(k + 1) % (m + 1)]) {
                Some(e) => args.push(e),
                None => {
                    skip = true;
                    break;
                }
            }
        }
        if !skip {
            acc = acc + phi.call(&args);
        }
        for k in (0..=m).rev() {
            idx[k] += 1;
            if idx[k] < q {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    Ok(acc)
}

/// `(−1)^k (2k)! / k!`.
pub fn pairing_constant(k: usize) -> f64 {
    let mut c = 1.0;
    for i in k + 1..=2 * k {
        c *= i as f64;
    }
    c * sign(k)
}

/// `⟨φ, e⟩ = (−1)^k (2k)!/k! · tr#φ(e, …, e)` for a cyclic `2k`-cocycle.
pub fn pair_cyclic_cocycle(phi: &Cochain, e: &Idempotent) -> Result<Eval> {
    if phi.degree % 2 != 0 {
        return Err(Error::Domain(format!("pairing needs an even degree, got {}", phi.degree)));
    }
    let k = phi.degree / 2;
    let args: Vec<&BlockMatrix> = (0..=phi.degree).map(|_| e.block()).collect();
    Ok(tr_sharp(phi, &args)? * pairing_constant(k))
}

/// Pairing of a normalized `(b, B)` cocycle `(φ₀, φ₂, …)` with an idempotent:
/// `tr#φ₀(e) + Σ_{k≥1} (−1)^k (2k)!/k! · tr#φ_{2k}(e − ½, e, …, e)`.
pub fn pair_normalized_even(components: &[Cochain], e: &Idempotent) -> Result<Eval> {
    let half = e.block().sub_scalar(c64(0.5, 0.0));
    let mut acc = Eval::zero();
    for phi in components {
        if phi.degree % 2 != 0 {
            return Err(Error::Domain(format!("even pairing got a degree-{} component", phi.degree)));
        }
        if phi.degree > 0 && !phi.normalized {
            return Err(Error::ContractViolation(format!(
                "degree-{} component is not normalized; the (b,B) pairing requires normalized cochains",
                phi.degree
            )));
        }
        let k = phi.degree / 2;
        if k == 0 {
            acc = acc + tr_sharp(phi, &[e.block()])?;
        } else {
            let mut args: Vec<&BlockMatrix> = Vec::with_capacity(phi.degree + 1);
            args.push(&half);
            args.extend((0..phi.degree).map(|_| e.block()));
            acc = acc + tr_sharp(phi, &args)? * pairing_constant(k);
        }
    }
    Ok(acc)
}

/// Worst `|value| / scale` of a cochain over the given tuples.
pub fn max_relative(phi: &Cochain, tuples: &[Vec<Mat>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in tuples {
        worst = worst.max(phi.eval(t)?.relative());
    }
    Ok(worst)
}

/// Worst value with `1` inserted at each position `≥ 1`, relative to the
/// scale of the unmodified tuple.
pub fn normalization_defect(phi: &Cochain, tuples: &[Vec<Mat>]) -> Result<f64> {
    let one = linalg::identity(phi.dim);
    let mut worst = 0.0f64;
    for t in tuples {
        let base = phi.eval(t)?.scale;
        for j in 1..t.len() {
            let mut args = t.clone();
            args[j] = one.clone();
            let v = phi.eval(&args)?;
            worst = worst.max(Eval::new(v.value, v.scale.max(base)).relative());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_diag, GradedSpace};

    fn trace_cochain(n: usize) -> Cochain {
        Cochain::from_values(0, n, |a| linalg::trace(&a[0])).with_claims(true, true)
    }

    /// `φ(a,b,c) = Tr(a[b,c])`-like test functional, not cyclic.
    fn product_cochain(n: usize, m: usize) -> Cochain {
        Cochain::from_values(m, n, |a| {
            let mut p = a[0].clone();
            for x in &a[1..] {
                p = &p * x;
            }
            linalg::trace(&p) * C64::new(0.3, 0.0) + linalg::trace(&a[a.len() - 1]) * linalg::trace(&a[0])
        })
    }

    fn m2(a: f64, b: f64, c: f64, d: f64) -> Mat {
        linalg::real_rows(&[&[a, b], &[c, d]])
    }

    #[test]
    fn b_of_trace_vanishes() {
        let bt = hochschild_b(&trace_cochain(2));
        let v = bt.value(&[m2(1.0, 2.0, 0.0, 1.0), m2(0.0, 1.0, 1.0, 0.0)]).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn b_squared_vanishes() {
        let phi = product_cochain(2, 1);
        let bb = hochschild_b(&hochschild_b(&phi));
        let args = [m2(1.0, 2.0, 0.0, 1.0), m2(0.0, 1.0, 1.0, 0.5), m2(2.0, 0.0, 1.0, 1.0), m2(0.5, 1.0, -1.0, 0.0)];
        assert!(bb.eval(&args).unwrap().is_negligible(1e-14));
    }

    #[test]
    fn t_has_order_m_plus_one() {
        let phi = product_cochain(2, 2);
        let t3 = cyclic_t(&cyclic_t(&cyclic_t(&phi)));
        let args = [m2(1.0, 2.0, 0.0, 1.0), m2(0.0, 1.0, 1.0, 0.5), m2(2.0, 0.0, 1.0, 1.0)];
        assert!((t3.value(&args).unwrap() - phi.value(&args).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn periodicity_of_trace_at_units() {
        let s = periodicity_s(&trace_cochain(1));
        let one = linalg::identity(1);
        let v = s.value(&[one.clone(), one.clone(), one]).unwrap();
        assert!((v - C64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trace_pairs_with_rank() {
        let s = GradedSpace::new(3, 0).unwrap();
        let e = Idempotent::coordinate(&s, 1, &[true, true, false]).unwrap();
        assert_eq!(pair_cyclic_cocycle(&trace_cochain(3), &e).unwrap().value, C64::new(2.0, 0.0));
        let e2 = Idempotent::identity(3, 2);
        assert_eq!(pair_normalized_even(&[trace_cochain(3)], &e2).unwrap().value, C64::new(6.0, 0.0));
    }

    #[test]
    fn periodicity_preserves_pairing() {
        let s = GradedSpace::new(1, 0).unwrap();
        let e = Idempotent::coordinate(&s, 1, &[true]).unwrap();
        let st = periodicity_s(&trace_cochain(1));
        assert!((pair_cyclic_cocycle(&st, &e).unwrap().value - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn pairing_rejects_unnormalized_component() {
        let s = GradedSpace::new(2, 0).unwrap();
        let e = Idempotent::identity(2, 1);
        let _ = s;
        let phi2 = product_cochain(2, 2);
        assert!(matches!(pair_normalized_even(&[trace_cochain(2), phi2], &e), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn constants() {
        assert_eq!(pairing_constant(0), 1.0);
        assert_eq!(pairing_constant(1), -2.0);
        assert_eq!(pairing_constant(2), 12.0);
    }

    #[test]
    fn arity_is_checked() {
        let phi = trace_cochain(2);
        assert!(phi.eval(&[real_diag(&[1.0, 1.0]), real_diag(&[1.0, 1.0])]).is_err());
        assert!(phi.eval(&[real_diag(&[1.0])]).is_err());
    }
}
