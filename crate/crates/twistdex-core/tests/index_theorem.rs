mod common;

use common::*;
use twistdex_core::chern::{self, HomotopyFamily};
use twistdex_core::index::{self, fredholm_index};
use twistdex_core::ktheory::{self, selfadjoint_conjugate_unchecked, sigma_selfadjoint_conjugate};
use twistdex_core::linalg::{self, real_diag, GradedSpace};
use twistdex_core::*;

fn pattern_2x() -> Vec<bool> {
    // q = 2 copies of ℂ² ⊕ ℂ²: keep two even and one odd basis vector
    vec![true, false, false, false, true, false, true, false]
}

#[test]
fn index_equals_dimension_count_and_pairings() {
    for seed in 0..4 {
        let t = conformal_triple(seed, 2);
        let e = skew_idempotent(&t, 2, &pattern_2x(), 100 + seed);
        let r = fredholm_index(&t, &e).unwrap();
        assert!(r.consistent && !r.ambiguous, "{r:?}");
        // (2 even + 1 odd) + same for σ(e): ½((2 − 1) + (2 − 1)) = 1
        assert_eq!(r.index, 1.0);
        assert_eq!(r.index, r.dimension_index());
        let pairing = chern::chern_pairing(&t, &e, 1).unwrap();
        assert!((pairing.value.re - 1.0).abs() < 1e-9, "seed {seed}: {pairing:?}");
        let st = chern::supertrace_index(&t, &e, 2).unwrap();
        assert!((st.value.re - 1.0).abs() < 1e-9);
        let bar = chern::tau_bar_pairing(&t, &e, 1).unwrap();
        assert!((bar.value.re - 1.0).abs() < 1e-9, "{bar:?}");
    }
}

#[test]
fn adjoint_and_parametrix_identities() {
    let t = conformal_triple(7, 2);
    let e = skew_idempotent(&t, 2, &pattern_2x(), 3);
    let c = index::compress(&t, &e).unwrap();
    assert!(c.reconstruction_residual <= 1e-10 * c.reconstruction_scale);
    let a = index::adjoint_identity_check(&t, &e).unwrap();
    assert!(a.identity.passes(1e-10), "{a:?}");
    assert!(a.pairing_defect < 1e-10);
    let p = index::parametrix_check(&t, &e).unwrap();
    assert!(p.left.passes(1e-10) && p.right.passes(1e-10), "{p:?}");
    for power in 1..=3 {
        let tf = index::trace_formula(&t, &e, power).unwrap();
        assert_eq!(tf.index, fredholm_index(&t, &e).unwrap().ind_plus);
        assert!(tf.residual < 1e-8, "{tf:?}");
    }
}

#[test]
fn half_integer_index_from_swap() {
    let t = swap_triple(swap_dirac());
    let e = Idempotent::coordinate(t.space(), 1, &[true, true, false]).unwrap();
    // Str e = 2, Str σ(e) = Str diag(0,0,1) = −1
    let r = fredholm_index(&t, &e).unwrap();
    assert_eq!(r.index, 0.5);
    assert!(r.consistent);
    assert!((index::supertrace_formula(&t, &e).unwrap() - 0.5).abs() < 1e-12);
    let bar = chern::tau_bar_pairing(&t, &e, 1).unwrap();
    assert!((bar.value.re - 0.5).abs() < 1e-10, "{bar:?}");
    assert!(matches!(sigma_selfadjoint_conjugate(&t, &e), Err(Error::NoRibbonStructure)));
    match selfadjoint_conjugate_unchecked(&t, &e) {
        Err(err) => assert!(matches!(err, Error::RibbonConstruction(_)), "{err:?}"),
        Ok(c) => assert!(c.worst() > 1e-3, "{c:?}"),
    }
}

#[test]
fn ribbon_conjugate_preserves_index() {
    let t = conformal_triple(11, 2);
    let e = skew_idempotent(&t, 2, &pattern_2x(), 5);
    let out = sigma_selfadjoint_conjugate(&t, &e).unwrap();
    assert!(out.worst() < 1e-9, "{out:?}");
    assert_eq!(fredholm_index(&t, &out.p).unwrap().index, fredholm_index(&t, &e).unwrap().index);
    let sp = ktheory::sigma_of_idempotent(&t, &out.p).unwrap();
    assert!(linalg::distance(&sp.realized().adjoint(), out.p.realized()) < 1e-9);
}

#[test]
fn index_is_additive_and_conjugation_invariant() {
    let t = conformal_triple(2, 2);
    let e = Idempotent::coordinate(t.space(), 1, &[true, false, true, true]).unwrap();
    let f = skew_idempotent(&t, 2, &pattern_2x(), 8);
    let sum = ktheory::direct_sum(&e, &f).unwrap();
    let i = |x: &Idempotent| fredholm_index(&t, x).unwrap().index;
    assert_eq!(i(&sum), i(&e) + i(&f));
    let g = ktheory::random_invertible(t.algebra(), &ElementSampler::new(41), 1, 0.5);
    assert_eq!(i(&ktheory::conjugate(&e, &g).unwrap()), i(&e));
}

#[test]
fn homotopy_invariance_with_transgression() {
    let mut r = rng(21);
    let t = conformal_triple(21, 2);
    let w = odd_dirac(&mut r, 2, 0.5);
    let v = w.map(|z| z * (0.3 / linalg::op_norm(&w)));
    let fam = HomotopyFamily::linear(t.clone(), v).unwrap();
    let e = skew_idempotent(&t, 1, &[true, true, true, false], 4);
    let rep = chern::homotopy_invariance_check(&fam, &e, 1, &ElementSampler::new(9), 3, 64, 17).unwrap();
    assert!(rep.pairing_drift < 1e-8, "{rep:?}");
    assert!(rep.transgression.ratio < 1e-6, "{rep:?}");
    assert!(rep.decay_ratio > 8.0, "{rep:?}");
    assert!(rep.b_eta.ratio < 1e-6, "{rep:?}");
}

#[test]
fn doubling_homotopy_relates_tau_bar_and_tau() {
    let t = conformal_triple(5, 2);
    let doubled = t.invertible_double();
    assert!(doubled.square_defect() < 1e-12);
    let fam = HomotopyFamily::doubling(&doubled).unwrap();
    assert!(linalg::distance(&fam.d_at(1.0), doubled.d_tilde()) < 1e-14);
    let e = skew_idempotent(&t, 1, &[true, false, true, true], 6);
    let pe = e.embedded(&doubled).unwrap();
    let rep = chern::homotopy_invariance_check(&fam, &pe, 1, &ElementSampler::new(2), 2, 64, 9).unwrap();
    assert!(rep.pairing_drift < 1e-8, "{rep:?}");
    let tau = chern::chern_pairing(&t, &e, 1).unwrap().value.re;
    let bar = chern::tau_bar_pairing(&t, &e, 1).unwrap().value.re;
    assert!((tau - bar).abs() < 1e-9);
    assert!((rep.pairings[0].1 - tau).abs() < 1e-9);
}

#[test]
fn zero_dirac_index_is_half_the_supertrace_sum() {
    let space = GradedSpace::new(3, 1).unwrap();
    let sigma = Automorphism::inner(&space, real_diag(&[1.0, 2.0, 3.0, 0.5])).unwrap();
    let t = TwistedTriple::new(MatrixAlgebra::diagonal(space), linalg::zeros(4, 4), sigma).unwrap();
    let e = Idempotent::coordinate(t.space(), 1, &[true, true, false, true]).unwrap();
    // Str e = 2 − 1 = 1 and σ(e) = e for a diagonal twist
    assert_eq!(fredholm_index(&t, &e).unwrap().index, 1.0);
    assert!((chern::tau_bar_pairing(&t, &e, 1).unwrap().value.re - 1.0).abs() < 1e-10);
}

#[test]
fn cochain_relations_for_each_twist_kind() {
    let triples = [conformal_triple(31, 2), linear_triple(32, 2)];
    for t in &triples {
        assert!(t.validate(&ElementSampler::new(1), 4).passed());
        for k in 1..=2 {
            let rep = chern::lemma_relations(t, k, &ElementSampler::new(10 + k as u64), 3).unwrap();
            assert!(rep.worst() < 1e-9, "{} k={k}: {rep:?}", t.sigma().kind());
        }
    }
}

#[test]
fn linear_twist_matches_index_and_pairing() {
    let t = linear_triple(40, 2);
    let e = skew_idempotent(&t, 2, &pattern_2x(), 12);
    let r = fredholm_index(&t, &e).unwrap();
    assert_eq!(r.index, 1.0);
    assert!((chern::chern_pairing(&t, &e, 2).unwrap().value.re - 1.0).abs() < 1e-8);
    let out = sigma_selfadjoint_conjugate(&t, &e).unwrap();
    assert!(out.worst() < 1e-9, "{out:?}");
}

#[test]
fn grassmannian_connection_index() {
    use twistdex_core::connections::*;
    for t in [conformal_triple(50, 2), linear_triple(51, 2), swap_triple(swap_dirac())] {
        let q = if t.dim() == 3 { 1 } else { 2 };
        let e = if t.dim() == 3 {
            Idempotent::coordinate(t.space(), 1, &[true, true, false]).unwrap()
        } else {
            skew_idempotent(&t, q, &pattern_2x(), 13)
        };
        let m = ProjectiveModule::new(&t, &e).unwrap();
        assert!(m.roundtrip_residual() < 1e-10);
        assert!(m.gram_defect() < 1e-10);
        let (rank, dim) = m.metric_rank(t.rank_tol()).unwrap();
        assert_eq!(rank, dim);
        let conn = grassmannian_connection(m);
        assert!(grassmannian_equality_residual(&t, &conn).unwrap() < 1e-10);
        let rep = connection_index_theorem(&t, &conn, 1).unwrap();
        assert!(rep.disagreement < 1e-9, "{rep:?}");
    }
}
