mod common;

use common::*;
use proptest::prelude::*;
use twistdex_core::chern;
use twistdex_core::cyclic::{self, Cochain};
use twistdex_core::index::{self, fredholm_index};
use twistdex_core::ktheory::{self, sigma_selfadjoint_conjugate};
use twistdex_core::linalg::{self, C64};
use twistdex_core::quadrature;
use twistdex_core::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

/// A non-cyclic test functional `Tr(a⁰a¹⋯a^m) + Tr(a^m)Tr(a⁰)`.
fn product_cochain(n: usize, m: usize) -> Cochain {
    Cochain::from_values(m, n, |a| {
        let mut p = a[0].clone();
        for x in &a[1..] {
            p = &p * x;
        }
        linalg::trace(&p) + linalg::trace(&a[a.len() - 1]) * linalg::trace(&a[0])
    })
}

fn random_tuple(seed: u64, n: usize, len: usize) -> Vec<linalg::Mat> {
    let mut r = rng(seed);
    (0..len).map(|_| random_mat(&mut r, n, n)).collect()
}

fn triple_for(kind: u8, seed: u64) -> TwistedTriple {
    if kind == 0 {
        conformal_triple(seed, 2)
    } else {
        linear_triple(seed, 2)
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn hochschild_b_squares_to_zero(seed in any::<u64>(), n in 1usize..4, m in 0usize..3) {
        let bb = cyclic::hochschild_b(&cyclic::hochschild_b(&product_cochain(n, m)));
        let v = bb.eval(&random_tuple(seed, n, m + 3)).unwrap();
        prop_assert!(v.is_negligible(1e-13), "{v:?}");
    }

    #[test]
    fn connes_b_squares_to_zero(seed in any::<u64>(), n in 1usize..4, m in 2usize..4) {
        let bb = cyclic::connes_b(&cyclic::connes_b(&product_cochain(n, m)).unwrap()).unwrap();
        let v = bb.eval(&random_tuple(seed, n, m - 1)).unwrap();
        prop_assert!(v.is_negligible(1e-13), "{v:?}");
    }

    #[test]
    fn periodicity_of_tau_keeps_the_pairing(seed in 0u64..1000, kind in 0u8..2) {
        let t = triple_for(kind, seed);
        let e = skew_idempotent(&t, 1, &[true, true, false, true], seed + 1);
        let tau = chern::tau2k(&t, 1).unwrap().cochain;
        let p1 = cyclic::pair_cyclic_cocycle(&tau, &e).unwrap();
        let p2 = cyclic::pair_cyclic_cocycle(&cyclic::periodicity_s(&tau), &e).unwrap();
        prop_assert!((p1.value - p2.value).norm() < 1e-9, "{p1:?} {p2:?}");
    }

    #[test]
    fn index_matches_supertrace_count(
        seed in 0u64..1000,
        kind in 0u8..2,
        pattern in proptest::collection::vec(any::<bool>(), 8),
    ) {
        let t = triple_for(kind, seed);
        let e = skew_idempotent(&t, 2, &pattern, seed ^ 0x55);
        let r = fredholm_index(&t, &e).unwrap();
        prop_assert!(r.consistent);
        prop_assert_eq!(r.index, r.dimension_index());
        prop_assert_eq!(r.index, index::supertrace_formula(&t, &e).unwrap().round());
        let p = chern::chern_pairing(&t, &e, 1).unwrap();
        prop_assert!((p.value - C64::new(r.index, 0.0)).norm() < 1e-8, "{p:?} vs {}", r.index);
    }

    #[test]
    fn index_is_conjugation_invariant(seed in 0u64..1000, pattern in proptest::collection::vec(any::<bool>(), 4)) {
        let t = conformal_triple(seed, 2);
        let e = Idempotent::coordinate(t.space(), 1, &pattern).unwrap();
        let g = ktheory::random_invertible(t.algebra(), &ElementSampler::new(seed), 1, 0.6);
        let f = ktheory::conjugate(&e, &g).unwrap();
        prop_assert_eq!(fredholm_index(&t, &e).unwrap().index, fredholm_index(&t, &f).unwrap().index);
    }

    #[test]
    fn ribbon_conjugate_is_sigma_selfadjoint(seed in 0u64..1000, kind in 0u8..2) {
        let t = triple_for(kind, seed);
        let e = skew_idempotent(&t, 1, &[true, false, true, true], seed + 7);
        let out = sigma_selfadjoint_conjugate(&t, &e).unwrap();
        prop_assert!(out.worst() < 1e-9, "{out:?}");
    }

    #[test]
    fn simpson_is_exact_on_cubics(c in proptest::array::uniform4(-5.0f64..5.0), panels in 1usize..9) {
        let f = |t: f64| C64::new(c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t, 0.0);
        let exact = c[0] + c[1] / 2.0 + c[2] / 3.0 + c[3] / 4.0;
        prop_assert!((quadrature::simpson(f, 0.0, 1.0, panels).re - exact).abs() < 1e-12);
    }

    #[test]
    fn rank_is_bounded_by_factors(seed in any::<u64>(), r in 1usize..6, k in 1usize..4, c in 1usize..6) {
        let mut g = rng(seed);
        let m = random_mat(&mut g, r, k) * random_mat(&mut g, k, c);
        let rank = linalg::numerical_rank(&m, linalg::DEFAULT_RANK_TOL).unwrap();
        prop_assert!(rank <= k.min(r).min(c));
    }
}
