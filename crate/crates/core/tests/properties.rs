use proptest::prelude::*;

use tricok::entrydist::{beta, tau, tau_at, EntryDist};
use tricok::modular::PadicRing;
use tricok::pgroup::{hom_count_exponent, maximal_chain_count, Partition};
use tricok::plinalg::{corank_mod_p, dense, gf2, invariant_valuations, streamed_valuations, TriMatrix};
use tricok::theory::{centering, chi_from_zeta, pmf_l1};

fn partition(max_len: usize, max_part: u32) -> impl Strategy<Value = Partition> {
    prop::collection::vec(1..=max_part, 0..=max_len).prop_map(Partition::from_unsorted)
}

fn matrix(primes: &'static [u64], max_e: u32, max_n: usize) -> impl Strategy<Value = TriMatrix> {
    (prop::sample::select(primes), 1..=max_e, 1..=max_n, any::<u64>(), 0.0..1.0f64).prop_map(
        |(p, e, n, seed, zero_bias)| {
            use rand::{Rng, SeedableRng};
            let ring = PadicRing::new(p, e).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            TriMatrix::from_fn(ring, n, |_, _| {
                let x = rng.random_range(0..ring.modulus());
                if rng.random_bool(zero_bias) { ring.mul(x, p) } else { x }
            })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conjugate_is_an_involution(l in partition(8, 8)) {
        let c = l.conjugate();
        prop_assert_eq!(c.size(), l.size());
        prop_assert_eq!(c.conjugate(), l);
    }

    #[test]
    fn hom_exponent_symmetric(l in partition(5, 5), m in partition(5, 5)) {
        let e = hom_count_exponent(&l, &m);
        prop_assert_eq!(e, hom_count_exponent(&m, &l));
        let direct: u64 = l.parts().iter().flat_map(|&a| m.parts().iter().map(move |&b| a.min(b) as u64)).sum();
        prop_assert_eq!(e, direct);
    }

    #[test]
    fn cyclic_groups_have_one_chain(k in 0u32..40, p in prop::sample::select(&[2u64, 3, 5, 7][..])) {
        let l = if k == 0 { Partition::empty() } else { Partition::new(vec![k]).unwrap() };
        prop_assert_eq!(maximal_chain_count(&l, p).unwrap(), 1u32.into());
    }

    #[test]
    fn stream_matches_dense(m in matrix(&[2, 3, 5], 4, 40)) {
        let e = m.ring().precision();
        prop_assert_eq!(streamed_valuations(&m, e).unwrap(), invariant_valuations(&m));
    }

    #[test]
    fn corank_is_count_of_units(m in matrix(&[2, 3, 5], 3, 64)) {
        let t = invariant_valuations(&m);
        let units = t.valuations().iter().filter(|&&v| v == 0).count();
        prop_assert_eq!(corank_mod_p(&m), m.n() - units);
        let prof = t.rank_profile(t.precision()).unwrap();
        prop_assert_eq!(prof[0], corank_mod_p(&m));
        prop_assert!(prof.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn gf2_matches_generic(m in matrix(&[2], 1, 256)) {
        prop_assert_eq!(gf2::corank(&m), dense::corank_generic(&m));
    }

    #[test]
    fn tau_over_targets_sums_to_one(v in prop::collection::vec(0usize..9, 1..6), w in prop::collection::vec(0.01f64..1.0, 9)) {
        let weights: Vec<(u64, f64)> = w.iter().enumerate().map(|(r, &x)| (r as u64, x)).collect();
        let dist = EntryDist::from_weights(3, 2, &weights).unwrap();
        let h = Partition::new(vec![2]).unwrap();
        let total: f64 = (0..9).map(|g| tau_at(&dist, &h, &v, g).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!((tau(&dist, &h, &v).unwrap() - tau_at(&dist, &h, &v, 0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_tau_depends_on_support(v in prop::collection::vec(0usize..5, 1..7), alpha in 0.05f64..0.95) {
        let dist = EntryDist::symmetric(5, alpha).unwrap();
        let k = v.iter().filter(|&&x| x != 0).count() as u32;
        let t = tau(&dist, &Partition::new(vec![1]).unwrap(), &v).unwrap();
        prop_assert!((5.0 * t - beta(5, alpha, k)).abs() < 1e-12);
    }

    #[test]
    fn chi_decreases_in_zeta(a in 0.0f64..1.0, b in 0.0f64..1.0, p in prop::sample::select(&[2u64, 3, 7][..])) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(chi_from_zeta(p, 0.7, hi) <= chi_from_zeta(p, 0.7, lo));
    }

    #[test]
    fn centering_shifts_with_p(n in 1u64..1_000_000, zeta in 0.0f64..1.0, p in prop::sample::select(&[2u64, 3, 5][..])) {
        prop_assert_eq!(centering(p, n * p, zeta), centering(p, n, zeta) + 1);
    }

    #[test]
    fn pmf_is_a_probability(x in -40i64..40, chi in 0.01f64..10.0, p in prop::sample::select(&[2u64, 3, 5, 11][..])) {
        let v = pmf_l1(p, chi, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&v.value));
        prop_assert!(v.error_bound <= 1e-9 * v.value.max(1e-300) || v.underflow || v.error_bound < 1e-15);
    }
}
