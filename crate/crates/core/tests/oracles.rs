//! Frozen reference values from independent computations, and identities
//! that hold exactly.

use num_bigint::BigUint;

use tricok::entrydist::EntryDist;
use tricok::estimators::{estimate_chi0_with, estimate_hom_moment, exact_moment_symmetric, Chi0Sampler};
use tricok::pgroup::{brute_force_maximal_chains, hom_count_exponent, maximal_chain_count, Partition};
use tricok::theory::{chi0_symmetric, chi_from_zeta, moment_ld};

fn part(x: &[u32]) -> Partition {
    Partition::new(x.to_vec()).unwrap()
}

#[test]
fn chi0_reference_values() {
    // 30-digit products evaluated separately with exact rationals
    for (p, alpha, want) in [
        (2u64, 0.75, 4.127_993_967_889_125_032_772),
        (3, 0.2, 0.367_537_181_085_597_413_65),
        (5, 0.6, 39.628_742_091_735_600_315),
    ] {
        let v = chi0_symmetric(p, alpha).unwrap();
        assert!((v.value - want).abs() <= 4.0 * f64::EPSILON * want + v.error_bound, "p={p} alpha={alpha}: {v:?}");
    }
}

#[test]
fn chi_from_zeta_reference() {
    let v = chi_from_zeta(3, 2.0 / 3.0, 0.5);
    assert!((v - 0.192_450_089_729_875_254_84).abs() < 1e-16);
}

#[test]
fn dp_reference_values() {
    for (n, want) in [(256usize, 4.02805), (1024, 4.10301), (4096, 4.12175)] {
        let a = (exact_moment_symmetric(2, 0.75, n).unwrap() - 1.0) / n as f64;
        assert!((a - want).abs() < 5e-5, "n={n}: {a}");
    }
}

#[test]
fn chain_counts() {
    let cases: [(&[u32], u64, u32); 6] = [
        (&[1, 1], 5, 6),
        (&[1, 1], 2, 3),
        (&[1, 1, 1], 2, 21),
        (&[2, 1], 2, 5),
        (&[7], 5, 1),
        (&[40], 7, 1),
    ];
    for (l, p, want) in cases {
        assert_eq!(maximal_chain_count(&part(l), p).unwrap(), BigUint::from(want), "{l:?} p={p}");
    }
    // complete flags of F_p^k: ∏ (p^i − 1)/(p − 1)
    for p in [2u64, 3, 5] {
        for k in 1..=6u32 {
            let want: BigUint = (1..=k).map(|i| (BigUint::from(p).pow(i) - 1u32) / (p - 1)).product();
            assert_eq!(maximal_chain_count(&Partition::new(vec![1; k as usize]).unwrap(), p).unwrap(), want);
        }
    }
    assert_eq!(
        brute_force_maximal_chains(&part(&[2, 2]), 2).unwrap(),
        maximal_chain_count(&part(&[2, 2]), 2).unwrap()
    );
}

#[test]
fn hom_examples() {
    assert_eq!(hom_count_exponent(&part(&[1]), &part(&[1])), 1);
    assert_eq!(hom_count_exponent(&part(&[2, 1]), &part(&[1, 1])), 4);
    assert_eq!(hom_count_exponent(&part(&[3]), &part(&[2])), 2);
    assert_eq!(hom_count_exponent(&Partition::empty(), &part(&[4, 2])), 0);
}

#[test]
fn first_moments() {
    // λ = (1): (p − 1)χ; λ = (1,1): ((p − 1)χ)²/2 · MC(Z/p²)
    for p in [2u64, 3, 7] {
        let chi = 0.3;
        let m1 = moment_ld(p, chi, &part(&[1])).unwrap();
        assert!((m1 - (p - 1) as f64 * chi).abs() < 1e-14);
        let m11 = moment_ld(p, chi, &part(&[1, 1])).unwrap();
        assert!((m11 - ((p - 1) as f64 * chi).powi(2) / 2.0).abs() < 1e-14);
    }
    assert!((moment_ld(2, 0.5, &part(&[1, 1])).unwrap() - 0.125).abs() < 1e-15);
    assert!((moment_ld(2, 0.5, &part(&[2])).unwrap() - 0.375).abs() < 1e-15);
}

#[test]
fn hom_moment_estimates() {
    let dist = EntryDist::uniform(2, 1).unwrap();
    let r = estimate_hom_moment(&dist, &part(&[1]), 512, 4000, 5).unwrap();
    // finite-n mean is 1/2 + 1/n
    assert!((r.estimate - (0.5 + 1.0 / 512.0)).abs() < 4.0 * r.stderr + 1e-9, "{r:?}");
    let r = estimate_hom_moment(&EntryDist::uniform(2, 1).unwrap(), &part(&[1, 1]), 512, 4000, 6).unwrap();
    let theory = 0.5f64.powi(2) * 3.0 / 2.0;
    assert!((r.estimate - theory).abs() < 4.0 * r.stderr + 0.01, "{r:?}");
}

#[test]
fn quadrupling_trials_halves_stderr() {
    let dist = EntryDist::parse("0:0.2,1:0.5,2:0.3", 3, 1).unwrap();
    let a = estimate_chi0_with(&dist, 200, 20_000, 1, Chi0Sampler::Uniform).unwrap();
    let b = estimate_chi0_with(&dist, 200, 80_000, 1, Chi0Sampler::Uniform).unwrap();
    let ratio = a.stderr / b.stderr;
    assert!((1.6..2.4).contains(&ratio), "ratio {ratio}");
}
