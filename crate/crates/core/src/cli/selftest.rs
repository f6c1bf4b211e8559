//! Brute-force oracle checks behind `tricok selftest`.

use num_bigint::BigUint;
use rand::Rng;

use crate::entrydist::{tau, EntryDist};
use crate::error::Result;
use crate::modular::PadicRing;
use crate::pgroup::{brute_force_hom_count, brute_force_maximal_chains, hom_count_exponent, maximal_chain_count, partitions_of};
use crate::plinalg::oracle::exact_cokernel_type;
use crate::plinalg::{invariant_valuations, streamed_valuations, TriMatrix};
use crate::rng::{purpose, substream};

fn chains() -> Result<usize> {
    let mut checked = 0;
    for p in [2u64, 3] {
        for size in 0..=4 {
            for l in partitions_of(size) {
                if maximal_chain_count(&l, p)? != brute_force_maximal_chains(&l, p)? {
                    return Err(crate::Error::Numerical(format!("MC mismatch at {l}, p = {p}")));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn homs() -> Result<usize> {
    let mut checked = 0;
    for p in [2u64, 3] {
        for a in 0..=3 {
            for b in 0..=3 {
                for l in partitions_of(a) {
                    for m in partitions_of(b) {
                        let Ok(brute) = brute_force_hom_count(&l, &m, p) else { continue };
                        if brute != BigUint::from(p).pow(hom_count_exponent(&l, &m) as u32) {
                            return Err(crate::Error::Numerical(format!("Hom mismatch at {l}, {m}, p = {p}")));
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(checked)
}

fn smith(seed: u64) -> Result<usize> {
    let mut rng = substream(seed, purpose::MATRIX, u64::MAX);
    let count = 200;
    for k in 0..count {
        let p = [2u64, 3, 5][k % 3];
        let e = rng.random_range(1..=4u32);
        let n = rng.random_range(1..=7usize);
        let ring = PadicRing::new(p, e)?;
        // bias toward multiples of p so that deep valuations occur
        let m = TriMatrix::from_fn(ring, n, |_, _| {
            let x = rng.random_range(0..ring.modulus());
            if rng.random_bool(0.5) { ring.mul(x, p) } else { x }
        });
        let want = exact_cokernel_type(&m);
        if invariant_valuations(&m) != want || streamed_valuations(&m, e)? != want {
            return Err(crate::Error::Numerical(format!("valuation mismatch on\n{}", m.dump())));
        }
    }
    Ok(count)
}

fn taus() -> Result<usize> {
    let dist = EntryDist::parse("0:0.2,1:0.5,2:0.3", 3, 1)?;
    let h = crate::pgroup::Partition::new(vec![1])?;
    let probs = dist.table()?;
    let mut checked = 0;
    for len in 1..=4u32 {
        for code in 0..3usize.pow(len) {
            let v: Vec<usize> = (0..len).map(|i| code / 3usize.pow(i) % 3).collect();
            let mut direct = 0.0;
            for xi in 0..3usize.pow(len) {
                let x: Vec<usize> = (0..len).map(|i| xi / 3usize.pow(i) % 3).collect();
                if x.iter().zip(&v).map(|(a, b)| a * b).sum::<usize>() % 3 == 0 {
                    direct += x.iter().map(|&a| probs[a]).product::<f64>();
                }
            }
            if (tau(&dist, &h, &v)? - direct).abs() > 1e-12 {
                return Err(crate::Error::Numerical(format!("tau mismatch at {v:?}")));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

type Check = Box<dyn Fn() -> Result<usize>>;

/// Run every check, print one line each, and report overall success.
pub fn run(seed: u64) -> bool {
    let checks: [(&str, Check); 4] = [
        ("maximal chains vs subgroup lattice", Box::new(chains)),
        ("hom counts vs enumeration", Box::new(homs)),
        ("valuations vs exact Smith form", Box::new(move || smith(seed))),
        ("tau vs direct sum", Box::new(taus)),
    ];
    let mut ok = true;
    for (name, f) in checks.iter() {
        match f() {
            Ok(n) => println!("PASS {name} ({n} cases)"),
            Err(e) => {
                ok = false;
                println!("FAIL {name}: {e}");
            }
        }
    }
    ok
}
