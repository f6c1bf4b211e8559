//! Untruncated Smith normal form over `Z` with big integers. Test oracle only.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{CokernelType, TriMatrix};

/// Invariant factors `d_1 | d_2 | ...` of a square integer matrix, zeros last.
pub fn smith_diagonal(rows: &[Vec<i64>]) -> Vec<BigInt> {
    let n = rows.len();
    let mut a: Vec<Vec<BigInt>> =
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut diag = Vec::with_capacity(n);
    for t in 0..n {
        loop {
            // smallest nonzero magnitude in the remaining block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if !a[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                diag.resize(n, BigInt::zero());
                return diag;
            };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            let piv = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..n {
                let q = &a[i][t] / &piv;
                if !q.is_zero() {
                    for j in t..n {
                        let s = &q * &a[t][j];
                        a[i][j] -= s;
                    }
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..n {
                let q = &a[t][j] / &piv;
                if !q.is_zero() {
                    for i in t..n {
                        let s = &q * &a[i][t];
                        a[i][j] -= s;
                    }
                }
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            // the pivot must divide the rest of the block
            let bad = (t + 1..n)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !(&a[i][j] % &piv).is_zero());
            match bad {
                Some((i, _)) => {
                    for j in t..n {
                        let s = a[i][j].clone();
                        a[t][j] += s;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

/// p-adic valuations of the invariant factors; `None` for zero.
pub fn smith_valuations_exact(rows: &[Vec<i64>], p: u64) -> Vec<Option<u32>> {
    let pb = BigInt::from(p);
    smith_diagonal(rows)
        .into_iter()
        .map(|mut d| {
            if d.is_zero() {
                return None;
            }
            let mut v = 0;
            while (&d % &pb).is_zero() {
                d /= &pb;
                v += 1;
            }
            Some(v)
        })
        .collect()
}

/// [`CokernelType`] of `m` from the exact Smith form of its integer lift.
pub fn exact_cokernel_type(m: &TriMatrix) -> CokernelType {
    let n = m.n();
    let rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j) as i64).collect()).collect();
    let e = m.ring().precision();
    let vals = smith_valuations_exact(&rows, m.ring().p()).into_iter().map(|v| v.unwrap_or(e)).collect();
    CokernelType::new(e, vals)
}
