//! Dense elimination over `Z/p^E` and over `F_p`.

use super::TriMatrix;
use crate::modular::PadicRing;

/// Valuations of the Smith form of a `rows × cols` row-major matrix.
///
/// Each step takes an entry of minimal valuation in the remaining block
/// (smallest row, then smallest column) as pivot; over `Z/p^E` every
/// element is a unit times `p^v`, so the pivot divides the whole block.
/// Returns `min(rows, cols)` values, with `precision` standing for zero.
/// The matrix is destroyed.
pub fn smith_valuations(ring: &PadicRing, rows: usize, cols: usize, a: &mut [u64]) -> Vec<u32> {
    assert_eq!(a.len(), rows * cols);
    let e = ring.precision();
    let steps = rows.min(cols);
    let mut out = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut best = (e, 0, 0);
        'scan: for i in t..rows {
            for j in t..cols {
                let v = ring.valuation(a[i * cols + j]);
                if v < best.0 {
                    best = (v, i, j);
                    if v == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let (v, pi, pj) = best;
        if v == e {
            out.resize(steps, e);
            break;
        }
        if pi != t {
            for j in 0..cols {
                a.swap(pi * cols + j, t * cols + j);
            }
        }
        if pj != t {
            for i in 0..rows {
                a.swap(i * cols + pj, i * cols + t);
            }
        }
        let x = a[t * cols + t];
        for i in t + 1..rows {
            let y = a[i * cols + t];
            if y == 0 {
                continue;
            }
            let f = ring.div_exact(y, x);
            for j in t..cols {
                let s = a[t * cols + j];
                if s != 0 {
                    a[i * cols + j] = ring.sub(a[i * cols + j], ring.mul(f, s));
                }
            }
        }
        // Column t is now zero below the pivot, so clearing row t by column
        // operations touches nothing else.
        for j in t + 1..cols {
            a[t * cols + j] = 0;
        }
        out.push(v);
    }
    out
}

/// Corank mod p for any prime, by echelon reduction on the last nonzero column.
pub fn corank_generic(m: &TriMatrix) -> usize {
    let p = m.ring().p();
    let n = m.n();
    // basis[c] holds a reduced row whose last nonzero entry (= 1) is in column c
    let mut basis: Vec<Option<Vec<u64>>> = vec![None; n];
    let mut rank = 0;
    for i in 0..n {
        let mut row: Vec<u64> = m.row(i).iter().map(|&x| x % p).collect();
        let mut top = i as isize;
        loop {
            while top >= 0 && row[top as usize] == 0 {
                top -= 1;
            }
            if top < 0 {
                break;
            }
            let c = top as usize;
            match &basis[c] {
                Some(b) => {
                    let f = row[c];
                    for (x, &y) in row[..=c].iter_mut().zip(b) {
                        *x = (*x + (p - f) * y) % p;
                    }
                }
                None => {
                    let inv = crate::modular::inv_mod(row[c], p);
                    row.truncate(c + 1);
                    row.iter_mut().for_each(|x| *x = *x * inv % p);
                    basis[c] = Some(row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    n - rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangular_and_zero_rows() {
        let ring = PadicRing::new(2, 3).unwrap();
        // [[2, 4, 0], [0, 0, 0]] -> one pivot of valuation 1, then zero
        let mut a = vec![2, 4, 0, 0, 0, 0];
        assert_eq!(smith_valuations(&ring, 2, 3, &mut a), vec![1, 3]);
    }

    #[test]
    fn two_by_two() {
        let ring = PadicRing::new(5, 3).unwrap();
        let mut a = vec![5, 0, 1, 5];
        assert_eq!(smith_valuations(&ring, 2, 2, &mut a), vec![0, 2]);
    }

    #[test]
    fn generic_corank_matches_simple_cases() {
        let ring = PadicRing::new(3, 1).unwrap();
        let m = TriMatrix::from_rows(ring, &[vec![0], vec![1, 0], vec![2, 1, 0]]).unwrap();
        // columns 0 and 1 are hit, column 2 never: rank 2
        assert_eq!(corank_generic(&m), 1);
        assert_eq!(corank_generic(&TriMatrix::identity(ring, 6)), 0);
        assert_eq!(corank_generic(&TriMatrix::zeros(ring, 4)), 4);
    }
}
