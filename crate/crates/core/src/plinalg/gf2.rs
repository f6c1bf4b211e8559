//! GF(2) elimination on bit-packed rows.
//!
//! Rows of a lower triangular matrix arrive with their last possible
//! nonzero entry on the diagonal, so the echelon basis is keyed by the
//! highest set bit. A row with an odd diagonal entry becomes a new basis
//! vector immediately; only rows with even diagonal need reduction.

use super::TriMatrix;

/// Bit-packed row of length `len`, bit `j` in word `j / 64`.
#[derive(Clone, Debug, Default)]
pub struct BitRow {
    pub words: Vec<u64>,
}

impl BitRow {
    pub fn from_residues(entries: &[u64]) -> Self {
        let mut words = vec![0u64; entries.len().div_ceil(64)];
        for (j, &x) in entries.iter().enumerate() {
            words[j / 64] |= (x & 1) << (j % 64);
        }
        BitRow { words }
    }

    /// Highest set bit within the first `upto_word` words, if any.
    #[inline]
    fn top_bit(&self, upto_word: usize) -> Option<usize> {
        (0..upto_word)
            .rev()
            .find(|&w| self.words[w] != 0)
            .map(|w| w * 64 + 63 - self.words[w].leading_zeros() as usize)
    }
}

/// Incremental GF(2) rank of a lower triangular matrix fed row by row.
#[derive(Debug)]
pub struct Gf2Echelon {
    basis: Vec<Option<Vec<u64>>>,
    rank: usize,
    rows: usize,
}

impl Gf2Echelon {
    pub fn new(n: usize) -> Self {
        Gf2Echelon { basis: vec![None; n], rank: 0, rows: 0 }
    }

    /// Feed row `i` (entries in columns `0..=i`).
    pub fn push(&mut self, mut row: BitRow) {
        let i = self.rows;
        self.rows += 1;
        let mut hi = (i / 64) + 1;
        while let Some(c) = row.top_bit(hi) {
            hi = c / 64 + 1;
            match &self.basis[c] {
                Some(b) => {
                    for (x, y) in row.words[..hi].iter_mut().zip(b) {
                        *x ^= y;
                    }
                }
                None => {
                    row.words.truncate(hi);
                    self.basis[c] = Some(row.words);
                    self.rank += 1;
                    return;
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn corank(&self) -> usize {
        self.rows - self.rank
    }
}

pub fn corank(m: &TriMatrix) -> usize {
    let mut e = Gf2Echelon::new(m.n());
    for i in 0..m.n() {
        e.push(BitRow::from_residues(m.row(i)));
    }
    e.corank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::PadicRing;

    #[test]
    fn word_boundaries() {
        let r = PadicRing::new(2, 1).unwrap();
        // all-ones lower triangle: rank n
        let m = TriMatrix::from_fn(r, 130, |_, _| 1);
        assert_eq!(corank(&m), 0);
        // ones only in column 0: rank 1
        let m = TriMatrix::from_fn(r, 130, |_, j| (j == 0) as u64);
        assert_eq!(corank(&m), 129);
        // every row equals e_0 + e_127 from row 127 on, others zero
        let m = TriMatrix::from_fn(r, 140, |i, j| (i >= 127 && (j == 0 || j == 127)) as u64);
        assert_eq!(corank(&m), 139);
    }
}
