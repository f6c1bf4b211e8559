//! Row-by-row cokernel of a lower triangular matrix over `Z/p^D`.
//!
//! After `i` rows the cokernel `Z^i / (rows)` localized at `p` and
//! truncated at `p^D` is kept as `⊕_k Z/p^{e_k}` with `1 <= e_k <= D`
//! (`e_k = D` also stands for a free factor). A projection `P` maps each
//! standard basis vector `e_j` to its coordinates on the generators;
//! column `k` of `P` is stored contiguously.
//!
//! Appending row `(r, a)` adds a generator for the new basis vector and the
//! single relation `w + a·f_new = 0` with `w_k = Σ_j r_j P_jk`. The
//! relation matrix is then `diag(p^{e_k})` plus one extra row; a Smith
//! reduction of that shape needs only column operations on `P` and keeps
//! at most one extra row alive, so each step is cheap. Generators whose
//! order drops to `p^0` are discarded.
//!
//! For `p = 2` columns are stored as `D` bit planes so that dot products
//! are popcounts; other primes use one residue per word.

use super::{CokernelType, INFINITE};
use crate::modular::PadicRing;

/// Planes supported by the bit-sliced store.
pub const MAX_PLANES: usize = 16;

trait ColumnOps {
    /// `col[dst] += q · col[src]`.
    fn axpy(&mut self, dst: usize, q: u64, src: usize);
}

#[derive(Clone, Debug, Default)]
struct Column {
    data: Vec<u64>,
    lo: usize,
    hi: usize,
}

/// Residue columns for odd `p` (or large `D`).
#[derive(Debug)]
struct WordColumns {
    ring: PadicRing,
    cols: Vec<Column>,
    free: Vec<Column>,
    len: usize,
}

impl WordColumns {
    fn take(&mut self) -> Column {
        self.free.pop().unwrap_or_else(|| Column { data: vec![0; self.len], lo: 0, hi: 0 })
    }

    fn push_unit(&mut self, row: usize) {
        let mut c = self.take();
        c.data[row] = 1;
        c.lo = row;
        c.hi = row + 1;
        self.cols.push(c);
    }

    fn remove(&mut self, k: usize) {
        let mut c = self.cols.remove(k);
        c.data[c.lo..c.hi].fill(0);
        c.lo = 0;
        c.hi = 0;
        self.free.push(c);
    }

    fn dot(&self, k: usize, row: &[u64]) -> u64 {
        let c = &self.cols[k];
        let hi = c.hi.min(row.len());
        if c.lo >= hi {
            return 0;
        }
        let m = self.ring.modulus();
        let (r, d) = (&row[c.lo..hi], &c.data[c.lo..hi]);
        if m <= u32::MAX as u64 {
            let s: u128 = r.iter().zip(d).map(|(&a, &b)| (a * b) as u128).sum();
            (s % m as u128) as u64
        } else {
            r.iter().zip(d).fold(0, |acc, (&a, &b)| self.ring.add(acc, self.ring.mul(a, b)))
        }
    }
}

impl ColumnOps for WordColumns {
    fn axpy(&mut self, dst: usize, q: u64, src: usize) {
        if q == 0 {
            return;
        }
        let (lo, hi) = (self.cols[src].lo, self.cols[src].hi);
        if lo >= hi {
            return;
        }
        let ring = self.ring;
        let (s, d) = pair_mut(&mut self.cols, src, dst);
        for j in lo..hi {
            let x = s.data[j];
            if x != 0 {
                d.data[j] = ring.add(d.data[j], ring.mul(q, x));
            }
        }
        widen(d, lo, hi);
    }
}

/// Bit-sliced columns for `p = 2`: plane `b` of column `k` at
/// `data[b * words .. (b + 1) * words]`; `lo..hi` is a word range.
#[derive(Debug)]
struct BitColumns {
    planes: usize,
    words: usize,
    cols: Vec<Column>,
    free: Vec<Column>,
}

impl BitColumns {
    fn take(&mut self) -> Column {
        let size = self.planes * self.words;
        self.free.pop().unwrap_or_else(|| Column { data: vec![0; size], lo: 0, hi: 0 })
    }

    fn push_unit(&mut self, row: usize) {
        let mut c = self.take();
        let w = row / 64;
        c.data[w] = 1 << (row % 64);
        c.lo = w;
        c.hi = w + 1;
        self.cols.push(c);
    }

    fn remove(&mut self, k: usize) {
        let mut c = self.cols.remove(k);
        for b in 0..self.planes {
            c.data[b * self.words + c.lo..b * self.words + c.hi].fill(0);
        }
        c.lo = 0;
        c.hi = 0;
        self.free.push(c);
    }

    /// `Σ_j r_j P_jk mod 2^D` where `row` holds the row planes.
    fn dot(&self, k: usize, row: &[u64], row_words: usize) -> u64 {
        let c = &self.cols[k];
        let hi = c.hi.min(row_words);
        if c.lo >= hi {
            return 0;
        }
        let dp = self.planes;
        let mut acc: u64 = 0;
        for a in 0..dp {
            let r = &row[a * row_words..a * row_words + row_words];
            for b in 0..dp - a {
                let col = &c.data[b * self.words..b * self.words + self.words];
                let pop: u64 = (c.lo..hi).map(|w| (r[w] & col[w]).count_ones() as u64).sum();
                acc = acc.wrapping_add(pop << (a + b));
            }
        }
        acc & low_mask(dp)
    }
}

#[inline]
fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl ColumnOps for BitColumns {
    fn axpy(&mut self, dst: usize, q: u64, src: usize) {
        let dp = self.planes;
        let q = q & low_mask(dp);
        if q == 0 {
            return;
        }
        let (lo, hi) = (self.cols[src].lo, self.cols[src].hi);
        if lo >= hi {
            return;
        }
        let words = self.words;
        let (s, d) = pair_mut(&mut self.cols, src, dst);
        if dp == 1 {
            for w in lo..hi {
                d.data[w] ^= s.data[w];
            }
        } else {
            let mut sv = [0u64; MAX_PLANES];
            let mut t = [0u64; MAX_PLANES];
            let mut dv = [0u64; MAX_PLANES];
            for w in lo..hi {
                for b in 0..dp {
                    sv[b] = s.data[b * words + w];
                }
                t[..dp].fill(0);
                for c in 0..dp {
                    if q >> c & 1 == 1 {
                        let mut carry = 0u64;
                        for b in c..dp {
                            let y = sv[b - c];
                            let x = t[b];
                            t[b] = x ^ y ^ carry;
                            carry = (x & y) | (carry & (x ^ y));
                        }
                    }
                }
                for b in 0..dp {
                    dv[b] = d.data[b * words + w];
                }
                let mut carry = 0u64;
                for b in 0..dp {
                    let (x, y) = (dv[b], t[b]);
                    d.data[b * words + w] = x ^ y ^ carry;
                    carry = (x & y) | (carry & (x ^ y));
                }
            }
        }
        widen(d, lo, hi);
    }
}

fn widen(c: &mut Column, lo: usize, hi: usize) {
    if c.lo >= c.hi {
        c.lo = lo;
        c.hi = hi;
    } else {
        c.lo = c.lo.min(lo);
        c.hi = c.hi.max(hi);
    }
}

fn pair_mut(cols: &mut [Column], a: usize, b: usize) -> (&Column, &mut Column) {
    assert_ne!(a, b);
    if a < b {
        let (x, y) = cols.split_at_mut(b);
        (&x[a], &mut y[0])
    } else {
        let (x, y) = cols.split_at_mut(a);
        (&y[0], &mut x[b])
    }
}

#[derive(Debug)]
enum Store {
    Bits(BitColumns),
    Words(WordColumns),
}

/// Incremental cokernel of a lower triangular matrix, see the module docs.
#[derive(Debug)]
pub struct CokernelStream {
    ring: PadicRing,
    capacity: usize,
    rows: usize,
    orders: Vec<u32>,
    store: Store,
    pow: Vec<u64>,
    rel: Vec<u64>,
    next: Vec<u64>,
    active: Vec<bool>,
    planes_buf: Vec<u64>,
}

impl CokernelStream {
    /// Engine for up to `capacity` rows at working precision `ring`.
    pub fn new(ring: PadicRing, capacity: usize) -> Self {
        let d = ring.precision() as usize;
        let store = if ring.p() == 2 && d <= MAX_PLANES {
            Store::Bits(BitColumns {
                planes: d,
                words: capacity.div_ceil(64).max(1),
                cols: Vec::new(),
                free: Vec::new(),
            })
        } else {
            Store::Words(WordColumns { ring, cols: Vec::new(), free: Vec::new(), len: capacity })
        };
        let pow = (0..=ring.precision()).map(|k| ring.p().pow(k)).collect();
        CokernelStream {
            ring,
            capacity,
            rows: 0,
            orders: Vec::new(),
            store,
            pow,
            rel: Vec::new(),
            next: Vec::new(),
            active: Vec::new(),
            planes_buf: Vec::new(),
        }
    }

    /// Forget all rows, keeping allocations.
    pub fn reset(&mut self) {
        while !self.orders.is_empty() {
            let k = self.orders.len() - 1;
            self.remove_generator(k);
        }
        self.rows = 0;
    }

    pub fn ring(&self) -> PadicRing {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Whether rows can be supplied as bit planes.
    pub fn is_bit_sliced(&self) -> bool {
        matches!(self.store, Store::Bits(_))
    }

    /// Exponents `e_k` of the current generators (`D` means "at least D").
    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// Append the next row as residues mod `p^D`, columns `0..=i`.
    pub fn push_row(&mut self, row: &[u64]) {
        let i = self.rows;
        assert_eq!(row.len(), i + 1, "row {i} must have {} entries", i + 1);
        assert!(i < self.capacity, "capacity exceeded");
        match &mut self.store {
            Store::Words(s) => {
                let g = s.cols.len();
                self.rel.clear();
                self.rel.extend((0..g).map(|k| s.dot(k, row)));
            }
            Store::Bits(_) => {
                let dp = self.ring.precision() as usize;
                let words = (i + 1).div_ceil(64);
                let mut buf = std::mem::take(&mut self.planes_buf);
                buf.clear();
                buf.resize(dp * words, 0);
                for (j, &x) in row.iter().enumerate() {
                    for b in 0..dp {
                        buf[b * words + j / 64] |= ((x >> b) & 1) << (j % 64);
                    }
                }
                self.push_row_planes(&buf, words);
                self.planes_buf = buf;
                return;
            }
        }
        self.finish_row(self.ring.reduce(row[i]));
    }

    /// Append the next row given as `D` bit planes of `words` words each
    /// (plane-major). Bits beyond the diagonal must be zero.
    pub fn push_row_planes(&mut self, planes: &[u64], words: usize) {
        let i = self.rows;
        assert!(i < self.capacity, "capacity exceeded");
        let Store::Bits(s) = &self.store else {
            panic!("bit planes need p = 2");
        };
        let dp = s.planes;
        debug_assert_eq!(planes.len(), dp * words);
        debug_assert!(words >= (i + 1).div_ceil(64));
        let g = s.cols.len();
        self.rel.clear();
        self.rel.extend((0..g).map(|k| s.dot(k, planes, words)));
        let (w, bit) = (i / 64, i % 64);
        let a = (0..dp).fold(0u64, |acc, b| acc | ((planes[b * words + w] >> bit) & 1) << b);
        self.finish_row(a);
    }

    fn finish_row(&mut self, diag: u64) {
        let i = self.rows;
        self.rows += 1;
        let d = self.ring.precision();
        match &mut self.store {
            Store::Bits(s) => s.push_unit(i),
            Store::Words(s) => s.push_unit(i),
        }
        self.orders.push(d);
        self.rel.push(diag);
        self.reduce();
        for k in (0..self.orders.len()).rev() {
            if self.orders[k] == 0 {
                self.remove_generator(k);
            }
        }
    }

    fn remove_generator(&mut self, k: usize) {
        self.orders.remove(k);
        match &mut self.store {
            Store::Bits(s) => s.remove(k),
            Store::Words(s) => s.remove(k),
        }
    }

    /// Smith reduction of `diag(p^{e_k})` stacked with the relation `rel`.
    fn reduce(&mut self) {
        let ring = self.ring;
        let d = ring.precision();
        let g = self.orders.len();
        self.active.clear();
        self.active.resize(g, true);
        self.next.clear();
        self.next.resize(g, 0);
        loop {
            let mut best: Option<(u32, usize)> = None;
            for k in 0..g {
                if !self.active[k] {
                    continue;
                }
                let x = self.rel[k] % self.pow[self.orders[k] as usize];
                self.rel[k] = x;
                if x != 0 {
                    let v = ring.valuation(x);
                    if best.is_none_or(|(bv, _)| v <= bv) {
                        best = Some((v, k));
                    }
                }
            }
            let Some((v, ks)) = best else { break };
            let x = self.rel[ks];
            let ek = self.orders[ks];
            let spill = ek < d;
            for k in 0..g {
                if k == ks || !self.active[k] || self.rel[k] == 0 {
                    continue;
                }
                let q = ring.div_exact(self.rel[k], x);
                let nq = ring.neg(q);
                match &mut self.store {
                    Store::Bits(s) => s.axpy(k, nq, ks),
                    Store::Words(s) => s.axpy(k, nq, ks),
                }
                self.rel[k] = 0;
                if spill {
                    self.next[k] = ring.mul(nq, self.pow[ek as usize]);
                }
            }
            self.rel[ks] = 0;
            self.orders[ks] = v;
            self.active[ks] = false;
            if !spill {
                break;
            }
            std::mem::swap(&mut self.rel, &mut self.next);
            self.next.fill(0);
        }
    }

    /// Valuations of the cokernel of the rows pushed so far.
    pub fn cokernel_type(&self) -> CokernelType {
        let d = self.ring.precision();
        let mut v = vec![0u32; self.rows - self.orders.len()];
        v.extend(self.orders.iter().map(|&e| if e >= d { INFINITE } else { e }));
        CokernelType::new(d, v)
    }

    /// `(n − #{valuations < i})_{i=1..d}` without building a [`CokernelType`].
    pub fn rank_profile_into(&self, out: &mut Vec<usize>, d: u32) {
        out.clear();
        out.extend((1..=d).map(|i| self.orders.iter().filter(|&&e| e >= i).count()));
    }
}
