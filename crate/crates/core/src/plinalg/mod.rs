//! Linear algebra over `F_p` and over the truncated local ring `Z/p^E`.
//!
//! Three engines live here:
//!
//! * [`corank_mod_p`]: Gaussian elimination over `F_p`, with rows packed
//!   into 64-bit words when `p = 2`.
//! * [`invariant_valuations`]: dense elimination over `Z/p^E` with pivots
//!   of minimal valuation, returning the valuations of the Smith form.
//! * [`stream::CokernelStream`]: consumes the rows of a lower triangular
//!   matrix one at a time and keeps a presentation of the cokernel. This
//!   is what the simulations use; it agrees with the dense routine.
//!
//! [`oracle`] holds an untruncated big-integer Smith form for tests.

pub mod dense;
pub mod gf2;
pub mod oracle;
pub mod stream;

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::modular::PadicRing;
use crate::pgroup::Partition;

/// Marker for a valuation that is at least the working precision.
pub const INFINITE: u32 = u32::MAX;

/// Lower triangular `n × n` matrix with residues mod `p^E`.
///
/// Row `i` (0-based) stores columns `0..=i` contiguously.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriMatrix {
    n: usize,
    ring: PadicRing,
    entries: Vec<u64>,
}

#[inline]
fn row_offset(i: usize) -> usize {
    i * (i + 1) / 2
}

impl TriMatrix {
    pub fn zeros(ring: PadicRing, n: usize) -> Self {
        TriMatrix { n, ring, entries: vec![0; row_offset(n)] }
    }

    pub fn identity(ring: PadicRing, n: usize) -> Self {
        let mut m = Self::zeros(ring, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn diagonal(ring: PadicRing, diag: &[u64]) -> Self {
        let mut m = Self::zeros(ring, diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m.set(i, i, ring.reduce(x));
        }
        m
    }

    /// Rows given as their lower parts; row `i` must have `i + 1` entries.
    /// Entries are reduced mod `p^E`.
    pub fn from_rows(ring: PadicRing, rows: &[Vec<u64>]) -> Result<Self> {
        let mut m = Self::zeros(ring, rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return invalid(format!("row {i} has {} entries, expected {}", row.len(), i + 1));
            }
            m.row_mut(i).iter_mut().zip(row).for_each(|(d, &x)| *d = ring.reduce(x));
        }
        Ok(m)
    }

    /// Fill row by row from `f(i, j)`.
    pub fn from_fn(ring: PadicRing, n: usize, mut f: impl FnMut(usize, usize) -> u64) -> Self {
        let mut m = Self::zeros(ring, n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, ring.reduce(f(i, j)));
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ring(&self) -> PadicRing {
        self.ring
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[row_offset(i)..row_offset(i + 1)]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.entries[row_offset(i)..row_offset(i + 1)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        if j > i {
            0
        } else {
            self.entries[row_offset(i) + j]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u64) {
        assert!(j <= i, "entry ({i},{j}) is above the diagonal");
        self.entries[row_offset(i) + j] = x;
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<u64> {
        let n = self.n;
        let mut a = vec![0u64; n * n];
        for i in 0..n {
            a[i * n..i * n + i + 1].copy_from_slice(self.row(i));
        }
        a
    }

    /// Debug dump: header `p E n`, then one line per row.
    pub fn dump(&self) -> String {
        let mut s = format!("{} {} {}\n", self.ring.p(), self.ring.precision(), self.n);
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(u64::to_string).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<u64> = parse_ints(lines.next().ok_or_else(|| bad("empty dump"))?)?;
        let [p, e, n] = header[..] else {
            return Err(bad("header must be `p E n`"));
        };
        let ring = PadicRing::new(p, e as u32)?;
        let rows: Vec<Vec<u64>> = lines.map(parse_ints).collect::<Result<_>>()?;
        if rows.len() != n as usize {
            return Err(bad("row count does not match header"));
        }
        if rows.iter().flatten().any(|&x| x >= ring.modulus()) {
            return Err(bad("residue out of range"));
        }
        Self::from_rows(ring, &rows)
    }
}

fn bad(msg: &str) -> Error {
    Error::Validation(format!("matrix dump: {msg}"))
}

fn parse_ints(line: &str) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| bad("non-integer token")))
        .collect()
}

/// Valuations of the invariant factors of an `n × n` matrix, truncated
/// at the precision `E`. Stored in ascending order, [`INFINITE`] last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CokernelType {
    precision: u32,
    valuations: Vec<u32>,
}

impl CokernelType {
    /// Values `>= precision` are stored as [`INFINITE`].
    pub fn new(precision: u32, mut valuations: Vec<u32>) -> Self {
        for v in &mut valuations {
            if *v >= precision {
                *v = INFINITE;
            }
        }
        valuations.sort_unstable();
        CokernelType { precision, valuations }
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn valuations(&self) -> &[u32] {
        &self.valuations
    }

    /// `#{valuations < i}`.
    pub fn count_below(&self, i: u32) -> usize {
        self.valuations.partition_point(|&v| v < i)
    }

    /// Dimension of the kernel mod p.
    pub fn corank(&self) -> usize {
        self.n() - self.count_below(1)
    }

    /// Number of valuations reported as infinite.
    pub fn truncated_count(&self) -> usize {
        self.n() - self.count_below(self.precision)
    }

    /// `(rank(p^{i-1} Γ))_{i=1..d} = (n − #{valuations < i})`.
    pub fn rank_profile(&self, d: u32) -> Result<Vec<usize>> {
        if d > self.precision {
            return invalid(format!("d = {d} exceeds precision E = {}", self.precision));
        }
        let prof: Vec<usize> = (1..=d).map(|i| self.n() - self.count_below(i)).collect();
        debug_assert!(prof.windows(2).all(|w| w[0] >= w[1]));
        Ok(prof)
    }

    /// Type of the finite part seen at this precision (valuations in `1..E`).
    pub fn torsion_type(&self) -> Partition {
        let mut parts: Vec<u32> =
            self.valuations.iter().copied().filter(|&v| v >= 1 && v != INFINITE).collect();
        parts.reverse();
        Partition::new(parts).expect("valid parts")
    }

    /// `log_p |Hom(Γ, G_μ)|`. Each cyclic factor `Z/p^v` contributes
    /// `Σ_j min(v, μ_j)`; an infinite valuation behaves like `Z`, which is
    /// exact as long as `μ_1 <= precision`.
    pub fn hom_exponent(&self, mu: &Partition) -> Result<u64> {
        if mu.largest() > self.precision {
            return invalid(format!(
                "exponent of G ({}) exceeds the precision {}",
                mu.largest(),
                self.precision
            ));
        }
        let mut total = 0u64;
        for &v in &self.valuations {
            if v == 0 {
                continue;
            }
            total += mu.parts().iter().map(|&m| m.min(v) as u64).sum::<u64>();
        }
        Ok(total)
    }
}

/// Dimension of the kernel of `M mod p`.
pub fn corank_mod_p(m: &TriMatrix) -> usize {
    if m.ring().p() == 2 {
        gf2::corank(m)
    } else {
        dense::corank_generic(m)
    }
}

/// Smith form valuations by dense valuation-pivot elimination over `Z/p^E`.
pub fn invariant_valuations(m: &TriMatrix) -> CokernelType {
    let ring = m.ring();
    let mut a = m.to_dense();
    let vals = dense::smith_valuations(&ring, m.n(), m.n(), &mut a);
    CokernelType::new(ring.precision(), vals)
}

/// Same valuations via the streaming engine, at precision `min(d, E)`.
/// Valuations `>= d` are reported as infinite.
pub fn streamed_valuations(m: &TriMatrix, d: u32) -> Result<CokernelType> {
    let ring = m.ring();
    let d = d.min(ring.precision());
    let work = PadicRing::new(ring.p(), d)?;
    let mut s = stream::CokernelStream::new(work, m.n());
    let mut row = Vec::with_capacity(m.n());
    for i in 0..m.n() {
        row.clear();
        row.extend(m.row(i).iter().map(|&x| work.reduce(x)));
        s.push_row(&row);
    }
    Ok(s.cokernel_type())
}
