//! Random lower triangular matrices, generated row by row into a
//! [`CokernelStream`].
//!
//! For `p = 2` with bit-sliced storage, 64 entries are drawn at once:
//! bit plane `b` of an entry is Bernoulli with the conditional probability
//! of that bit given the lower bits, and a 64-lane Bernoulli mask costs
//! about one random word when the probability is a short dyadic (the
//! uniform and symmetric laws). Other primes draw each entry by inverse CDF.

use rand::{Rng, RngCore};

use crate::entrydist::EntryDist;
use crate::error::{invalid, Result};
use crate::plinalg::stream::CokernelStream;

/// 64 independent Bernoulli lanes with `P(1) = q / 2^64`; `q = None` means 1.
#[inline]
pub fn bernoulli_mask<R: RngCore + ?Sized>(rng: &mut R, q: Option<u64>) -> u64 {
    let Some(q) = q else { return u64::MAX };
    if q == 0 {
        return 0;
    }
    // lane is set iff its uniform U < q, comparing U bit by bit from the top
    let mut result = 0u64;
    let mut open = u64::MAX;
    for b in (0..64).rev() {
        let w = rng.next_u64();
        if q >> b & 1 == 1 {
            result |= open & !w;
            open &= w;
        } else {
            open &= !w;
        }
        if open == 0 || q & ((1u64 << b) - 1) == 0 {
            break;
        }
    }
    result
}

/// `q` as a 64-bit threshold: `None` for 1, else `floor(q 2^64)`.
pub fn threshold(q: f64) -> Option<u64> {
    if q >= 1.0 {
        None
    } else if q <= 0.0 {
        Some(0)
    } else {
        Some((q * 18446744073709551616.0) as u64)
    }
}

#[derive(Clone, Debug)]
struct PlaneRule {
    /// One threshold per value of the lower bits, or a single shared one.
    thresholds: Vec<Option<u64>>,
}

#[derive(Clone, Debug)]
enum Kind {
    Bits(Vec<PlaneRule>),
    Residues(EntryDist),
}

/// Draws the entries of `L_n` reduced mod `p^D`.
#[derive(Clone, Debug)]
pub struct RowSampler {
    kind: Kind,
    precision: u32,
}

impl RowSampler {
    /// Sampler for `dist mod p^precision`. `bit_sliced` selects the plane
    /// generator and requires `p = 2`.
    pub fn new(dist: &EntryDist, precision: u32, bit_sliced: bool) -> Result<Self> {
        let marg = dist.reduce(precision)?;
        if !bit_sliced {
            return Ok(RowSampler { kind: Kind::Residues(marg), precision });
        }
        if dist.p() != 2 {
            return invalid("bit-sliced sampling needs p = 2");
        }
        let table = marg.table()?;
        let mut rules = Vec::with_capacity(precision as usize);
        for b in 0..precision {
            let lower = 1usize << b;
            let mut th = Vec::with_capacity(lower);
            for t in 0..lower {
                // P(bit b = 1 | ξ ≡ t mod 2^b)
                let (mut on, mut all) = (0.0, 0.0);
                for (r, &pr) in table.iter().enumerate() {
                    if r % lower == t {
                        all += pr;
                        if r >> b & 1 == 1 {
                            on += pr;
                        }
                    }
                }
                th.push(threshold(if all > 0.0 { on / all } else { 0.0 }));
            }
            if th.iter().all(|x| *x == th[0]) {
                th.truncate(1);
            }
            rules.push(PlaneRule { thresholds: th });
        }
        Ok(RowSampler { kind: Kind::Bits(rules), precision })
    }

    /// Matching sampler for an engine.
    pub fn for_stream(dist: &EntryDist, stream: &CokernelStream) -> Result<Self> {
        Self::new(dist, stream.ring().precision(), stream.is_bit_sliced())
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Reset `stream` and feed it `n` random rows.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, stream: &mut CokernelStream, n: usize, buf: &mut Vec<u64>) {
        stream.reset();
        match &self.kind {
            Kind::Residues(dist) => {
                for i in 0..n {
                    buf.clear();
                    buf.extend((0..=i).map(|_| dist.sample(rng)));
                    stream.push_row(buf);
                }
            }
            Kind::Bits(rules) => {
                let dp = rules.len();
                for i in 0..n {
                    let words = (i + 1).div_ceil(64);
                    buf.clear();
                    buf.resize(dp * words, 0);
                    for w in 0..words {
                        self.fill_word(rng, rules, buf, words, w);
                    }
                    let tail = (i + 1) % 64;
                    if tail != 0 {
                        let keep = (1u64 << tail) - 1;
                        for b in 0..dp {
                            buf[b * words + words - 1] &= keep;
                        }
                    }
                    stream.push_row_planes(buf, words);
                }
            }
        }
    }

    fn fill_word<R: Rng + ?Sized>(&self, rng: &mut R, rules: &[PlaneRule], buf: &mut [u64], words: usize, w: usize) {
        for (b, rule) in rules.iter().enumerate() {
            let plane = if rule.thresholds.len() == 1 {
                bernoulli_mask(rng, rule.thresholds[0])
            } else {
                let mut acc = 0u64;
                for (t, &q) in rule.thresholds.iter().enumerate() {
                    let mut lanes = u64::MAX;
                    for c in 0..b {
                        let pl = buf[c * words + w];
                        lanes &= if t >> c & 1 == 1 { pl } else { !pl };
                    }
                    if lanes != 0 {
                        acc |= lanes & bernoulli_mask(rng, q);
                    }
                }
                acc
            };
            buf[b * words + w] = plane;
        }
    }

    /// Draw a full matrix (testing helper).
    pub fn sample_entries<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<u64>> {
        let mut out = Vec::with_capacity(n);
        match &self.kind {
            Kind::Residues(dist) => {
                for i in 0..n {
                    out.push((0..=i).map(|_| dist.sample(rng)).collect());
                }
            }
            Kind::Bits(rules) => {
                let dp = rules.len();
                for i in 0..n {
                    let words = (i + 1).div_ceil(64);
                    let mut buf = vec![0u64; dp * words];
                    for w in 0..words {
                        self.fill_word(rng, rules, &mut buf, words, w);
                    }
                    out.push(
                        (0..=i)
                            .map(|j| (0..dp).fold(0u64, |a, b| a | ((buf[b * words + j / 64] >> (j % 64)) & 1) << b))
                            .collect(),
                    );
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{purpose, substream};

    #[test]
    fn mask_frequencies() {
        let mut rng = substream(5, purpose::MATRIX, 0);
        for &q in &[0.5, 0.75, 0.1, 1.0 / 3.0] {
            let words = 20_000;
            let ones: u32 = (0..words).map(|_| bernoulli_mask(&mut rng, threshold(q)).count_ones()).sum();
            let n = 64.0 * words as f64;
            let sd = (n * q * (1.0 - q)).sqrt();
            assert!((ones as f64 - q * n).abs() < 4.0 * sd, "q={q}");
        }
        assert_eq!(bernoulli_mask(&mut rng, None), u64::MAX);
        assert_eq!(bernoulli_mask(&mut rng, Some(0)), 0);
    }

    #[test]
    fn plane_sampler_matches_law() {
        let dist = EntryDist::parse("0:0.1,1:0.2,2:0.3,3:0.05,6:0.35", 2, 3).unwrap();
        let s = RowSampler::new(&dist, 3, true).unwrap();
        let mut rng = substream(9, purpose::MATRIX, 1);
        let rows = s.sample_entries(&mut rng, 400);
        let mut counts = [0f64; 8];
        let mut total = 0f64;
        for r in &rows {
            for &x in r {
                counts[x as usize] += 1.0;
                total += 1.0;
            }
        }
        let want = dist.table().unwrap();
        for r in 0..8 {
            let sd = (total * want[r] * (1.0 - want[r])).sqrt().max(1.0);
            assert!((counts[r] - total * want[r]).abs() < 4.5 * sd, "r={r}");
        }
    }
}
