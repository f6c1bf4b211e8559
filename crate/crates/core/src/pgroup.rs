//! Partitions and finite abelian p-groups `G_λ = ⊕ Z/p^{λ_i}`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::modular::{check_prime, checked_pow, PadicRing};
use crate::plinalg::dense::smith_valuations;

/// Weakly decreasing tuple of positive integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return invalid("partition parts must be positive");
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return invalid(format!("partition {parts:?} is not weakly decreasing"));
        }
        Ok(Partition(parts))
    }

    /// Sorts and drops zeros.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.retain(|&x| x > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Parses `"2,1"`; the empty string and `"()"` give the empty partition.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if t.is_empty() {
            return Ok(Self::empty());
        }
        let parts = t
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Validation(format!("bad partition part `{x}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|λ|`.
    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `λ_1`, or 0 for the empty partition.
    pub fn largest(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    /// `λ'_i = #{j : λ_j >= i}`.
    pub fn conjugate(&self) -> Partition {
        let m = self.largest();
        Partition((1..=m).map(|i| self.0.iter().filter(|&&x| x >= i).count() as u32).collect())
    }

    /// The part `λ_i` with `i` 0-based, 0 past the end.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Vec<u32> {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", s.join(","))
    }
}

/// All partitions of `n`, in reverse lexicographic order.
pub fn partitions_of(n: u32) -> Vec<Partition> {
    fn go(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for k in (1..=rest.min(max)).rev() {
            cur.push(k);
            go(rest - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// `ℓ` with `|G_λ| = p^ℓ`.
pub fn group_order_exponent(lambda: &Partition) -> u32 {
    lambda.size()
}

/// `log_p |Hom(G_λ, G_μ)| = Σ_{i,j} min(λ_i, μ_j) = Σ_k λ'_k μ'_k`.
pub fn hom_count_exponent(lambda: &Partition, mu: &Partition) -> u64 {
    let (a, b) = (lambda.conjugate(), mu.conjugate());
    a.parts().iter().zip(b.parts()).map(|(&x, &y)| x as u64 * y as u64).sum()
}

fn hom_guard(size: u32, p: u64) -> Result<()> {
    let ok = match p {
        2 => size <= 8,
        3 => size <= 6,
        _ => checked_pow(p, size).is_some_and(|m| m <= 1000),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::TooLarge(format!("enumeration of p^{size} with p = {p}")))
    }
}

/// Elements of `G_μ` as coordinate vectors, in mixed-radix order.
fn elements(mu: &Partition, p: u64) -> Vec<Vec<u64>> {
    let moduli: Vec<u64> = mu.parts().iter().map(|&m| p.pow(m)).collect();
    let total: u64 = moduli.iter().product();
    (0..total)
        .map(|mut idx| {
            moduli
                .iter()
                .map(|&m| {
                    let x = idx % m;
                    idx /= m;
                    x
                })
                .collect()
        })
        .collect()
}

/// Counts tuples of images of the generators of `G_λ` in `G_μ` that are
/// killed by the generator orders.
pub fn brute_force_hom_count(lambda: &Partition, mu: &Partition, p: u64) -> Result<BigUint> {
    check_prime(p)?;
    hom_guard(lambda.size() + mu.size(), p)?;
    let elems = elements(mu, p);
    let mods: Vec<u64> = mu.parts().iter().map(|&m| p.pow(m)).collect();
    let killed = |x: &[u64], a: u32| x.iter().zip(&mods).all(|(&c, &m)| (c * p.pow(a)) % m == 0);
    let r = lambda.len();
    let mut count = 0u64;
    let mut idx = vec![0usize; r];
    'outer: loop {
        if idx.iter().zip(lambda.parts()).all(|(&i, &a)| killed(&elems[i], a)) {
            count += 1;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < elems.len() {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    Ok(BigUint::from(count))
}

/// Type of the kernel of `x ↦ Σ c_t x_t mod p` on `G_λ`, for nonzero `c`.
///
/// With `t0` the first index where `c` is nonzero (scaled to 1), the
/// kernel has basis `p·e_{t0}` and `e_t − c_t e_{t0}`; expressing the
/// relations `p^{λ_t} e_t` in that basis gives the presentation whose
/// Smith form is computed here.
pub fn kernel_type(lambda: &Partition, c: &[u64], p: u64) -> Result<Partition> {
    let r = lambda.len();
    if c.len() != r {
        return invalid("functional length must equal the number of parts");
    }
    let Some(t0) = c.iter().position(|&x| x % p != 0) else {
        return invalid("functional must be nonzero mod p");
    };
    let ring = PadicRing::new(p, lambda.largest() + 1)?;
    let inv = crate::modular::inv_mod(c[t0] % p, p);
    let parts = lambda.parts();
    let mut a = vec![0u64; r * r];
    for t in 0..r {
        if t == t0 {
            a[t * r + t0] = ring.pow_p(parts[t0] - 1);
        } else {
            let ct = c[t] % p * inv % p;
            a[t * r + t] = ring.pow_p(parts[t]);
            a[t * r + t0] = ring.mul(ct, ring.pow_p(parts[t] - 1));
        }
    }
    let vals = smith_valuations(&ring, r, r, &mut a);
    Ok(Partition::from_unsorted(vals))
}

/// Types of all index-p subgroups, one per functional up to scalar
/// (first nonzero coordinate equal to 1). Exponential in the number of parts.
pub fn index_p_subgroup_types(lambda: &Partition, p: u64) -> Result<Vec<Partition>> {
    check_prime(p)?;
    let r = lambda.len() as u32;
    let total = checked_pow(p, r).filter(|&t| t <= 1 << 20).ok_or_else(|| {
        Error::TooLarge(format!("{p}^{r} functionals"))
    })?;
    let mut out = Vec::new();
    for idx in 1..total {
        let c: Vec<u64> = (0..r).map(|t| idx / p.pow(t) % p).collect();
        if c.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(kernel_type(lambda, &c, p)?);
        }
    }
    Ok(out)
}

/// Memoized `MC(G_λ)` for a fixed prime. Not shared across threads;
/// every instance returns identical values.
#[derive(Debug)]
pub struct ChainCounter {
    p: u64,
    memo: HashMap<Partition, BigUint>,
}

impl ChainCounter {
    pub fn new(p: u64) -> Result<Self> {
        check_prime(p)?;
        Ok(ChainCounter { p, memo: HashMap::new() })
    }

    /// `MC(G_λ) = Σ_{H ⊂ G of index p} MC(H)`. Functionals sharing the
    /// smallest part size `s` on their support give isomorphic kernels
    /// (type `λ` with one `s` lowered to `s − 1`, as [`kernel_type`]
    /// confirms); there are `(p^{m_s} − 1)/(p − 1) · p^{#{parts > s}}` of them.
    pub fn count(&mut self, lambda: &Partition) -> Result<BigUint> {
        if lambda.is_empty() {
            return Ok(BigUint::one());
        }
        if let Some(v) = self.memo.get(lambda) {
            return Ok(v.clone());
        }
        let p = self.p;
        let parts = lambda.parts();
        let mut total = BigUint::zero();
        let mut t = 0;
        while t < parts.len() {
            let s = parts[t];
            let m = parts[t..].iter().take_while(|&&x| x == s).count() as u32;
            // the kernel of the coordinate functional at t: one part s becomes s − 1
            let mut kernel = parts.to_vec();
            kernel[t + m as usize - 1] -= 1;
            kernel.retain(|&x| x > 0);
            let kernel = Partition(kernel);
            let classes = (BigUint::from(p).pow(m) - 1u32) / BigUint::from(p - 1)
                * BigUint::from(p).pow(t as u32);
            total += classes * self.count(&kernel)?;
            t += m as usize;
        }
        self.memo.insert(lambda.clone(), total.clone());
        Ok(total)
    }
}

/// `MC(G_λ)`, the number of maximal chains of subgroups of `G_λ`.
pub fn maximal_chain_count(lambda: &Partition, p: u64) -> Result<BigUint> {
    ChainCounter::new(p)?.count(lambda)
}

/// Explicit subgroup lattice of `G_λ` and a chain count over it.
pub fn brute_force_maximal_chains(lambda: &Partition, p: u64) -> Result<BigUint> {
    check_prime(p)?;
    let order = checked_pow(p, lambda.size())
        .filter(|&o| o <= 1 << 12)
        .ok_or_else(|| Error::TooLarge(format!("|G| = {p}^{}", lambda.size())))?;
    let n = order as usize;
    let mods: Vec<u64> = lambda.parts().iter().map(|&m| p.pow(m)).collect();
    let elems = elements(lambda, p);
    let index = |x: &[u64]| -> usize {
        let mut idx = 0u64;
        for (c, m) in x.iter().zip(&mods).rev() {
            idx = idx * m + c;
        }
        idx as usize
    };
    let add = |a: usize, b: usize| -> usize {
        let s: Vec<u64> = elems[a].iter().zip(&elems[b]).zip(&mods).map(|((x, y), m)| (x + y) % m).collect();
        index(&s)
    };
    let words = n.div_ceil(64);
    let has = |set: &[u64], x: usize| set[x / 64] >> (x % 64) & 1 == 1;
    // H + <g> for g with p·g ∈ H, which has order p·|H|
    let extend = |h: &[u64], g: usize| -> Vec<u64> {
        let mut k = h.to_vec();
        let members: Vec<usize> = (0..n).filter(|&x| has(h, x)).collect();
        let mut mult = g;
        for _ in 1..p {
            for &x in &members {
                let y = add(x, mult);
                k[y / 64] |= 1 << (y % 64);
            }
            mult = add(mult, g);
        }
        k
    };
    let mut zero = vec![0u64; words];
    zero[0] = 1;
    let mut levels: Vec<HashMap<Vec<u64>, BigUint>> = vec![HashMap::from([(zero, BigUint::one())])];
    let mut seen = 1usize;
    for _ in 0..lambda.size() {
        let mut next: HashMap<Vec<u64>, BigUint> = HashMap::new();
        for (h, ways) in levels.last().unwrap() {
            let mut covers: HashSet<Vec<u64>> = HashSet::new();
            for g in 0..n {
                if has(h, g) {
                    continue;
                }
                let pg = (0..p - 1).fold(g, |acc, _| add(acc, g));
                if has(h, pg) {
                    covers.insert(extend(h, g));
                }
            }
            for k in covers {
                *next.entry(k).or_insert_with(BigUint::zero) += ways;
            }
        }
        seen += next.len();
        if seen > 200_000 {
            return Err(Error::TooLarge("subgroup lattice".into()));
        }
        levels.push(next);
    }
    let top = levels.pop().unwrap();
    debug_assert_eq!(top.len(), 1);
    Ok(top.into_values().next().unwrap_or_default())
}
