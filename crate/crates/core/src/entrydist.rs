//! The law of a matrix entry `ξ` modulo `p^E`, its characters, and
//! `τ(v) = P(Σ ξ_i v_i = 0)` in a finite abelian p-group.
//!
//! Every statistic computed by the crate only sees `ξ mod p^E`, so a law
//! on `Z` is represented by its reduction. Internally the law is stored as
//! atoms modulo `p^base` with `base <= E`; the digits above `base` are
//! uniform. The symmetric family and the uniform law have `base = 1`, so
//! lifting them to large precision costs nothing.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::modular::{check_prime, checked_pow, MAX_MODULUS};
use crate::pgroup::Partition;

/// Largest dense residue table materialized.
const MAX_TABLE: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Symmetric(f64),
    Uniform,
    Explicit,
}

/// Law of `ξ mod p^E`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryDist {
    p: u64,
    precision: u32,
    base: u32,
    atoms: Vec<(u64, f64)>,
    cdf: Vec<f64>,
    kind: Kind,
}

impl EntryDist {
    fn build(p: u64, precision: u32, base: u32, mut atoms: Vec<(u64, f64)>, kind: Kind) -> Result<Self> {
        check_prime(p)?;
        if precision == 0 || base == 0 || base > precision {
            return invalid("precision must be at least 1");
        }
        if !checked_pow(p, precision).is_some_and(|m| m < MAX_MODULUS) {
            return invalid(format!("p^E = {p}^{precision} must be below 2^62"));
        }
        let m = p.pow(base);
        if atoms.iter().any(|&(r, w)| r >= m || !(w >= 0.0) || !w.is_finite()) {
            return invalid("residues must lie in [0, p^E) with finite nonnegative weights");
        }
        atoms.sort_by_key(|a| a.0);
        atoms.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        atoms.retain(|a| a.1 > 0.0);
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return invalid("distribution has no mass");
        }
        atoms.iter_mut().for_each(|a| a.1 /= total);
        let zero: f64 = atoms.iter().filter(|a| a.0 % p == 0).map(|a| a.1).sum();
        if !(zero > 0.0 && zero < 1.0) {
            return invalid(format!(
                "P(ξ ≡ 0 mod p) = {zero} must lie strictly between 0 and 1"
            ));
        }
        let mut acc = 0.0;
        let cdf = atoms
            .iter()
            .map(|a| {
                acc += a.1;
                acc
            })
            .collect();
        Ok(EntryDist { p, precision, base, atoms, cdf, kind })
    }

    /// Mass `α` at 0 and `(1 − α)/(p − 1)` at each nonzero residue, `E = 1`.
    pub fn symmetric(p: u64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return invalid(format!("alpha = {alpha} must lie in (0, 1)"));
        }
        check_prime(p)?;
        let rest = (1.0 - alpha) / (p - 1) as f64;
        let atoms = (0..p).map(|r| (r, if r == 0 { alpha } else { rest })).collect();
        Self::build(p, 1, 1, atoms, Kind::Symmetric(alpha))
    }

    /// Uniform on `0..p^E`.
    pub fn uniform(p: u64, precision: u32) -> Result<Self> {
        check_prime(p)?;
        let atoms = (0..p).map(|r| (r, 1.0)).collect();
        Self::build(p, precision.max(1), 1, atoms, Kind::Uniform)
    }

    /// Weights on residues mod `p^E`, normalized.
    pub fn from_weights(p: u64, precision: u32, weights: &[(u64, f64)]) -> Result<Self> {
        Self::build(p, precision, precision, weights.to_vec(), Kind::Explicit)
    }

    /// `"r1:w1,r2:w2,..."`, `"symmetric:alpha=0.75"` or `"uniform"`, lifted to `E`.
    pub fn parse(spec: &str, p: u64, precision: u32) -> Result<Self> {
        let s = spec.trim();
        let d = if s == "uniform" {
            Self::uniform(p, precision)?
        } else if let Some(rest) = s.strip_prefix("symmetric:") {
            let v = rest.trim().trim_start_matches("alpha=");
            let alpha: f64 = v.parse().map_err(|_| Error::Validation(format!("bad alpha `{v}`")))?;
            Self::symmetric(p, alpha)?
        } else {
            let mut weights = Vec::new();
            for item in s.split(',') {
                let (r, w) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Validation(format!("bad distribution item `{item}`")))?;
                let r: u64 = r.trim().parse().map_err(|_| Error::Validation(format!("bad residue `{r}`")))?;
                let w: f64 = w.trim().parse().map_err(|_| Error::Validation(format!("bad weight `{w}`")))?;
                weights.push((r, w));
            }
            Self::from_weights(p, precision, &weights)?
        };
        if d.precision > precision {
            return invalid("distribution precision exceeds E");
        }
        d.lift(precision)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `P(ξ ≡ 0 mod p)`.
    pub fn zero_mass(&self) -> f64 {
        self.atoms.iter().filter(|a| a.0 % self.p == 0).map(|a| a.1).sum()
    }

    /// `Some(α)` when the law mod p is the symmetric one with parameter `α`.
    pub fn symmetric_alpha(&self) -> Option<f64> {
        if let Kind::Symmetric(a) = self.kind {
            return Some(a);
        }
        let m = self.reduce(1).ok()?.table().ok()?;
        let rest = m[1];
        let tol = 1e-12;
        m[1..].iter().all(|&x| (x - rest).abs() < tol).then_some(m[0])
    }

    /// Uniform over lifts to precision `e >= E`.
    pub fn lift(&self, e: u32) -> Result<Self> {
        if e < self.precision {
            return invalid("lift target below current precision");
        }
        Self::build(self.p, e, self.base, self.atoms.clone(), self.kind.clone())
    }

    /// Marginal law of `ξ mod p^e` for `e <= E`.
    pub fn reduce(&self, e: u32) -> Result<Self> {
        if e == 0 || e > self.precision {
            return invalid(format!("cannot reduce precision {} to {e}", self.precision));
        }
        if e >= self.base {
            return Self::build(self.p, e, self.base, self.atoms.clone(), self.kind.clone());
        }
        let m = self.p.pow(e);
        let atoms = self.atoms.iter().map(|&(r, w)| (r % m, w)).collect();
        let kind = match self.kind {
            Kind::Explicit => Kind::Explicit,
            ref k => k.clone(),
        };
        Self::build(self.p, e, e, atoms, kind)
    }

    /// Probability of each residue mod `p^E`.
    pub fn table(&self) -> Result<Vec<f64>> {
        let m = self.p.pow(self.precision);
        if m > MAX_TABLE {
            return Err(Error::TooLarge(format!("residue table of size {m}")));
        }
        let mb = self.p.pow(self.base);
        let spread = (m / mb) as f64;
        let mut t = vec![0.0; m as usize];
        for r in 0..m {
            t[r as usize] = self.prob_base(r % mb) / spread;
        }
        Ok(t)
    }

    fn prob_base(&self, r: u64) -> f64 {
        match self.atoms.binary_search_by_key(&r, |a| a.0) {
            Ok(i) => self.atoms[i].1,
            Err(_) => 0.0,
        }
    }

    /// `P(ξ ≡ r mod p^E)`.
    pub fn prob(&self, r: u64) -> f64 {
        let mb = self.p.pow(self.base);
        self.prob_base(r % mb) / self.p.pow(self.precision - self.base) as f64
    }

    /// Draw a residue mod `p^E` (inverse CDF, then uniform high digits).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        let low = self.atoms[i].0;
        if self.base == self.precision {
            low
        } else {
            let hi = self.p.pow(self.precision - self.base);
            low + self.p.pow(self.base) * rng.random_range(0..hi)
        }
    }

    /// Atoms `(residue mod p^base, probability)` and `base`.
    pub fn atoms(&self) -> (&[(u64, f64)], u32) {
        (&self.atoms, self.base)
    }

    /// Canonical text form, accepted by [`EntryDist::parse`].
    pub fn describe(&self) -> String {
        match self.kind {
            Kind::Symmetric(a) => format!("symmetric:alpha={a}"),
            Kind::Uniform => "uniform".into(),
            Kind::Explicit => {
                let items: Vec<String> = self.atoms.iter().map(|(r, w)| format!("{r}:{w}")).collect();
                items.join(",")
            }
        }
    }
}

impl fmt::Display for EntryDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p = {}, E = {})", self.describe(), self.p, self.precision)
    }
}

/// `G_λ` with elements indexed in mixed radix, first coordinate fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    p: u64,
    exps: Vec<u32>,
    moduli: Vec<u64>,
    order: usize,
    top: u32,
}

impl AbelianGroup {
    pub fn new(p: u64, lambda: &Partition) -> Result<Self> {
        check_prime(p)?;
        let exps = lambda.parts().to_vec();
        let moduli: Vec<u64> = exps.iter().map(|&e| p.pow(e)).collect();
        let order = checked_pow(p, lambda.size())
            .filter(|&o| o <= 1 << 20)
            .ok_or_else(|| Error::TooLarge(format!("group of order {p}^{}", lambda.size())))?;
        Ok(AbelianGroup { p, top: lambda.largest(), exps, moduli, order: order as usize })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `log_p` of the exponent of the group.
    pub fn exponent_log(&self) -> u32 {
        self.top
    }

    pub fn coords(&self, mut idx: usize) -> Vec<u64> {
        self.moduli
            .iter()
            .map(|&m| {
                let c = idx as u64 % m;
                idx /= m as usize;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[u64]) -> usize {
        assert_eq!(coords.len(), self.moduli.len());
        coords.iter().zip(&self.moduli).rev().fold(0usize, |acc, (&c, &m)| acc * m as usize + (c % m) as usize)
    }

    /// `Σ_t w_t g_t p^{top − e_t} mod p^top`, so that `ρ_w(g) = e(pairing / p^top)`.
    pub fn pairing(&self, w: usize, g: usize) -> u64 {
        let (a, b) = (self.coords(w), self.coords(g));
        let m = self.p.pow(self.top);
        a.iter()
            .zip(&b)
            .zip(&self.exps)
            .fold(0u64, |acc, ((&x, &y), &e)| (acc + x * y % m * self.p.pow(self.top - e)) % m)
    }
}

/// `φ_w(g) = E ρ_w(ξ g)` for all characters `w` and elements `g` of `H`.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    group: AbelianGroup,
    values: Vec<Complex64>,
    roots: Vec<Complex64>,
    pair: Vec<u32>,
}

impl CharacterTable {
    pub fn new(dist: &EntryDist, group: AbelianGroup) -> Result<Self> {
        if group.p != dist.p() {
            return invalid("group and distribution use different primes");
        }
        if group.top > dist.precision() {
            return invalid(format!(
                "exponent p^{} of H exceeds the precision p^{} of the distribution",
                group.top,
                dist.precision()
            ));
        }
        let h = group.order;
        if h > 1024 {
            return Err(Error::TooLarge(format!("character table of a group of order {h}")));
        }
        let top = group.top.max(1);
        let m = group.p.pow(top);
        let marg = dist.reduce(top)?.table()?;
        let roots: Vec<Complex64> = (0..m).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64)).collect();
        // ψ(k) = Σ_r P(r) e(r k / p^top)
        let psi: Vec<Complex64> = (0..m)
            .map(|k| {
                marg.iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (r, &pr)| acc + roots[(r as u64 * k % m) as usize] * pr)
            })
            .collect();
        let scale = group.p.pow(top - group.top.min(top));
        let mut pair = vec![0u32; h * h];
        let mut values = vec![Complex64::new(0.0, 0.0); h * h];
        for w in 0..h {
            for g in 0..h {
                let k = group.pairing(w, g) * scale % m;
                pair[w * h + g] = k as u32;
                values[w * h + g] = psi[k as usize];
            }
        }
        Ok(CharacterTable { group, values, roots, pair })
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    /// `φ_w(g)`.
    #[inline]
    pub fn phi(&self, w: usize, g: usize) -> Complex64 {
        self.values[w * self.group.order + g]
    }

    /// `ρ_w(g)`.
    pub fn rho(&self, w: usize, g: usize) -> Complex64 {
        self.roots[self.pair[w * self.group.order + g] as usize]
    }

    /// `max |φ_ρ(g)|` over nontrivial `ρ` and `g ∉ ker ρ`.
    pub fn spectral_gap(&self) -> f64 {
        let h = self.group.order;
        let mut best: f64 = 0.0;
        for w in 1..h {
            for g in 0..h {
                if self.pair[w * h + g] != 0 {
                    best = best.max(self.phi(w, g).norm());
                }
            }
        }
        best
    }
}

/// Running products `∏_i φ_w(v_i)` for every character.
#[derive(Clone, Debug)]
pub struct TauState<'a> {
    table: &'a CharacterTable,
    prod: Vec<Complex64>,
}

impl<'a> TauState<'a> {
    pub fn new(table: &'a CharacterTable) -> Self {
        TauState { table, prod: vec![Complex64::new(1.0, 0.0); table.group.order] }
    }

    /// Append `g` and return `τ` of the extended vector.
    pub fn push(&mut self, g: usize) -> f64 {
        let t = self.table;
        for (w, x) in self.prod.iter_mut().enumerate() {
            *x *= t.phi(w, g);
        }
        self.value()
    }

    /// `τ` of the current vector.
    pub fn value(&self) -> f64 {
        let s: f64 = self.prod.iter().map(|z| z.re).sum();
        (s / self.prod.len() as f64).max(0.0)
    }

    /// `P(Σ ξ_i v_i = g)` for the current vector.
    pub fn value_at(&self, g: usize) -> f64 {
        let t = self.table;
        let s: f64 = self.prod.iter().enumerate().map(|(w, z)| (t.rho(w, g).conj() * z).re).sum();
        s / self.prod.len() as f64
    }

    pub fn reset(&mut self) {
        self.prod.iter_mut().for_each(|z| *z = Complex64::new(1.0, 0.0));
    }
}

/// `τ(v) = P(Σ ξ_i v_i = 0)` in `H = G_λ`, elements given by index.
pub fn tau(dist: &EntryDist, h: &Partition, v: &[usize]) -> Result<f64> {
    let table = CharacterTable::new(dist, AbelianGroup::new(dist.p(), h)?)?;
    let mut st = TauState::new(&table);
    if v.iter().any(|&g| g >= table.group.order) {
        return invalid("element outside H");
    }
    v.iter().for_each(|&g| {
        st.push(g);
    });
    Ok(st.value())
}

/// `P(Σ ξ_i v_i = g)`.
pub fn tau_at(dist: &EntryDist, h: &Partition, v: &[usize], g: usize) -> Result<f64> {
    let table = CharacterTable::new(dist, AbelianGroup::new(dist.p(), h)?)?;
    if v.iter().chain([&g]).any(|&x| x >= table.group.order) {
        return invalid("element outside H");
    }
    let mut st = TauState::new(&table);
    v.iter().for_each(|&x| {
        st.push(x);
    });
    Ok(st.value_at(g))
}

/// `β_k = 1 + (p − 1)((pα − 1)/(p − 1))^k`, so that `p τ(v) = β_{‖v‖}`
/// for the symmetric family in `Z/p`.
pub fn beta(p: u64, alpha: f64, k: u32) -> f64 {
    let pf = p as f64;
    1.0 + (pf - 1.0) * ((pf * alpha - 1.0) / (pf - 1.0)).powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zp() -> Partition {
        Partition::new(vec![1]).unwrap()
    }

    #[test]
    fn symmetric_examples() {
        let d = EntryDist::symmetric(3, 0.4).unwrap();
        assert_eq!(d.table().unwrap(), vec![0.4, 0.3, 0.3]);
        let d = EntryDist::symmetric(2, 0.75).unwrap();
        assert_eq!(d.table().unwrap(), vec![0.75, 0.25]);
        assert!(EntryDist::symmetric(2, 1.0).is_err());
        assert!(EntryDist::symmetric(2, 0.0).is_err());
        assert!(EntryDist::symmetric(4, 0.5).is_err());
    }

    #[test]
    fn degenerate_rejected() {
        assert!(EntryDist::from_weights(2, 1, &[(0, 1.0)]).is_err());
        assert!(EntryDist::from_weights(3, 1, &[(1, 1.0), (2, 3.0)]).is_err());
        assert!(EntryDist::parse("0:1", 2, 3).is_err());
        assert!(EntryDist::parse("0:1,9:1", 2, 3).is_err());
    }

    #[test]
    fn parse_forms() {
        let u = EntryDist::parse("uniform", 2, 3).unwrap();
        assert_eq!(u.table().unwrap(), vec![0.125; 8]);
        let s = EntryDist::parse("symmetric:alpha=0.75", 2, 2).unwrap();
        assert_eq!(s.table().unwrap(), vec![0.375, 0.125, 0.375, 0.125]);
        let e = EntryDist::parse("0:2,1:1,3:1", 2, 2).unwrap();
        assert_eq!(e.table().unwrap(), vec![0.5, 0.25, 0.0, 0.25]);
        assert_eq!(EntryDist::parse(&e.describe(), 2, 2).unwrap(), e);
        assert_eq!(e.reduce(1).unwrap().table().unwrap(), vec![0.5, 0.5]);
        assert_eq!(s.symmetric_alpha(), Some(0.75));
        assert_eq!(e.symmetric_alpha(), Some(0.5));
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = EntryDist::symmetric(2, 0.5).unwrap();
        let a: Vec<u64> = {
            let mut r = ChaCha8Rng::seed_from_u64(3);
            (0..50).map(|_| d.sample(&mut r)).collect()
        };
        let b: Vec<u64> = {
            let mut r = ChaCha8Rng::seed_from_u64(3);
            (0..50).map(|_| d.sample(&mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_frequencies() {
        let d = EntryDist::symmetric(2, 0.75).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| d.sample(&mut r) == 1).count() as f64;
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        assert!((ones - 0.25 * n as f64).abs() < 4.0 * sd);

        let e = EntryDist::parse("0:0.2,1:0.5,2:0.3", 3, 1).unwrap();
        let mut c = [0usize; 3];
        for _ in 0..n {
            c[e.sample(&mut r) as usize] += 1;
        }
        for (k, pr) in [0.2, 0.5, 0.3].iter().enumerate() {
            let sd = (n as f64 * pr * (1.0 - pr)).sqrt();
            assert!((c[k] as f64 - pr * n as f64).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn tau_examples() {
        let d = EntryDist::symmetric(2, 0.75).unwrap();
        assert_eq!(tau(&d, &zp(), &[]).unwrap(), 1.0);
        assert!((tau(&d, &zp(), &[1]).unwrap() - 0.75).abs() < 1e-15);
        assert!((tau(&d, &zp(), &[1, 1]).unwrap() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn incremental_matches_direct() {
        let d = EntryDist::symmetric(2, 0.75).unwrap();
        let table = CharacterTable::new(&d, AbelianGroup::new(2, &zp()).unwrap()).unwrap();
        let mut st = TauState::new(&table);
        let v = [1usize, 1, 0, 1];
        for i in 0..v.len() {
            let inc = st.push(v[i]);
            let direct = tau(&d, &zp(), &v[..=i]).unwrap();
            assert!((inc - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn exponent_guard() {
        let d = EntryDist::symmetric(2, 0.75).unwrap();
        assert!(tau(&d, &Partition::new(vec![2]).unwrap(), &[1]).is_err());
    }

    #[test]
    fn table_invariants() {
        let d = EntryDist::parse("0:0.1,1:0.2,2:0.3,5:0.4", 3, 2).unwrap();
        let h = AbelianGroup::new(3, &Partition::new(vec![2, 1]).unwrap()).unwrap();
        let t = CharacterTable::new(&d, h).unwrap();
        let n = t.group().order();
        for w in 0..n {
            assert!((t.phi(w, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            for g in 0..n {
                assert!(t.phi(w, g).norm() <= 1.0 + 1e-14);
                assert!((t.phi(0, g) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
        assert!(t.spectral_gap() < 1.0);
    }
}
