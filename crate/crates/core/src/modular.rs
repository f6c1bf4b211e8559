//! Arithmetic in `Z/p^e` with the modulus below `2^62`.

use crate::error::{invalid, Result};

/// Largest modulus accepted anywhere in the crate.
pub const MAX_MODULUS: u64 = 1 << 62;

/// Deterministic primality test by trial division. Primes of interest are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn checked_pow(p: u64, e: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        invalid(format!("p = {p} is not prime"))
    }
}

/// `Z/p^e`, elements stored as residues in `[0, p^e)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadicRing {
    p: u64,
    precision: u32,
    modulus: u64,
}

impl PadicRing {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        check_prime(p)?;
        if precision == 0 {
            return invalid("precision must be at least 1");
        }
        match checked_pow(p, precision) {
            Some(m) if m < MAX_MODULUS => Ok(PadicRing { p, precision, modulus: m }),
            _ => invalid(format!("p^E = {p}^{precision} must be below 2^62")),
        }
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn precision(&self) -> u32 {
        self.precision
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `p^k` for `k <= precision`.
    #[inline]
    pub fn pow_p(&self, k: u32) -> u64 {
        debug_assert!(k <= self.precision);
        self.p.pow(k)
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.modulus
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b; // both < 2^62
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    /// p-adic valuation of a residue; zero has valuation `precision`.
    #[inline]
    pub fn valuation(&self, x: u64) -> u32 {
        valuation(x % self.modulus, self.p, self.precision)
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0);
        inv_mod(a % self.modulus, self.modulus)
    }

    /// Some `q` with `q * y = x`, assuming `v(y) <= v(x)` and `y != 0`.
    pub fn div_exact(&self, x: u64, y: u64) -> u64 {
        let v = self.valuation(y);
        debug_assert!(v < self.precision && self.valuation(x) >= v);
        let pv = self.p.pow(v);
        let unit = y / pv;
        let num = x / pv;
        self.mul(num % self.modulus, self.inv(unit))
    }
}

/// `v_p(x)` capped at `cap`; `x = 0` gives `cap`.
#[inline]
pub fn valuation(mut x: u64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    if p == 2 {
        return x.trailing_zeros().min(cap);
    }
    let mut v = 0;
    while v < cap && x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Inverse of `a` modulo `m` for `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "not a unit");
    t0.rem_euclid(m as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(97));
        assert!(!is_prime(91));
    }

    #[test]
    fn ring_guard() {
        assert!(PadicRing::new(2, 61).is_ok());
        assert!(PadicRing::new(2, 62).is_err());
        assert!(PadicRing::new(4, 2).is_err());
        assert!(PadicRing::new(3, 0).is_err());
    }

    #[test]
    fn division() {
        let r = PadicRing::new(3, 4).unwrap();
        for y in 1..81u64 {
            for x in 0..81u64 {
                if r.valuation(x) >= r.valuation(y) {
                    let q = r.div_exact(x, y);
                    assert_eq!(r.mul(q, y), x, "x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn inverse() {
        let r = PadicRing::new(2, 10).unwrap();
        for a in (1..1024u64).step_by(2) {
            assert_eq!(r.mul(a, r.inv(a)), 1);
        }
    }
}
