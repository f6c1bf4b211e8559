//! Binary fixed point on big integers: `X` stands for `X / 2^bits`.
//! Only what the mass-function tail needs: `exp(−z)` and exact rationals.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug)]
pub struct Fixed {
    pub bits: u32,
    ln2: BigUint,
}

impl Fixed {
    pub fn new(bits: u32) -> Self {
        // ln 2 = Σ_{j>=1} 1 / (j 2^j), with 32 guard bits
        let g = bits + 32;
        let one = BigUint::one() << g;
        let mut sum = BigUint::zero();
        let mut j = 1u32;
        loop {
            let t = &one >> j as usize;
            let t = t / BigUint::from(j);
            if t.is_zero() {
                break;
            }
            sum += t;
            j += 1;
        }
        Fixed { bits, ln2: sum >> 32usize }
    }

    /// `round(num / den · 2^bits)` for a nonnegative rational.
    pub fn ratio(&self, num: &BigUint, den: &BigUint) -> BigUint {
        ((num << (self.bits as usize + 1)) / den + 1u32) >> 1usize
    }

    /// `a · b` in fixed point.
    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) >> self.bits as usize
    }

    /// `exp(−z)` for `z >= 0` given in fixed point; the result is within a
    /// few units in the last place.
    pub fn exp_neg(&self, z: &BigUint) -> BigUint {
        let k = z / &self.ln2;
        let Some(k) = k.to_u64() else {
            return BigUint::zero();
        };
        if k > self.bits as u64 + 2 {
            return BigUint::zero();
        }
        let r = z - &self.ln2 * BigUint::from(k);
        // halve the argument 8 times, Taylor, square back
        let s = 8u32;
        let guard = self.bits as usize + 16;
        let r = r << 16usize >> s as usize;
        let one = BigUint::one() << guard;
        let mut term = one.clone();
        let mut pos = one.clone();
        let mut neg = BigUint::zero();
        let mut j = 1u32;
        while !term.is_zero() {
            term = ((&term * &r) >> guard) / BigUint::from(j);
            if j % 2 == 1 {
                neg += &term;
            } else {
                pos += &term;
            }
            j += 1;
        }
        let mut e = pos - neg;
        for _ in 0..s {
            e = (&e * &e) >> guard;
        }
        e >> (16 + k as usize)
    }
}

/// `x · 2^{−bits}` as `f64`, flushing below the normal range to zero.
pub fn to_f64(x: &BigInt, bits: u32) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let mag = x.magnitude();
    let len = mag.bits() as i64;
    let shift = (len - 64).max(0);
    let top = (mag >> shift as usize).to_u64().unwrap() as f64;
    let exp = shift - bits as i64;
    let v = if exp < -1000 {
        // split to avoid intermediate underflow
        top * 2f64.powi((exp + 500) as i32) * 2f64.powi(-500)
    } else {
        top * 2f64.powi(exp as i32)
    };
    if x.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// `log2 |x · 2^{−bits}|`, `−∞` for zero.
pub fn log2_abs(x: &BigInt, bits: u32) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let mag = x.magnitude();
    let len = mag.bits() as i64;
    let shift = (len - 64).max(0);
    let top = (mag >> shift as usize).to_u64().unwrap() as f64;
    top.log2() + (shift - bits as i64) as f64
}
