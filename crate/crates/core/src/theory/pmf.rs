//! Mass function of `L_{1,1/p,χ}`:
//!
//! `P(x) = 1/∏_{i>=1}(1 − p^{−i}) · Σ_{m>=0} exp(−χ p^{m−x}) c_m`, with
//! `c_m = (−1)^m p^{−C(m,2)} / ∏_{j<=m}(1 − p^{−j}) = (−1)^m p^m / ∏_{j<=m}(p^j − 1)`.
//!
//! The series is summed in `f64` with Neumaier compensation and a running
//! error bound. Far to the right the terms nearly cancel (`Σ c_m = 0`),
//! and there the sum is redone in big-integer fixed point with enough bits
//! to absorb the cancellation. Values that cannot be represented in `f64`
//! are reported as exact zeros with `underflow` set, using the rigorous
//! bounds `P(x) <= min_M p^{M(M−1)/2} y^{M−1} / (M−1)!` (right tail,
//! `y = χ p^{−x}`) and `P(x) <= pre · Σ|c_m| · e^{−y}` (left tail).

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use super::bigfix::{log2_abs, to_f64, Fixed};
use crate::error::{invalid, Error, Result};
use crate::modular::check_prime;

/// One evaluation of the mass function with its diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmfValue {
    pub value: f64,
    pub error_bound: f64,
    pub underflow: bool,
    pub terms: usize,
    /// 53 for the plain `f64` sum, the fixed-point width otherwise.
    pub precision_bits: u32,
}

const MAX_BITS: u32 = 1 << 15;

/// `1/∏_{i>=1}(1 − p^{−i})` and an absolute error bound.
pub fn prefactor(p: u64) -> (f64, f64) {
    let q = 1.0 / p as f64;
    let mut s = 0.0f64;
    let mut qi = 1.0f64;
    let mut i = 0;
    loop {
        i += 1;
        qi *= q;
        s -= (-qi).ln_1p();
        if qi < 1e-18 {
            break;
        }
    }
    let tail = 2.0 * qi * q / (1.0 - q);
    let v = s.exp();
    (v, v * (tail + (i as f64 + 2.0) * f64::EPSILON))
}

/// `Σ_m |c_m|`.
fn coefficient_mass(p: u64) -> f64 {
    let pf = p as f64;
    let (mut c, mut s) = (1.0f64, 0.0f64);
    for m in 1..200 {
        s += c;
        c *= pf / (pf.powi(m) - 1.0);
        if c < 1e-20 {
            break;
        }
    }
    s + 2.0 * c
}

/// `ln` of the right-tail bound `min_M p^{M(M−1)/2} y^{M−1} / (M−1)!`.
fn ln_right_bound(p: u64, ln_y: f64) -> f64 {
    let lnp = (p as f64).ln();
    let mut best = 0.0f64;
    let mut ln_fact = 0.0f64;
    for m in 1..400u32 {
        if m > 1 {
            ln_fact += ((m - 1) as f64).ln();
        }
        let mf = m as f64;
        let v = mf * (mf - 1.0) / 2.0 * lnp + (mf - 1.0) * ln_y - ln_fact;
        best = best.min(v);
    }
    best
}

/// `P(L_{1,1/p,χ} = x)`.
pub fn pmf_l1(p: u64, chi: f64, x: i64) -> Result<PmfValue> {
    check_prime(p)?;
    if !(chi > 0.0 && chi.is_finite()) {
        return invalid(format!("chi = {chi} must be positive and finite"));
    }
    let (pre, pre_err) = prefactor(p);
    let lnp = (p as f64).ln();
    let ln_y = chi.ln() - x as f64 * lnp;
    let floor = f64::MIN_POSITIVE.ln();
    let zero = |terms| PmfValue { value: 0.0, error_bound: f64::MIN_POSITIVE, underflow: true, terms, precision_bits: 0 };

    let ln_left = (pre * coefficient_mass(p)).ln() - ln_y.exp();
    let ln_right = pre.ln() + ln_right_bound(p, ln_y);
    if ln_left.min(ln_right) < floor {
        return Ok(zero(0));
    }

    if let Some(v) = series_f64(p, chi, x, pre, pre_err) {
        return Ok(v);
    }

    let mut bits = ((-ln_right / std::f64::consts::LN_2).max(0.0).ceil() as u32 + 128).next_power_of_two();
    while bits <= MAX_BITS {
        if let Some(v) = series_fixed(p, chi, x, bits, pre, pre_err)? {
            return Ok(v);
        }
        bits *= 2;
    }
    Err(Error::Numerical(format!("mass function at p = {p}, chi = {chi}, x = {x} did not resolve")))
}

fn series_f64(p: u64, chi: f64, x: i64, pre: f64, pre_err: f64) -> Option<PmfValue> {
    let pf = p as f64;
    let eps = f64::EPSILON;
    let (mut sum, mut comp, mut err) = (0.0f64, 0.0f64, 0.0f64);
    let mut c = 1.0f64;
    let mut small = 0;
    let mut m = 0i64;
    loop {
        let k = m - x;
        let z = chi * pf.powi(k.clamp(-2000, 2000) as i32);
        let e = (-z).exp();
        let t = c * e;
        let s = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
        err += t.abs() * ((z * (k.abs() as f64 + 3.0) + m as f64 + 6.0) * eps);
        if t.abs() < 1e-15 * ((sum + comp).abs() + 1e-300) {
            small += 1;
        } else {
            small = 0;
        }
        m += 1;
        c *= -pf / (pf.powi(m as i32) - 1.0);
        if small >= 3 || m > 400 {
            // remaining terms are bounded by 2|c_m| e^{-z_m}
            let zn = chi * pf.powi((m - x).clamp(-2000, 2000) as i32);
            err += 2.0 * c.abs() * (-zn).exp();
            break;
        }
    }
    let s = sum + comp;
    if !(s > 0.0) || err > 1e-13 * s {
        return None;
    }
    let value = pre * s;
    Some(PmfValue {
        value,
        error_bound: pre * err + s * pre_err,
        underflow: false,
        terms: m as usize,
        precision_bits: 53,
    })
}

fn series_fixed(p: u64, chi: f64, x: i64, bits: u32, pre: f64, pre_err: f64) -> Result<Option<PmfValue>> {
    let fix = Fixed::new(bits);
    let (mant, exp2) = decode(chi);
    let pb = BigUint::from(p);
    let cutoff = BigUint::from((bits as u64 + 80) * 7 / 10) << bits as usize; // > (bits + 64) ln 2
    let mut sum = BigInt::from(0);
    let mut den = BigUint::from(1u32);
    let mut m: i64 = 0;
    loop {
        // z = mant 2^exp2 p^{m−x}
        let k = m - x;
        let mut num = BigUint::from(mant);
        let mut dd = BigUint::from(1u32);
        if k >= 0 {
            num *= pb.pow(k as u32);
        } else {
            dd *= pb.pow((-k) as u32);
        }
        if exp2 >= 0 {
            num <<= exp2 as usize;
        } else {
            dd <<= (-exp2) as usize;
        }
        let z = fix.ratio(&num, &dd);
        if z > cutoff {
            break;
        }
        if m > 0 {
            den *= pb.pow(m as u32) - 1u32;
        }
        let c = fix.ratio(&pb.pow(m as u32), &den);
        if c == BigUint::from(0u32) {
            break;
        }
        let t = BigInt::from(fix.mul(&c, &fix.exp_neg(&z)));
        if m % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        m += 1;
    }
    let lg = log2_abs(&sum, bits);
    // about log2(m) + 8 units of the last place are uncertain
    let noise = -(bits as f64) + 16.0 + ((m + 1) as f64).log2();
    if lg < noise + 40.0 {
        return Ok(None);
    }
    if sum.sign() == num_bigint::Sign::Minus {
        return Err(Error::Numerical(format!("negative mass at p = {p}, chi = {chi}, x = {x}")));
    }
    let s = to_f64(&sum, bits);
    let value = pre * s;
    if value == 0.0 || !value.is_normal() {
        return Ok(Some(PmfValue { value: 0.0, error_bound: f64::MIN_POSITIVE, underflow: true, terms: m as usize, precision_bits: bits }));
    }
    let rel = 2f64.powf(noise - lg);
    Ok(Some(PmfValue {
        value,
        error_bound: value * (rel + 4.0 * f64::EPSILON) + s * pre_err,
        underflow: false,
        terms: m as usize,
        precision_bits: bits,
    }))
}

/// `chi = mant · 2^exp2` exactly.
fn decode(chi: f64) -> (u64, i64) {
    let b = chi.to_bits();
    let e = ((b >> 52) & 0x7ff) as i64;
    let f = b & ((1u64 << 52) - 1);
    if e == 0 {
        (f, -1074)
    } else {
        (f | (1u64 << 52), e - 1075)
    }
}

/// Smallest range `[lo, hi]` around the bulk outside of which every value
/// is below `tol` (the mass function is unimodal).
pub fn bulk_range(p: u64, chi: f64, tol: f64) -> Result<(i64, i64)> {
    let centre = (chi.ln() / (p as f64).ln()).round() as i64;
    let mut lo = centre;
    while pmf_l1(p, chi, lo - 1)?.value >= tol || lo > centre - 2 {
        lo -= 1;
    }
    let mut hi = centre;
    while pmf_l1(p, chi, hi + 1)?.value >= tol || hi < centre + 2 {
        hi += 1;
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_exact() {
        for &v in &[0.5, 0.1, 3.75e-200, 1e300, 5e-324] {
            let (m, e) = decode(v);
            assert_eq!(m as f64 * 2f64.powi(e as i32 / 2) * 2f64.powi(e as i32 - e as i32 / 2), v);
        }
    }

    #[test]
    fn normalization() {
        for &p in &[2u64, 3, 5] {
            for &chi in &[0.1, 0.5, 2.0] {
                let s: f64 = (-60..=60).map(|x| pmf_l1(p, chi, x).unwrap().value).sum();
                assert!((s - 1.0).abs() < 1e-10, "p={p} chi={chi} sum={s}");
            }
        }
    }

    #[test]
    fn tails_and_paths() {
        let far_left = pmf_l1(2, 0.5, -40).unwrap();
        assert!(far_left.underflow && far_left.value == 0.0);
        let right = pmf_l1(2, 0.5, 12).unwrap();
        assert!(right.precision_bits > 53 && right.value > 0.0, "{right:?}");
        let mid = pmf_l1(2, 0.5, 0).unwrap();
        assert_eq!(mid.precision_bits, 53);
        // the two paths agree where both are valid
        let a = series_f64(3, 0.5, 0, 1.0, 0.0).unwrap();
        let b = series_fixed(3, 0.5, 0, 256, 1.0, 0.0).unwrap().unwrap();
        assert!((a.value / b.value - 1.0).abs() < 1e-13);
        assert!(pmf_l1(4, 0.5, 0).is_err());
        assert!(pmf_l1(2, -1.0, 0).is_err());
    }

    #[test]
    fn left_tail_monotone() {
        let v: Vec<f64> = (-30..=-1).map(|x| pmf_l1(2, 0.5, x).unwrap().value).collect();
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }
}
