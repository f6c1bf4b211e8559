//! Closed-form side: `χ₀` for the symmetric family, `χ` from `ζ`, the
//! centering `⌊log_p n + ζ⌉`, the mass function of `L_{1,1/p,χ}` and the
//! exponential moments of `L_{d,1/p,χ}`.

mod bigfix;
pub mod pmf;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::modular::check_prime;
use crate::pgroup::{maximal_chain_count, Partition};

pub use pmf::{pmf_l1, PmfValue};

/// `(p, d, ζ, χ₀, χ)` with `χ = χ₀ p^{−ζ} / (p − 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub p: u64,
    pub d: u32,
    pub zeta: f64,
    pub chi0: f64,
    pub chi: f64,
}

impl TheoryParams {
    pub fn new(p: u64, d: u32, zeta: f64, chi0: f64) -> Result<Self> {
        check_prime(p)?;
        if d == 0 {
            return invalid("d must be positive");
        }
        if !(0.0..1.0).contains(&zeta) {
            return invalid(format!("zeta = {zeta} must lie in [0, 1)"));
        }
        if !(chi0 > 0.0 && chi0.is_finite()) {
            return invalid(format!("chi0 = {chi0} must be positive and finite"));
        }
        Ok(TheoryParams { p, d, zeta, chi0, chi: chi_from_zeta(p, chi0, zeta) })
    }
}

/// A truncated series or product with its error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chi0Value {
    pub value: f64,
    pub error_bound: f64,
    pub terms: usize,
}

/// `χ₀ = (p−1)/p · ∏_{i>=1} (p−1)β_i / (p − β_i)` for the symmetric law.
///
/// With `r = (pα − 1)/(p − 1)` each factor is `1 + p r^i / (1 − r^i)`,
/// summed in log space. The product stops once a factor is within `1e−16`
/// of 1; the remaining logs are bounded by a geometric series.
pub fn chi0_symmetric(p: u64, alpha: f64) -> Result<Chi0Value> {
    check_prime(p)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha = {alpha} must lie in (0, 1)"));
    }
    let pf = p as f64;
    let r = (pf * alpha - 1.0) / (pf - 1.0);
    let base = (pf - 1.0) / pf;
    if r == 0.0 {
        return Ok(Chi0Value { value: base, error_bound: 0.0, terms: 0 });
    }
    let mut log_sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut ri = 1.0f64;
    let mut i = 0usize;
    loop {
        i += 1;
        ri *= r;
        let beta = 1.0 + (pf - 1.0) * ri;
        debug_assert!(beta > 0.0 && beta < pf, "beta_{i} = {beta}");
        let excess = pf * ri / (1.0 - ri);
        let t = excess.ln_1p();
        // Neumaier summation
        let s = log_sum + t;
        comp += if log_sum.abs() >= t.abs() { (log_sum - s) + t } else { (t - s) + log_sum };
        log_sum = s;
        if excess.abs() < 1e-16 || i >= 10_000_000 {
            break;
        }
    }
    let ra = r.abs();
    let tail = pf * ra.powi(i as i32 + 1) / ((1.0 - ra) * (1.0 - ra.powi(i as i32 + 1)));
    let value = base * (log_sum + comp).exp();
    let rounding = value * (i as f64 + 4.0) * f64::EPSILON;
    Ok(Chi0Value { value, error_bound: value * tail.exp_m1() + rounding, terms: i })
}

/// `χ = χ₀ p^{−ζ} / (p − 1)`.
pub fn chi_from_zeta(p: u64, chi0: f64, zeta: f64) -> f64 {
    chi0 * (p as f64).powf(-zeta) / (p - 1) as f64
}

/// `(k, exact)` with `p^k <= n < p^{k+1}`, `exact` when `n = p^k`.
fn ilog(p: u64, n: u64) -> (u32, bool) {
    let k = n.ilog(p);
    (k, p.pow(k) == n)
}

/// `log_p n`, exact for powers of `p` and otherwise kept inside `(k, k+1)`.
fn log_p(p: u64, n: u64) -> f64 {
    let (k, exact) = ilog(p, n);
    if exact {
        return k as f64;
    }
    let l = (n as f64).ln() / (p as f64).ln();
    let lo = k as f64;
    l.clamp(lo.next_up(), (lo + 1.0).next_down())
}

/// Fractional part of `−log_p n`, the natural `ζ` for a single `n`.
pub fn zeta_from_n(p: u64, n: u64) -> f64 {
    let l = log_p(p, n);
    let z = -l - (-l).floor();
    if z >= 1.0 {
        0.0
    } else {
        z
    }
}

/// `⌊log_p n + ζ⌉ = ⌊log_p n + ζ + 1/2⌋`.
pub fn centering(p: u64, n: u64, zeta: f64) -> i64 {
    assert!(n >= 1);
    (log_p(p, n) + zeta + 0.5).floor() as i64
}

/// `E p^{⟨L, λ⟩} = ((p−1)χ)^{|λ|} / |λ|! · MC(G_{λ'})`.
pub fn moment_ld(p: u64, chi: f64, lambda: &Partition) -> Result<f64> {
    let mc = maximal_chain_count(&lambda.conjugate(), p)?;
    let l = lambda.size() as f64;
    let ln_mc = mc.to_f64().map(f64::ln).filter(|x| x.is_finite()).unwrap_or_else(|| {
        let b = mc.bits();
        let top = (&mc >> (b - 64) as usize).to_f64().unwrap();
        top.ln() + (b - 64) as f64 * std::f64::consts::LN_2
    });
    let ln_fact: f64 = (1..=lambda.size()).map(|k| (k as f64).ln()).sum();
    Ok((l * (((p - 1) as f64) * chi).ln() - ln_fact + ln_mc).exp())
}
