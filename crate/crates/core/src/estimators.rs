//! Estimators for quantities defined as limits: `χ₀` from random vectors
//! and exact `τ` products, exact kernel-count moments for the symmetric
//! family, and matrix-side estimates of `E|Hom(Γ_n, G)| / n^ℓ`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entrydist::{beta, AbelianGroup, CharacterTable, EntryDist, TauState};
use crate::error::{invalid, Error, Result};
use crate::modular::PadicRing;
use crate::par::map_trials;
use crate::pgroup::Partition;
use crate::plinalg::stream::CokernelStream;
use crate::rng::{purpose, substream};
use crate::sampler::RowSampler;

/// A Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
    pub n: usize,
    pub seed: u64,
    pub diagnostics: BTreeMap<String, f64>,
}

/// Mean, standard error and max/mean of per-trial values, in index order.
fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = neumaier(values.iter().copied()) / n;
    let var = neumaier(values.iter().map(|&v| (v - mean) * (v - mean))) / (n - 1.0);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, (var / n).sqrt(), if mean != 0.0 { max / mean } else { 0.0 })
}

fn neumaier(it: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in it {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// How `v` is drawn in [`estimate_chi0_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chi0Sampler {
    /// `v_1` uniform nonzero, the rest uniform; weight `∏ p τ(v_{<=i})`.
    Uniform,
    /// Same target, but a zero is appended with probability `p τ / p`.
    /// Zero steps then carry weight exactly 1, which removes the heavy
    /// tail coming from long runs of zeros.
    Tilted,
}

impl Chi0Sampler {
    fn code(self) -> f64 {
        match self {
            Chi0Sampler::Uniform => 0.0,
            Chi0Sampler::Tilted => 1.0,
        }
    }
}

/// `E|{v ∈ F_p^n : v_1 ≠ 0, L_n v = 0}|`, which tends to `χ₀`, with the
/// default (tilted) sampler.
pub fn estimate_chi0(dist: &EntryDist, n: usize, trials: usize, seed: u64) -> Result<EstimateResult> {
    estimate_chi0_with(dist, n, trials, seed, Chi0Sampler::Tilted)
}

/// As [`estimate_chi0`] with an explicit sampler. Both are unbiased for the
/// finite-`n` quantity `(p−1)/p · E ∏_{i<=n} p τ(v_{<=i})`.
pub fn estimate_chi0_with(
    dist: &EntryDist,
    n: usize,
    trials: usize,
    seed: u64,
    sampler: Chi0Sampler,
) -> Result<EstimateResult> {
    if dist.precision() != 1 {
        return invalid("chi0 depends only on the law mod p; pass a distribution with E = 1");
    }
    if trials < 2 || n < 1 {
        return invalid("need trials >= 2 and n >= 1");
    }
    let p = dist.p();
    let h = Partition::new(vec![1])?;
    let table = CharacterTable::new(dist, AbelianGroup::new(p, &h)?)?;
    let pf = p as f64;
    let values = map_trials(
        trials,
        || TauState::new(&table),
        |st, t| {
            let mut rng = substream(seed, purpose::CHI0, t as u64);
            st.reset();
            let first = rng.random_range(1..p) as usize;
            let mut g = pf * st.push(first);
            let mut w = (pf - 1.0) / pf * g;
            for _ in 1..n {
                match sampler {
                    Chi0Sampler::Uniform => {
                        let h = rng.random_range(0..p) as usize;
                        w *= pf * st.push(h);
                    }
                    Chi0Sampler::Tilted => {
                        if rng.random::<f64>() * pf < g {
                            continue;
                        }
                        let h = rng.random_range(1..p) as usize;
                        let g_new = pf * st.push(h);
                        w *= (pf - 1.0) * g_new / (pf - g);
                        g = g_new;
                    }
                }
            }
            w
        },
    );
    let (estimate, stderr, ratio) = summarize(&values);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("max_over_mean".into(), ratio);
    diagnostics.insert("sampler".into(), sampler.code());
    diagnostics.insert("spectral_gap".into(), table.spectral_gap());
    Ok(EstimateResult { estimate, stderr, trials, n, seed, diagnostics })
}

const DP_LIMIT: usize = 100_000;

fn symmetric_dp(p: u64, alpha: f64, n: usize, first_nonzero: bool) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha = {alpha} must lie in (0, 1)"));
    }
    crate::modular::check_prime(p)?;
    if n > DP_LIMIT {
        return Err(Error::Resource(format!("exact DP limited to n <= {DP_LIMIT}")));
    }
    let pf = p as f64;
    let b: Vec<f64> = (0..=n as u32 + 1).map(|k| beta(p, alpha, k) / pf).collect();
    // w[k]: total weight of prefixes with k nonzero coordinates
    let mut w = vec![0.0f64; n + 2];
    w[0] = 1.0;
    for i in 0..n {
        for k in (0..=i).rev() {
            let x = w[k];
            if x == 0.0 {
                continue;
            }
            w[k + 1] += x * (pf - 1.0) * b[k + 1];
            w[k] = if first_nonzero && i == 0 { 0.0 } else { x * b[k] };
        }
    }
    Ok(neumaier(w.iter().copied()))
}

/// `E|{v ∈ F_p^n : L_n v = 0}|` for the symmetric law, exactly, by a
/// dynamic program over the number of nonzero coordinates (`O(n²)`).
/// Includes the zero vector.
pub fn exact_moment_symmetric(p: u64, alpha: f64, n: usize) -> Result<f64> {
    symmetric_dp(p, alpha, n, false)
}

/// Same count restricted to `v_1 ≠ 0`.
pub fn exact_moment_symmetric_restricted(p: u64, alpha: f64, n: usize) -> Result<f64> {
    symmetric_dp(p, alpha, n, true)
}

/// `E |Hom(Γ_n, G_μ)| / n^{|μ|}` from random matrices.
///
/// The cokernel is tracked at precision `μ_1`; factors of order at least
/// `p^{μ_1}` contribute like free factors, which is exact for `G_μ`.
pub fn estimate_hom_moment(
    dist: &EntryDist,
    g: &Partition,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<EstimateResult> {
    if trials < 2 || n < 1 {
        return invalid("need trials >= 2 and n >= 1");
    }
    let mut diagnostics = BTreeMap::new();
    if g.is_empty() {
        return Ok(EstimateResult { estimate: 1.0, stderr: 0.0, trials, n, seed, diagnostics });
    }
    let d = g.largest();
    if d > dist.precision() {
        return invalid(format!(
            "exponent p^{d} of G exceeds the precision p^{} of the distribution",
            dist.precision()
        ));
    }
    let p = dist.p();
    let ring = PadicRing::new(p, d)?;
    let proto = CokernelStream::new(ring, n);
    let sampler = RowSampler::for_stream(dist, &proto)?;
    let ell = g.size() as f64;
    let (lnp, lnn) = ((p as f64).ln(), (n as f64).ln());
    let mu = g.parts().to_vec();
    let values = map_trials(
        trials,
        || (CokernelStream::new(ring, n), Vec::new()),
        |(stream, buf), t| {
            let mut rng = substream(seed, purpose::HOM, t as u64);
            sampler.fill(&mut rng, stream, n, buf);
            let e: u64 = stream.orders().iter().map(|&v| mu.iter().map(|&m| m.min(v) as u64).sum::<u64>()).sum();
            (e as f64 * lnp - ell * lnn).exp()
        },
    );
    let (estimate, stderr, ratio) = summarize(&values);
    diagnostics.insert("max_over_mean".into(), ratio);
    Ok(EstimateResult { estimate, stderr, trials, n, seed, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step() {
        let d = EntryDist::symmetric(2, 0.75).unwrap();
        for s in [Chi0Sampler::Uniform, Chi0Sampler::Tilted] {
            let r = estimate_chi0_with(&d, 1, 10, 1, s).unwrap();
            assert!((r.estimate - 0.75).abs() < 1e-15);
            assert_eq!(r.stderr, 0.0);
        }
        let d3 = EntryDist::parse("0:0.2,1:0.5,2:0.3", 3, 1).unwrap();
        let r = estimate_chi0_with(&d3, 1, 4000, 2, Chi0Sampler::Uniform).unwrap();
        // (p−1)τ(v_1), τ = P(ξ ≡ 0) = 0.2 for both nonzero v_1
        assert!((r.estimate - 0.4).abs() < 1e-12);
    }

    #[test]
    fn uniform_law_is_exact() {
        let d = EntryDist::symmetric(2, 0.5).unwrap();
        let r = estimate_chi0(&d, 200, 50, 3).unwrap();
        assert!((r.estimate - 0.5).abs() < 1e-12 && r.stderr < 1e-12);
    }

    #[test]
    fn rejects_lifted() {
        let d = EntryDist::uniform(2, 2).unwrap();
        assert!(estimate_chi0(&d, 10, 10, 0).is_err());
    }

    #[test]
    fn dp_small() {
        assert!((exact_moment_symmetric(2, 0.75, 1).unwrap() - 1.75).abs() < 1e-15);
        assert!((exact_moment_symmetric(2, 0.75, 2).unwrap() - 2.78125).abs() < 1e-15);
        assert!((exact_moment_symmetric_restricted(2, 0.75, 1).unwrap() - 0.75).abs() < 1e-15);
        assert!(exact_moment_symmetric(2, 0.75, DP_LIMIT + 1).is_err());
    }

    #[test]
    fn dp_matches_enumeration() {
        // Σ_v ∏ τ(v_{<=i}) over F_3^4 with τ from the character sum
        let d = EntryDist::symmetric(3, 0.2).unwrap();
        let h = Partition::new(vec![1]).unwrap();
        let table = CharacterTable::new(&d, AbelianGroup::new(3, &h).unwrap()).unwrap();
        let n = 4;
        let (mut all, mut restricted) = (0.0, 0.0);
        for idx in 0..81usize {
            let v: Vec<usize> = (0..n).map(|i| idx / 3usize.pow(i as u32) % 3).collect();
            let mut st = TauState::new(&table);
            let w: f64 = v.iter().map(|&x| st.push(x)).product();
            all += w;
            if v[0] != 0 {
                restricted += w;
            }
        }
        assert!((exact_moment_symmetric(3, 0.2, n).unwrap() - all).abs() < 1e-12);
        assert!((exact_moment_symmetric_restricted(3, 0.2, n).unwrap() - restricted).abs() < 1e-12);
    }

    #[test]
    fn trivial_hom_moment() {
        let d = EntryDist::symmetric(2, 0.5).unwrap();
        let r = estimate_hom_moment(&d, &Partition::empty(), 50, 10, 0).unwrap();
        assert_eq!((r.estimate, r.stderr), (1.0, 0.0));
        assert!(estimate_hom_moment(&d, &Partition::new(vec![2]).unwrap(), 5, 10, 0).is_err());
    }
}
