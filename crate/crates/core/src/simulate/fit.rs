//! Goodness of fit of a histogram against the limit law.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::FluctuationHistogram;
use crate::error::{invalid, Error, Result};
use crate::pgroup::Partition;
use crate::rng::{purpose, substream};
use crate::theory::pmf::bulk_range;
use crate::theory::{moment_ld, pmf_l1, TheoryParams};

pub const BOOTSTRAP_RESAMPLES: usize = 200;
const MOM_GROUPS: usize = 10;
const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub lambda: Vec<u32>,
    pub empirical: f64,
    pub stderr: f64,
    pub theory: f64,
    pub median_of_means: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub x: i64,
    pub empirical: f64,
    pub theory: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub p: u64,
    pub d: u32,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub zeta: f64,
    pub chi0: f64,
    pub chi: f64,
    pub tv: Option<f64>,
    pub chi2: Option<f64>,
    pub dof: Option<usize>,
    pub chi2_pvalue: Option<f64>,
    pub moments: Vec<MomentRow>,
    pub table: Vec<PointRow>,
}

impl FitReport {
    fn empty(hist: &FluctuationHistogram, params: &TheoryParams) -> Self {
        FitReport {
            p: hist.p,
            d: hist.d,
            n: hist.n,
            trials: hist.trials,
            seed: hist.seed,
            zeta: params.zeta,
            chi0: params.chi0,
            chi: params.chi,
            tv: None,
            chi2: None,
            dof: None,
            chi2_pvalue: None,
            moments: Vec::new(),
            table: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,empirical,theory\n");
        for r in &self.table {
            s.push_str(&format!(
                "{},{},{}\n",
                r.x,
                crate::json::format_float(r.empirical),
                crate::json::format_float(r.theory)
            ));
        }
        s
    }
}

fn check(hist: &FluctuationHistogram, params: &TheoryParams) -> Result<()> {
    if hist.p != params.p {
        return invalid("histogram and theory use different primes");
    }
    if hist.trials == 0 || hist.total() != hist.trials as u64 {
        return invalid("histogram counts do not sum to trials");
    }
    Ok(())
}

/// Total variation and Pearson chi-square against `pmf_L1` (`d = 1` only).
pub fn compare_to_theory(hist: &FluctuationHistogram, params: &TheoryParams) -> Result<FitReport> {
    check(hist, params)?;
    if hist.d != 1 {
        return Err(Error::Validation(
            "no closed-form pmf for d >= 2; use compare_moments".into(),
        ));
    }
    let (p, chi) = (params.p, params.chi);
    let trials = hist.trials as f64;
    let (blo, bhi) = bulk_range(p, chi, 1e-16)?;
    let emp_lo = hist.counts.keys().map(|k| k[0]).min().unwrap_or(blo);
    let emp_hi = hist.counts.keys().map(|k| k[0]).max().unwrap_or(bhi);
    let (lo, hi) = (blo.min(emp_lo), bhi.max(emp_hi));
    let mut table = Vec::new();
    for x in lo..=hi {
        let th = pmf_l1(p, chi, x)?.value;
        let e = hist.counts.get(&vec![x]).copied().unwrap_or(0) as f64 / trials;
        table.push(PointRow { x, empirical: e, theory: th });
    }
    let tail = |range: &mut dyn Iterator<Item = i64>| -> Result<f64> {
        range.map(|x| pmf_l1(p, chi, x).map(|v| v.value)).sum()
    };
    let below = tail(&mut (lo - 80..lo))?;
    let above = tail(&mut (hi + 1..hi + 81))?;
    let tv = 0.5 * (table.iter().map(|r| (r.empirical - r.theory).abs()).sum::<f64>() + below + above);

    // cells over the full line: the first and last absorb the outside mass
    let mut cells: Vec<(f64, f64)> = table.iter().map(|r| (r.empirical * trials, r.theory * trials)).collect();
    cells[0].1 += below * trials;
    let last = cells.len() - 1;
    cells[last].1 += above * trials;
    let bins = merge_cells(cells);
    let mut report = FitReport::empty(hist, params);
    if bins.len() >= 2 {
        let chi2: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
        let dof = bins.len() - 1;
        let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numerical(e.to_string()))?;
        report.chi2 = Some(chi2);
        report.dof = Some(dof);
        report.chi2_pvalue = Some(dist.sf(chi2));
    }
    report.tv = Some(tv);
    report.table = table;
    Ok(report)
}

/// Merge tail cells inward until each has expected count >= 5, then fold
/// any remaining small interior cell into its right neighbour.
fn merge_cells(cells: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    let n = cells.len();
    let mut i = 0;
    while i < n {
        acc.0 += cells[i].0;
        acc.1 += cells[i].1;
        i += 1;
        if acc.1 >= MIN_EXPECTED {
            break;
        }
    }
    v.push(acc);
    let mut right: Vec<(f64, f64)> = Vec::new();
    let mut racc = (0.0, 0.0);
    let mut j = n;
    while j > i {
        j -= 1;
        racc.0 += cells[j].0;
        racc.1 += cells[j].1;
        if racc.1 >= MIN_EXPECTED {
            right.push(racc);
            racc = (0.0, 0.0);
            break;
        }
    }
    let mut carry = (0.0, 0.0);
    for &c in &cells[i..j] {
        carry.0 += c.0;
        carry.1 += c.1;
        if carry.1 >= MIN_EXPECTED {
            v.push(carry);
            carry = (0.0, 0.0);
        }
    }
    // leftovers join their neighbours
    let last = v.len() - 1;
    v[last].0 += carry.0 + racc.0;
    v[last].1 += carry.1 + racc.1;
    v.extend(right);
    v.retain(|c| c.1 > 0.0);
    v
}

/// `E p^{⟨X, λ⟩}` from the histogram against `moment_Ld`, with bootstrap
/// standard errors (200 seeded resamples) and a median-of-means value.
pub fn compare_moments(
    hist: &FluctuationHistogram,
    params: &TheoryParams,
    lambdas: &[Partition],
) -> Result<Vec<MomentRow>> {
    check(hist, params)?;
    for l in lambdas {
        if l.len() > hist.d as usize {
            return invalid(format!("{l} has more than d = {} parts", hist.d));
        }
    }
    let p = hist.p as f64;
    let keys: Vec<&Vec<i64>> = hist.counts.keys().collect();
    let weights: Vec<u64> = hist.counts.values().copied().collect();
    let value = |l: &Partition, k: &[i64]| -> f64 {
        let e: i64 = l.parts().iter().zip(k).map(|(&a, &x)| a as i64 * x).sum();
        p.powi(e as i32)
    };
    let vals: Vec<Vec<f64>> = lambdas.iter().map(|l| keys.iter().map(|k| value(l, k)).collect()).collect();
    let trials = hist.trials as f64;
    let mean_of = |row: &[f64], counts: &[u64]| -> f64 {
        row.iter().zip(counts).map(|(v, &c)| v * c as f64).sum::<f64>() / trials
    };

    let picker = WeightedIndex::new(&weights).map_err(|e| Error::Validation(e.to_string()))?;
    let mut boot: Vec<Vec<f64>> = vec![Vec::with_capacity(BOOTSTRAP_RESAMPLES); lambdas.len()];
    for b in 0..BOOTSTRAP_RESAMPLES {
        let mut rng = substream(hist.seed, purpose::BOOTSTRAP, b as u64);
        let mut counts = vec![0u64; keys.len()];
        for _ in 0..hist.trials {
            counts[picker.sample(&mut rng)] += 1;
        }
        for (li, row) in vals.iter().enumerate() {
            boot[li].push(mean_of(row, &counts));
        }
    }

    // median of means over a seeded shuffle of the expanded sample
    let mut order: Vec<usize> =
        weights.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize)).collect();
    order.shuffle(&mut substream(hist.seed, purpose::SHUFFLE, 0));
    let groups = MOM_GROUPS.min(order.len()).max(1);

    let mut rows = Vec::with_capacity(lambdas.len());
    for (li, l) in lambdas.iter().enumerate() {
        let empirical = mean_of(&vals[li], &weights);
        let bm = &boot[li];
        let mu = bm.iter().sum::<f64>() / bm.len() as f64;
        let sd = (bm.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (bm.len() - 1) as f64).sqrt();
        let mut means: Vec<f64> = (0..groups)
            .map(|g| {
                let chunk: Vec<usize> = order.iter().copied().skip(g).step_by(groups).collect();
                chunk.iter().map(|&i| vals[li][i]).sum::<f64>() / chunk.len() as f64
            })
            .collect();
        means.sort_by(|a, b| a.total_cmp(b));
        let median = if groups % 2 == 1 {
            means[groups / 2]
        } else {
            0.5 * (means[groups / 2 - 1] + means[groups / 2])
        };
        rows.push(MomentRow {
            lambda: l.parts().to_vec(),
            empirical,
            stderr: sd,
            theory: moment_ld(hist.p, params.chi, l)?,
            median_of_means: median,
        });
    }
    Ok(rows)
}

/// Full report: distribution-level fit for `d = 1`, moments always.
pub fn compare(hist: &FluctuationHistogram, params: &TheoryParams, lambdas: &[Partition]) -> Result<FitReport> {
    let mut report = if hist.d == 1 {
        compare_to_theory(hist, params)?
    } else {
        check(hist, params)?;
        FitReport::empty(hist, params)
    };
    report.moments = compare_moments(hist, params, lambdas)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn synthetic(p: u64, chi: f64, trials: u64, shift: i64) -> FluctuationHistogram {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for x in -30..30 {
            let c = (pmf_l1(p, chi, x).unwrap().value * trials as f64).round() as u64;
            if c > 0 {
                counts.insert(vec![x + shift], c);
                total += c;
            }
        }
        FluctuationHistogram {
            p,
            d: 1,
            n: 1,
            zeta: 0.0,
            zeta_policy: "explicit".into(),
            trials: total as usize,
            seed: 0,
            precision: 2,
            dist: "uniform".into(),
            centering: 0,
            counts,
        }
    }

    #[test]
    fn exact_histogram_fits() {
        let params = TheoryParams::new(2, 1, 0.0, 1.0).unwrap();
        let h = synthetic(2, params.chi, 1 << 40, 0);
        let r = compare_to_theory(&h, &params).unwrap();
        assert!(r.tv.unwrap() < 1e-9);
        // only the rounding of counts remains
        assert!(r.chi2.unwrap() < 1e-2, "{r:?}");
        assert!(r.chi2_pvalue.unwrap() > 0.999);
    }

    #[test]
    fn shifted_histogram() {
        let params = TheoryParams::new(3, 1, 0.0, 1.0).unwrap();
        let h = synthetic(3, params.chi, 1 << 40, 1);
        let r = compare_to_theory(&h, &params).unwrap();
        let direct: f64 = 0.5
            * (-40..40)
                .map(|x| (pmf_l1(3, params.chi, x).unwrap().value - pmf_l1(3, params.chi, x - 1).unwrap().value).abs())
                .sum::<f64>();
        assert!((r.tv.unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn moments_of_synthetic() {
        let params = TheoryParams::new(2, 1, 0.0, 1.0).unwrap();
        let h = synthetic(2, params.chi, 1 << 20, 0);
        let ls = [Partition::empty(), Partition::new(vec![1]).unwrap()];
        let rows = compare_moments(&h, &params, &ls).unwrap();
        assert_eq!((rows[0].empirical, rows[0].theory, rows[0].stderr), (1.0, 1.0, 0.0));
        assert!((rows[1].empirical - rows[1].theory).abs() < 3.0 * rows[1].stderr + 1e-5);
        assert!(compare_moments(&h, &params, &[Partition::new(vec![1, 1]).unwrap()]).is_err());
    }

    #[test]
    fn merging_keeps_totals() {
        let cells = vec![(1.0, 0.5), (2.0, 2.0), (10.0, 9.0), (20.0, 21.0), (3.0, 4.0), (0.0, 0.1)];
        let m = merge_cells(cells.clone());
        assert!(m.iter().all(|c| c.1 >= MIN_EXPECTED));
        let so: f64 = m.iter().map(|c| c.0).sum();
        let se: f64 = m.iter().map(|c| c.1).sum();
        assert_eq!(so, cells.iter().map(|c| c.0).sum::<f64>());
        assert!((se - cells.iter().map(|c| c.1).sum::<f64>()).abs() < 1e-12);
    }
}
