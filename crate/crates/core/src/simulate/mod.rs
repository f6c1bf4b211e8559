//! End-to-end experiments: sample `L_n`, read off
//! `(rank(p^{i−1} Γ_n) − ⌊log_p n + ζ⌉)_{i=1..d}`, and histogram it.

pub mod fit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::entrydist::EntryDist;
use crate::error::{invalid, Error, Result};
use crate::modular::{checked_pow, PadicRing, MAX_MODULUS};
use crate::par::map_trials;
use crate::plinalg::stream::CokernelStream;
use crate::rng::{purpose, substream};
use crate::sampler::RowSampler;
use crate::theory::{centering, zeta_from_n};

pub use fit::{compare_moments, compare_to_theory, FitReport, MomentRow, PointRow};

/// Default budget in entry operations.
pub const DEFAULT_BUDGET: f64 = 1e12;

/// How `ζ` is chosen for a single `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZetaPolicy {
    Explicit(f64),
    /// `ζ = {−log_p n}`.
    FromN,
}

impl ZetaPolicy {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(ZetaPolicy::FromN),
            v => v
                .parse::<f64>()
                .map(ZetaPolicy::Explicit)
                .map_err(|_| Error::Validation(format!("zeta must be `auto` or a number, got `{v}`"))),
        }
    }

    pub fn resolve(&self, p: u64, n: u64) -> f64 {
        match *self {
            ZetaPolicy::Explicit(z) => z,
            ZetaPolicy::FromN => zeta_from_n(p, n),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            ZetaPolicy::Explicit(_) => "explicit",
            ZetaPolicy::FromN => "auto",
        }
    }
}

/// Default precision `E = d + 8`, lowered if `p^E` would not fit.
pub fn default_precision(p: u64, d: u32) -> u32 {
    let mut e = d + 8;
    while e > d + 1 && !checked_pow(p, e).is_some_and(|m| m < MAX_MODULUS) {
        e -= 1;
    }
    e
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub p: u64,
    pub d: u32,
    pub n: usize,
    pub trials: usize,
    pub zeta: ZetaPolicy,
    pub dist: EntryDist,
    pub seed: u64,
    pub precision: u32,
    pub budget: f64,
}

impl ExperimentConfig {
    /// Validated configuration; `dist` is lifted to `precision`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: u64,
        d: u32,
        n: usize,
        trials: usize,
        zeta: ZetaPolicy,
        dist: &EntryDist,
        seed: u64,
        precision: Option<u32>,
    ) -> Result<Self> {
        crate::modular::check_prime(p)?;
        if d == 0 {
            return invalid("d must be positive");
        }
        let e = precision.unwrap_or_else(|| default_precision(p, d));
        if e < d + 1 {
            return invalid(format!("precision E = {e} must be at least d + 1 = {}", d + 1));
        }
        PadicRing::new(p, e)?;
        if dist.p() != p {
            return invalid("distribution uses a different prime");
        }
        if dist.precision() > e {
            return invalid(format!("distribution precision {} exceeds E = {e}", dist.precision()));
        }
        if n == 0 || trials == 0 {
            return invalid("n and trials must be positive");
        }
        if let ZetaPolicy::Explicit(z) = zeta {
            if !(0.0..1.0).contains(&z) {
                return invalid(format!("zeta = {z} must lie in [0, 1)"));
            }
        }
        Ok(ExperimentConfig {
            p,
            d,
            n,
            trials,
            zeta,
            dist: dist.lift(e)?,
            seed,
            precision: e,
            budget: DEFAULT_BUDGET,
        })
    }

    /// `n² · trials`, with bit-sliced `p = 2` counting 1/64 per entry.
    pub fn cost(&self) -> f64 {
        let base = (self.n as f64).powi(2) * self.trials as f64;
        if self.p == 2 && self.d as usize <= crate::plinalg::stream::MAX_PLANES {
            base / 64.0
        } else {
            base
        }
    }
}

/// Counts of centered rank vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationHistogram {
    pub p: u64,
    pub d: u32,
    pub n: usize,
    pub zeta: f64,
    pub zeta_policy: String,
    pub trials: usize,
    pub seed: u64,
    pub precision: u32,
    pub dist: String,
    pub centering: i64,
    pub counts: BTreeMap<Vec<i64>, u64>,
}

#[derive(Serialize, Deserialize)]
struct CountEntry {
    x: Vec<i64>,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct HistogramFile {
    p: u64,
    d: u32,
    n: usize,
    zeta: f64,
    zeta_policy: String,
    trials: usize,
    seed: u64,
    #[serde(rename = "E")]
    precision: u32,
    dist: String,
    centering: i64,
    counts: Vec<CountEntry>,
}

impl FluctuationHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = HistogramFile {
            p: self.p,
            d: self.d,
            n: self.n,
            zeta: self.zeta,
            zeta_policy: self.zeta_policy.clone(),
            trials: self.trials,
            seed: self.seed,
            precision: self.precision,
            dist: self.dist.clone(),
            centering: self.centering,
            counts: self.counts.iter().map(|(x, &count)| CountEntry { x: x.clone(), count }).collect(),
        };
        crate::json::to_canonical(&file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: HistogramFile = crate::json::from_str(text)?;
        let mut counts = BTreeMap::new();
        for c in f.counts {
            if c.x.len() != f.d as usize {
                return invalid(format!("histogram key {:?} does not have d = {} entries", c.x, f.d));
            }
            *counts.entry(c.x).or_insert(0) += c.count;
        }
        let h = FluctuationHistogram {
            p: f.p,
            d: f.d,
            n: f.n,
            zeta: f.zeta,
            zeta_policy: f.zeta_policy,
            trials: f.trials,
            seed: f.seed,
            precision: f.precision,
            dist: f.dist,
            centering: f.centering,
            counts,
        };
        crate::modular::check_prime(h.p)?;
        if h.total() != h.trials as u64 {
            return invalid("histogram counts do not sum to trials");
        }
        Ok(h)
    }
}

/// Centered rank vectors of `trials` independent matrices.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<FluctuationHistogram> {
    if cfg.cost() > cfg.budget {
        return Err(Error::Resource(format!(
            "n^2 * trials = {:.3e} entry operations exceeds the budget {:.3e}",
            cfg.cost(),
            cfg.budget
        )));
    }
    let zeta = cfg.zeta.resolve(cfg.p, cfg.n as u64);
    let c = centering(cfg.p, cfg.n as u64, zeta);
    // ranks of p^{i-1}Γ for i <= d only see valuations below d
    let ring = PadicRing::new(cfg.p, cfg.d)?;
    let proto = CokernelStream::new(ring, cfg.n);
    let sampler = RowSampler::for_stream(&cfg.dist, &proto)?;
    drop(proto);
    let (n, d, seed) = (cfg.n, cfg.d, cfg.seed);
    let keys = map_trials(
        cfg.trials,
        || (CokernelStream::new(ring, n), Vec::new(), Vec::new()),
        |(stream, buf, prof), t| {
            let mut rng = substream(seed, purpose::MATRIX, t as u64);
            sampler.fill(&mut rng, stream, n, buf);
            stream.rank_profile_into(prof, d);
            prof.iter().map(|&r| r as i64 - c).collect::<Vec<i64>>()
        },
    );
    let mut counts = BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0u64) += 1;
    }
    Ok(FluctuationHistogram {
        p: cfg.p,
        d: cfg.d,
        n: cfg.n,
        zeta,
        zeta_policy: cfg.zeta.label().into(),
        trials: cfg.trials,
        seed: cfg.seed,
        precision: cfg.precision,
        dist: cfg.dist.describe(),
        centering: c,
        counts,
    })
}
