//! Seeded synthetic trace generators for tests and desk-scale experiments.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::ThroughputTrace;
use crate::math;
use crate::Result;

/// Lognormal factor with unit mean and the given coefficient of variation.
/// Returns `None` for `cv <= 0` (the factor is then identically 1).
pub fn unit_mean_lognormal(cv: f64) -> Option<LogNormal<f64>> {
    if !(cv > 0.0) {
        return None;
    }
    let sigma2 = math::ln_1p(cv * cv);
    LogNormal::new(-sigma2 / 2.0, math::sqrt(sigma2)).ok()
}

/// Regime-switching trace: the link alternates between a high and a low
/// rate, each regime lasting a uniformly drawn number of seconds, with
/// multiplicative lognormal noise on every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstyParams {
    pub len_s: usize,
    pub high_bps: f64,
    pub low_bps: f64,
    pub min_dwell_s: usize,
    pub max_dwell_s: usize,
    pub noise_cv: f64,
}

impl Default for BurstyParams {
    fn default() -> Self {
        Self {
            len_s: 400,
            high_bps: 12e6,
            low_bps: 2e6,
            min_dwell_s: 5,
            max_dwell_s: 30,
            noise_cv: 0.3,
        }
    }
}

pub fn bursty(id: impl Into<String>, seed: u64, p: &BurstyParams) -> Result<ThroughputTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = unit_mean_lognormal(p.noise_cv);
    let mut samples = Vec::with_capacity(p.len_s);
    let mut high = rng.random_bool(0.5);
    while samples.len() < p.len_s {
        let dwell = rng.random_range(p.min_dwell_s.max(1)..=p.max_dwell_s.max(p.min_dwell_s.max(1)));
        let base = if high { p.high_bps } else { p.low_bps };
        for _ in 0..dwell {
            if samples.len() == p.len_s {
                break;
            }
            let m = noise.as_ref().map_or(1.0, |d| d.sample(&mut rng));
            samples.push(base * m);
        }
        high = !high;
    }
    ThroughputTrace::new(id, samples)
}

/// Log-domain AR(1) trace around `mean_bps` with occasional outages of
/// zero throughput.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ar1Params {
    pub len_s: usize,
    pub mean_bps: f64,
    /// AR coefficient of the log-rate process, in `[0, 1)`.
    pub phi: f64,
    /// Stationary standard deviation of the log-rate.
    pub log_sd: f64,
    /// Per-second probability that an outage starts.
    pub outage_prob: f64,
    pub max_outage_s: usize,
}

impl Default for Ar1Params {
    fn default() -> Self {
        Self {
            len_s: 400,
            mean_bps: 6e6,
            phi: 0.8,
            log_sd: 0.5,
            outage_prob: 0.0,
            max_outage_s: 4,
        }
    }
}

pub fn log_ar1(id: impl Into<String>, seed: u64, p: &Ar1Params) -> Result<ThroughputTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let innov_sd = p.log_sd * math::sqrt(1.0 - p.phi * p.phi);
    let gauss = rand_distr::Normal::new(0.0, innov_sd.max(0.0)).expect("finite sd");
    // exp(z) with z ~ N(0, log_sd^2) has mean exp(log_sd^2 / 2).
    let scale = p.mean_bps / math::exp(p.log_sd * p.log_sd / 2.0);
    let mut z = 0.0;
    let mut outage_left = 0usize;
    let mut samples = Vec::with_capacity(p.len_s);
    for _ in 0..p.len_s {
        z = p.phi * z + gauss.sample(&mut rng);
        if outage_left == 0 && p.outage_prob > 0.0 && rng.random_bool(p.outage_prob.min(1.0)) {
            outage_left = rng.random_range(1..=p.max_outage_s.max(1));
        }
        if outage_left > 0 {
            outage_left -= 1;
            samples.push(0.0);
        } else {
            samples.push(scale * math::exp(z));
        }
    }
    ThroughputTrace::new(id, samples)
}

/// Constant-rate trace.
pub fn constant(id: impl Into<String>, len_s: usize, rate_bps: f64) -> Result<ThroughputTrace> {
    ThroughputTrace::new(id, alloc::vec![rate_bps; len_s])
}
