use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::trace::synthetic::unit_mean_lognormal;
use crate::{Error, Result};

/// Default representation ladder in bits/s.
pub const DEFAULT_LADDER_BPS: [f64; 9] = [
    101e3, 194e3, 377e3, 730e3, 1415e3, 2743e3, 5319e3, 10314e3, 20000e3,
];

pub const DEFAULT_TAU_S: f64 = 2.0;
pub const DEFAULT_DELTA_P_S: f64 = 5.0;

/// Allowed relative gap between a representation's nominal rate and the
/// mean rate of its segments.
pub const RATE_TOLERANCE: f64 = 0.10;

/// Segment sizes of a live stream. Segment indices past `n_segments` wrap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaCatalog {
    tau: f64,
    rates: Vec<f64>,
    /// `sizes[i][j]` in bits.
    sizes: Vec<Vec<f64>>,
}

impl MediaCatalog {
    pub fn new(tau: f64, rates: Vec<f64>, sizes: Vec<Vec<f64>>) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!("segment duration must be positive, got {tau}")));
        }
        check_rates(&rates)?;
        if sizes.is_empty() {
            return Err(Error::Config("catalog has no segments".into()));
        }
        for (i, row) in sizes.iter().enumerate() {
            if row.len() != rates.len() {
                return Err(Error::Config(format!(
                    "segment {i} has {} sizes for {} representations",
                    row.len(),
                    rates.len()
                )));
            }
            if let Some(s) = row.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
                return Err(Error::Config(format!("segment {i} has non-positive size {s}")));
            }
        }
        for (j, &r) in rates.iter().enumerate() {
            let mean = sizes.iter().map(|row| row[j]).sum::<f64>() / sizes.len() as f64 / tau;
            if crate::math::abs(mean / r - 1.0) > RATE_TOLERANCE {
                return Err(Error::Config(format!(
                    "representation {j}: segment sizes average {mean} bits/s, nominal rate {r}"
                )));
            }
        }
        Ok(Self { tau, rates, sizes })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Nominal mean rate of each representation, increasing.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn n_representations(&self) -> usize {
        self.rates.len()
    }

    pub fn n_segments(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[Vec<f64>] {
        &self.sizes
    }

    /// Size in bits of segment `i` (wrapping) in representation `j`.
    pub fn size(&self, i: u64, j: usize) -> f64 {
        self.sizes[(i % self.sizes.len() as u64) as usize][j]
    }

    /// Sizes of segment `i` in every representation.
    pub fn segment(&self, i: u64) -> &[f64] {
        &self.sizes[(i % self.sizes.len() as u64) as usize]
    }
}

fn check_rates(rates: &[f64]) -> Result<()> {
    if rates.is_empty() {
        return Err(Error::Config("empty representation ladder".into()));
    }
    if rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::Config("representation rates must be positive".into()));
    }
    if rates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("representation rates must be strictly increasing".into()));
    }
    Ok(())
}

/// Catalog with `s_ij = rate_j * tau * m_i`, where the per-segment factor
/// `m_i` is unit-mean lognormal with the given CV (1 when `variation_cv` is
/// 0) and shared by all representations of a segment.
pub fn build_synthetic_catalog(
    rates: &[f64],
    n_segments: usize,
    tau: f64,
    variation_cv: f64,
    seed: u64,
) -> Result<MediaCatalog> {
    check_rates(rates)?;
    if n_segments == 0 {
        return Err(Error::Config("catalog needs at least one segment".into()));
    }
    if !(variation_cv >= 0.0 && variation_cv.is_finite()) {
        return Err(Error::Config(format!("variation cv must be non-negative, got {variation_cv}")));
    }
    let factors: Vec<f64> = match unit_mean_lognormal(variation_cv) {
        Some(dist) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n_segments).map(|_| dist.sample(&mut rng)).collect()
        }
        None => alloc::vec![1.0; n_segments],
    };
    let sizes = factors
        .iter()
        .map(|&m| rates.iter().map(|&r| r * tau * m).collect())
        .collect();
    MediaCatalog::new(tau, rates.to_vec(), sizes)
}

/// Segment availability and playback deadlines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub tau: f64,
    /// Live latency bound.
    pub delta_p: f64,
}

impl Default for Timeline {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU_S, delta_p: DEFAULT_DELTA_P_S }
    }
}

impl Timeline {
    pub fn new(tau: f64, delta_p: f64) -> Result<Self> {
        let t = Self { tau, delta_p };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("segment duration must be positive, got {}", self.tau)));
        }
        if !(self.delta_p >= 2.0 * self.tau) || !self.delta_p.is_finite() {
            return Err(Error::Config(format!(
                "live latency bound {} must be at least twice the segment duration {}",
                self.delta_p, self.tau
            )));
        }
        Ok(())
    }

    /// Time at which segment `i` is published.
    pub fn availability(&self, i: u64) -> f64 {
        (i as f64 + 1.0) * self.tau
    }

    pub fn deadline(&self, i: u64) -> f64 {
        i as f64 * self.tau + self.delta_p
    }

    /// Time left for downloading a segment requested as soon as it appears.
    pub fn transport_budget(&self) -> f64 {
        self.delta_p - self.tau
    }
}
