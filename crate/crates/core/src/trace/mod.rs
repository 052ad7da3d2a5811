//! Throughput traces: loading from text, resampling and descriptive statistics.
//!
//! A trace holds one mean throughput sample (bits/second) per one-second
//! interval starting at `t = 0`. It defines the piecewise-constant ground
//! truth rate function used by the session engine.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

pub mod synthetic;

/// Minimum accepted trace length in samples.
pub const MIN_TRACE_SAMPLES: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputTrace {
    id: String,
    samples: Vec<f64>,
}

impl ThroughputTrace {
    /// Builds a validated trace. Every sample must be finite and
    /// non-negative, and there must be at least [`MIN_TRACE_SAMPLES`].
    pub fn new(id: impl Into<String>, samples: Vec<f64>) -> Result<Self> {
        for (k, &v) in samples.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteRate { line: k + 1 });
            }
            if v < 0.0 {
                return Err(Error::NegativeRate { line: k + 1, value: v });
            }
        }
        if samples.len() < MIN_TRACE_SAMPLES {
            return Err(Error::TraceTooShort {
                len: samples.len(),
                min: MIN_TRACE_SAMPLES,
                line: samples.len(),
            });
        }
        Ok(Self { id: id.into(), samples })
    }

    /// Parses the text trace format: optional `#` comment lines, then one
    /// decimal rate per line. Blank lines are ignored. Errors carry the
    /// 1-based line number in `text`.
    pub fn parse(id: impl Into<String>, text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let row = raw.trim();
            if row.is_empty() || row.starts_with('#') {
                continue;
            }
            let value: f64 = row.parse().map_err(|_| Error::MalformedRate {
                line,
                text: row.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFiniteRate { line });
            }
            if value < 0.0 {
                return Err(Error::NegativeRate { line, value });
            }
            samples.push(value);
            last_line = line;
        }
        if samples.len() < MIN_TRACE_SAMPLES {
            return Err(Error::TraceTooShort {
                len: samples.len(),
                min: MIN_TRACE_SAMPLES,
                line: last_line,
            });
        }
        Ok(Self { id: id.into(), samples })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Duration in seconds (one sample per second).
    pub fn duration(&self) -> usize {
        self.samples.len()
    }

    /// Rate at time `t`: `samples[floor(t)]` inside `[0, duration)`, zero
    /// outside.
    pub fn rate_at(&self, t: f64) -> f64 {
        if !(t >= 0.0) {
            return 0.0;
        }
        let k = math::floor(t) as usize;
        self.samples.get(k).copied().unwrap_or(0.0)
    }

    /// Bits delivered over `[t1, t2]` by the piecewise-constant rate function.
    pub fn integrate(&self, t1: f64, t2: f64) -> f64 {
        if t2 <= t1 {
            return 0.0;
        }
        let end = t2.min(self.samples.len() as f64);
        let mut t = t1.max(0.0);
        let mut bits = 0.0;
        while t < end {
            let k = math::floor(t) as usize;
            let next = ((k + 1) as f64).min(end);
            bits += self.samples[k] * (next - t);
            t = next;
        }
        bits
    }

    /// Mean rate over `[t1, t2]` (continuous flow, no idle exclusion).
    pub fn mean_rate(&self, t1: f64, t2: f64) -> Option<f64> {
        if t2 <= t1 || t1 < 0.0 || t2 > self.samples.len() as f64 {
            return None;
        }
        Some(self.integrate(t1, t2) / (t2 - t1))
    }
}

/// Descriptive statistics of a (possibly resampled) throughput series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub mean_bps: f64,
    /// Population standard deviation over mean; absent when the mean is 0.
    pub cv: Option<f64>,
    /// Lag-1 autocorrelation; absent for zero variance.
    pub autocorr_lag1: Option<f64>,
    /// Lag-1 autocorrelation of the first-differenced series.
    pub diff_autocorr_lag1: Option<f64>,
    pub sampling_interval_s: usize,
}

/// Averages consecutive non-overlapping windows of `interval_s` samples. A
/// trailing partial window is dropped.
pub fn resample(trace: &ThroughputTrace, interval_s: usize) -> Result<Vec<f64>> {
    if interval_s == 0 {
        return Err(Error::InvalidArgument("resampling interval must be at least 1 s".into()));
    }
    if interval_s > trace.duration() {
        return Err(Error::IntervalTooLong {
            interval_s,
            duration_s: trace.duration(),
        });
    }
    Ok(trace
        .samples
        .chunks_exact(interval_s)
        .map(math::mean)
        .collect())
}

fn lag1_autocorr(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = math::mean(xs);
    let denom: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    if denom <= 0.0 {
        return None;
    }
    let num: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    Some(num / denom)
}

/// Mean, CV, lag-1 autocorrelation and lag-1 autocorrelation after
/// differencing of `series`.
pub fn compute_stats(series: &[f64], interval_s: usize) -> Result<TraceStats> {
    if series.len() < 3 {
        return Err(Error::SeriesTooShort { len: series.len() });
    }
    let mean = math::mean(series);
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / series.len() as f64;
    let cv = (mean > 0.0).then(|| math::sqrt(var) / mean);
    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(TraceStats {
        mean_bps: mean,
        cv,
        autocorr_lag1: lag1_autocorr(series),
        diff_autocorr_lag1: lag1_autocorr(&diffs),
        sampling_interval_s: interval_s,
    })
}

/// CV of the 1-second series; a trace with zero mean counts as `cv = 0`.
pub fn trace_cv(trace: &ThroughputTrace) -> f64 {
    compute_stats(trace.samples(), 1)
        .ok()
        .and_then(|s| s.cv)
        .unwrap_or(0.0)
}

/// Keeps traces whose 1-second CV is at least `threshold`, preserving order.
pub fn filter_by_cv<'a, I>(traces: I, threshold: f64) -> Vec<&'a ThroughputTrace>
where
    I: IntoIterator<Item = &'a ThroughputTrace>,
{
    traces
        .into_iter()
        .filter(|t| trace_cv(t) >= threshold)
        .collect()
}
