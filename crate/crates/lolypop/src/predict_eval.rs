//! Offline predictor evaluation on traces and error-distribution fitting.
//!
//! Offline, the trace plays the role of a permanently busy download: the
//! throughput of a window is the trace's mean rate over it.

use lolypop_core::error_prob::{fit_truncated, signed_rel_error, split_magnitudes, Family, FittedDistribution, Side};
use lolypop_core::predict::{predict_all_scales, PredictorSpec};
use lolypop_core::trace::ThroughputTrace;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

/// One signed relative error sample; `t` is the end of the predicted window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub trace: String,
    pub t: i64,
    #[serde(rename = "T")]
    pub horizon: u32,
    pub signed_error: f64,
}

pub const ERROR_HEADER: [&str; 4] = ["trace", "t", "T", "signed_error"];

/// Signed errors of `spec` on every horizon `1..=t_max`, for predictions
/// made at each integer second.
pub fn evaluate(trace: &ThroughputTrace, spec: &PredictorSpec, t_max: u32, rho_min: f64) -> Vec<ErrorSample> {
    let duration = trace.duration() as i64;
    let meter = |a: f64, b: f64| trace.mean_rate(a, b);
    let mut out = Vec::new();
    for t in 1..duration {
        for rec in predict_all_scales(meter, t, spec, t_max) {
            let end = t + rec.horizon as i64;
            let (Some(rho_hat), Some(actual)) = (rec.rho_hat, trace.mean_rate(t as f64, end as f64)) else {
                continue;
            };
            out.push(ErrorSample {
                trace: trace.id().into(),
                t: end,
                horizon: rec.horizon,
                signed_error: signed_rel_error(rho_hat, actual, rho_min),
            });
        }
    }
    out.sort_by(|a, b| (a.horizon, a.t).cmp(&(b.horizon, b.t)).then_with(|| a.trace.cmp(&b.trace)));
    out
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub method: String,
    #[serde(rename = "T")]
    pub horizon: u32,
    pub quantile: f64,
    /// Quantile of the absolute relative error.
    pub rel_error: f64,
    pub n: usize,
}

/// Quantiles of the absolute relative error per horizon.
pub fn quantile_table(method: &PredictorSpec, samples: &[ErrorSample], quantiles: &[f64]) -> Vec<QuantileRow> {
    let mut horizons: Vec<u32> = samples.iter().map(|s| s.horizon).collect();
    horizons.sort_unstable();
    horizons.dedup();
    let mut out = Vec::new();
    for h in horizons {
        // |signed| equals the unsigned error for the same clamping.
        let mut abs: Vec<f64> = samples.iter().filter(|s| s.horizon == h).map(|s| s.signed_error.abs()).collect();
        abs.sort_by(f64::total_cmp);
        for &q in quantiles {
            if let Some(v) = quantile(&abs, q) {
                out.push(QuantileRow { method: method.to_string(), horizon: h, quantile: q, rel_error: v, n: abs.len() });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub side: Side,
    pub n_samples: usize,
    pub fits: Vec<FitEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FittedDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Fits each family to the selected side's error magnitudes.
pub fn fit_errors(signed: &[f64], side: Side, families: &[Family]) -> FitReport {
    let (under, over) = split_magnitudes(signed);
    let mags = match side {
        Side::Under => under,
        Side::Over => over,
    };
    let fits = families
        .iter()
        .map(|&family| match fit_truncated(&mags, side, family) {
            Ok(f) => FitEntry { family, fit: Some(f), error: None },
            Err(e) => FitEntry { family, fit: None, error: Some(e.to_string()) },
        })
        .collect();
    FitReport { side, n_samples: mags.len(), fits }
}

pub fn parse_family(s: &str) -> Result<Vec<Family>> {
    let all = Family::ALL;
    match s.to_ascii_lowercase().as_str() {
        "all" => Ok(all.to_vec()),
        "exponential" => Ok(vec![Family::Exponential]),
        "normal" => Ok(vec![Family::Normal]),
        "logistic" => Ok(vec![Family::Logistic]),
        "lomax" => Ok(vec![Family::Lomax]),
        other => Err(HarnessError::Invalid(format!("unknown family '{other}' (exponential, normal, logistic, lomax, all)"))),
    }
}

pub fn parse_side(s: &str) -> Result<Side> {
    match s.to_ascii_lowercase().as_str() {
        "over" => Ok(Side::Over),
        "under" => Ok(Side::Under),
        other => Err(HarnessError::Invalid(format!("unknown side '{other}' (over, under)"))),
    }
}
