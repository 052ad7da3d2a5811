//! One-step-ahead throughput predictors evaluated on multiple time scales.
//!
//! Methods are named `<type>:<n>:<params>`: `SMA:<n>:{ar,gm,hm}`,
//! `LinExt:<n>` and `HW:<n>:mse`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::Error;

/// Number of grid steps per Holt-Winters parameter; the grid is
/// `{0, 1/20, ..., 1}` for both alpha and beta.
pub const HW_GRID_STEPS: u32 = 20;

/// Default maximum prediction horizon in seconds.
pub const DEFAULT_T_MAX: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeanType {
    Arithmetic,
    Geometric,
    Harmonic,
}

impl MeanType {
    fn tag(self) -> &'static str {
        match self {
            MeanType::Arithmetic => "ar",
            MeanType::Geometric => "gm",
            MeanType::Harmonic => "hm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PredictorSpec {
    Sma { n: usize, mean: MeanType },
    LinExt { n: usize },
    HoltWinters { n: usize },
}

impl PredictorSpec {
    pub const fn sma1() -> Self {
        PredictorSpec::Sma { n: 1, mean: MeanType::Arithmetic }
    }

    /// Number of past window averages the method consumes.
    pub fn history_len(&self) -> usize {
        match *self {
            PredictorSpec::Sma { n, .. } | PredictorSpec::LinExt { n } | PredictorSpec::HoltWinters { n } => n,
        }
    }

    /// Predicts the next value from `history` (oldest first). `None` means
    /// the prediction is undefined.
    pub fn predict(&self, history: &[f64]) -> Option<f64> {
        if history.len() != self.history_len() {
            return None;
        }
        match *self {
            PredictorSpec::Sma { mean, .. } => sma_predict(history, mean),
            PredictorSpec::LinExt { .. } => linext_predict(history),
            PredictorSpec::HoltWinters { .. } => hw_predict(history),
        }
    }
}

impl Default for PredictorSpec {
    fn default() -> Self {
        Self::sma1()
    }
}

impl fmt::Display for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PredictorSpec::Sma { n, mean } => write!(f, "SMA:{n}:{}", mean.tag()),
            PredictorSpec::LinExt { n } => write!(f, "LinExt:{n}"),
            PredictorSpec::HoltWinters { n } => write!(f, "HW:{n}:mse"),
        }
    }
}

impl FromStr for PredictorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidPredictor(s.to_string());
        let mut parts = s.trim().split(':');
        let kind = parts.next().ok_or_else(bad)?.to_ascii_lowercase();
        let n: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let param = parts.next().map(str::to_ascii_lowercase);
        if parts.next().is_some() {
            return Err(bad());
        }
        let spec = match (kind.as_str(), param.as_deref()) {
            ("sma", Some(p)) => {
                let mean = match p {
                    "ar" => MeanType::Arithmetic,
                    "gm" => MeanType::Geometric,
                    "hm" => MeanType::Harmonic,
                    _ => return Err(bad()),
                };
                PredictorSpec::Sma { n, mean }
            }
            ("sma", None) => PredictorSpec::Sma { n, mean: MeanType::Arithmetic },
            ("linext", None) => PredictorSpec::LinExt { n },
            ("hw", None | Some("mse")) => PredictorSpec::HoltWinters { n },
            _ => return Err(bad()),
        };
        let min = match spec {
            PredictorSpec::Sma { .. } => 1,
            PredictorSpec::LinExt { .. } => 2,
            PredictorSpec::HoltWinters { .. } => 3,
        };
        if n < min {
            return Err(Error::InvalidPredictor(format!("{s}: n must be at least {min}")));
        }
        Ok(spec)
    }
}

impl TryFrom<String> for PredictorSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<PredictorSpec> for String {
    fn from(p: PredictorSpec) -> String {
        p.to_string()
    }
}

/// Simple moving average of the history. Geometric and harmonic means are
/// undefined for non-positive values.
pub fn sma_predict(history: &[f64], mean: MeanType) -> Option<f64> {
    if history.is_empty() {
        return None;
    }
    let n = history.len() as f64;
    match mean {
        MeanType::Arithmetic => Some(history.iter().sum::<f64>() / n),
        MeanType::Geometric => {
            if history.iter().any(|&x| !(x > 0.0)) {
                return None;
            }
            Some(math::exp(history.iter().map(|&x| math::ln(x)).sum::<f64>() / n))
        }
        MeanType::Harmonic => {
            if history.iter().any(|&x| !(x > 0.0)) {
                return None;
            }
            Some(n / history.iter().map(|&x| 1.0 / x).sum::<f64>())
        }
    }
}

/// Least-squares line through `(k, history[k-1])`, `k = 1..n`, evaluated
/// at `n + 1`. The result may be negative.
pub fn linext_predict(history: &[f64]) -> Option<f64> {
    let n = history.len();
    if n < 2 {
        return None;
    }
    let xbar = (n as f64 + 1.0) / 2.0;
    let ybar = math::mean(history);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, &y) in history.iter().enumerate() {
        let dx = (k + 1) as f64 - xbar;
        sxy += dx * (y - ybar);
        sxx += dx * dx;
    }
    Some(ybar + sxy / sxx * (n as f64 + 1.0 - xbar))
}

/// Outcome of tuning Holt-Winters on a history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HwFit {
    pub alpha: f64,
    pub beta: f64,
    pub mse: f64,
    pub prediction: f64,
}

/// Runs the Holt-Winters recursion for fixed `(alpha, beta)` and returns
/// `(in-sample MSE, next-step prediction)`.
pub fn hw_replay(history: &[f64], alpha: f64, beta: f64) -> (f64, f64) {
    let n = history.len();
    let mut level = history[1];
    let mut trend = history[1] - history[0];
    let mut sse = 0.0;
    for &x in &history[2..] {
        let forecast = level + trend;
        sse += (x - forecast) * (x - forecast);
        let next_level = alpha * x + (1.0 - alpha) * forecast;
        trend = beta * (next_level - level) + (1.0 - beta) * trend;
        level = next_level;
    }
    (sse / (n - 2) as f64, level + trend)
}

/// Grid value `k / HW_GRID_STEPS`.
pub fn hw_grid_value(k: u32) -> f64 {
    k as f64 / HW_GRID_STEPS as f64
}

/// Tunes `(alpha, beta)` over the fixed grid by in-sample MSE. Ties keep the
/// smallest alpha, then the smallest beta.
pub fn hw_tune(history: &[f64]) -> Option<HwFit> {
    if history.len() < 3 {
        return None;
    }
    let mut best: Option<HwFit> = None;
    for a in 0..=HW_GRID_STEPS {
        for b in 0..=HW_GRID_STEPS {
            let (alpha, beta) = (hw_grid_value(a), hw_grid_value(b));
            let (mse, prediction) = hw_replay(history, alpha, beta);
            if best.is_none_or(|f| mse < f.mse) {
                best = Some(HwFit { alpha, beta, mse, prediction });
            }
        }
    }
    best
}

pub fn hw_predict(history: &[f64]) -> Option<f64> {
    hw_tune(history).map(|f| f.prediction)
}

/// A throughput prediction for `[t, t + horizon]` made at integer second `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub t: i64,
    pub horizon: u32,
    /// `None` when any required past window throughput is undefined.
    pub rho_hat: Option<f64>,
}

impl PredictionRecord {
    pub fn is_available(&self) -> bool {
        self.rho_hat.is_some()
    }
}

/// Computes one record per horizon `T = 1..=t_max` at time `t`. Each uses
/// the `n` back-to-back windows `[t - iT, t - (i-1)T]`, `i = n..1`, as
/// history, read through `meter(t1, t2)`.
pub fn predict_all_scales<F>(meter: F, t: i64, spec: &PredictorSpec, t_max: u32) -> Vec<PredictionRecord>
where
    F: Fn(f64, f64) -> Option<f64>,
{
    let n = spec.history_len();
    let mut history = Vec::with_capacity(n);
    (1..=t_max)
        .map(|horizon| {
            history.clear();
            let tt = horizon as i64;
            for i in (1..=n as i64).rev() {
                let t1 = t - i * tt;
                let t2 = t - (i - 1) * tt;
                match meter(t1 as f64, t2 as f64) {
                    Some(v) => history.push(v),
                    None => break,
                }
            }
            let rho_hat = if history.len() == n { spec.predict(&history) } else { None };
            PredictionRecord { t, horizon, rho_hat }
        })
        .collect()
}
