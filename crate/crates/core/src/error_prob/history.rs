use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Default clamp for throughput values inside relative errors: 10 kbps.
pub const DEFAULT_RHO_MIN: f64 = 10_000.0;

/// Default number of retained samples a horizon needs before its ECDF is
/// used.
pub const DEFAULT_MIN_SAMPLES: usize = 3;

/// One signed relative prediction error for the window `[t - horizon, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedRelError {
    pub t: i64,
    pub horizon: u32,
    pub value: f64,
}

/// Per-horizon store of signed relative errors with an optional age window.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorHistory {
    // Index `T - 1`; entries sorted by time.
    per_horizon: Vec<Vec<(i64, f64)>>,
    age_window_s: Option<f64>,
    min_samples: usize,
}

impl ErrorHistory {
    pub fn new(t_max: u32) -> Self {
        Self {
            per_horizon: (0..t_max).map(|_| Vec::new()).collect(),
            age_window_s: None,
            min_samples: DEFAULT_MIN_SAMPLES,
        }
    }

    /// Entries older than `age_window_s` relative to the query time are
    /// ignored. `None` keeps everything.
    pub fn with_age_window(mut self, age_window_s: Option<f64>) -> Self {
        self.age_window_s = age_window_s;
        self
    }

    pub fn with_min_samples(mut self, min_samples: usize) -> Self {
        self.min_samples = min_samples.max(1);
        self
    }

    pub fn min_samples(&self) -> usize {
        self.min_samples
    }

    /// Appends an error sample. Values must be greater than -1, which
    /// clamped errors always are.
    pub fn record(&mut self, t: i64, horizon: u32, value: f64) {
        debug_assert!(value > -1.0, "signed relative error {value} <= -1");
        debug_assert!(horizon >= 1);
        let idx = horizon.saturating_sub(1) as usize;
        if idx >= self.per_horizon.len() {
            self.per_horizon.resize_with(idx + 1, Vec::new);
        }
        let list = &mut self.per_horizon[idx];
        match list.last() {
            Some(&(last, _)) if last > t => {
                let at = list.partition_point(|&(u, _)| u <= t);
                list.insert(at, (t, value));
            }
            _ => list.push((t, value)),
        }
    }

    pub fn record_error(&mut self, e: SignedRelError) {
        self.record(e.t, e.horizon, e.value);
    }

    /// Entries for `horizon` visible at time `now`: those with
    /// `now - t <= age_window_s`, in time order.
    pub fn retained(&self, horizon: u32, now: f64) -> &[(i64, f64)] {
        let Some(list) = horizon
            .checked_sub(1)
            .and_then(|i| self.per_horizon.get(i as usize))
        else {
            return &[];
        };
        match self.age_window_s {
            None => list,
            Some(w) => {
                let from = list.partition_point(|&(t, _)| now - t as f64 > w);
                &list[from..]
            }
        }
    }

    /// Relative frequency of underestimations (negative errors).
    pub fn under_fraction(&self, horizon: u32, now: f64) -> Option<f64> {
        let r = self.retained(horizon, now);
        (!r.is_empty()).then(|| r.iter().filter(|&&(_, v)| v < 0.0).count() as f64 / r.len() as f64)
    }

    /// ECDF of the retained signed errors, or `None` with fewer than
    /// `min_samples` entries.
    pub fn ecdf(&self, horizon: u32, now: f64) -> Option<SignedEcdf> {
        let r = self.retained(horizon, now);
        if r.len() < self.min_samples {
            return None;
        }
        Some(SignedEcdf::new(r.iter().map(|&(_, v)| v).collect()))
    }

    /// `P[error <= x]` over the retained entries for `horizon`.
    pub fn signed_ecdf(&self, horizon: u32, x: f64, now: f64) -> Option<f64> {
        let r = self.retained(horizon, now);
        if r.len() < self.min_samples {
            return None;
        }
        Some(r.iter().filter(|&&(_, v)| v <= x).count() as f64 / r.len() as f64)
    }

    /// Fraction of consecutive retained pairs whose sign classes differ
    /// (zero counts as an overestimation).
    pub fn alternation_probability(&self, horizon: u32, now: f64) -> Option<f64> {
        let r = self.retained(horizon, now);
        if r.len() < 2 {
            return None;
        }
        let flips = r.windows(2).filter(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0)).count();
        Some(flips as f64 / (r.len() - 1) as f64)
    }

    /// All retained values for `horizon`.
    pub fn values(&self, horizon: u32, now: f64) -> Vec<f64> {
        self.retained(horizon, now).iter().map(|&(_, v)| v).collect()
    }
}

/// Right-continuous empirical CDF over signed errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedEcdf {
    sorted: Vec<f64>,
}

impl SignedEcdf {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `P[X <= x]`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn under_fraction(&self) -> f64 {
        self.eval_strict(0.0)
    }

    /// `P[X < x]`.
    pub fn eval_strict(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }
}
