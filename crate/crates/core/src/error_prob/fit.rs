//! Truncated parametric fits of relative error magnitudes.
//!
//! Under- and overestimation magnitudes are fitted separately. The model CDF
//! is renormalized to the truncation window `[a, b]` and its parameters
//! minimize the squared distance to the window's ECDF at the sample points.
//! Goodness of fit is summarized by the Kolmogorov-Smirnov statistic.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::simplex;
use crate::math;
use crate::{Error, Result};

/// Minimum number of samples inside the truncation window.
pub const MIN_FIT_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exponential,
    Normal,
    Logistic,
    Lomax,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Exponential, Family::Normal, Family::Logistic, Family::Lomax];

    /// Untruncated CDF.
    ///
    /// Parameters: exponential `[rate]`, normal `[mean, sd]`, logistic
    /// `[location, scale]`, lomax `[alpha, lambda]`.
    pub fn cdf(self, params: &[f64], x: f64) -> f64 {
        match self {
            Family::Exponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - math::exp(-params[0] * x)
                }
            }
            Family::Normal => 0.5 * (1.0 + math::erf((x - params[0]) / (params[1] * SQRT_2))),
            Family::Logistic => 1.0 / (1.0 + math::exp(-(x - params[0]) / params[1])),
            Family::Lomax => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - math::exp(-params[0] * math::ln_1p(x / params[1]))
                }
            }
        }
    }

    /// CDF renormalized to `[a, b]`; `None` when the window has no mass.
    pub fn truncated_cdf(self, params: &[f64], window: (f64, f64), x: f64) -> Option<f64> {
        let (a, b) = window;
        let fa = self.cdf(params, a);
        let mass = self.cdf(params, b) - fa;
        if !(mass > 1e-300) {
            return None;
        }
        let x = x.clamp(a, b);
        Some(((self.cdf(params, x) - fa) / mass).clamp(0.0, 1.0))
    }

    fn params_are_valid(self, params: &[f64]) -> bool {
        params.iter().all(|p| p.is_finite())
            && match self {
                Family::Exponential => params[0] > 0.0,
                Family::Normal | Family::Logistic => params[1] > 0.0,
                Family::Lomax => params[0] > 0.0 && params[1] > 0.0,
            }
    }

    // Unconstrained coordinates: positive parameters live on a log scale.
    fn to_params(self, z: &[f64]) -> Vec<f64> {
        match self {
            Family::Exponential => vec![math::exp(z[0])],
            Family::Normal | Family::Logistic => vec![z[0], math::exp(z[1])],
            Family::Lomax => vec![math::exp(z[0]), math::exp(z[1])],
        }
    }

    fn to_coords(self, p: &[f64]) -> Vec<f64> {
        match self {
            Family::Exponential => vec![math::ln(p[0])],
            Family::Normal | Family::Logistic => vec![p[0], math::ln(p[1])],
            Family::Lomax => vec![math::ln(p[0]), math::ln(p[1])],
        }
    }

    fn initial_guesses(self, xs: &[f64]) -> Vec<Vec<f64>> {
        let m = math::mean(xs);
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
        let sd = math::sqrt(var);
        let median = xs[xs.len() / 2];
        match self {
            Family::Exponential => vec![vec![1.0 / m], vec![core::f64::consts::LN_2 / median]],
            Family::Normal => vec![vec![m, sd], vec![median, sd]],
            Family::Logistic => vec![vec![m, sd * math::sqrt(3.0) / PI], vec![median, sd * math::sqrt(3.0) / PI]],
            Family::Lomax => {
                let mut guesses = Vec::new();
                // Moments: var / mean^2 = alpha / (alpha - 2) for alpha > 2.
                let r = var / (m * m);
                if r > 1.0 {
                    let alpha = 2.0 * r / (r - 1.0);
                    guesses.push(vec![alpha, m * (alpha - 1.0)]);
                }
                // Median matching across a spread of shapes.
                for alpha in [0.5, 1.0, 2.0, 4.0, 8.0] {
                    let lambda = median / (math::powf(2.0, 1.0 / alpha) - 1.0);
                    guesses.push(vec![alpha, lambda]);
                }
                guesses
            }
        }
    }
}

/// Which side of the signed error distribution is being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Under,
    Over,
}

impl Side {
    /// Range of error magnitudes the fit is evaluated on.
    pub fn window(self) -> (f64, f64) {
        match self {
            Side::Under => (0.1, 1.0),
            Side::Over => (0.1, 5.0),
        }
    }

    /// Range the model distributions are truncated to: underestimations
    /// never exceed 1, overestimations are unbounded.
    pub fn support(self) -> (f64, f64) {
        match self {
            Side::Under => (0.0, 1.0),
            Side::Over => (0.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedDistribution {
    pub family: Family,
    pub side: Side,
    pub params: Vec<f64>,
    /// Root mean squared distance between the truncated model CDF and the
    /// truncated ECDF over the in-window samples.
    pub l2_distance: f64,
    pub ks_statistic: f64,
    /// Asymptotic Kolmogorov p-value (optimistic, parameters are fitted).
    pub ks_p_value: f64,
    pub n_in_window: usize,
    pub window: (f64, f64),
}

impl FittedDistribution {
    /// Model CDF truncated to the side's support.
    pub fn truncated_cdf(&self, x: f64) -> f64 {
        self.family.truncated_cdf(&self.params, self.side.support(), x).unwrap_or(f64::NAN)
    }
}

/// Splits signed errors into under- and overestimation magnitudes. Zero is
/// an overestimation.
pub fn split_magnitudes(signed: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut under = Vec::new();
    let mut over = Vec::new();
    for &v in signed {
        if v < 0.0 {
            under.push(-v);
        } else {
            over.push(v);
        }
    }
    (under, over)
}

struct WindowSample {
    /// Sorted samples inside the fit window.
    xs: Vec<f64>,
    /// ECDF over all samples inside the support, at each of `xs`.
    ecdf: Vec<f64>,
}

impl WindowSample {
    fn new(magnitudes: &[f64], side: Side) -> Self {
        let (lo, hi) = side.support();
        let mut all: Vec<f64> = magnitudes.iter().copied().filter(|&x| x >= lo && x <= hi).collect();
        all.sort_by(f64::total_cmp);
        let (a, b) = side.window();
        let from = all.partition_point(|&x| x < a);
        let to = all.partition_point(|&x| x <= b);
        let n = all.len() as f64;
        let ecdf = all[from..to]
            .iter()
            .map(|&x| all.partition_point(|&v| v <= x) as f64 / n)
            .collect();
        Self { xs: all[from..to].to_vec(), ecdf }
    }

    fn sse(&self, family: Family, params: &[f64], support: (f64, f64)) -> f64 {
        if !family.params_are_valid(params) {
            return f64::INFINITY;
        }
        let (a, b) = support;
        let fa = family.cdf(params, a);
        let mass = family.cdf(params, b) - fa;
        if !(mass > 1e-300) {
            return f64::INFINITY;
        }
        let mut sse = 0.0;
        for (&x, &e) in self.xs.iter().zip(&self.ecdf) {
            let f = ((family.cdf(params, x.clamp(a, b)) - fa) / mass).clamp(0.0, 1.0);
            sse += (f - e) * (f - e);
        }
        sse
    }
}

/// Squared distance between the support-truncated model CDF and the ECDF
/// of `magnitudes`, summed over the samples inside the fit window. Exposed
/// for grid checks.
pub fn truncated_l2_objective(magnitudes: &[f64], side: Side, family: Family, params: &[f64]) -> f64 {
    WindowSample::new(magnitudes, side).sse(family, params, side.support())
}

/// Kolmogorov-Smirnov statistic of sorted samples against a CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut k = 0;
    while k < sorted.len() {
        let x = sorted[k];
        let below = k as f64 / n;
        let mut j = k;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let at = j as f64 / n;
        let f = cdf(x);
        d = d.max(math::abs(at - f)).max(math::abs(f - below));
        k = j;
    }
    d
}

/// Asymptotic Kolmogorov distribution tail with the Stephens correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = math::sqrt(n as f64);
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = math::exp(-2.0 * j * j * lambda * lambda);
        sum += if (j as u32) % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Fits `family` to the magnitudes of one error side.
pub fn fit_truncated(magnitudes: &[f64], side: Side, family: Family) -> Result<FittedDistribution> {
    let window = side.window();
    let support = side.support();
    let sample = WindowSample::new(magnitudes, side);
    let n = sample.xs.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::FitUnavailable { in_window: n, required: MIN_FIT_SAMPLES });
    }
    if sample.xs[0] == sample.xs[n - 1] {
        return Err(Error::DegenerateSample);
    }

    let objective = |z: &[f64]| sample.sse(family, &family.to_params(z), support);
    let mut best: Option<simplex::Minimum> = None;
    for guess in family.initial_guesses(&sample.xs) {
        if !family.params_are_valid(&guess) {
            continue;
        }
        let m = simplex::minimize(objective, &family.to_coords(&guess), 0.3, 4000);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let mut best = best.ok_or(Error::DegenerateSample)?;
    // Restart from the optimum to escape a collapsed simplex.
    let again = simplex::minimize(objective, &best.x, 0.05, 4000);
    if again.value < best.value {
        best = again;
    }
    if !best.value.is_finite() {
        return Err(Error::DegenerateSample);
    }
    let params = family.to_params(&best.x);
    // KS on the in-window samples against the model conditioned on the window.
    let cdf = |x: f64| family.truncated_cdf(&params, window, x).unwrap_or(0.0);
    let ks = ks_statistic(&sample.xs, cdf);
    Ok(FittedDistribution {
        family,
        side,
        l2_distance: math::sqrt(best.value / n as f64),
        ks_statistic: ks,
        ks_p_value: ks_p_value(ks, n),
        params,
        n_in_window: n,
        window,
    })
}
