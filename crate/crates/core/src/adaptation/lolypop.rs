use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error_prob::{DEFAULT_MIN_SAMPLES, DEFAULT_RHO_MIN, NO_ESTIMATE};
use crate::predict::DEFAULT_T_MAX;
use crate::{Error, Result};

fn default_t_max() -> u32 {
    DEFAULT_T_MAX
}
fn default_rho_min() -> f64 {
    DEFAULT_RHO_MIN
}
fn default_min_samples() -> usize {
    DEFAULT_MIN_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LolypopConfig {
    /// Bound on the per-segment probability of missing the deadline.
    pub sigma_star: f64,
    /// Upper bound on the fraction of quality transitions.
    pub omega_star: f64,
    #[serde(default = "default_t_max")]
    pub t_max: u32,
    #[serde(default = "default_rho_min")]
    pub rho_min: f64,
    #[serde(default = "default_min_samples")]
    pub min_samples: usize,
    #[serde(default)]
    pub age_window_s: Option<f64>,
}

impl LolypopConfig {
    pub fn new(sigma_star: f64, omega_star: f64) -> Self {
        Self {
            sigma_star,
            omega_star,
            t_max: DEFAULT_T_MAX,
            rho_min: DEFAULT_RHO_MIN,
            min_samples: DEFAULT_MIN_SAMPLES,
            age_window_s: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sigma_star) || !(0.0..=1.0).contains(&self.omega_star) {
            return Err(Error::Config(format!(
                "sigma_star and omega_star must lie in [0, 1], got {} and {}",
                self.sigma_star, self.omega_star
            )));
        }
        if self.t_max == 0 || !(self.rho_min > 0.0) || self.min_samples == 0 {
            return Err(Error::Config("t_max, rho_min and min_samples must be positive".into()));
        }
        if matches!(self.age_window_s, Some(w) if !(w >= 0.0)) {
            return Err(Error::Config("age_window_s must be non-negative".into()));
        }
        Ok(())
    }
}

/// Inputs of one LOLYPOP decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionContext {
    pub t_r: f64,
    pub t_p: f64,
    /// Fraction of quality transitions so far.
    pub omega_t: f64,
    /// Representation of the last successfully downloaded segment.
    pub j_prev: Option<usize>,
    /// Success probability per representation, or -1 when unknown.
    pub p_success: Vec<f64>,
}

/// Highest representation whose miss probability is within `sigma_star`;
/// upward moves are frozen while `omega_t > omega_star`. Downward moves are
/// never blocked.
pub fn lolypop_select(ctx: &DecisionContext, cfg: &LolypopConfig) -> Result<usize> {
    if ctx.p_success.is_empty() {
        return Err(Error::Contract("empty representation set".into()));
    }
    if !(ctx.t_r < ctx.t_p && ctx.t_p <= ctx.t_r + cfg.t_max as f64) {
        return Err(Error::Contract(format!(
            "decision window [{}, {}] outside the prediction horizon {}",
            ctx.t_r, ctx.t_p, cfg.t_max
        )));
    }
    if ctx.p_success.iter().all(|&p| p == NO_ESTIMATE) {
        return Ok(0);
    }
    let best = ctx
        .p_success
        .iter()
        .rposition(|&p| p != NO_ESTIMATE && 1.0 - p <= cfg.sigma_star)
        .unwrap_or(0);
    if ctx.omega_t <= cfg.omega_star {
        Ok(best)
    } else {
        Ok(best.min(ctx.j_prev.unwrap_or(0)))
    }
}
