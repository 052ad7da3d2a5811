//! Representation selection: LOLYPOP, the tune-in rule and two baselines.

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

mod festive;
mod lolypop;

pub use festive::{festive_select, EfficiencyReference, FestiveConfig, FestiveState, FESTIVE_NOTE, FESTIVE_SWITCH_WINDOW};
pub use lolypop::{lolypop_select, DecisionContext, LolypopConfig};

/// Adaptation algorithm with its parameters, as written in experiment
/// configs: `{"algorithm": "lolypop", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", content = "params", rename_all = "lowercase")]
pub enum Algorithm {
    Lolypop(LolypopConfig),
    Festive(FestiveConfig),
    Lowest,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Lolypop(_) => "lolypop",
            Algorithm::Festive(_) => "festive",
            Algorithm::Lowest => "lowest",
        }
    }

    /// Free-form qualifier shown next to the name in outputs.
    pub fn note(&self) -> &'static str {
        match self {
            Algorithm::Festive(_) => FESTIVE_NOTE,
            _ => "",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Algorithm::Lolypop(c) => c.validate(),
            Algorithm::Festive(c) => c.validate(),
            Algorithm::Lowest => Ok(()),
        }
    }
}

/// First segment to request when tuning in (or resuming after a skip) at
/// time `t`: the oldest segment whose playback deadline is at least `tau`
/// seconds away.
///
/// When such a segment is already available this is the oldest available
/// one. Otherwise it is the next segment to be published and the client
/// waits for it; its deadline is still `tau` or more past its availability
/// because `delta_p >= 2 tau`.
pub fn tune_in(t: f64, tau: f64, delta_p: f64) -> Result<u64> {
    if !(tau > 0.0) {
        return Err(Error::Config(alloc::format!("segment duration must be positive, got {tau}")));
    }
    if delta_p < 2.0 * tau {
        return Err(Error::Config(alloc::format!(
            "live latency bound {delta_p} s is below twice the segment duration {tau} s; no segment can be tuned in"
        )));
    }
    let lower = (t + tau - delta_p) / tau;
    Ok(math::ceil(lower - 1e-9).max(0.0) as u64)
}

/// Always the lowest representation.
pub fn lowest_select(n_representations: usize) -> Result<usize> {
    if n_representations == 0 {
        return Err(Error::InvalidArgument("empty representation set".into()));
    }
    Ok(0)
}
