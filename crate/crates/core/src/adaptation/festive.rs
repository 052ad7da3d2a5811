//! FESTIVE-style baseline, reconstructed.
//!
//! Only the parameters (alpha, p, k), one-step switching and the absence of
//! the randomizer are fixed by the evaluation setup; the estimator and score
//! below are a frozen reconstruction:
//!
//! * bandwidth estimate: harmonic mean of the last `bw_window` segment
//!   throughputs;
//! * target: highest representation with rate `<= p * estimate`;
//! * candidate: one step up (only if at least `k` segments since the last
//!   upward switch), one step down, or stay;
//! * score: `2^(switches in the last 10 segments, +1 if switching)`
//!   `+ alpha * |rate / (p * estimate) - 1|`, lowest wins, ties stay.
//!
//! With a roughly doubling ladder that efficiency term barely changes
//! between neighbouring low rungs, so the default score rarely leaves
//! representation 0 once throughput is well above the lowest rate.
//! [`EfficiencyReference::Candidate`] switches the denominator to
//! `min(p * estimate, candidate rate)` as in the original FESTIVE design.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// Label attached to FESTIVE results.
pub const FESTIVE_NOTE: &str = "reconstructed baseline";

/// Segments considered when counting recent switches.
pub const FESTIVE_SWITCH_WINDOW: usize = 10;

fn default_bw_window() -> usize {
    20
}

/// Denominator of the efficiency term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EfficiencyReference {
    /// `p * estimate`.
    #[default]
    Budget,
    /// `min(p * estimate, candidate rate)`.
    Candidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FestiveConfig {
    pub alpha: f64,
    /// Safety margin applied to the bandwidth estimate.
    pub p: f64,
    /// Minimum number of segments between upward switches.
    pub k: usize,
    #[serde(default = "default_bw_window")]
    pub bw_window: usize,
    #[serde(default)]
    pub efficiency: EfficiencyReference,
}

impl Default for FestiveConfig {
    fn default() -> Self {
        Self { alpha: 12.0, p: 0.85, k: 4, bw_window: default_bw_window(), efficiency: EfficiencyReference::Budget }
    }
}

impl FestiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) || self.k == 0 || self.bw_window == 0 || !(self.alpha >= 0.0) {
            return Err(Error::Config(alloc::format!(
                "invalid festive parameters alpha={} p={} k={} bw_window={}",
                self.alpha, self.p, self.k, self.bw_window
            )));
        }
        Ok(())
    }
}

/// Per-session FESTIVE history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FestiveState {
    throughputs: VecDeque<f64>,
    selections: Vec<usize>,
    since_up: Option<usize>,
    bw_window: usize,
}

impl FestiveState {
    pub fn new(cfg: &FestiveConfig) -> Self {
        Self { bw_window: cfg.bw_window.max(1), ..Self::default() }
    }

    /// Records the throughput (bits/s) observed for a finished download.
    pub fn record_throughput(&mut self, bps: f64) {
        if self.throughputs.len() == self.bw_window.max(1) {
            self.throughputs.pop_front();
        }
        self.throughputs.push_back(bps);
    }

    /// Records the representation requested for the next segment.
    pub fn record_selection(&mut self, j: usize) {
        match self.selections.last() {
            Some(&prev) if j > prev => self.since_up = Some(1),
            _ => self.since_up = self.since_up.map(|c| c + 1),
        }
        self.selections.push(j);
    }

    pub fn current(&self) -> usize {
        self.selections.last().copied().unwrap_or(0)
    }

    /// Harmonic mean of the retained throughputs; zero if any is zero.
    pub fn estimate(&self) -> Option<f64> {
        if self.throughputs.is_empty() {
            return None;
        }
        if self.throughputs.iter().any(|&x| !(x > 0.0)) {
            return Some(0.0);
        }
        Some(self.throughputs.len() as f64 / self.throughputs.iter().map(|x| 1.0 / x).sum::<f64>())
    }

    pub fn recent_switches(&self) -> usize {
        let from = self.selections.len().saturating_sub(FESTIVE_SWITCH_WINDOW);
        self.selections[from..].windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Segments requested since (and including) the last upward switch.
    pub fn segments_since_up(&self) -> Option<usize> {
        self.since_up
    }
}

pub fn festive_select(state: &FestiveState, rates: &[f64], cfg: &FestiveConfig) -> usize {
    let Some(estimate) = state.estimate() else {
        return 0;
    };
    if rates.is_empty() {
        return 0;
    }
    let cur = state.current().min(rates.len() - 1);
    let budget = cfg.p * estimate;
    let target = rates.iter().rposition(|&r| r <= budget).unwrap_or(0);
    let gate_open = state.since_up.is_none_or(|c| c >= cfg.k);
    let candidate = if target > cur && gate_open {
        cur + 1
    } else if target < cur {
        cur - 1
    } else {
        cur
    };
    if candidate == cur {
        return cur;
    }
    if !(budget > 0.0) {
        return candidate;
    }
    let reference = match cfg.efficiency {
        EfficiencyReference::Budget => budget,
        EfficiencyReference::Candidate => budget.min(rates[candidate]),
    };
    let n = state.recent_switches() as i32;
    let score = |j: usize| {
        let stability = libm::pow(2.0, (n + i32::from(j != cur)) as f64);
        stability + cfg.alpha * math::abs(rates[j] / reference - 1.0)
    };
    if score(candidate) < score(cur) {
        candidate
    } else {
        cur
    }
}
