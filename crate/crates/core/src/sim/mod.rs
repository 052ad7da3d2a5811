//! Virtual-time streaming session engine.
//!
//! Virtual time equals trace time. A session tunes in at `start_time_s`,
//! lasts `session_length_s` and accounts for every segment from the tune-in
//! segment whose playback deadline falls inside the session.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::adaptation::{
    festive_select, lolypop_select, lowest_select, tune_in, Algorithm, DecisionContext, FestiveState,
    LolypopConfig,
};
use crate::error_prob::{
    select_prediction_interval, signed_rel_error, success_probabilities, ErrorHistory, SignedRelError,
    NO_ESTIMATE,
};
use crate::predict::{predict_all_scales, PredictionRecord, PredictorSpec};
use crate::trace::ThroughputTrace;
use crate::{math, Error, Result};

mod catalog;
mod meter;

pub use catalog::{
    build_synthetic_catalog, MediaCatalog, Timeline, DEFAULT_DELTA_P_S, DEFAULT_LADDER_BPS, DEFAULT_TAU_S,
    RATE_TOLERANCE,
};
pub use meter::{measure_throughput, simulate_download, DownloadOutcome, DownloadRecord, ThroughputMeter};

pub const DEFAULT_SESSION_LENGTH_S: f64 = 300.0;

fn default_session_length() -> f64 {
    DEFAULT_SESSION_LENGTH_S
}

fn default_predictor() -> PredictorSpec {
    PredictorSpec::sma1()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(default = "default_session_length")]
    pub session_length_s: f64,
    #[serde(flatten)]
    pub algorithm: Algorithm,
    #[serde(default = "default_predictor")]
    pub predictor: PredictorSpec,
    /// Tune-in time into the trace; the segment duration when absent.
    #[serde(default)]
    pub start_time_s: Option<f64>,
}

impl SimConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            session_length_s: DEFAULT_SESSION_LENGTH_S,
            algorithm,
            predictor: default_predictor(),
            start_time_s: None,
        }
    }
}

/// What happened to one segment of the session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEvent {
    pub segment: u64,
    pub deadline: f64,
    /// Requested representation; `None` if the segment was never requested.
    pub repr: Option<usize>,
    pub t_r: Option<f64>,
    pub t_c: Option<f64>,
    pub aborted_at: Option<f64>,
    pub skipped: bool,
    pub size_bits: Option<f64>,
    pub wasted_bits: f64,
    /// Fraction of quality transitions at request time.
    pub omega_at_request: Option<f64>,
    /// Representation of the last successful segment at request time.
    pub prev_success_repr: Option<usize>,
    /// Buffer level at this segment's deadline, 0 for skipped segments.
    pub buffer_at_deadline: f64,
}

impl SegmentEvent {
    fn unrequested(segment: u64, deadline: f64) -> Self {
        Self {
            segment,
            deadline,
            repr: None,
            t_r: None,
            t_c: None,
            aborted_at: None,
            skipped: true,
            size_bits: None,
            wasted_bits: 0.0,
            omega_at_request: None,
            prev_success_repr: None,
            buffer_at_deadline: 0.0,
        }
    }

    pub fn played(&self) -> bool {
        !self.skipped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BufferSample {
    pub t: f64,
    pub level_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub trace_id: String,
    pub algorithm: String,
    pub algorithm_note: String,
    pub tune_in_time_s: f64,
    pub session_end_s: f64,
    pub first_segment: u64,
    pub tau: f64,
    pub delta_p: f64,
    /// Fraction of skipped segments.
    pub sigma: f64,
    /// Fraction of successfully played segments in a different
    /// representation than their predecessor.
    pub omega: f64,
    pub n_segments: usize,
    pub n_played: usize,
    pub n_skipped: usize,
    pub n_transitions: usize,
    pub mean_repr: Option<f64>,
    pub mean_mmbr_bps: Option<f64>,
    /// Delay between tune-in and the first played segment's deadline.
    pub startup_delay_s: Option<f64>,
    pub first_segment_played: bool,
    pub wasted_bits: f64,
    pub events: Vec<SegmentEvent>,
    pub buffer_series: Vec<BufferSample>,
    pub errors: Vec<SignedRelError>,
}

/// Buffer level at `t`: playback time left of the furthest completed
/// segment. `None` before the first completion.
pub fn buffer_level(events: &[SegmentEvent], tau: f64, t: f64) -> Option<f64> {
    events
        .iter()
        .filter(|e| e.played() && e.t_c.is_some_and(|c| c <= t))
        .map(|e| e.deadline)
        .reduce(f64::max)
        .map(|d| d + tau - t)
}

struct LolypopRun<'a> {
    cfg: &'a LolypopConfig,
    spec: &'a PredictorSpec,
    history: ErrorHistory,
    predictions: VecDeque<PredictionRecord>,
    errors: Vec<SignedRelError>,
}

enum Selector<'a> {
    Lolypop(LolypopRun<'a>),
    Festive(&'a crate::adaptation::FestiveConfig, FestiveState),
    Lowest,
}

struct Session<'a> {
    trace: &'a ThroughputTrace,
    timeline: Timeline,
    meter: ThroughputMeter,
    selector: Selector<'a>,
    next_tick: i64,
    t_end: f64,
    horizon_keep: f64,
    latest_played_deadline: Option<f64>,
    buffer_series: Vec<BufferSample>,
}

impl Session<'_> {
    /// Processes every integer second up to and including `until`.
    fn advance_ticks(&mut self, until: f64, partial: Option<&DownloadRecord>) {
        while (self.next_tick as f64) <= until {
            let k = self.next_tick;
            self.tick(k, partial);
            self.next_tick += 1;
        }
    }

    /// Processes the integer seconds strictly before `until`.
    fn advance_ticks_before(&mut self, until: f64, partial: &DownloadRecord) {
        while (self.next_tick as f64) < until {
            let k = self.next_tick;
            let p = DownloadRecord { end: k as f64, bits: self.trace.integrate(partial.start, k as f64), ..*partial };
            self.tick(k, Some(&p));
            self.next_tick += 1;
        }
    }

    fn tick(&mut self, k: i64, partial: Option<&DownloadRecord>) {
        let t = k as f64;
        if t > self.t_end {
            return;
        }
        if let Some(d) = self.latest_played_deadline {
            self.buffer_series.push(BufferSample { t, level_s: (d + self.timeline.tau - t).max(0.0) });
        }
        let Selector::Lolypop(run) = &mut self.selector else {
            return;
        };
        let meter = &self.meter;
        let t_max = run.cfg.t_max;
        for horizon in 1..=t_max {
            let made = k - horizon as i64;
            let Some(rho_hat) = run
                .predictions
                .iter()
                .find(|p| p.t == made && p.horizon == horizon)
                .and_then(|p| p.rho_hat)
            else {
                continue;
            };
            if let Some(rho) = meter.measure_with(partial, made as f64, t) {
                let value = signed_rel_error(rho_hat, rho, run.cfg.rho_min);
                run.history.record(k, horizon, value);
                run.errors.push(SignedRelError { t: k, horizon, value });
            }
        }
        let fresh = predict_all_scales(|a, b| meter.measure_with(partial, a, b), k, run.spec, t_max);
        run.predictions.extend(fresh);
        while run.predictions.front().is_some_and(|p| p.t < k - t_max as i64) {
            run.predictions.pop_front();
        }
        let keep_from = t - self.horizon_keep;
        self.meter.forget_before(keep_from);
    }
}

/// Runs one streaming session over `trace`.
pub fn run_session(
    trace: &ThroughputTrace,
    catalog: &MediaCatalog,
    timeline: &Timeline,
    config: &SimConfig,
) -> Result<SessionReport> {
    timeline.validate()?;
    config.algorithm.validate()?;
    if (catalog.tau() - timeline.tau).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "catalog segment duration {} differs from timeline {}",
            catalog.tau(),
            timeline.tau
        )));
    }
    let tau = timeline.tau;
    let t_tune = config.start_time_s.unwrap_or(tau);
    if !(t_tune >= 0.0) || !(config.session_length_s > 0.0) {
        return Err(Error::Config("tune-in time and session length must be non-negative and positive".into()));
    }
    let t_end = t_tune + config.session_length_s;
    if t_end > trace.duration() as f64 {
        return Err(Error::Config(format!(
            "session [{t_tune}, {t_end}] does not fit in trace '{}' of {} s",
            trace.id(),
            trace.duration()
        )));
    }

    let selector = match &config.algorithm {
        Algorithm::Lolypop(cfg) => {
            if timeline.transport_budget() > cfg.t_max as f64 {
                return Err(Error::Config(format!(
                    "transport budget {} s exceeds the longest prediction horizon {} s",
                    timeline.transport_budget(),
                    cfg.t_max
                )));
            }
            Selector::Lolypop(LolypopRun {
                cfg,
                spec: &config.predictor,
                history: ErrorHistory::new(cfg.t_max)
                    .with_age_window(cfg.age_window_s)
                    .with_min_samples(cfg.min_samples),
                predictions: VecDeque::new(),
                errors: Vec::new(),
            })
        }
        Algorithm::Festive(cfg) => Selector::Festive(cfg, FestiveState::new(cfg)),
        Algorithm::Lowest => Selector::Lowest,
    };
    let horizon_keep = match &config.algorithm {
        Algorithm::Lolypop(cfg) => ((config.predictor.history_len() + 1) * cfg.t_max as usize) as f64 + 1.0,
        _ => 1.0,
    };

    let mut s = Session {
        trace,
        timeline: *timeline,
        meter: ThroughputMeter::new(),
        selector,
        next_tick: math::ceil(t_tune) as i64,
        t_end,
        horizon_keep,
        latest_played_deadline: None,
        buffer_series: Vec::new(),
    };

    let first_segment = tune_in(t_tune, tau, timeline.delta_p)?;
    let mut events: Vec<SegmentEvent> = Vec::new();
    let mut now = t_tune;
    let mut i = first_segment;
    let mut restart = true;
    let mut prev_success: Option<usize> = None;
    let mut n_success = 0usize;
    let mut n_transitions = 0usize;
    let mut wasted = 0.0;

    while timeline.deadline(i) <= t_end {
        while (events.len() as u64) < i - first_segment {
            let seg = first_segment + events.len() as u64;
            events.push(SegmentEvent::unrequested(seg, timeline.deadline(seg)));
        }
        let t_p = timeline.deadline(i);
        let t_r = now.max(timeline.availability(i));
        s.advance_ticks(t_r, None);
        if t_p <= t_r {
            events.push(SegmentEvent::unrequested(i, t_p));
            now = t_r;
            i = tune_in(now, tau, timeline.delta_p)?.max(i + 1);
            restart = true;
            continue;
        }

        let omega_t = if n_success == 0 { 0.0 } else { n_transitions as f64 / n_success as f64 };
        let sizes = catalog.segment(i);
        let j = match &mut s.selector {
            Selector::Lolypop(_) | Selector::Lowest if restart => 0,
            Selector::Lowest => lowest_select(sizes.len())?,
            Selector::Lolypop(run) => {
                let records = run.predictions.make_contiguous();
                let p_success = match select_prediction_interval(records, t_r, t_p, run.cfg.t_max) {
                    Some(rec) => success_probabilities(&run.history, rec, sizes, t_r, t_p, t_r)?,
                    None => alloc::vec![NO_ESTIMATE; sizes.len()],
                };
                let ctx = DecisionContext { t_r, t_p, omega_t, j_prev: prev_success, p_success };
                lolypop_select(&ctx, run.cfg)?
            }
            Selector::Festive(cfg, state) => {
                let j = festive_select(state, catalog.rates(), cfg);
                state.record_selection(j);
                j
            }
        };
        restart = false;

        let size = sizes[j];
        let outcome = simulate_download(trace, t_r, size, t_p)?;
        let (t_done, delivered) = match outcome {
            DownloadOutcome::Completed { t_c } => (t_c, size),
            DownloadOutcome::Aborted { delivered } => (t_p, delivered),
        };
        s.advance_ticks_before(t_done, &DownloadRecord { start: t_r, end: t_r, bits: 0.0 });
        s.meter.push(DownloadRecord { start: t_r, end: t_done, bits: delivered })?;
        if let Selector::Festive(_, state) = &mut s.selector {
            if t_done > t_r {
                state.record_throughput(delivered / (t_done - t_r));
            }
        }

        let mut ev = SegmentEvent {
            segment: i,
            deadline: t_p,
            repr: Some(j),
            t_r: Some(t_r),
            t_c: None,
            aborted_at: None,
            skipped: false,
            size_bits: Some(size),
            wasted_bits: 0.0,
            omega_at_request: Some(omega_t),
            prev_success_repr: prev_success,
            buffer_at_deadline: 0.0,
        };
        now = t_done;
        match outcome {
            DownloadOutcome::Completed { t_c } => {
                ev.t_c = Some(t_c);
                if prev_success.is_some_and(|p| p != j) {
                    n_transitions += 1;
                }
                prev_success = Some(j);
                n_success += 1;
                s.latest_played_deadline = Some(s.latest_played_deadline.map_or(t_p, |d| d.max(t_p)));
                i += 1;
            }
            DownloadOutcome::Aborted { delivered } => {
                ev.aborted_at = Some(t_p);
                ev.skipped = true;
                ev.wasted_bits = delivered;
                wasted += delivered;
                restart = true;
                i = tune_in(now, tau, timeline.delta_p)?.max(i + 1);
            }
        }
        events.push(ev);
    }
    s.advance_ticks(t_end, None);

    fill_buffer_at_deadline(&mut events, tau);
    let played: Vec<&SegmentEvent> = events.iter().filter(|e| e.played()).collect();
    let n_segments = events.len();
    let n_played = played.len();
    let mean_repr = (n_played > 0)
        .then(|| played.iter().map(|e| e.repr.unwrap_or(0) as f64).sum::<f64>() / n_played as f64);
    let mean_mmbr_bps =
        (n_played > 0).then(|| played.iter().map(|e| e.size_bits.unwrap_or(0.0) / tau).sum::<f64>() / n_played as f64);
    let startup_delay_s = played.first().map(|e| e.deadline - t_tune);
    let first_segment_played = events.first().is_some_and(|e| e.played());
    let errors = match s.selector {
        Selector::Lolypop(run) => run.errors,
        _ => Vec::new(),
    };

    Ok(SessionReport {
        trace_id: trace.id().into(),
        algorithm: config.algorithm.name().into(),
        algorithm_note: config.algorithm.note().into(),
        tune_in_time_s: t_tune,
        session_end_s: t_end,
        first_segment,
        tau,
        delta_p: timeline.delta_p,
        sigma: if n_segments == 0 { 0.0 } else { (n_segments - n_played) as f64 / n_segments as f64 },
        omega: if n_played == 0 { 0.0 } else { n_transitions as f64 / n_played as f64 },
        n_segments,
        n_played,
        n_skipped: n_segments - n_played,
        n_transitions,
        mean_repr,
        mean_mmbr_bps,
        startup_delay_s,
        first_segment_played,
        wasted_bits: wasted,
        events,
        buffer_series: s.buffer_series,
        errors,
    })
}

/// Buffer level at each segment's deadline. Completions and deadlines are
/// both increasing in segment order, so one sweep suffices.
fn fill_buffer_at_deadline(events: &mut [SegmentEvent], tau: f64) {
    let completions: Vec<(f64, f64)> = events
        .iter()
        .filter(|e| e.played())
        .map(|e| (e.t_c.unwrap_or(e.deadline), e.deadline))
        .collect();
    let mut k = 0;
    let mut furthest: Option<f64> = None;
    for e in events.iter_mut() {
        while k < completions.len() && completions[k].0 <= e.deadline {
            furthest = Some(furthest.map_or(completions[k].1, |d: f64| d.max(completions[k].1)));
            k += 1;
        }
        e.buffer_at_deadline = match (e.skipped, furthest) {
            (false, Some(d)) => (d + tau - e.deadline).max(0.0),
            _ => 0.0,
        };
    }
}
