//! Parameter sweeps over configurations and traces.
//!
//! Sessions run in parallel without shared state; rows are sorted by
//! (config id, trace id) before anything is written, so output bytes do not
//! depend on scheduling.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lolypop_core::adaptation::{Algorithm, EfficiencyReference, FestiveConfig, LolypopConfig};
use lolypop_core::analysis::MEAN_TRACE_ID;
use lolypop_core::error_prob::{DEFAULT_MIN_SAMPLES, DEFAULT_RHO_MIN};
use lolypop_core::predict::{PredictorSpec, DEFAULT_T_MAX};
use lolypop_core::sim::{run_session, MediaCatalog, SessionReport, SimConfig, Timeline, DEFAULT_SESSION_LENGTH_S};
use lolypop_core::trace::ThroughputTrace;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{self, CatalogFile};
use crate::{HarnessError, Result};

pub const SIGMA_STAR_GRID: [f64; 26] = [
    0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6,
    0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
];
pub const OMEGA_STAR_GRID: [f64; 17] = [
    0.001, 0.005, 0.008, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1, 0.15, 0.2, 0.3, 0.5,
];
pub const FESTIVE_ALPHA_GRID: [f64; 16] =
    [5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0, 18.0, 19.0, 20.0];
pub const FESTIVE_P_GRID: [f64; 12] = [0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];
pub const FESTIVE_K_GRID: [usize; 15] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 30, 40, 50];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Lolypop,
    Festive,
    Lowest,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Lolypop => "lolypop",
            AlgorithmKind::Festive => "festive",
            AlgorithmKind::Lowest => "lowest",
        }
    }
}

fn default_algorithms() -> Vec<AlgorithmKind> {
    vec![AlgorithmKind::Lolypop, AlgorithmKind::Festive]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LolypopGrid {
    pub sigma_star: Vec<f64>,
    pub omega_star: Vec<f64>,
    pub t_max: u32,
    pub rho_min: f64,
    pub min_samples: usize,
    pub age_window_s: Option<f64>,
}

impl Default for LolypopGrid {
    fn default() -> Self {
        Self {
            sigma_star: SIGMA_STAR_GRID.to_vec(),
            omega_star: OMEGA_STAR_GRID.to_vec(),
            t_max: DEFAULT_T_MAX,
            rho_min: DEFAULT_RHO_MIN,
            min_samples: DEFAULT_MIN_SAMPLES,
            age_window_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FestiveGrid {
    pub alpha: Vec<f64>,
    pub p: Vec<f64>,
    pub k: Vec<usize>,
    pub bw_window: usize,
    pub efficiency: EfficiencyReference,
}

impl Default for FestiveGrid {
    fn default() -> Self {
        Self {
            alpha: FESTIVE_ALPHA_GRID.to_vec(),
            p: FESTIVE_P_GRID.to_vec(),
            k: FESTIVE_K_GRID.to_vec(),
            bw_window: FestiveConfig::default().bw_window,
            efficiency: EfficiencyReference::default(),
        }
    }
}

/// Session settings shared by every configuration of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimTemplate {
    pub session_length_s: f64,
    pub predictor: PredictorSpec,
    pub start_time_s: Option<f64>,
}

impl Default for SimTemplate {
    fn default() -> Self {
        Self { session_length_s: DEFAULT_SESSION_LENGTH_S, predictor: PredictorSpec::sma1(), start_time_s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub algorithms: Vec<AlgorithmKind>,
    pub lolypop: LolypopGrid,
    pub festive: FestiveGrid,
    pub sim: SimTemplate,
    pub catalog: CatalogFile,
    /// Trace files or directories; the command line may override.
    pub traces: Vec<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            algorithms: default_algorithms(),
            lolypop: LolypopGrid::default(),
            festive: FestiveGrid::default(),
            sim: SimTemplate::default(),
            catalog: CatalogFile::default(),
            traces: Vec::new(),
            out_dir: None,
        }
    }
}

impl SweepSpec {
    /// Default grids for the given algorithms.
    pub fn with_algorithms(algorithms: Vec<AlgorithmKind>) -> Self {
        Self { algorithms, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEntry {
    pub config_id: String,
    #[serde(flatten)]
    pub algorithm: Algorithm,
}

/// Every configuration of the spec, with stable ids such as `lolypop-0001`.
pub fn expand_configs(spec: &SweepSpec) -> Vec<ConfigEntry> {
    let mut out = Vec::new();
    let mut kinds = spec.algorithms.clone();
    kinds.sort();
    kinds.dedup();
    for kind in kinds {
        let algos: Vec<Algorithm> = match kind {
            AlgorithmKind::Lolypop => {
                let g = &spec.lolypop;
                g.sigma_star
                    .iter()
                    .flat_map(|&s| {
                        g.omega_star.iter().map(move |&o| {
                            Algorithm::Lolypop(LolypopConfig {
                                sigma_star: s,
                                omega_star: o,
                                t_max: g.t_max,
                                rho_min: g.rho_min,
                                min_samples: g.min_samples,
                                age_window_s: g.age_window_s,
                            })
                        })
                    })
                    .collect()
            }
            AlgorithmKind::Festive => {
                let g = &spec.festive;
                let mut v = Vec::new();
                for &alpha in &g.alpha {
                    for &p in &g.p {
                        for &k in &g.k {
                            v.push(Algorithm::Festive(FestiveConfig {
                                alpha,
                                p,
                                k,
                                bw_window: g.bw_window,
                                efficiency: g.efficiency,
                            }));
                        }
                    }
                }
                v
            }
            AlgorithmKind::Lowest => vec![Algorithm::Lowest],
        };
        out.extend(algos.into_iter().enumerate().map(|(n, algorithm)| ConfigEntry {
            config_id: format!("{}-{:04}", kind.name(), n + 1),
            algorithm,
        }));
    }
    out
}

/// One (config, trace) result, or a per-config mean when `trace_id` is
/// [`MEAN_TRACE_ID`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config_id: String,
    pub algorithm: String,
    pub note: String,
    pub trace_id: String,
    pub status: String,
    pub message: String,
    pub sigma_star: Option<f64>,
    pub omega_star: Option<f64>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub k: Option<usize>,
    pub sigma: Option<f64>,
    pub omega: Option<f64>,
    pub mean_repr: Option<f64>,
    pub mean_mmbr_bps: Option<f64>,
    pub startup_delay_s: Option<f64>,
    pub wasted_bits: Option<f64>,
    pub n_segments: Option<usize>,
    pub n_skipped: Option<usize>,
    pub n_transitions: Option<usize>,
    /// Traces averaged into a mean row.
    pub n_traces: Option<usize>,
}

pub const STATUS_OK: &str = "ok";
pub const STATUS_ERROR: &str = "error";

impl ResultRow {
    fn base(config: &ConfigEntry, trace_id: &str) -> Self {
        let (mut sigma_star, mut omega_star, mut alpha, mut p, mut k) = (None, None, None, None, None);
        match &config.algorithm {
            Algorithm::Lolypop(c) => {
                sigma_star = Some(c.sigma_star);
                omega_star = Some(c.omega_star);
            }
            Algorithm::Festive(c) => {
                alpha = Some(c.alpha);
                p = Some(c.p);
                k = Some(c.k);
            }
            Algorithm::Lowest => {}
        }
        Self {
            config_id: config.config_id.clone(),
            algorithm: config.algorithm.name().into(),
            note: config.algorithm.note().into(),
            trace_id: trace_id.into(),
            status: STATUS_OK.into(),
            message: String::new(),
            sigma_star,
            omega_star,
            alpha,
            p,
            k,
            sigma: None,
            omega: None,
            mean_repr: None,
            mean_mmbr_bps: None,
            startup_delay_s: None,
            wasted_bits: None,
            n_segments: None,
            n_skipped: None,
            n_transitions: None,
            n_traces: None,
        }
    }

    pub fn from_report(config: &ConfigEntry, r: &SessionReport) -> Self {
        Self {
            sigma: Some(r.sigma),
            omega: Some(r.omega),
            mean_repr: r.mean_repr,
            mean_mmbr_bps: r.mean_mmbr_bps,
            startup_delay_s: r.startup_delay_s,
            wasted_bits: Some(r.wasted_bits),
            n_segments: Some(r.n_segments),
            n_skipped: Some(r.n_skipped),
            n_transitions: Some(r.n_transitions),
            ..Self::base(config, &r.trace_id)
        }
    }

    pub fn failed(config: &ConfigEntry, trace_id: &str, message: impl Into<String>) -> Self {
        Self { status: STATUS_ERROR.into(), message: message.into(), ..Self::base(config, trace_id) }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    pub fn is_mean(&self) -> bool {
        self.trace_id == MEAN_TRACE_ID
    }

    /// Mean representation with sessions that played nothing counted as 0.
    pub fn quality(&self) -> f64 {
        self.mean_repr.unwrap_or(0.0)
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Per-config average over the successful rows of that config.
fn mean_row(config: &ConfigEntry, rows: &[&ResultRow]) -> ResultRow {
    let ok: Vec<&&ResultRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let mut m = ResultRow::base(config, MEAN_TRACE_ID);
    m.n_traces = Some(ok.len());
    if ok.is_empty() {
        m.status = STATUS_ERROR.into();
        m.message = "no successful sessions".into();
        return m;
    }
    m.sigma = mean_of(ok.iter().map(|r| r.sigma));
    m.omega = mean_of(ok.iter().map(|r| r.omega));
    m.mean_repr = mean_of(ok.iter().map(|r| Some(r.quality())));
    m.mean_mmbr_bps = mean_of(ok.iter().map(|r| r.mean_mmbr_bps));
    m.startup_delay_s = mean_of(ok.iter().map(|r| r.startup_delay_s));
    m.wasted_bits = mean_of(ok.iter().map(|r| r.wasted_bits));
    m
}

/// A trace that failed to load keeps its id so its rows can be flagged.
pub struct TraceInput {
    pub id: String,
    pub trace: std::result::Result<ThroughputTrace, String>,
}

impl TraceInput {
    pub fn loaded(trace: ThroughputTrace) -> Self {
        Self { id: trace.id().to_string(), trace: Ok(trace) }
    }
}

pub fn load_inputs(paths: &[PathBuf]) -> Result<Vec<TraceInput>> {
    let files = io::expand_trace_paths(paths)?;
    if files.is_empty() {
        return Err(HarnessError::Invalid("no trace files given".into()));
    }
    Ok(files
        .iter()
        .map(|p| TraceInput {
            id: p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            trace: io::load_trace(p).map_err(|e| e.to_string()),
        })
        .collect())
}

pub struct SweepOutput {
    pub configs: Vec<ConfigEntry>,
    /// Per-trace rows followed, for each config, by its mean row.
    pub rows: Vec<ResultRow>,
}

impl SweepOutput {
    pub fn mean_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.is_mean())
    }
}

fn sim_config(spec: &SweepSpec, algorithm: &Algorithm) -> SimConfig {
    SimConfig {
        session_length_s: spec.sim.session_length_s,
        algorithm: algorithm.clone(),
        predictor: spec.sim.predictor,
        start_time_s: spec.sim.start_time_s,
    }
}

/// Runs every (config, trace) session. Individual failures become error rows.
pub fn run_sweep(spec: &SweepSpec, traces: &[TraceInput]) -> Result<SweepOutput> {
    let (catalog, timeline) = spec.catalog.build()?;
    let configs = expand_configs(spec);
    if configs.is_empty() {
        return Err(HarnessError::Invalid("sweep has no configurations".into()));
    }
    let mut rows = run_pairs(spec, &configs, traces, &catalog, &timeline);
    rows.sort_by(|a, b| (&a.config_id, &a.trace_id).cmp(&(&b.config_id, &b.trace_id)));

    let mut by_config: BTreeMap<&str, Vec<&ResultRow>> = BTreeMap::new();
    for r in &rows {
        by_config.entry(&r.config_id).or_default().push(r);
    }
    let mut out = Vec::with_capacity(rows.len() + configs.len());
    let mut sorted_configs: Vec<&ConfigEntry> = configs.iter().collect();
    sorted_configs.sort_by(|a, b| a.config_id.cmp(&b.config_id));
    for c in sorted_configs {
        let group = by_config.remove(c.config_id.as_str()).unwrap_or_default();
        let mean = mean_row(c, &group);
        out.extend(group.into_iter().cloned());
        out.push(mean);
    }
    Ok(SweepOutput { configs, rows: out })
}

fn run_pairs(
    spec: &SweepSpec,
    configs: &[ConfigEntry],
    traces: &[TraceInput],
    catalog: &MediaCatalog,
    timeline: &Timeline,
) -> Vec<ResultRow> {
    let pairs: Vec<(&ConfigEntry, &TraceInput)> =
        configs.iter().flat_map(|c| traces.iter().map(move |t| (c, t))).collect();
    pairs
        .par_iter()
        .map(|(c, t)| match &t.trace {
            Err(msg) => ResultRow::failed(c, &t.id, format!("trace not loadable: {msg}")),
            Ok(trace) => match run_session(trace, catalog, timeline, &sim_config(spec, &c.algorithm)) {
                Ok(report) => ResultRow::from_report(c, &report),
                Err(e) => ResultRow::failed(c, &t.id, e.to_string()),
            },
        })
        .collect()
}

pub const RESULTS_FILE: &str = "results.csv";
pub const CONFIGS_FILE: &str = "configs.json";
pub const SPEC_FILE: &str = "sweep_spec.json";

/// Writes `results.csv`, `configs.json` and the resolved spec into `dir`.
pub fn write_sweep(dir: impl AsRef<Path>, spec: &SweepSpec, out: &SweepOutput) -> Result<()> {
    let dir = dir.as_ref();
    io::write_csv(dir.join(RESULTS_FILE), &out.rows, &[])?;
    io::write_json(dir.join(CONFIGS_FILE), &out.configs)?;
    io::write_json(dir.join(SPEC_FILE), spec)?;
    Ok(())
}

/// Reads `results.csv` from a sweep directory (or the file itself).
pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let file = if path.is_dir() { path.join(RESULTS_FILE) } else { path.to_path_buf() };
    io::read_csv(file)
}
