//! Trace, catalog and config files; report and plot-data writers.

use std::fs;
use std::path::{Path, PathBuf};

use lolypop_core::analysis::ExampleRun;
use lolypop_core::sim::{
    build_synthetic_catalog, MediaCatalog, SessionReport, Timeline, DEFAULT_DELTA_P_S, DEFAULT_LADDER_BPS,
    DEFAULT_TAU_S,
};
use lolypop_core::trace::ThroughputTrace;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

/// Loads a trace file; the id is the file stem.
pub fn load_trace(path: impl AsRef<Path>) -> Result<ThroughputTrace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    ThroughputTrace::parse(id, &text).map_err(|source| HarnessError::Trace { path: path.into(), source })
}

pub fn write_trace(path: impl AsRef<Path>, trace: &ThroughputTrace) -> Result<()> {
    let mut text = String::with_capacity(trace.samples().len() * 10);
    for s in trace.samples() {
        text.push_str(&s.to_string());
        text.push('\n');
    }
    write_text(path, &text)
}

/// Trace files in a directory, sorted by name. Hidden files are ignored.
pub fn trace_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    files.sort();
    Ok(files)
}

/// Expands directories into their trace files; plain files pass through.
pub fn expand_trace_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            out.extend(trace_files(p)?);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::json(path, e))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::json(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Serializes `rows` as CSV with a header row; an empty slice yields a
/// header-only file when `header` is given.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T], header: &[&str]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).map_err(|e| HarnessError::csv(path, e))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| HarnessError::csv(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Invalid(format!("{}: {e}", path.display())))?;
    write_text(path, &String::from_utf8_lossy(&bytes))
}

pub fn read_csv<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(|e| HarnessError::csv(path, e))
}

fn default_tau() -> f64 {
    DEFAULT_TAU_S
}
fn default_delta_p() -> f64 {
    DEFAULT_DELTA_P_S
}
fn default_rates() -> Vec<f64> {
    DEFAULT_LADDER_BPS.to_vec()
}
fn default_n_segments() -> usize {
    150
}
fn default_variation_cv() -> f64 {
    0.1
}

/// Catalog file: either generated sizes or an explicit `sizes[i][j]` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CatalogFile {
    Explicit {
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default = "default_delta_p")]
        delta_p: f64,
        rates: Vec<f64>,
        sizes: Vec<Vec<f64>>,
    },
    Synthetic {
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default = "default_delta_p")]
        delta_p: f64,
        #[serde(default = "default_rates")]
        rates: Vec<f64>,
        #[serde(default = "default_n_segments")]
        n_segments: usize,
        #[serde(default = "default_variation_cv")]
        variation_cv: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl Default for CatalogFile {
    fn default() -> Self {
        CatalogFile::Synthetic {
            tau: default_tau(),
            delta_p: default_delta_p(),
            rates: default_rates(),
            n_segments: default_n_segments(),
            variation_cv: default_variation_cv(),
            seed: 0,
        }
    }
}

impl CatalogFile {
    pub fn build(&self) -> Result<(MediaCatalog, Timeline)> {
        Ok(match self {
            CatalogFile::Explicit { tau, delta_p, rates, sizes } => {
                (MediaCatalog::new(*tau, rates.clone(), sizes.clone())?, Timeline::new(*tau, *delta_p)?)
            }
            CatalogFile::Synthetic { tau, delta_p, rates, n_segments, variation_cv, seed } => (
                build_synthetic_catalog(rates, *n_segments, *tau, *variation_cv, *seed)?,
                Timeline::new(*tau, *delta_p)?,
            ),
        })
    }
}

/// Flat event-log row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub segment: u64,
    pub repr: Option<usize>,
    pub t_r: Option<f64>,
    pub t_c: Option<f64>,
    pub skipped: bool,
    pub buffer_at_deadline: f64,
}

pub const EVENT_HEADER: [&str; 6] = ["segment", "repr", "t_r", "t_c", "skipped", "buffer_at_deadline"];

pub fn event_rows(report: &SessionReport) -> Vec<EventRow> {
    report
        .events
        .iter()
        .map(|e| EventRow {
            segment: e.segment,
            repr: e.repr,
            t_r: e.t_r,
            t_c: e.t_c,
            skipped: e.skipped,
            buffer_at_deadline: e.buffer_at_deadline,
        })
        .collect()
}

/// Writes `report.json`, `events.csv` and the three plot series into `dir`.
pub fn write_example_run(dir: impl AsRef<Path>, report: &SessionReport, run: &ExampleRun) -> Result<()> {
    let dir = dir.as_ref();
    write_json(dir.join("report.json"), report)?;
    write_csv(dir.join("events.csv"), &event_rows(report), &EVENT_HEADER)?;
    write_csv(dir.join("throughput.csv"), &run.throughput, &["t", "trace_rate_bps", "segment_mmbr_bps"])?;
    write_csv(dir.join("representations.csv"), &run.representations, &["segment", "repr", "running_mean"])?;
    write_csv(dir.join("buffer.csv"), &run.buffer, &["segment", "buffer_s"])?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lolypop_core::Error;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn load_examples() {
        let dir = tempfile::tempdir().unwrap();
        let ok = write(dir.path(), "ok.txt", &"1000000\n2000000\n".repeat(30));
        let t = load_trace(&ok).unwrap();
        assert_eq!(t.samples().len(), 60);
        assert_eq!(t.id(), "ok");

        let neg = write(dir.path(), "neg.txt", &format!("{}-5\n", "1\n".repeat(70)));
        match load_trace(&neg).unwrap_err() {
            HarnessError::Trace { source: Error::NegativeRate { line, .. }, .. } => assert_eq!(line, 71),
            e => panic!("{e}"),
        }
        let short = write(dir.path(), "short.txt", &"1\n".repeat(59));
        assert!(matches!(
            load_trace(&short).unwrap_err(),
            HarnessError::Trace { source: Error::TraceTooShort { .. }, .. }
        ));
    }

    #[test]
    fn catalog_formats() {
        let c: CatalogFile = serde_json::from_str(r#"{"tau":2,"delta_p":5,"rates":[1e6,2e6],"n_segments":3,"variation_cv":0,"seed":1}"#).unwrap();
        let (cat, tl) = c.build().unwrap();
        assert_eq!(cat.segment(0), &[2e6, 4e6]);
        assert_eq!(tl.delta_p, 5.0);
        let c: CatalogFile = serde_json::from_str(r#"{"tau":2,"delta_p":5,"rates":[1e6],"sizes":[[2e6],[2.1e6]]}"#).unwrap();
        assert_eq!(c.build().unwrap().0.n_segments(), 2);
        let (cat, _) = CatalogFile::default().build().unwrap();
        assert_eq!(cat.rates(), &DEFAULT_LADDER_BPS);
    }

    #[test]
    fn empty_csv_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        write_csv::<EventRow>(&p, &[], &EVENT_HEADER).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap().trim(), EVENT_HEADER.join(","));
    }
}
