use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lolypop::io::{self, CatalogFile};
use lolypop::predict_eval::{self, ErrorSample};
use lolypop::sweep::{self, SweepSpec};
use lolypop::{frontier, HarnessError};
use lolypop_core::analysis::{self, DEFAULT_OMEGA_THRESHOLDS, DEFAULT_SIGMA_GRID};
use lolypop_core::error_prob::DEFAULT_RHO_MIN;
use lolypop_core::predict::PredictorSpec;
use lolypop_core::sim::{run_session, SimConfig};
use lolypop_core::trace::synthetic::{bursty, log_ar1, Ar1Params, BurstyParams};
use lolypop_core::trace::{compute_stats, filter_by_cv, resample};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lolypop", version, about = "Low-latency live streaming adaptation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics of throughput traces at several sampling intervals.
    Stats {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
        intervals: Vec<usize>,
        /// Only report traces whose 1-second CV is at least this value.
        #[arg(long)]
        min_cv: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prediction errors of one predictor on traces, per time scale.
    PredictEval {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, default_value = "SMA:1:ar")]
        method: PredictorSpec,
        /// Horizons as `a..b`, a single value, or a comma list.
        #[arg(long, default_value = "1..10")]
        scales: String,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,0.9")]
        quantiles: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_RHO_MIN)]
        rho_min: f64,
        /// Error samples (columns trace, t, T, signed_error).
        #[arg(long)]
        out: PathBuf,
        /// Quantile table; defaults to `<out>` with a `_quantiles` suffix.
        #[arg(long)]
        quantile_out: Option<PathBuf>,
    },
    /// Fits truncated parametric distributions to error magnitudes.
    FitErrors {
        errors: PathBuf,
        #[arg(long, default_value = "all")]
        family: String,
        #[arg(long, default_value = "over")]
        side: String,
        /// Only use samples of this horizon.
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs every configuration of a sweep spec on every trace.
    Sweep {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Quality frontiers, their hulls and the operating region of each algorithm.
    Frontier {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, value_delimiter = ',')]
        omega: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        sigma_grid: Option<Vec<f64>>,
        /// Output directory; defaults to the results directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compares the frontier integrals of two algorithms.
    Compare {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value = "results")]
        results: PathBuf,
        #[arg(long, value_delimiter = ',')]
        omega: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        sigma_grid: Option<Vec<f64>>,
        /// Defaults to `compare.csv` in the results directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One session with full event log and plot series.
    ExampleRun {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, default_value = "example-run")]
        out: PathBuf,
    },
    /// Writes seeded synthetic traces.
    Synth {
        #[arg(long, value_enum, default_value_t = SynthKind::Bursty)]
        kind: SynthKind,
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        len: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Bursty,
    Ar1,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::FAILURE
        }
    }
}

/// Joins the error chain, dropping causes already spelled out by their parent.
fn render(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats { traces, intervals, min_cv, out } => stats(&traces, &intervals, min_cv, &out),
        Command::PredictEval { traces, method, scales, quantiles, rho_min, out, quantile_out } => {
            predict_eval_cmd(&traces, &method, &scales, &quantiles, rho_min, &out, quantile_out)
        }
        Command::FitErrors { errors, family, side, horizon, out } => fit_errors(&errors, &family, &side, horizon, &out),
        Command::Sweep { spec, traces, out, threads } => sweep_cmd(spec, traces, out, threads),
        Command::Frontier { results, omega, sigma_grid, out } => {
            let rows = sweep::read_results(&results)?;
            let dir = out.unwrap_or_else(|| results_dir(&results));
            frontier::write_frontiers(&dir, &rows, &sigma_grid_or_default(sigma_grid), &omega_or_default(omega))?;
            println!("wrote frontier.csv, hull.csv, region.csv to {}", dir.display());
            Ok(())
        }
        Command::Compare { a, b, results, omega, sigma_grid, out } => {
            let rows = sweep::read_results(&results)?;
            let cmp = frontier::compare(&rows, &a, &b, &sigma_grid_or_default(sigma_grid), &omega_or_default(omega));
            for c in cmp.iter().filter(|c| c.scope == analysis::MEAN_TRACE_ID) {
                println!("omega <= {}: {:?} (a={:?}, b={:?})", c.omega_threshold, c.result, c.integral_a, c.integral_b);
            }
            let path = out.unwrap_or_else(|| results_dir(&results).join("compare.csv"));
            io::write_csv(&path, &cmp, &frontier::COMPARE_HEADER)?;
            Ok(())
        }
        Command::ExampleRun { config, trace, catalog, out } => example_run(&config, &trace, catalog, &out),
        Command::Synth { kind, count, seed, len, out } => synth(kind, count, seed, len, &out),
    }
}

fn results_dir(results: &std::path::Path) -> PathBuf {
    if results.is_dir() {
        results.to_path_buf()
    } else {
        results.parent().map(PathBuf::from).unwrap_or_default()
    }
}

fn sigma_grid_or_default(v: Option<Vec<f64>>) -> Vec<f64> {
    v.unwrap_or_else(|| DEFAULT_SIGMA_GRID.to_vec())
}

fn omega_or_default(v: Option<Vec<f64>>) -> Vec<f64> {
    v.unwrap_or_else(|| DEFAULT_OMEGA_THRESHOLDS.to_vec())
}

#[derive(Serialize)]
struct StatsRow {
    trace: String,
    interval_s: usize,
    n: usize,
    mean_bps: f64,
    cv: Option<f64>,
    autocorr_lag1: Option<f64>,
    diff_autocorr_lag1: Option<f64>,
}

fn stats(paths: &[PathBuf], intervals: &[usize], min_cv: Option<f64>, out: &PathBuf) -> Result<()> {
    let traces = trace_paths(paths)?
        .iter()
        .map(io::load_trace)
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let kept = filter_by_cv(&traces, min_cv.unwrap_or(f64::NEG_INFINITY));
    let mut rows = Vec::new();
    for t in kept {
        for &k in intervals {
            let series = resample(t, k).with_context(|| format!("trace {}", t.id()))?;
            match compute_stats(&series, k) {
                Ok(s) => rows.push(StatsRow {
                    trace: t.id().into(),
                    interval_s: k,
                    n: series.len(),
                    mean_bps: s.mean_bps,
                    cv: s.cv,
                    autocorr_lag1: s.autocorr_lag1,
                    diff_autocorr_lag1: s.diff_autocorr_lag1,
                }),
                Err(e) => eprintln!("skipping {} at {k} s: {e}", t.id()),
            }
        }
    }
    let header = ["trace", "interval_s", "n", "mean_bps", "cv", "autocorr_lag1", "diff_autocorr_lag1"];
    io::write_csv(out, &rows, &header)?;
    Ok(())
}

fn trace_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let files = io::expand_trace_paths(paths)?;
    if files.is_empty() {
        bail!("no trace files found");
    }
    Ok(files)
}

fn parse_scales(s: &str) -> Result<Vec<u32>> {
    let v: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u32, u32) = (a.trim().parse()?, b.trim().trim_start_matches('=').parse()?);
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>()?
    };
    if v.is_empty() || v.contains(&0) {
        bail!("time scales must be positive integers, got '{s}'");
    }
    Ok(v)
}

fn predict_eval_cmd(
    paths: &[PathBuf],
    method: &PredictorSpec,
    scales: &str,
    quantiles: &[f64],
    rho_min: f64,
    out: &PathBuf,
    quantile_out: Option<PathBuf>,
) -> Result<()> {
    let scales = parse_scales(scales)?;
    let t_max = *scales.iter().max().unwrap_or(&1);
    let mut samples: Vec<ErrorSample> = Vec::new();
    for p in trace_paths(paths)? {
        let trace = io::load_trace(&p)?;
        samples.extend(
            predict_eval::evaluate(&trace, method, t_max, rho_min).into_iter().filter(|s| scales.contains(&s.horizon)),
        );
    }
    io::write_csv(out, &samples, &predict_eval::ERROR_HEADER)?;
    let table = predict_eval::quantile_table(method, &samples, quantiles);
    let qpath = quantile_out.unwrap_or_else(|| {
        let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "errors".into());
        out.with_file_name(format!("{stem}_quantiles.csv"))
    });
    io::write_csv(&qpath, &table, &["method", "T", "quantile", "rel_error", "n"])?;
    for r in &table {
        println!("{} T={:>2} q={:.2}: {:.4}", r.method, r.horizon, r.quantile, r.rel_error);
    }
    Ok(())
}

fn fit_errors(errors: &PathBuf, family: &str, side: &str, horizon: Option<u32>, out: &PathBuf) -> Result<()> {
    let families = predict_eval::parse_family(family)?;
    let side = predict_eval::parse_side(side)?;
    let samples: Vec<ErrorSample> = io::read_csv(errors)?;
    let signed: Vec<f64> = samples
        .iter()
        .filter(|s| horizon.is_none_or(|h| s.horizon == h))
        .map(|s| s.signed_error)
        .collect();
    let report = predict_eval::fit_errors(&signed, side, &families);
    for f in &report.fits {
        match (&f.fit, &f.error) {
            (Some(fit), _) => println!(
                "{:?}: params {:?}, l2 {:.5}, ks {:.4} (p {:.3})",
                f.family, fit.params, fit.l2_distance, fit.ks_statistic, fit.ks_p_value
            ),
            (None, Some(e)) => println!("{:?}: {e}", f.family),
            _ => {}
        }
    }
    io::write_json(out, &report)?;
    if report.fits.iter().all(|f| f.fit.is_none()) {
        bail!("no distribution could be fitted");
    }
    Ok(())
}

fn sweep_cmd(spec: Option<PathBuf>, traces: Vec<PathBuf>, out: Option<PathBuf>, threads: Option<usize>) -> Result<()> {
    let mut spec: SweepSpec = match spec {
        Some(p) => io::read_json(p)?,
        None => SweepSpec::default(),
    };
    if !traces.is_empty() {
        spec.traces = traces;
    }
    let dir = out.or_else(|| spec.out_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let inputs = sweep::load_inputs(&spec.traces)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()?;
    let result = pool.install(|| sweep::run_sweep(&spec, &inputs))?;
    sweep::write_sweep(&dir, &spec, &result)?;
    let failed = result.rows.iter().filter(|r| !r.is_ok() && !r.is_mean()).count();
    println!(
        "{} configurations x {} traces -> {} ({} failed sessions)",
        result.configs.len(),
        inputs.len(),
        dir.join(sweep::RESULTS_FILE).display(),
        failed
    );
    Ok(())
}

fn example_run(config: &PathBuf, trace: &PathBuf, catalog: Option<PathBuf>, out: &PathBuf) -> Result<()> {
    let cfg: SimConfig = io::read_json(config)?;
    let catalog: CatalogFile = match catalog {
        Some(p) => io::read_json(p)?,
        None => CatalogFile::default(),
    };
    let (catalog, timeline) = catalog.build()?;
    let trace = io::load_trace(trace)?;
    let report = run_session(&trace, &catalog, &timeline, &cfg)?;
    let series = analysis::example_run(&report, &trace);
    io::write_example_run(out, &report, &series)?;
    println!(
        "{} on {}: sigma {:.4}, omega {:.4}, mean repr {:?}",
        report.algorithm, report.trace_id, report.sigma, report.omega, report.mean_repr
    );
    Ok(())
}

fn synth(kind: SynthKind, count: u64, seed: u64, len: usize, out: &Path) -> Result<()> {
    for k in 0..count {
        let s = seed + k;
        let trace = match kind {
            SynthKind::Bursty => bursty(format!("bursty-{s:03}"), s, &BurstyParams { len_s: len, ..Default::default() })?,
            SynthKind::Ar1 => log_ar1(format!("ar1-{s:03}"), s, &Ar1Params { len_s: len, ..Default::default() })?,
        };
        io::write_trace(out.join(format!("{}.txt", trace.id())), &trace)?;
    }
    println!("wrote {count} traces to {}", out.display());
    Ok(())
}
