//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every verdict is printed
//! even when other checks fail. Exit status is nonzero if any check fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lolypop::frontier;
use lolypop::sweep::{self, AlgorithmKind, SweepSpec, TraceInput};
use lolypop_core::adaptation::{Algorithm, EfficiencyReference, FestiveConfig, LolypopConfig};
use lolypop_core::analysis::{Comparison, DEFAULT_SIGMA_GRID};
use lolypop_core::error_prob::{
    fit_truncated, signed_rel_error, success_probability, ErrorHistory, Family, Side, DEFAULT_RHO_MIN,
};
use lolypop_core::predict::{hw_predict, linext_predict, sma_predict, MeanType, PredictionRecord, PredictorSpec};
use lolypop_core::sim::{
    build_synthetic_catalog, measure_throughput, run_session, DownloadRecord, SimConfig, Timeline,
    DEFAULT_LADDER_BPS,
};
use lolypop_core::trace::synthetic::{bursty, constant, log_ar1, Ar1Params, BurstyParams};
use lolypop_core::trace::ThroughputTrace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit_s: u64, started: Instant) -> Result<Duration, String> {
    let took = started.elapsed();
    ensure(took <= Duration::from_secs(limit_s), || format!("took {took:.2?}, limit {limit_s} s"))?;
    Ok(took)
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

// 1. Predictors

fn geometric_oracle(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64).exp()
}

/// Least squares line through `(k, x_k)`, `k = 1..n`, evaluated at `n + 1`.
fn linext_oracle(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = (n + 1.0) / 2.0;
    let my = xs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &y) in xs.iter().enumerate() {
        let dx = (i + 1) as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    my + sxy / sxx * (n + 1.0 - mx)
}

/// Replays double exponential smoothing at every grid point and keeps the
/// first point with the smallest one-step MSE.
fn hw_oracle(xs: &[f64]) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for ai in 0..=20 {
        for bi in 0..=20 {
            let (alpha, beta) = (ai as f64 / 20.0, bi as f64 / 20.0);
            let (mut a, mut b) = (xs[1], xs[1] - xs[0]);
            let mut sse = 0.0;
            for &x in &xs[2..] {
                sse += (x - (a + b)).powi(2);
                let a_new = alpha * x + (1.0 - alpha) * (a + b);
                b = beta * (a_new - a) + (1.0 - beta) * b;
                a = a_new;
            }
            let mse = sse / (xs.len() - 2) as f64;
            if mse < best.0 {
                best = (mse, a + b);
            }
        }
    }
    best.1
}

fn predictor_oracles() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let len = rng.random_range(3..=50);
        let xs: Vec<f64> = (0..len).map(|_| rng.random_range(1e4..5e7)).collect();
        let n = len as f64;
        let checks = [
            ("SMA ar", sma_predict(&xs, MeanType::Arithmetic), xs.iter().sum::<f64>() / n),
            ("SMA gm", sma_predict(&xs, MeanType::Geometric), geometric_oracle(&xs)),
            ("SMA hm", sma_predict(&xs, MeanType::Harmonic), n / xs.iter().map(|x| 1.0 / x).sum::<f64>()),
        ];
        for (name, got, want) in checks {
            let got = got.ok_or(format!("case {case}: {name} undefined"))?;
            ensure(rel_close(got, want, 1e-9), || format!("case {case}: {name} {got} vs {want}"))?;
        }
        // The extrapolated value can be near zero, so the tolerance is
        // relative to the series scale.
        let got = linext_predict(&xs).ok_or(format!("case {case}: LinExt undefined"))?;
        let want = linext_oracle(&xs);
        let scale = xs.iter().cloned().fold(0.0, f64::max);
        ensure((got - want).abs() <= 1e-9 * scale, || format!("case {case}: LinExt {got} vs {want}"))?;
        let got = hw_predict(&xs).ok_or(format!("case {case}: HW undefined"))?;
        let want = hw_oracle(&xs);
        ensure(got == want, || format!("case {case}: HW {got} vs {want}"))?;
    }
    let took = within(5, started)?;
    Ok(format!("1000 series, SMA/LinExt within 1e-9, HW exact, {took:.2?}"))
}

// 2. Error model calibration

const OUTCOMES: [(f64, f64); 5] = [(-0.6, 0.1), (-0.3, 0.2), (0.0, 0.3), (0.2, 0.25), (0.5, 0.15)];

fn draw_outcome(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (e, p) in OUTCOMES {
        acc += p;
        if u < acc {
            return e;
        }
    }
    OUTCOMES[OUTCOMES.len() - 1].0
}

/// `P[predicted * (1 + e) * budget >= size]`.
fn true_success(predicted: f64, budget: f64, size: f64) -> f64 {
    OUTCOMES
        .iter()
        .filter(|(e, _)| predicted * (1.0 + e) * budget >= size)
        .map(|(_, p)| p)
        .sum()
}

fn error_calibration() -> Verdict {
    let started = Instant::now();
    let horizon = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut history = ErrorHistory::new(10);
    let mut worst = 0.0f64;
    let mut recorded = 0i64;
    for checkpoint in [200, 500, 1000, 2000] {
        while recorded < checkpoint {
            let predicted = rng.random_range(5e5..2e7);
            let realized = predicted * (1.0 + draw_outcome(&mut rng));
            history.record(recorded, horizon, signed_rel_error(predicted, realized, DEFAULT_RHO_MIN));
            recorded += 1;
        }
        let now = recorded as f64;
        for _ in 0..200 {
            let rho_hat = rng.random_range(5e5..2e7);
            let budget = rng.random_range(0.2..horizon as f64);
            let size = rho_hat * budget * rng.random_range(0.3..1.8);
            let record = PredictionRecord { t: recorded, horizon, rho_hat: Some(rho_hat) };
            let got = success_probability(&history, &record, size, now, now + budget, now).map_err(|e| e.to_string())?;
            let want = true_success(rho_hat, budget, size);
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= 0.05, || {
                format!("{checkpoint} samples: size {size:.0}, budget {budget:.3}: {got} vs {want}")
            })?;
        }
    }
    let took = within(5, started)?;
    Ok(format!("200..2000 samples, 800 queries, max deviation {worst:.3}, {took:.2?}"))
}

// 3. Lomax recovery

fn lomax_draw(seed: u64, alpha: f64, lambda: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..5000)
        .map(|_| {
            let u: f64 = rng.random();
            lambda * ((1.0 - u).powf(-1.0 / alpha) - 1.0)
        })
        .collect()
}

/// A single 5000-sample draw lands outside 15% for roughly one seed in
/// twenty (a maximum-likelihood fit on the same draws scatters similarly),
/// so recovery is judged over 20 independent draws.
fn lomax_recovery() -> Verdict {
    let started = Instant::now();
    let (alpha, lambda) = (1.5, 0.4);
    let draws = 20;
    let (mut recovered, mut worst) = (0, 0.0f64);
    let mut l2 = Vec::new();
    for seed in 0..draws {
        let xs = lomax_draw(seed, alpha, lambda);
        let lomax = fit_truncated(&xs, Side::Over, Family::Lomax).map_err(|e| e.to_string())?;
        let (a, l) = (lomax.params[0], lomax.params[1]);
        let dev = ((a - alpha).abs() / alpha).max((l - lambda).abs() / lambda);
        worst = worst.max(dev);
        if dev <= 0.15 {
            recovered += 1;
        }
        if seed < 5 {
            for family in [Family::Exponential, Family::Normal, Family::Logistic] {
                let fit = fit_truncated(&xs, Side::Over, family).map_err(|e| format!("{family:?}: {e}"))?;
                ensure(lomax.l2_distance <= fit.l2_distance, || {
                    format!("seed {seed}: lomax L2 {:.5} > {family:?} L2 {:.5}", lomax.l2_distance, fit.l2_distance)
                })?;
                l2.push(fit.l2_distance / lomax.l2_distance);
            }
        }
    }
    ensure(recovered * 10 >= draws * 9, || format!("{recovered}/{draws} draws within 15%, worst {:.1}%", 100.0 * worst))?;
    let took = within(10, started)?;
    let min_ratio = l2.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "{recovered}/{draws} draws within 15% (worst {:.1}%), other families' L2 >= {min_ratio:.2}x lomax, {took:.2?}",
        100.0 * worst
    ))
}

// 4. LOLYPOP contract

fn contract_suite() -> Vec<ThroughputTrace> {
    let mut v: Vec<ThroughputTrace> =
        (0..12).map(|s| bursty(format!("bursty-{s}"), 40 + s, &BurstyParams::default()).unwrap()).collect();
    for s in 0..8 {
        let p = Ar1Params {
            mean_bps: 2e6 + 1.5e6 * s as f64,
            outage_prob: if s % 2 == 0 { 0.02 } else { 0.0 },
            ..Ar1Params::default()
        };
        v.push(log_ar1(format!("ar1-{s}"), 80 + s, &p).unwrap());
    }
    v
}

fn lolypop_contract() -> Verdict {
    let started = Instant::now();
    let traces = contract_suite();
    let catalog = build_synthetic_catalog(&DEFAULT_LADDER_BPS, 150, 2.0, 0.1, 0).unwrap();
    let timeline = Timeline::default();
    let (tau, delta_p) = (timeline.tau, timeline.delta_p);
    let configs = sweep::expand_configs(&SweepSpec::with_algorithms(vec![AlgorithmKind::Lolypop]));
    let (mut sessions, mut ups, mut startups) = (0usize, 0usize, 0usize);
    for entry in &configs {
        let Algorithm::Lolypop(cfg) = &entry.algorithm else { continue };
        for trace in &traces {
            let r = run_session(trace, &catalog, &timeline, &SimConfig::new(entry.algorithm.clone()))
                .map_err(|e| format!("{} on {}: {e}", entry.config_id, trace.id()))?;
            sessions += 1;
            for e in r.events.iter().filter(|e| e.repr.is_some()) {
                if e.repr.unwrap() > e.prev_success_repr.unwrap_or(0) {
                    ups += 1;
                    let omega = e.omega_at_request.unwrap_or(0.0);
                    ensure(omega <= cfg.omega_star, || {
                        format!("{} on {}: up-switch at segment {} with omega {omega} > {}", entry.config_id, trace.id(), e.segment, cfg.omega_star)
                    })?;
                }
            }
            if r.first_segment_played {
                startups += 1;
                let d = r.startup_delay_s.unwrap_or(f64::NAN);
                ensure((tau..=delta_p - tau).contains(&d), || {
                    format!("{} on {}: startup delay {d}", entry.config_id, trace.id())
                })?;
            }
        }
    }
    ensure(configs.len() == 442, || format!("{} configurations", configs.len()))?;
    let took = within(60, started)?;
    Ok(format!(
        "{sessions} sessions ({} configs x {} traces), {ups} up-switches, {startups} startup bounds, {took:.2?}",
        configs.len(),
        traces.len()
    ))
}

// 5. Constant trace

fn constant_convergence() -> Verdict {
    let started = Instant::now();
    let ladder = [1e6, 2e6, 4e6, 8e6, 16e6];
    let catalog = build_synthetic_catalog(&ladder, 150, 2.0, 0.0, 0).unwrap();
    let timeline = Timeline::new(2.0, 5.0).unwrap();
    let trace = constant("const-10M", 400, 10e6).unwrap();
    let mut cfg = SimConfig::new(Algorithm::Lolypop(LolypopConfig::new(0.05, 0.5)));
    cfg.predictor = "SMA:1:ar".parse::<PredictorSpec>().unwrap();
    let r = run_session(&trace, &catalog, &timeline, &cfg).map_err(|e| e.to_string())?;
    ensure(r.n_skipped == 0, || format!("{} skips", r.n_skipped))?;
    let reprs: Vec<usize> = r.events.iter().map(|e| e.repr.unwrap_or(usize::MAX)).collect();
    let settle = reprs.iter().rposition(|&j| j != 3).map_or(0, |k| k + 1);
    ensure(settle < 10 && settle < reprs.len(), || format!("representations {reprs:?}"))?;
    let took = within(1, started)?;
    Ok(format!("{} segments, at 8 Mbps from segment {} on, 0 skips, {took:.2?}", reprs.len(), settle + 1))
}

// 6. Throughput meter

/// Integrates the rate-weighted meter on a 1 ms grid.
fn millisecond_oracle(records: &[DownloadRecord], t1: f64, t2: f64) -> Option<f64> {
    let (mut bits, mut busy) = (0.0, 0.0);
    let (a, b) = ((t1 * 1000.0).round() as i64, (t2 * 1000.0).round() as i64);
    for ms in a..b {
        let mid = (ms as f64 + 0.5) / 1000.0;
        if let Some(r) = records.iter().find(|r| r.start <= mid && mid < r.end) {
            bits += r.bits / (r.end - r.start) / 1000.0;
            busy += 0.001;
        }
    }
    (busy > 0.0).then(|| bits / busy)
}

fn meter_oracle() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut compared, mut empty) = (0, 0);
    for case in 0..500 {
        let mut t = 0u32;
        let records: Vec<DownloadRecord> = (0..rng.random_range(1..8))
            .map(|_| {
                let start = t + rng.random_range(0..3000);
                t = start + rng.random_range(20..4000);
                DownloadRecord { start: start as f64 / 1e3, end: t as f64 / 1e3, bits: rng.random_range(1e4..2e7) }
            })
            .collect();
        let a = rng.random_range(0..t + 1000);
        let len = rng.random_range(1..15_000);
        let (t1, t2) = (a as f64 / 1e3, (a + len) as f64 / 1e3);
        match (measure_throughput(&records, t1, t2), millisecond_oracle(&records, t1, t2)) {
            (Some(g), Some(w)) => {
                ensure((g - w).abs() <= 1e-3 * w, || format!("case {case}: {g} vs oracle {w}"))?;
                compared += 1;
            }
            (None, None) => empty += 1,
            (g, w) => return Err(format!("case {case}: {g:?} vs oracle {w:?}")),
        }
    }
    let took = within(5, started)?;
    Ok(format!("500 record sets ({compared} measured, {empty} idle windows) within 0.1%, {took:.2?}"))
}

// 7. FESTIVE invariants

fn festive_invariants() -> Verdict {
    let catalog = build_synthetic_catalog(&DEFAULT_LADDER_BPS, 150, 2.0, 0.1, 0).unwrap();
    let timeline = Timeline::default();
    let traces = contract_suite();
    let (mut runs, mut ups) = (0, 0);
    for efficiency in [EfficiencyReference::Budget, EfficiencyReference::Candidate] {
        for alpha in [5.0, 12.0, 20.0] {
            for p in [0.4, 0.85, 0.95] {
                for k in [1, 4, 50] {
                    let cfg = FestiveConfig { alpha, p, k, efficiency, ..FestiveConfig::default() };
                    for trace in &traces {
                        let sim = SimConfig::new(Algorithm::Festive(cfg.clone()));
                        let r = run_session(trace, &catalog, &timeline, &sim).map_err(|e| e.to_string())?;
                        runs += 1;
                        let reqs: Vec<usize> = r.events.iter().filter_map(|e| e.repr).collect();
                        let mut last_up: Option<usize> = None;
                        for (v, w) in reqs.windows(2).enumerate() {
                            let at = v + 1;
                            ensure(w[0].abs_diff(w[1]) <= 1, || {
                                format!("{cfg:?} on {}: {} -> {} at request {at}", trace.id(), w[0], w[1])
                            })?;
                            if w[1] > w[0] {
                                ups += 1;
                                if let Some(u) = last_up {
                                    ensure(at - u >= k, || {
                                        format!("{cfg:?} on {}: up-switches at requests {u} and {at}", trace.id())
                                    })?;
                                }
                                last_up = Some(at);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{runs} sessions, {ups} upward switches, all single steps within the k gate"))
}

// 8. Direction check against FESTIVE

fn bursty_family() -> Vec<TraceInput> {
    (0..5).map(|s| TraceInput::loaded(bursty(format!("bursty-{s:02}"), 200 + s, &BurstyParams::default()).unwrap())).collect()
}

fn direction_check() -> Verdict {
    let started = Instant::now();
    let spec = SweepSpec::default();
    let out = sweep::run_sweep(&spec, &bursty_family()).map_err(|e| e.to_string())?;
    let cmp = frontier::compare(&out.rows, "lolypop", "festive", &DEFAULT_SIGMA_GRID, &[0.05]);
    let mean = cmp.first().ok_or("no comparison")?;
    ensure(mean.result == Comparison::AGreater, || {
        format!("{:?}: lolypop {:?} vs festive {:?}", mean.result, mean.integral_a, mean.integral_b)
    })?;
    let took = within(300, started)?;
    Ok(format!(
        "{} configs x 5 traces, omega <= 0.05: lolypop {:.3} vs festive {:.3} over sigma [{:?}, {:?}], {took:.2?}",
        out.configs.len(),
        mean.integral_a.unwrap_or(f64::NAN),
        mean.integral_b.unwrap_or(f64::NAN),
        mean.range_lo.unwrap_or(f64::NAN),
        mean.range_hi.unwrap_or(f64::NAN),
    ))
}

// 9. Determinism

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let traces_dir = tmp.path().join("traces");
    for s in 0..3 {
        let t = bursty(format!("b{s}"), s, &BurstyParams::default()).unwrap();
        lolypop::io::write_trace(traces_dir.join(format!("b{s}.txt")), &t).map_err(|e| e.to_string())?;
    }
    let a = log_ar1("a0", 9, &Ar1Params { outage_prob: 0.03, ..Ar1Params::default() }).unwrap();
    lolypop::io::write_trace(traces_dir.join("a0.txt"), &a).map_err(|e| e.to_string())?;
    std::fs::write(traces_dir.join("broken.txt"), "1\n2\n").map_err(|e| e.to_string())?;

    let mut spec = SweepSpec::with_algorithms(vec![AlgorithmKind::Lolypop, AlgorithmKind::Festive, AlgorithmKind::Lowest]);
    spec.lolypop.sigma_star = vec![0.01, 0.05, 0.2];
    spec.lolypop.omega_star = vec![0.02, 0.1, 1.0];
    spec.festive.alpha = vec![5.0, 20.0];
    spec.festive.k = vec![1, 10];
    spec.festive.p = vec![0.85];
    spec.traces = vec![traces_dir];

    let mut outputs = Vec::new();
    for (run, threads) in [(0, 1), (1, 4)] {
        let dir = tmp.path().join(format!("run{run}"));
        let inputs = sweep::load_inputs(&spec.traces).map_err(|e| e.to_string())?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        let out = pool.install(|| sweep::run_sweep(&spec, &inputs)).map_err(|e| e.to_string())?;
        sweep::write_sweep(&dir, &spec, &out).map_err(|e| e.to_string())?;
        frontier::write_frontiers(&dir, &out.rows, &DEFAULT_SIGMA_GRID, &[0.05, 0.5]).map_err(|e| e.to_string())?;
        outputs.push(read_dir_bytes(&dir));
    }
    ensure(outputs[0] == outputs[1], || {
        let differing: Vec<&str> = outputs[0]
            .iter()
            .zip(&outputs[1])
            .filter(|(x, y)| x != y)
            .map(|(x, _)| x.0.as_str())
            .collect();
        format!("files differ: {differing:?}")
    })?;
    let bytes: usize = outputs[0].iter().map(|(_, b)| b.len()).sum();
    Ok(format!("{} files, {bytes} bytes identical across runs on 1 and 4 threads", outputs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("predictor oracle equivalence", predictor_oracles),
        ("error model calibration", error_calibration),
        ("lomax fit recovery", lomax_recovery),
        ("lolypop transition and startup contract", lolypop_contract),
        ("constant trace convergence", constant_convergence),
        ("throughput meter oracle", meter_oracle),
        ("festive one-step and k gate", festive_invariants),
        ("lolypop dominates festive on bursty traces", direction_check),
        ("sweep determinism", determinism),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS {}. {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
