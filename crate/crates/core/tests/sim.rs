use lolypop_core::adaptation::{Algorithm, FestiveConfig, LolypopConfig};
use lolypop_core::sim::{
    build_synthetic_catalog, measure_throughput, run_session, DownloadRecord, SimConfig, Timeline,
    DEFAULT_LADDER_BPS,
};
use lolypop_core::trace::synthetic::{bursty, log_ar1, Ar1Params, BurstyParams};
use lolypop_core::trace::ThroughputTrace;
use proptest::prelude::*;

/// Rate-weighted meter on a 1 ms grid: each record spreads its bits
/// uniformly over the milliseconds it covers.
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

fn record_set() -> impl Strategy<Value = Vec<DownloadRecord>> {
    prop::collection::vec((0u32..3000, 50u32..3000, 1e4..2e7f64), 1..8).prop_map(|gaps| {
        let mut t = 0u32;
        gaps.into_iter()
            .map(|(gap, len, bits)| {
                let start = t + gap;
                t = start + len;
                DownloadRecord { start: start as f64 / 1000.0, end: t as f64 / 1000.0, bits }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn meter_matches_millisecond_oracle(records in record_set(), a in 0u32..20000, len in 1u32..20000) {
        let (t1, t2) = (a as f64 / 1000.0, (a + len) as f64 / 1000.0);
        let got = measure_throughput(&records, t1, t2);
        let want = millisecond_oracle(&records, t1, t2);
        match (got, want) {
            (Some(g), Some(w)) => prop_assert!((g - w).abs() <= 1e-3 * w.abs().max(1.0), "{g} vs {w}"),
            (g, w) => prop_assert_eq!(g.is_some(), w.is_some()),
        }
    }
}

fn suite() -> Vec<ThroughputTrace> {
    let mut v: Vec<ThroughputTrace> = (0..4).map(|s| bursty(format!("b{s}"), s, &BurstyParams::default()).unwrap()).collect();
    for s in 0..3 {
        let p = Ar1Params { len_s: 400, mean_bps: 3e6 * (1 + s) as f64, ..Ar1Params::default() };
        v.push(log_ar1(format!("a{s}"), 100 + s, &p).unwrap());
    }
    v
}

#[test]
fn conservation_and_transition_contract() {
    let catalog = build_synthetic_catalog(&DEFAULT_LADDER_BPS, 200, 2.0, 0.1, 9).unwrap();
    let timeline = Timeline::default();
    for trace in suite() {
        for (sigma, omega) in [(0.01, 0.02), (0.05, 0.1), (0.2, 0.05), (0.5, 1.0)] {
            let cfg = SimConfig::new(Algorithm::Lolypop(LolypopConfig::new(sigma, omega)));
            let r = run_session(&trace, &catalog, &timeline, &cfg).unwrap();
            let elapsed = (0u64..)
                .take_while(|&k| timeline.deadline(r.first_segment + k) <= r.session_end_s)
                .count();
            assert_eq!(r.n_played + r.n_skipped, elapsed);
            for e in r.events.iter().filter(|e| e.played()) {
                let prev = e.prev_success_repr.unwrap_or(0);
                if e.repr.unwrap() > prev {
                    assert!(e.omega_at_request.unwrap() <= omega, "{}: up-switch at {:?}", trace.id(), e);
                }
            }
            assert!((0.0..=1.0).contains(&r.sigma) && (0.0..=1.0).contains(&r.omega));
        }
    }
}

/// Suite-average quality grows with the skip bound over the low-skip regime.
/// Individual traces can dip slightly, and for large bounds frequent skips,
/// each followed by a restart at the lowest representation, pull the mean
/// back down.
#[test]
fn mean_quality_non_decreasing_in_sigma_star() {
    let catalog = build_synthetic_catalog(&DEFAULT_LADDER_BPS, 200, 2.0, 0.0, 0).unwrap();
    let sigmas = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.1, 0.15, 0.2];
    let traces = suite();
    let mean: Vec<f64> = sigmas
        .iter()
        .map(|&s| {
            let cfg = SimConfig::new(Algorithm::Lolypop(LolypopConfig::new(s, 1.0)));
            traces
                .iter()
                .map(|t| run_session(t, &catalog, &Timeline::default(), &cfg).unwrap().mean_repr.unwrap_or(0.0))
                .sum::<f64>()
                / traces.len() as f64
        })
        .collect();
    for w in mean.windows(2) {
        assert!(w[1] >= w[0], "{mean:?}");
    }
}

#[test]
fn serialized_reports_are_identical() {
    let catalog = build_synthetic_catalog(&DEFAULT_LADDER_BPS, 150, 2.0, 0.2, 4).unwrap();
    let trace = bursty("d", 3, &BurstyParams::default()).unwrap();
    for algo in [
        Algorithm::Lolypop(LolypopConfig::new(0.05, 0.1)),
        Algorithm::Festive(FestiveConfig::default()),
        Algorithm::Lowest,
    ] {
        let cfg = SimConfig::new(algo);
        let a = serde_json::to_string(&run_session(&trace, &catalog, &Timeline::default(), &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_session(&trace, &catalog, &Timeline::default(), &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn festive_sessions_step_by_one() {
    let catalog = build_synthetic_catalog(&DEFAULT_LADDER_BPS, 200, 2.0, 0.1, 9).unwrap();
    for trace in suite() {
        let cfg = FestiveConfig { alpha: 5.0, p: 0.9, k: 2, ..FestiveConfig::default() };
        let r = run_session(&trace, &catalog, &Timeline::default(), &SimConfig::new(Algorithm::Festive(cfg))).unwrap();
        let reqs: Vec<usize> = r.events.iter().filter_map(|e| e.repr).collect();
        assert!(reqs.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1), "{}: {reqs:?}", trace.id());
    }
}
