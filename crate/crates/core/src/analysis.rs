//! Post-processing of sweep results: operating regions, quality frontiers,
//! their upper concave hulls and integral comparison.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::sim::SessionReport;
use crate::trace::ThroughputTrace;

/// Trace id of per-configuration rows averaged over all traces.
pub const MEAN_TRACE_ID: &str = "mean-over-traces";

/// Slack applied when comparing achieved values against grid bounds.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// Tolerance of [`integral_compare`].
pub const INTEGRAL_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_SIGMA_GRID: [f64; 9] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.1];
pub const DEFAULT_OMEGA_THRESHOLDS: [f64; 9] = [0.02, 0.03, 0.04, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub config_id: String,
    pub trace_id: String,
    pub sigma: f64,
    pub omega: f64,
    /// Mean representation index.
    pub mean_quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub sigma_bound: f64,
    pub quality: f64,
    pub config_id: String,
    pub sigma: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierCurve {
    pub omega_threshold: f64,
    /// Best configuration per grid point; infeasible grid points are absent.
    pub raw: Vec<FrontierPoint>,
    /// Vertices of the upper concave hull of `raw`.
    pub hull: Vec<(f64, f64)>,
}

impl FrontierCurve {
    pub fn raw_xy(&self) -> Vec<(f64, f64)> {
        self.raw.iter().map(|p| (p.sigma_bound, p.quality)).collect()
    }
}

/// Better candidate for a frontier point: higher quality, then lower
/// achieved sigma, lower omega and config id.
fn better(a: &OperatingPoint, b: &OperatingPoint) -> bool {
    let by = a
        .mean_quality
        .partial_cmp(&b.mean_quality)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.sigma.partial_cmp(&a.sigma).unwrap_or(Ordering::Equal))
        .then_with(|| b.omega.partial_cmp(&a.omega).unwrap_or(Ordering::Equal))
        .then_with(|| b.config_id.cmp(&a.config_id));
    by == Ordering::Greater
}

/// Highest mean quality reachable at each sigma bound for every omega
/// threshold, among `points` (one per configuration).
pub fn quality_frontier(points: &[OperatingPoint], sigma_grid: &[f64], omega_thresholds: &[f64]) -> Vec<FrontierCurve> {
    omega_thresholds
        .iter()
        .map(|&omega_threshold| {
            let raw: Vec<FrontierPoint> = sigma_grid
                .iter()
                .filter_map(|&bound| {
                    points
                        .iter()
                        .filter(|p| {
                            p.sigma <= bound + FEASIBILITY_SLACK && p.omega <= omega_threshold + FEASIBILITY_SLACK
                        })
                        .fold(None, |best: Option<&OperatingPoint>, p| match best {
                            Some(b) if !better(p, b) => Some(b),
                            _ => Some(p),
                        })
                        .map(|p| FrontierPoint {
                            sigma_bound: bound,
                            quality: p.mean_quality,
                            config_id: p.config_id.clone(),
                            sigma: p.sigma,
                            omega: p.omega,
                        })
                })
                .collect();
            let hull = upper_hull(&raw.iter().map(|p| (p.sigma_bound, p.quality)).collect::<Vec<_>>());
            FrontierCurve { omega_threshold, raw, hull }
        })
        .collect()
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Vertices of the upper concave majorant of `points`, sorted by x.
/// Points sharing an x keep only the highest.
pub fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|later, earlier| later.0 == earlier.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Linear interpolation of a piecewise-linear curve; `None` outside its range.
pub fn interpolate(curve: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = curve.first()?;
    let last = curve.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let k = curve.partition_point(|p| p.0 < x);
    if k < curve.len() && curve[k].0 == x {
        return Some(curve[k].1);
    }
    let (a, b) = (curve[k - 1], curve[k]);
    Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
}

/// Trapezoidal integral of the curve restricted to `[lo, hi]`.
pub fn integral_over(curve: &[(f64, f64)], lo: f64, hi: f64) -> Option<f64> {
    let mut xs: Vec<f64> = curve.iter().map(|p| p.0).filter(|&x| x > lo && x < hi).collect();
    xs.insert(0, lo);
    xs.push(hi);
    let mut total = 0.0;
    for w in xs.windows(2) {
        let (ya, yb) = (interpolate(curve, w[0])?, interpolate(curve, w[1])?);
        total += 0.5 * (ya + yb) * (w[1] - w[0]);
    }
    Some(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AGreater,
    BGreater,
    Equal,
    Incomparable,
}

impl Comparison {
    pub fn swapped(self) -> Self {
        match self {
            Comparison::AGreater => Comparison::BGreater,
            Comparison::BGreater => Comparison::AGreater,
            c => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralComparison {
    pub result: Comparison,
    pub range: Option<(f64, f64)>,
    pub integral_a: Option<f64>,
    pub integral_b: Option<f64>,
}

/// Compares the integrals of two curves (sorted by x) over their common
/// x range.
pub fn integral_compare(a: &[(f64, f64)], b: &[(f64, f64)]) -> IntegralComparison {
    let none = IntegralComparison { result: Comparison::Incomparable, range: None, integral_a: None, integral_b: None };
    let (Some(a0), Some(a1), Some(b0), Some(b1)) = (a.first(), a.last(), b.first(), b.last()) else {
        return none;
    };
    let lo = a0.0.max(b0.0);
    let hi = a1.0.min(b1.0);
    if lo > hi {
        return none;
    }
    let (Some(ia), Some(ib)) = (integral_over(a, lo, hi), integral_over(b, lo, hi)) else {
        return none;
    };
    let result = if ia - ib > INTEGRAL_TOLERANCE {
        Comparison::AGreater
    } else if ib - ia > INTEGRAL_TOLERANCE {
        Comparison::BGreater
    } else {
        Comparison::Equal
    };
    IntegralComparison { result, range: Some((lo, hi)), integral_a: Some(ia), integral_b: Some(ib) }
}

/// Per-configuration (sigma, omega) points for plotting, duplicates kept.
pub fn operating_region(points: &[OperatingPoint]) -> Vec<(String, f64, f64)> {
    points.iter().map(|p| (p.config_id.clone(), p.sigma, p.omega)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputRow {
    pub t: f64,
    pub trace_rate_bps: f64,
    /// Mean rate of the segment playing at `t`, if any.
    pub segment_mmbr_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationRow {
    pub segment: u64,
    pub repr: Option<usize>,
    pub running_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferRow {
    pub segment: u64,
    pub buffer_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExampleRun {
    pub throughput: Vec<ThroughputRow>,
    pub representations: Vec<RepresentationRow>,
    pub buffer: Vec<BufferRow>,
}

/// Plot series of one session: throughput against segment rate, selected
/// representations and buffer level at each deadline.
pub fn example_run(report: &SessionReport, trace: &ThroughputTrace) -> ExampleRun {
    let tau = report.tau;
    let mut out = ExampleRun::default();
    if report.events.is_empty() {
        return out;
    }
    let start = crate::math::ceil(report.tune_in_time_s) as i64;
    let end = crate::math::floor(report.session_end_s) as i64;
    for k in start..=end {
        let t = k as f64;
        let playing = report
            .events
            .iter()
            .find(|e| e.played() && e.deadline <= t && t < e.deadline + tau)
            .and_then(|e| e.size_bits)
            .map(|s| s / tau);
        out.throughput.push(ThroughputRow { t, trace_rate_bps: trace.rate_at(t), segment_mmbr_bps: playing });
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for e in &report.events {
        let repr = if e.played() { e.repr } else { None };
        if let Some(j) = repr {
            sum += j as f64;
            n += 1;
        }
        out.representations.push(RepresentationRow {
            segment: e.segment,
            repr,
            running_mean: (n > 0).then(|| sum / n as f64),
        });
        out.buffer.push(BufferRow { segment: e.segment, buffer_s: e.buffer_at_deadline });
    }
    out
}
