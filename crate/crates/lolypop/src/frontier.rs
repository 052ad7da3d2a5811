//! Quality frontiers, operating regions and integral comparisons computed
//! from sweep result rows.

use std::collections::BTreeSet;
use std::path::Path;

use lolypop_core::analysis::{
    integral_compare, operating_region, quality_frontier, Comparison, FrontierCurve, OperatingPoint, MEAN_TRACE_ID,
};
use serde::{Deserialize, Serialize};

use crate::io;
use crate::sweep::ResultRow;
use crate::Result;

/// Successful rows of `algorithm` for one trace id (or the mean rows).
pub fn operating_points(rows: &[ResultRow], algorithm: &str, trace_id: &str) -> Vec<OperatingPoint> {
    rows.iter()
        .filter(|r| r.is_ok() && r.algorithm == algorithm && r.trace_id == trace_id)
        .filter_map(|r| {
            Some(OperatingPoint {
                config_id: r.config_id.clone(),
                trace_id: r.trace_id.clone(),
                sigma: r.sigma?,
                omega: r.omega?,
                mean_quality: r.quality(),
            })
        })
        .collect()
}

pub fn algorithms(rows: &[ResultRow]) -> Vec<String> {
    rows.iter().map(|r| r.algorithm.clone()).collect::<BTreeSet<_>>().into_iter().collect()
}

fn trace_ids(rows: &[ResultRow]) -> Vec<String> {
    rows.iter().filter(|r| !r.is_mean()).map(|r| r.trace_id.clone()).collect::<BTreeSet<_>>().into_iter().collect()
}

pub fn frontier_for(rows: &[ResultRow], algorithm: &str, scope: &str, sigma_grid: &[f64], omegas: &[f64]) -> Vec<FrontierCurve> {
    quality_frontier(&operating_points(rows, algorithm, scope), sigma_grid, omegas)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub algorithm: String,
    pub omega_threshold: f64,
    pub sigma_bound: f64,
    pub quality: f64,
    pub config_id: String,
    pub sigma: f64,
    pub omega: f64,
    /// Upper concave hull evaluated at this grid point.
    pub hull_quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullRow {
    pub algorithm: String,
    pub omega_threshold: f64,
    pub sigma: f64,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub algorithm: String,
    pub config_id: String,
    pub sigma: f64,
    pub omega: f64,
}

const FRONTIER_HEADER: [&str; 8] =
    ["algorithm", "omega_threshold", "sigma_bound", "quality", "config_id", "sigma", "omega", "hull_quality"];

/// Writes `frontier.csv`, `hull.csv` and `region.csv` for every algorithm
/// found in the mean rows.
pub fn write_frontiers(dir: impl AsRef<Path>, rows: &[ResultRow], sigma_grid: &[f64], omegas: &[f64]) -> Result<()> {
    let dir = dir.as_ref();
    let (mut raw, mut hull, mut region) = (Vec::new(), Vec::new(), Vec::new());
    for algo in algorithms(rows) {
        let points = operating_points(rows, &algo, MEAN_TRACE_ID);
        for (config_id, sigma, omega) in operating_region(&points) {
            region.push(RegionRow { algorithm: algo.clone(), config_id, sigma, omega });
        }
        for curve in quality_frontier(&points, sigma_grid, omegas) {
            for p in &curve.raw {
                raw.push(FrontierRow {
                    algorithm: algo.clone(),
                    omega_threshold: curve.omega_threshold,
                    sigma_bound: p.sigma_bound,
                    quality: p.quality,
                    config_id: p.config_id.clone(),
                    sigma: p.sigma,
                    omega: p.omega,
                    hull_quality: lolypop_core::analysis::interpolate(&curve.hull, p.sigma_bound).unwrap_or(p.quality),
                });
            }
            for &(sigma, quality) in &curve.hull {
                hull.push(HullRow { algorithm: algo.clone(), omega_threshold: curve.omega_threshold, sigma, quality });
            }
        }
    }
    io::write_csv(dir.join("frontier.csv"), &raw, &FRONTIER_HEADER)?;
    io::write_csv(dir.join("hull.csv"), &hull, &["algorithm", "omega_threshold", "sigma", "quality"])?;
    io::write_csv(dir.join("region.csv"), &region, &["algorithm", "config_id", "sigma", "omega"])?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    /// Trace id, or the mean over traces.
    pub scope: String,
    pub omega_threshold: f64,
    pub a: String,
    pub b: String,
    pub result: Comparison,
    pub range_lo: Option<f64>,
    pub range_hi: Option<f64>,
    pub integral_a: Option<f64>,
    pub integral_b: Option<f64>,
}

pub const COMPARE_HEADER: [&str; 9] =
    ["scope", "omega_threshold", "a", "b", "result", "range_lo", "range_hi", "integral_a", "integral_b"];

/// Compares the hulls of two algorithms' frontiers, over the mean rows and
/// then for each trace separately.
pub fn compare(rows: &[ResultRow], a: &str, b: &str, sigma_grid: &[f64], omegas: &[f64]) -> Vec<CompareRow> {
    let mut scopes = vec![MEAN_TRACE_ID.to_string()];
    scopes.extend(trace_ids(rows));
    let mut out = Vec::new();
    for scope in scopes {
        let fa = frontier_for(rows, a, &scope, sigma_grid, omegas);
        let fb = frontier_for(rows, b, &scope, sigma_grid, omegas);
        for (ca, cb) in fa.iter().zip(&fb) {
            let c = integral_compare(&ca.hull, &cb.hull);
            out.push(CompareRow {
                scope: scope.clone(),
                omega_threshold: ca.omega_threshold,
                a: a.into(),
                b: b.into(),
                result: c.result,
                range_lo: c.range.map(|r| r.0),
                range_hi: c.range.map(|r| r.1),
                integral_a: c.integral_a,
                integral_b: c.integral_b,
            });
        }
    }
    out
}
