//! Relative prediction errors and download success probabilities.
//!
//! Every virtual second the session records, per horizon `T`, the signed
//! relative error between the prediction made `T` seconds ago and the
//! throughput measured since. The ECDF of these signed errors turns a fresh
//! prediction into a probability that a segment of a given size downloads
//! within a given budget.

use alloc::vec::Vec;

use crate::predict::PredictionRecord;
use crate::{Error, Result};

mod fit;
mod history;
mod simplex;

pub use fit::{
    fit_truncated, ks_p_value, ks_statistic, split_magnitudes, truncated_l2_objective, Family, FittedDistribution, Side,
    MIN_FIT_SAMPLES,
};
pub use history::{ErrorHistory, SignedEcdf, SignedRelError, DEFAULT_MIN_SAMPLES, DEFAULT_RHO_MIN};

/// Sentinel success probability meaning "no estimate available".
pub const NO_ESTIMATE: f64 = -1.0;

/// Absolute relative prediction error with both sides clamped at `rho_min`.
pub fn rel_error(rho_hat: f64, rho: f64, rho_min: f64) -> f64 {
    let p = rho_hat.max(rho_min);
    let m = rho.max(rho_min);
    crate::math::abs(p - m) / m
}

/// Signed relative prediction error; negative values are underestimations.
/// The result is always greater than -1.
pub fn signed_rel_error(rho_hat: f64, rho: f64, rho_min: f64) -> f64 {
    let p = rho_hat.max(rho_min);
    let m = rho.max(rho_min);
    (p - m) / m
}

/// Picks the shortest available prediction interval `[t_pi, t_pi + T]`
/// covering `[t_r, t_p]`; among equally short ones the most recent wins.
pub fn select_prediction_interval(
    records: &[PredictionRecord],
    t_r: f64,
    t_p: f64,
    t_max: u32,
) -> Option<&PredictionRecord> {
    let mut best: Option<&PredictionRecord> = None;
    for r in records.iter().filter(|r| r.is_available() && r.horizon >= 1 && r.horizon <= t_max) {
        let start = r.t as f64;
        if start > t_r || start + (r.horizon as f64) < t_p {
            continue;
        }
        best = match best {
            Some(b) if (b.horizon, -b.t) <= (r.horizon, -r.t) => Some(b),
            _ => Some(r),
        };
    }
    best
}

fn check_success_inputs(record: &PredictionRecord, t_r: f64, t_p: f64) -> Result<()> {
    let start = record.t as f64;
    if !(start <= t_r && t_r < t_p && t_p <= start + record.horizon as f64) {
        return Err(Error::Contract(alloc::format!(
            "prediction interval [{}, {}] does not cover request window [{t_r}, {t_p}]",
            record.t,
            record.t + record.horizon as i64
        )));
    }
    Ok(())
}

/// Estimated probability that `size_bits` download within `[t_r, t_p]`,
/// given the prediction `record` and the signed error ECDF at time `now`.
/// Returns [`NO_ESTIMATE`] when the ECDF or the prediction is unavailable.
pub fn success_probability(
    history: &ErrorHistory,
    record: &PredictionRecord,
    size_bits: f64,
    t_r: f64,
    t_p: f64,
    now: f64,
) -> Result<f64> {
    Ok(success_probabilities(history, record, &[size_bits], t_r, t_p, now)?[0])
}

/// [`success_probability`] for several segment sizes sharing one ECDF.
pub fn success_probabilities(
    history: &ErrorHistory,
    record: &PredictionRecord,
    sizes_bits: &[f64],
    t_r: f64,
    t_p: f64,
    now: f64,
) -> Result<Vec<f64>> {
    if let Some(&bad) = sizes_bits.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument(alloc::format!("segment size must be positive, got {bad}")));
    }
    check_success_inputs(record, t_r, t_p)?;
    let (Some(rho_hat), Some(ecdf)) = (record.rho_hat, history.ecdf(record.horizon, now)) else {
        return Ok(alloc::vec![NO_ESTIMATE; sizes_bits.len()]);
    };
    let budget = t_p - t_r;
    Ok(sizes_bits
        .iter()
        .map(|&s| ecdf.eval(rho_hat * budget / s - 1.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const MBPS: f64 = 1e6;

    #[test]
    fn rel_error_examples() {
        assert!((rel_error(5.0 * MBPS, 4.0 * MBPS, 1e4) - 0.25).abs() < 1e-15);
        assert_eq!(rel_error(-1.0, 5e3, 1e4), 0.0);
        assert_eq!(rel_error(3.3e6, 3.3e6, 1e4), 0.0);
    }

    #[test]
    fn signed_examples() {
        assert_eq!(signed_rel_error(2.0 * MBPS, 4.0 * MBPS, 1e4), -0.5);
        assert_eq!(signed_rel_error(6.0 * MBPS, 4.0 * MBPS, 1e4), 0.5);
        let s = signed_rel_error(4.0 * MBPS, 8.0 * MBPS, 1e4);
        assert_eq!(s, -0.5);
        assert_eq!(s.abs(), rel_error(4.0 * MBPS, 8.0 * MBPS, 1e4));
        assert!(signed_rel_error(-1e9, 1e12, 1e4) > -1.0);
    }

    fn grid_records(missing_t: Option<i64>) -> Vec<PredictionRecord> {
        let mut v = Vec::new();
        for t in 0..=10 {
            for horizon in 1..=10 {
                let rho_hat = (Some(t) != missing_t).then_some(1e6);
                v.push(PredictionRecord { t, horizon, rho_hat });
            }
        }
        v
    }

    #[test]
    fn interval_selection() {
        let recs = grid_records(None);
        let r = select_prediction_interval(&recs, 10.4, 12.0, 10).unwrap();
        assert_eq!((r.t, r.horizon), (10, 2));
        let recs = grid_records(Some(10));
        let r = select_prediction_interval(&recs, 10.4, 12.0, 10).unwrap();
        assert_eq!((r.t, r.horizon), (9, 3));
        assert!(select_prediction_interval(&[], 10.4, 12.0, 10).is_none());
        // Exact integer request: [t_r, t_p] = [4, 7] is covered by (4, 3).
        let recs = grid_records(None);
        let r = select_prediction_interval(&recs, 4.0, 7.0, 10).unwrap();
        assert_eq!((r.t, r.horizon), (4, 3));
    }

    fn four_entry_history() -> ErrorHistory {
        let mut h = ErrorHistory::new(10);
        for (k, v) in [-0.2, -0.2, 0.25, 0.25].into_iter().enumerate() {
            h.record(k as i64, 3, v);
        }
        h
    }

    #[test]
    fn success_probability_examples() {
        let h = four_entry_history();
        let rec = PredictionRecord { t: 10, horizon: 3, rho_hat: Some(10.0 * MBPS) };
        let p = success_probability(&h, &rec, 24.0 * MBPS, 10.0, 13.0, 10.0).unwrap();
        assert_eq!(p, 1.0);
        let p = success_probability(&h, &rec, 40.0 * MBPS, 10.0, 13.0, 10.0).unwrap();
        assert_eq!(p, 0.0);
        let empty = ErrorHistory::new(10);
        let p = success_probability(&empty, &rec, 24.0 * MBPS, 10.0, 13.0, 10.0).unwrap();
        assert_eq!(p, NO_ESTIMATE);
        assert!(success_probability(&h, &rec, 0.0, 10.0, 13.0, 10.0).is_err());
        assert!(matches!(
            success_probability(&h, &rec, 1.0, 10.0, 13.5, 10.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn unavailable_prediction_gives_sentinel() {
        let h = four_entry_history();
        let rec = PredictionRecord { t: 10, horizon: 3, rho_hat: None };
        let p = success_probabilities(&h, &rec, &[1.0, 2.0], 10.0, 12.0, 10.0).unwrap();
        assert_eq!(p, vec![NO_ESTIMATE; 2]);
    }
}
