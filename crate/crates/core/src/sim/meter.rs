use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::trace::ThroughputTrace;
use crate::{Error, Result};

/// One completed or aborted download.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownloadRecord {
    pub start: f64,
    pub end: f64,
    pub bits: f64,
}

impl DownloadRecord {
    /// Bits attributed to `[t1, t2]` assuming a uniform rate over the record,
    /// and the length of the overlap.
    fn overlap(&self, t1: f64, t2: f64) -> (f64, f64) {
        let lo = self.start.max(t1);
        let hi = self.end.min(t2);
        let len = self.end - self.start;
        if hi <= lo || len <= 0.0 {
            return (0.0, 0.0);
        }
        let d = hi - lo;
        (self.bits * d / len, d)
    }
}

/// Average throughput over the download activity that intersects
/// `[t1, t2]`; idle time between downloads is excluded. `None` when no
/// download overlaps the window.
pub fn measure_throughput(records: &[DownloadRecord], t1: f64, t2: f64) -> Option<f64> {
    measure_iter(records.iter(), t1, t2)
}

fn measure_iter<'a>(records: impl Iterator<Item = &'a DownloadRecord>, t1: f64, t2: f64) -> Option<f64> {
    let (bits, time) = records.fold((0.0, 0.0), |(b, d), r| {
        let (rb, rd) = r.overlap(t1, t2);
        (b + rb, d + rd)
    });
    (time > 0.0).then(|| bits / time)
}

/// Download history of a session, kept in time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ThroughputMeter {
    records: Vec<DownloadRecord>,
}

impl ThroughputMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[DownloadRecord] {
        &self.records
    }

    /// Appends a record; downloads are sequential so it must not start
    /// before the previous one ended.
    pub fn push(&mut self, r: DownloadRecord) -> Result<()> {
        if !(r.end >= r.start) || !(r.bits >= 0.0) {
            return Err(Error::Contract(alloc::format!("malformed download record {r:?}")));
        }
        if let Some(last) = self.records.last() {
            if r.start < last.end {
                return Err(Error::Contract(alloc::format!(
                    "download starting at {} overlaps the previous one ending at {}",
                    r.start, last.end
                )));
            }
        }
        self.records.push(r);
        Ok(())
    }

    /// Drops records that ended before `t`.
    pub fn forget_before(&mut self, t: f64) {
        let keep = self.records.partition_point(|r| r.end < t);
        self.records.drain(..keep);
    }

    pub fn measure(&self, t1: f64, t2: f64) -> Option<f64> {
        measure_throughput(&self.records, t1, t2)
    }

    /// Like [`measure`](Self::measure), also counting an in-progress download.
    pub fn measure_with(&self, partial: Option<&DownloadRecord>, t1: f64, t2: f64) -> Option<f64> {
        measure_iter(self.records.iter().chain(partial), t1, t2)
    }
}

/// Result of downloading one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DownloadOutcome {
    Completed { t_c: f64 },
    /// Severed at the deadline after delivering `delivered` bits.
    Aborted { delivered: f64 },
}

/// Downloads `size_bits` starting at `t_start` over the trace's
/// piecewise-constant rate, aborting at `deadline`.
pub fn simulate_download(
    trace: &ThroughputTrace,
    t_start: f64,
    size_bits: f64,
    deadline: f64,
) -> Result<DownloadOutcome> {
    if !(t_start >= 0.0 && t_start < deadline && deadline <= trace.duration() as f64) {
        return Err(Error::Contract(alloc::format!(
            "download window [{t_start}, {deadline}] outside trace of {} s",
            trace.duration()
        )));
    }
    if !(size_bits > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("segment size must be positive, got {size_bits}")));
    }
    let samples = trace.samples();
    let mut t = t_start;
    let mut remaining = size_bits;
    while t < deadline {
        let sec = crate::math::floor(t);
        let rate = samples[sec as usize];
        let until = (sec + 1.0).min(deadline);
        let can = rate * (until - t);
        if can >= remaining {
            return Ok(DownloadOutcome::Completed { t_c: (t + remaining / rate).min(until) });
        }
        remaining -= can;
        t = until;
    }
    Ok(DownloadOutcome::Aborted { delivered: size_bits - remaining })
}
