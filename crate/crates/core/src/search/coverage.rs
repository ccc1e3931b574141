use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{GateRecord, SearchError};

pub const HISTOGRAM_BINS: usize = 90;
const DISTINCT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStats {
    pub count: usize,
    pub max_gap: f64,
    pub mean_gap: f64,
    /// Counts over `HISTOGRAM_BINS` equal bins of the covered interval.
    pub angle_histogram: Vec<u64>,
}

/// Gap statistics of the ZZ angles over `[0, π/2]`.
pub fn coverage_stats(records: &[GateRecord]) -> CoverageStats {
    let angles: Vec<f64> = records.iter().map(|r| r.zz_angle).collect();
    coverage_stats_on(&angles, FRAC_PI_2)
}

/// Gap statistics of arbitrary angles over `[0, upper]`; gaps include the
/// distances from the smallest angle to 0 and from the largest to `upper`,
/// and angles closer than `1e-6` count once.
pub fn coverage_stats_on(angles: &[f64], upper: f64) -> CoverageStats {
    let mut sorted: Vec<f64> = angles.iter().map(|a| a.clamp(0.0, upper)).collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup_by(|b, a| (*b - *a).abs() < DISTINCT_TOL);

    let mut histogram = vec![0u64; HISTOGRAM_BINS];
    for &a in angles {
        let bin = ((a / upper) * HISTOGRAM_BINS as f64).floor();
        let bin = (bin.max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin] += 1;
    }

    let mut edges = Vec::with_capacity(sorted.len() + 2);
    edges.push(0.0);
    edges.extend_from_slice(&sorted);
    edges.push(upper);
    let gaps: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;

    CoverageStats {
        count: angles.len(),
        max_gap,
        mean_gap,
        angle_histogram: histogram,
    }
}

/// CSV: the `count,max_gap,mean_gap` header and row, then one
/// `bin_start,bin_end,count` row per histogram bin.
pub fn write_coverage_csv<W: Write>(out: W, stats: &CoverageStats, upper: f64) -> Result<(), SearchError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(["count", "max_gap", "mean_gap"])?;
    w.write_record([
        stats.count.to_string(),
        stats.max_gap.to_string(),
        stats.mean_gap.to_string(),
    ])?;
    w.write_record(["bin_start", "bin_end", "count"])?;
    let width = upper / stats.angle_histogram.len() as f64;
    for (i, c) in stats.angle_histogram.iter().enumerate() {
        w.write_record([
            (i as f64 * width).to_string(),
            ((i + 1) as f64 * width).to_string(),
            c.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
