//! Run metrics: anchor density, coverage increase, and localization error
//! statistics with percentiles and an empirical CDF.

use thiserror::Error;

use crate::model::{Position, RadioMap};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("radio map bounds enclose zero area")]
    ZeroAreaBounds,
    #[error("baseline density must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error("cannot compute error statistics over an empty estimate list")]
    EmptyEstimates,
    #[error("baseline {0} error is zero; relative improvement is undefined")]
    ZeroBaseline(&'static str),
}

/// Before/after anchor density with the relative coverage gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub before: f64,
    pub after: f64,
    pub increase_percent: f64,
}

impl DensityReport {
    pub fn new(before: f64, after: f64) -> Result<Self, EvalError> {
        Ok(Self {
            before,
            after,
            increase_percent: coverage_increase(before, after)?,
        })
    }
}

/// Localization error statistics in meters. Percentiles interpolate
/// linearly on the sorted errors; the CDF is the empirical step function.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub mean: f64,
    pub median: f64,
    pub p75: f64,
    pub p90: f64,
    pub max: f64,
    pub cdf: Vec<(f64, f64)>,
}

/// Anchors per square meter of the map's bounds.
pub fn anchor_density(map: &RadioMap) -> Result<f64, EvalError> {
    let area = map.bounds().area();
    if area <= 0.0 {
        return Err(EvalError::ZeroAreaBounds);
    }
    Ok(map.len() as f64 / area)
}

/// Relative density gain in percent: `(after - before) / before * 100`.
pub fn coverage_increase(before: f64, after: f64) -> Result<f64, EvalError> {
    if !(before > 0.0) {
        return Err(EvalError::NonPositiveBaseline(before));
    }
    Ok((after - before) / before * 100.0)
}

/// Error statistics over (estimated, true) position pairs.
pub fn error_stats(pairs: &[(Position, Position)]) -> Result<ErrorStats, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyEstimates);
    }
    let mut errors: Vec<f64> = pairs
        .iter()
        .map(|(estimate, truth)| estimate.distance(*truth))
        .collect();
    errors.sort_by(f64::total_cmp);
    let n = errors.len();
    let mean = errors.iter().sum::<f64>() / n as f64;
    let cdf = errors
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, (i + 1) as f64 / n as f64))
        .collect();
    Ok(ErrorStats {
        mean,
        median: percentile(&errors, 0.5),
        p75: percentile(&errors, 0.75),
        p90: percentile(&errors, 0.9),
        max: errors[n - 1],
        cdf,
    })
}

/// Linear-interpolation percentile over sorted samples.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Headline accuracy improvement in percent, on the median error.
pub fn improvement(baseline: &ErrorStats, enhanced: &ErrorStats) -> Result<f64, EvalError> {
    if !(baseline.median > 0.0) {
        return Err(EvalError::ZeroBaseline("median"));
    }
    Ok((baseline.median - enhanced.median) / baseline.median * 100.0)
}

/// Secondary improvement column, on the mean error.
pub fn mean_improvement(baseline: &ErrorStats, enhanced: &ErrorStats) -> Result<f64, EvalError> {
    if !(baseline.mean > 0.0) {
        return Err(EvalError::ZeroBaseline("mean"));
    }
    Ok((baseline.mean - enhanced.mean) / baseline.mean * 100.0)
}
