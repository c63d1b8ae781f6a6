//! Displacement metrics over fixed-length point sequences.

use crate::forecast::{ForecastError, ForecastSet};
use crate::math;

fn check_len(set: &ForecastSet, truth: &[(f64, f64)]) -> Result<(), ForecastError> {
    for path in &set.paths {
        if path.len() != truth.len() {
            return Err(ForecastError::LengthMismatch {
                forecast: path.len(),
                truth: truth.len(),
            });
        }
    }
    Ok(())
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    math::hypot(a.0 - b.0, a.1 - b.1)
}

/// Average displacement of one path against the truth.
pub fn ade(path: &[(f64, f64)], truth: &[(f64, f64)]) -> f64 {
    let total: f64 = path.iter().zip(truth).map(|(&p, &t)| dist(p, t)).sum();
    total / truth.len() as f64
}

/// Final-point displacement of one path against the truth.
pub fn fde(path: &[(f64, f64)], truth: &[(f64, f64)]) -> f64 {
    dist(*path.last().unwrap(), *truth.last().unwrap())
}

/// Minimum over the forecast set of the mean pointwise displacement.
pub fn min_ade(set: &ForecastSet, truth: &[(f64, f64)]) -> Result<f64, ForecastError> {
    check_len(set, truth)?;
    Ok(set
        .paths
        .iter()
        .map(|p| ade(p, truth))
        .fold(f64::INFINITY, f64::min))
}

/// Minimum over the forecast set of the final-point displacement.
pub fn min_fde(set: &ForecastSet, truth: &[(f64, f64)]) -> Result<f64, ForecastError> {
    check_len(set, truth)?;
    Ok(set
        .paths
        .iter()
        .map(|p| fde(p, truth))
        .fold(f64::INFINITY, f64::min))
}
