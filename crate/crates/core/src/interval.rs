//! Confidence-interval construction from a standard-error estimate.

use crate::error::{Error, Result};
use crate::normal::critical_value;
use crate::types::IntervalEstimate;

/// Half-width `z_{delta/2} * sigma_hat / sqrt(n)`.
pub fn halfwidth(sigma_hat: f64, n: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("half-width needs n >= 1"));
    }
    if !(sigma_hat >= 0.0) {
        return Err(Error::domain(format!("sigma_hat must be >= 0, got {sigma_hat}")));
    }
    Ok(critical_value(delta)? * sigma_hat / (n as f64).sqrt())
}

/// Whether `truth` lies in the open interval `(point - hw, point + hw)`.
pub fn interval_contains(est: &IntervalEstimate, truth: f64) -> bool {
    (est.point - truth).abs() < est.half_width
}
