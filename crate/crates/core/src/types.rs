//! Domain types shared by the estimators, the stopping driver and the harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::halfwidth;

/// What a parameter estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ParameterKind {
    Mean,
    Quantile { q: f64 },
}

impl ParameterKind {
    pub fn quantile_level(&self) -> Option<f64> {
        match *self {
            ParameterKind::Mean => None,
            ParameterKind::Quantile { q } => Some(q),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ParameterKind::Mean => "mean",
            ParameterKind::Quantile { .. } => "quantile",
        }
    }
}

/// A scalar feature of the target to estimate: the mean or a `q`-quantile of
/// one coordinate of the chain state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: ParameterKind,
    /// Index of the chain coordinate this parameter tracks.
    pub component: usize,
}

impl ParameterSpec {
    pub fn mean(id: impl Into<String>, component: usize) -> Self {
        ParameterSpec {
            id: id.into(),
            kind: ParameterKind::Mean,
            component,
        }
    }

    pub fn quantile(id: impl Into<String>, q: f64, component: usize) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {q}")));
        }
        Ok(ParameterSpec {
            id: id.into(),
            kind: ParameterKind::Quantile { q },
            component,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let ParameterKind::Quantile { q } = self.kind {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::domain(format!(
                    "parameter {}: quantile level must lie in (0, 1), got {q}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Checks a parameter list: every spec valid, ids unique.
pub fn validate_specs(specs: &[ParameterSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::config("at least one parameter is required"));
    }
    for (i, spec) in specs.iter().enumerate() {
        spec.validate()?;
        if specs[..i].iter().any(|s| s.id == spec.id) {
            return Err(Error::config(format!("duplicate parameter id {:?}", spec.id)));
        }
    }
    Ok(())
}

/// Append-only per-parameter trajectories `g(X_0), ..., g(X_{n-1})`.
#[derive(Debug, Clone, Default)]
pub struct TracePool {
    columns: Vec<Vec<f64>>,
    len: usize,
}

impl TracePool {
    pub fn new(width: usize) -> Self {
        TracePool {
            columns: vec![Vec::new(); width],
            len: 0,
        }
    }

    pub fn with_capacity(width: usize, capacity: usize) -> Self {
        TracePool {
            columns: (0..width).map(|_| Vec::with_capacity(capacity)).collect(),
            len: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends one value per parameter.
    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::domain(format!(
                "trace row has {} values, pool has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (col, &v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
        self.len += 1;
        Ok(())
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    /// The first `n` values of column `i`.
    pub fn prefix(&self, i: usize, n: usize) -> &[f64] {
        &self.columns[i][..n.min(self.len)]
    }
}

/// Point estimate with its Monte Carlo standard error and interval half-width
/// at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub n: usize,
    pub point: f64,
    /// Estimate of the asymptotic standard deviation in the CLT.
    pub sigma_hat: f64,
    /// Estimate of the target-scale (posterior standard deviation) of the parameter.
    pub lambda_hat: f64,
    pub half_width: f64,
    pub delta: f64,
}

impl IntervalEstimate {
    pub fn new(n: usize, point: f64, sigma_hat: f64, lambda_hat: f64, delta: f64) -> Result<Self> {
        let half_width = halfwidth(sigma_hat, n, delta)?;
        Ok(IntervalEstimate {
            n,
            point,
            sigma_hat,
            lambda_hat,
            half_width,
            delta,
        })
    }

    /// Monte Carlo standard error `sigma_hat / sqrt(n)`.
    pub fn mcse(&self) -> f64 {
        self.sigma_hat / (self.n as f64).sqrt()
    }

    /// Full interval width.
    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn lower(&self) -> f64 {
        self.point - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.point + self.half_width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_pool_rows_stay_aligned() {
        let mut pool = TracePool::new(2);
        pool.push(&[1.0, 2.0]).unwrap();
        pool.push(&[3.0, 4.0]).unwrap();
        assert_eq!(pool.len(), 2);
        assert_eq!(pool.column(1), &[2.0, 4.0]);
        assert_eq!(pool.prefix(0, 1), &[1.0]);
        assert!(pool.push(&[1.0]).is_err());
        assert_eq!(pool.len(), 2);
    }

    #[test]
    fn spec_validation() {
        assert!(ParameterSpec::quantile("q", 0.0, 0).is_err());
        assert!(ParameterSpec::quantile("q", 1.0, 0).is_err());
        let specs = vec![ParameterSpec::mean("a", 0), ParameterSpec::mean("a", 1)];
        assert!(matches!(validate_specs(&specs), Err(Error::Config(_))));
        assert!(validate_specs(&[]).is_err());
    }

    #[test]
    fn estimate_half_width_consistent() {
        let est = IntervalEstimate::new(100, 0.5, 1.0, 1.0, 0.10).unwrap();
        assert_eq!(est.half_width, halfwidth(1.0, 100, 0.10).unwrap());
        assert!((est.width() - 2.0 * est.half_width).abs() < 1e-15);
        assert!((est.mcse() - 0.1).abs() < 1e-15);
    }
}
