use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

use super::mixture::metropolis_accept;
use super::{ChainState, Sampler};

/// Log target density up to an additive constant.
pub type LogTarget = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Named log-densities selectable from a configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinTarget {
    /// Independent standard normals.
    Gaussian,
    /// Independent standard Laplace.
    Laplace,
}

impl BuiltinTarget {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(BuiltinTarget::Gaussian),
            "laplace" => Ok(BuiltinTarget::Laplace),
            other => Err(Error::config(format!("unknown target {other:?} (expected gaussian or laplace)"))),
        }
    }

    pub fn log_target(self) -> LogTarget {
        match self {
            BuiltinTarget::Gaussian => Arc::new(|x: &[f64]| -0.5 * x.iter().map(|v| v * v).sum::<f64>()),
            BuiltinTarget::Laplace => Arc::new(|x: &[f64]| -x.iter().map(|v| v.abs()).sum::<f64>()),
        }
    }
}

/// Component-wise normal random-walk Metropolis for an arbitrary log-density.
#[derive(Clone)]
pub struct RandomWalkMetropolis {
    log_target: LogTarget,
    scales: Vec<f64>,
    start: Vec<f64>,
    proposed: u64,
    accepted: u64,
    nan_rejections: u64,
}

impl fmt::Debug for RandomWalkMetropolis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomWalkMetropolis")
            .field("scales", &self.scales)
            .field("start", &self.start)
            .field("accepted", &self.accepted)
            .field("proposed", &self.proposed)
            .field("nan_rejections", &self.nan_rejections)
            .finish()
    }
}

impl RandomWalkMetropolis {
    pub fn new(log_target: LogTarget, scales: Vec<f64>, start: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::config("random walk needs at least one proposal scale"));
        }
        if let Some(s) = scales.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::config(format!("proposal scales must be positive, got {s}")));
        }
        if start.len() != scales.len() {
            return Err(Error::config(format!(
                "start has dimension {}, scales have {}",
                start.len(),
                scales.len()
            )));
        }
        Ok(RandomWalkMetropolis {
            log_target,
            scales,
            start,
            proposed: 0,
            accepted: 0,
            nan_rejections: 0,
        })
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Number of proposals rejected because the log target returned NaN.
    pub fn nan_rejections(&self) -> u64 {
        self.nan_rejections
    }

    /// One sweep over the coordinates in order.
    pub fn rw_metropolis_generic_step(&mut self, state: &mut ChainState, rng: &mut RngStream) {
        let mut current = (self.log_target)(&state.coords);
        for k in 0..self.scales.len() {
            let old = state.coords[k];
            state.coords[k] = old + self.scales[k] * rng.standard_normal();
            let proposed = (self.log_target)(&state.coords);
            let u = rng.uniform();
            self.proposed += 1;
            if proposed.is_nan() {
                self.nan_rejections += 1;
                state.coords[k] = old;
            } else if metropolis_accept(current, proposed, u) {
                self.accepted += 1;
                current = proposed;
            } else {
                state.coords[k] = old;
            }
        }
        state.iteration += 1;
    }
}

impl Sampler for RandomWalkMetropolis {
    fn dim(&self) -> usize {
        self.scales.len()
    }

    fn start(&self) -> ChainState {
        ChainState::new(self.start.clone())
    }

    fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) {
        self.rw_metropolis_generic_step(state, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::testutil::summary;
    use crate::samplers::trajectory;

    #[test]
    fn constant_target_accepts_everything() {
        let mut s = RandomWalkMetropolis::new(Arc::new(|_: &[f64]| 3.0), vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let mut rng = RngStream::new(0, 0);
        let mut st = s.start();
        for _ in 0..1000 {
            s.step(&mut st, &mut rng);
        }
        assert_eq!(s.acceptance_rate(), 1.0);
    }

    #[test]
    fn nan_target_rejects_and_counts() {
        let mut s = RandomWalkMetropolis::new(
            Arc::new(|x: &[f64]| if x[0] > 0.0 { f64::NAN } else { 0.0 }),
            vec![1.0],
            vec![-0.5],
        )
        .unwrap();
        let mut rng = RngStream::new(1, 0);
        let mut st = s.start();
        for _ in 0..500 {
            s.step(&mut st, &mut rng);
            assert!(st.coords[0] <= 0.0);
        }
        assert!(s.nan_rejections() > 0);
    }

    #[test]
    fn standard_normal_target() {
        let mut s = RandomWalkMetropolis::new(BuiltinTarget::Gaussian.log_target(), vec![2.4], vec![0.0]).unwrap();
        let mut rng = RngStream::new(2, 0);
        let t = trajectory(&mut s, &mut rng, 400_000, 0);
        let (m, v, se) = summary(&t);
        assert!(m.abs() < 4.0 * se, "mean {m} se {se}");
        assert!((v.sqrt() - 1.0).abs() < 0.03, "sd {}", v.sqrt());
    }

    #[test]
    fn config_errors() {
        let t = BuiltinTarget::Gaussian.log_target();
        assert!(matches!(RandomWalkMetropolis::new(t.clone(), vec![0.0], vec![0.0]), Err(Error::Config(_))));
        assert!(RandomWalkMetropolis::new(t.clone(), vec![-1.0], vec![0.0]).is_err());
        assert!(RandomWalkMetropolis::new(t, vec![1.0, 1.0], vec![0.0]).is_err());
        assert!(BuiltinTarget::parse("rosenbrock").is_err());
    }
}
