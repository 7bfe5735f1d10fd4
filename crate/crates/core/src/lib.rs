//! Fixed-width sequential stopping rules for Markov chain Monte Carlo.
//!
//! A simulation is stopped the first time a confidence interval for each
//! target parameter is narrow enough: narrower than a fixed tolerance
//! (absolute precision), than a fraction of the estimate's magnitude
//! (relative magnitude), or than a fraction of the target's posterior
//! standard deviation (relative standard deviation). Interval widths come
//! from batch means estimates of the asymptotic variance, for both means and
//! quantiles.
//!
//! ```
//! use seqstop::{run_sequential, samplers::IndependenceExp, ParameterSpec, RngStream, RuleKind, StoppingRule};
//!
//! let specs = [ParameterSpec::mean("mean", 0)];
//! let rule = StoppingRule::new(RuleKind::RelStdDev, 0.10, 0.10, 1000, 500);
//! let res = run_sequential(&mut IndependenceExp::default(), &specs, &rule, &mut RngStream::new(1, 0)).unwrap();
//! assert!(!res.capped);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod interval;
pub mod mcse;
pub mod normal;
pub mod quantile;
pub mod rng;
pub mod samplers;
pub mod stopping;
pub mod types;

pub use error::{Error, Result};
pub use interval::{halfwidth, interval_contains};
pub use mcse::{batch_size, bm_variance, mean_estimate, BatchMode, BatchSchedule};
pub use normal::normal_quantile;
pub use quantile::{empirical_quantile, quantile_variance, QuantileEstimate};
pub use rng::RngStream;
pub use stopping::{
    bonferroni_delta, criterion_met, penalty, run_sequential, run_sequential_shared, threshold,
    BatchMeansEstimator, Estimator, PointEstimate, RuleKind, StopPlan, StoppingResult, StoppingRule,
};
pub use types::{IntervalEstimate, ParameterKind, ParameterSpec, TracePool};
