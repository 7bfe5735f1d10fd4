//! Sequential fixed-width stopping rules.
//!
//! Each rule stops the first time `2 z sigma_hat / sqrt(n) + p(n)` falls to or
//! below a threshold: `eps` (absolute precision), `eps |theta_hat|` (relative
//! magnitude) or `eps lambda_hat` (relative standard deviation). The penalty
//! `p(n) = eps I(n < n*) + 1/n` keeps the rule from firing while the variance
//! estimate is still unstable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcse::{bm_variance, mean_estimate, BatchSchedule};
use crate::quantile::quantile_variance;
use crate::rng::RngStream;
use crate::samplers::Sampler;
use crate::types::{validate_specs, IntervalEstimate, ParameterKind, ParameterSpec, TracePool};

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Absolute,
    RelMagnitude,
    RelStdDev,
}

impl RuleKind {
    pub fn short_name(self) -> &'static str {
        match self {
            RuleKind::Absolute => "T1",
            RuleKind::RelMagnitude => "T2",
            RuleKind::RelStdDev => "T3",
        }
    }

    /// Name used in configuration files and reports.
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Absolute => "absolute",
            RuleKind::RelMagnitude => "relative-magnitude",
            RuleKind::RelStdDev => "relative-sd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "absolute" | "t1" => Ok(RuleKind::Absolute),
            "relative-magnitude" | "rel-magnitude" | "t2" => Ok(RuleKind::RelMagnitude),
            "relative-sd" | "rel-sd" | "t3" => Ok(RuleKind::RelStdDev),
            other => Err(Error::config(format!(
                "unknown rule {other:?} (expected absolute, relative-magnitude or relative-sd)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub kind: RuleKind,
    pub epsilon: f64,
    /// Per-interval error rate; intervals have confidence `1 - delta`.
    pub delta: f64,
    /// Minimum simulation effort.
    pub n_star: usize,
    pub check_increment: usize,
    pub max_iterations: usize,
}

impl StoppingRule {
    pub fn new(kind: RuleKind, epsilon: f64, delta: f64, n_star: usize, check_increment: usize) -> Self {
        StoppingRule {
            kind,
            epsilon,
            delta,
            n_star,
            check_increment,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.n_star == 0 {
            return Err(Error::config("n_star must be >= 1"));
        }
        if self.check_increment == 0 {
            return Err(Error::config("check_increment must be >= 1"));
        }
        if self.max_iterations < self.n_star {
            return Err(Error::config(format!(
                "max_iterations ({}) is below n_star ({})",
                self.max_iterations, self.n_star
            )));
        }
        Ok(())
    }
}

/// `eps I(n < n*) + 1/n`.
pub fn penalty(n: usize, epsilon: f64, n_star: usize) -> f64 {
    let ind = if n < n_star { epsilon } else { 0.0 };
    ind + 1.0 / n.max(1) as f64
}

pub fn threshold(rule: &StoppingRule, est: &IntervalEstimate) -> f64 {
    match rule.kind {
        RuleKind::Absolute => rule.epsilon,
        RuleKind::RelMagnitude => rule.epsilon * est.point.abs(),
        RuleKind::RelStdDev => rule.epsilon * est.lambda_hat,
    }
}

/// Whether the full interval width plus penalty is within the threshold.
pub fn criterion_met(rule: &StoppingRule, est: &IntervalEstimate) -> bool {
    2.0 * est.half_width + penalty(est.n, rule.epsilon, rule.n_star) <= threshold(rule, est)
}

/// Per-interval `delta` so that `k` intervals jointly have at least
/// `overall_confidence` coverage: `1 - overall^(1/k)`.
pub fn bonferroni_delta(overall_confidence: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("Bonferroni adjustment needs k >= 1"));
    }
    if !(overall_confidence > 0.0 && overall_confidence < 1.0) {
        return Err(Error::domain(format!(
            "overall confidence must lie in (0, 1), got {overall_confidence}"
        )));
    }
    Ok(1.0 - overall_confidence.powf(1.0 / k as f64))
}

/// Point estimate with its asymptotic-sd and target-scale estimates, before
/// a confidence level is attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub point: f64,
    pub sigma_hat: f64,
    pub lambda_hat: f64,
}

/// Produces a [`PointEstimate`] for one parameter from its full trace.
pub trait Estimator {
    fn estimate(&self, trace: &[f64], kind: &ParameterKind) -> Result<PointEstimate>;
}

impl<F> Estimator for F
where
    F: Fn(&[f64], &ParameterKind) -> Result<PointEstimate>,
{
    fn estimate(&self, trace: &[f64], kind: &ParameterKind) -> Result<PointEstimate> {
        self(trace, kind)
    }
}

/// Sample mean with batch means for expectations; empirical quantile with
/// indicator batch means and a kernel density for quantiles.
#[derive(Debug, Clone, Copy, Default)]
pub struct BatchMeansEstimator {
    pub schedule: BatchSchedule,
}

impl Estimator for BatchMeansEstimator {
    fn estimate(&self, trace: &[f64], kind: &ParameterKind) -> Result<PointEstimate> {
        match *kind {
            ParameterKind::Mean => {
                let (point, lambda_hat) = mean_estimate(trace)?;
                let sigma2 = bm_variance(trace, self.schedule)?;
                Ok(PointEstimate {
                    point,
                    sigma_hat: sigma2.sqrt(),
                    lambda_hat,
                })
            }
            ParameterKind::Quantile { q } => {
                let est = quantile_variance(trace, q, self.schedule)?;
                Ok(PointEstimate {
                    point: est.xi_hat,
                    sigma_hat: est.gamma2_hat.sqrt(),
                    lambda_hat: est.lambda_hat,
                })
            }
        }
    }
}

/// A rule together with the tolerance each parameter is held to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopPlan {
    pub rule: StoppingRule,
    pub epsilons: Vec<f64>,
}

impl StopPlan {
    /// The rule's epsilon applied to every parameter.
    pub fn uniform(rule: StoppingRule, n_params: usize) -> Self {
        StopPlan {
            epsilons: vec![rule.epsilon; n_params],
            rule,
        }
    }

    fn rule_for(&self, i: usize) -> StoppingRule {
        self.rule.with_epsilon(self.epsilons[i])
    }

    fn validate(&self, n_params: usize) -> Result<()> {
        self.rule.validate()?;
        if self.epsilons.len() != n_params {
            return Err(Error::config(format!(
                "{} epsilons given for {} parameters",
                self.epsilons.len(),
                n_params
            )));
        }
        for &e in &self.epsilons {
            self.rule.with_epsilon(e).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingResult {
    pub n_stop: usize,
    /// Estimates at `n_stop`; `None` only for capped runs whose estimators
    /// were not yet defined.
    pub estimates: Vec<Option<IntervalEstimate>>,
    pub rule: StoppingRule,
    pub epsilons: Vec<f64>,
    /// True when `max_iterations` was reached before the criterion held.
    pub capped: bool,
}

/// Runs the chain and stops at the first check where every parameter meets
/// the rule.
pub fn run_sequential<S: Sampler + ?Sized>(
    sampler: &mut S,
    specs: &[ParameterSpec],
    rule: &StoppingRule,
    rng: &mut RngStream,
) -> Result<StoppingResult> {
    let plan = StopPlan::uniform(*rule, specs.len());
    let mut out = run_sequential_shared(sampler, specs, &[plan], rng, &BatchMeansEstimator::default())?;
    Ok(out.remove(0))
}

/// Evaluates several plans on prefixes of one trajectory.
///
/// The chain runs until every plan has stopped or capped; each plan's result
/// is exactly what [`run_sequential`] would give it alone on the same stream.
pub fn run_sequential_shared<S, E>(
    sampler: &mut S,
    specs: &[ParameterSpec],
    plans: &[StopPlan],
    rng: &mut RngStream,
    estimator: &E,
) -> Result<Vec<StoppingResult>>
where
    S: Sampler + ?Sized,
    E: Estimator + ?Sized,
{
    validate_specs(specs)?;
    if plans.is_empty() {
        return Err(Error::config("at least one stopping rule is required"));
    }
    for plan in plans {
        plan.validate(specs.len())?;
    }
    let dim = sampler.dim();
    if let Some(s) = specs.iter().find(|s| s.component >= dim) {
        return Err(Error::config(format!(
            "parameter {} tracks component {} but the chain has dimension {dim}",
            s.id, s.component
        )));
    }

    let mut next_check: Vec<usize> = plans.iter().map(|p| p.rule.n_star).collect();
    let mut results: Vec<Option<StoppingResult>> = vec![None; plans.len()];

    let mut state = sampler.start();
    let mut pool = TracePool::with_capacity(specs.len(), plans.iter().map(|p| p.rule.n_star).max().unwrap_or(0));
    let mut row = vec![0.0; specs.len()];
    let record = |pool: &mut TracePool, row: &mut Vec<f64>, coords: &[f64]| {
        for (slot, spec) in row.iter_mut().zip(specs) {
            *slot = coords[spec.component];
        }
        pool.push(row).expect("row width matches pool");
    };
    record(&mut pool, &mut row, &state.coords);

    while let Some(target) = (0..plans.len())
        .filter(|&i| results[i].is_none())
        .map(|i| next_check[i])
        .min()
    {
        while pool.len() < target {
            sampler.step(&mut state, rng);
            record(&mut pool, &mut row, &state.coords);
        }

        let raw: Vec<Option<PointEstimate>> = specs
            .iter()
            .enumerate()
            .map(|(i, spec)| estimator.estimate(pool.prefix(i, target), &spec.kind).ok())
            .collect();

        for (p, plan) in plans.iter().enumerate() {
            if results[p].is_some() || next_check[p] != target {
                continue;
            }
            let estimates: Vec<Option<IntervalEstimate>> = raw
                .iter()
                .map(|r| {
                    r.and_then(|r| {
                        IntervalEstimate::new(target, r.point, r.sigma_hat, r.lambda_hat, plan.rule.delta).ok()
                    })
                })
                .collect();
            let met = estimates
                .iter()
                .enumerate()
                .all(|(i, e)| e.as_ref().is_some_and(|e| criterion_met(&plan.rule_for(i), e)));
            let upcoming = target + plan.rule.check_increment;
            if met || upcoming > plan.rule.max_iterations {
                results[p] = Some(StoppingResult {
                    n_stop: target,
                    estimates,
                    rule: plan.rule,
                    epsilons: plan.epsilons.clone(),
                    capped: !met,
                });
            } else {
                next_check[p] = upcoming;
            }
        }
    }

    Ok(results.into_iter().map(|r| r.expect("every plan resolved")).collect())
}
