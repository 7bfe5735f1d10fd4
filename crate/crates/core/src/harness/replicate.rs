//! Independent replications of a sequential run and their coverage summary.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::report::{Coverage, CoverageReport, ParameterCoverage, RuleSummary};
use crate::harness::truth::true_value;
use crate::interval::interval_contains;
use crate::rng::RngStream;
use crate::stopping::{run_sequential_shared, BatchMeansEstimator, StoppingResult};

/// One sequential run on stream `stream` of the configured seed. Replication
/// `i` of [`run_replications`] is `run_single(config, i)`.
pub fn run_single(config: &ExperimentConfig, stream: u64) -> Result<Vec<StoppingResult>> {
    let plans = config.plans()?;
    let mut sampler = config.sampler.build()?;
    let mut rng = RngStream::new(config.seed, stream);
    let estimator = BatchMeansEstimator {
        schedule: config.batch,
    };
    run_sequential_shared(&mut sampler, &config.parameters, &plans, &mut rng, &estimator)
}

/// Runs replications `1..=config.replications`, in parallel, and returns
/// every result in replication order.
pub fn replicate(config: &ExperimentConfig) -> Result<Vec<Vec<StoppingResult>>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (1..=config.replications as u64)
            .into_par_iter()
            .map(|i| run_single(config, i))
            .collect()
    })
}

/// Replicates and scores coverage against the registered true values.
pub fn run_replications(config: &ExperimentConfig) -> Result<CoverageReport> {
    let truths = truths(config)?;
    let outcomes = replicate(config)?;
    summarize(config, &truths, &outcomes)
}

fn truths(config: &ExperimentConfig) -> Result<Vec<Option<f64>>> {
    let mut out = Vec::with_capacity(config.parameters.len());
    for spec in &config.parameters {
        match true_value(&config.sampler, spec) {
            Ok(v) => out.push(Some(v)),
            Err(Error::Unsupported(_)) => out.push(None),
            Err(e) => return Err(e),
        }
    }
    if out.iter().all(Option::is_none) {
        return Err(Error::Unsupported(format!(
            "coverage needs true values, and none are registered for the {} sampler",
            config.sampler.name()
        )));
    }
    Ok(out)
}

fn rate(hits: usize, scored: usize) -> Option<Coverage> {
    (scored > 0).then(|| {
        let p = hits as f64 / scored as f64;
        Coverage {
            rate: p,
            se: (p * (1.0 - p) / scored as f64).sqrt(),
            scored,
        }
    })
}

/// Builds the report from per-replication results. Capped replications
/// count toward the stopping-time summary but are not scored for coverage.
pub fn summarize(
    config: &ExperimentConfig,
    truths: &[Option<f64>],
    outcomes: &[Vec<StoppingResult>],
) -> Result<CoverageReport> {
    if outcomes.is_empty() {
        return Err(Error::config("no replications to summarize"));
    }
    let plans = config.plans()?;
    let joint = config.overall_confidence.is_some() && truths.iter().all(Option::is_some);
    let mut rules = Vec::with_capacity(plans.len());
    for (p, plan) in plans.iter().enumerate() {
        let runs: Vec<&StoppingResult> = outcomes.iter().map(|o| &o[p]).collect();
        let r = runs.len() as f64;
        let n: Vec<f64> = runs.iter().map(|s| s.n_stop as f64).collect();
        let mean = n.iter().sum::<f64>() / r;
        let sd = if runs.len() > 1 {
            (n.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
        } else {
            0.0
        };
        let scored: Vec<&StoppingResult> = runs.iter().copied().filter(|s| !s.capped).collect();
        let covers = |s: &StoppingResult, i: usize| -> bool {
            match (truths[i], s.estimates[i]) {
                (Some(t), Some(est)) => interval_contains(&est, t),
                _ => false,
            }
        };
        let parameters = config
            .parameters
            .iter()
            .enumerate()
            .map(|(i, spec)| ParameterCoverage {
                id: spec.id.clone(),
                kind: spec.kind,
                component: spec.component,
                epsilon: plan.epsilons[i],
                truth: truths[i],
                coverage: truths[i]
                    .and_then(|_| rate(scored.iter().filter(|s| covers(s, i)).count(), scored.len())),
            })
            .collect();
        let region = joint
            .then(|| {
                let hits = scored
                    .iter()
                    .filter(|s| (0..truths.len()).all(|i| covers(s, i)))
                    .count();
                rate(hits, scored.len())
            })
            .flatten();
        rules.push(RuleSummary {
            rule: plan.rule.kind,
            epsilon_scale: config.epsilon_scales[p % config.epsilon_scales.len()],
            delta: plan.rule.delta,
            stopped: scored.len(),
            capped: runs.len() - scored.len(),
            mean_nstop: mean,
            sd_nstop: sd,
            parameters,
            region,
        });
    }
    Ok(CoverageReport {
        sampler: config.sampler.name().to_string(),
        replications: outcomes.len(),
        seed: config.seed,
        rules,
    })
}
