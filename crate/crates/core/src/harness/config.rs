//! Experiment configuration and its line-oriented text format.
//!
//! Grammar: one `key = value` per line; `#` starts a comment; blank lines are
//! ignored; keys may appear once. Lists are comma separated. Parameters are
//! declared one per line as
//!
//! ```text
//! parameter.<id> = mean [component]
//! parameter.<id> = quantile <q> [component]
//! ```
//!
//! in the order they should be reported. Recognised keys:
//!
//! | key | value |
//! |-----|-------|
//! | `sampler` | `exp`, `mixture-gibbs`, `mixture-rw-uniform`, `mixture-rw-normal`, `iid-normal`, `ar1`, `random-walk` |
//! | `start` | start state, comma list |
//! | `mixture.p`, `mixture.mu11` .. `mixture.sigma22` | mixture parameters |
//! | `ar1.phi` | AR(1) coefficient |
//! | `target`, `scales` | random-walk log-density (`gaussian`, `laplace`) and proposal sds |
//! | `rule` | comma list of `absolute`, `relative-magnitude`, `relative-sd` (or `T1`, `T2`, `T3`) |
//! | `epsilon` | scalar, or one value per parameter |
//! | `epsilon_scale` | comma list of multipliers applied to `epsilon` (default `1`) |
//! | `delta` | per-interval error rate (default `0.10`) |
//! | `overall_confidence` | joint confidence level; turns on the Bonferroni adjustment |
//! | `bonferroni_k` | number of intervals for the adjustment (default: number of parameters) |
//! | `n_star`, `check_increment`, `max_iterations` | stopping schedule |
//! | `batch_tau`, `batch_mode` | batch size exponent and `floor` or `power-of-two` |
//! | `replications`, `seed`, `workers`, `output` | harness settings |

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcse::{BatchMode, BatchSchedule};
use crate::samplers::{
    Ar1, BuiltinTarget, IidNormal, IndependenceExp, MixtureGibbs, MixtureParams, MixtureProposal,
    MixtureRwm, RandomWalkMetropolis, Sampler,
};
use crate::stopping::{bonferroni_delta, RuleKind, StopPlan, StoppingRule, DEFAULT_MAX_ITERATIONS};
use crate::types::{validate_specs, ParameterSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum SamplerConfig {
    Exp {
        start: f64,
    },
    MixtureGibbs {
        params: MixtureParams,
        start: Option<[f64; 2]>,
    },
    MixtureRw {
        params: MixtureParams,
        proposal: MixtureProposal,
        start: Option<[f64; 2]>,
    },
    IidNormal,
    Ar1 {
        phi: f64,
    },
    RandomWalk {
        target: BuiltinTarget,
        scales: Vec<f64>,
        start: Vec<f64>,
    },
}

impl SamplerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerConfig::Exp { .. } => "exp",
            SamplerConfig::MixtureGibbs { .. } => "mixture-gibbs",
            SamplerConfig::MixtureRw {
                proposal: MixtureProposal::Uniform,
                ..
            } => "mixture-rw-uniform",
            SamplerConfig::MixtureRw {
                proposal: MixtureProposal::Normal,
                ..
            } => "mixture-rw-normal",
            SamplerConfig::IidNormal => "iid-normal",
            SamplerConfig::Ar1 { .. } => "ar1",
            SamplerConfig::RandomWalk { .. } => "random-walk",
        }
    }

    pub fn build(&self) -> Result<Box<dyn Sampler + Send>> {
        Ok(match self {
            SamplerConfig::Exp { start } => {
                if !(*start > 0.0) {
                    return Err(Error::config(format!("exp sampler needs a positive start, got {start}")));
                }
                Box::new(IndependenceExp { start: *start })
            }
            SamplerConfig::MixtureGibbs { params, start } => {
                let mut s = MixtureGibbs::new(*params)?;
                s.start = *start;
                Box::new(s)
            }
            SamplerConfig::MixtureRw { params, proposal, start } => {
                let mut s = MixtureRwm::new(*params, *proposal)?;
                s.start = *start;
                Box::new(s)
            }
            SamplerConfig::IidNormal => Box::new(IidNormal),
            SamplerConfig::Ar1 { phi } => Box::new(Ar1::new(*phi)?),
            SamplerConfig::RandomWalk { target, scales, start } => Box::new(RandomWalkMetropolis::new(
                target.log_target(),
                scales.clone(),
                start.clone(),
            )?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSpec {
    Scalar(f64),
    PerParameter(Vec<f64>),
}

impl EpsilonSpec {
    fn resolve(&self, n_params: usize) -> Result<Vec<f64>> {
        match self {
            EpsilonSpec::Scalar(e) => Ok(vec![*e; n_params]),
            EpsilonSpec::PerParameter(v) if v.len() == n_params => Ok(v.clone()),
            EpsilonSpec::PerParameter(v) => Err(Error::config(format!(
                "epsilon has {} entries for {} parameters",
                v.len(),
                n_params
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sampler: SamplerConfig,
    pub parameters: Vec<ParameterSpec>,
    pub rules: Vec<RuleKind>,
    pub epsilon: EpsilonSpec,
    pub epsilon_scales: Vec<f64>,
    pub delta: f64,
    /// Joint confidence level for the Bonferroni adjustment, if any.
    pub overall_confidence: Option<f64>,
    pub bonferroni_k: Option<usize>,
    pub n_star: usize,
    pub check_increment: usize,
    pub max_iterations: usize,
    pub batch: BatchSchedule,
    pub replications: usize,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(sampler: SamplerConfig, parameters: Vec<ParameterSpec>, rule: RuleKind, epsilon: f64) -> Self {
        ExperimentConfig {
            sampler,
            parameters,
            rules: vec![rule],
            epsilon: EpsilonSpec::Scalar(epsilon),
            epsilon_scales: vec![1.0],
            delta: 0.10,
            overall_confidence: None,
            bonferroni_k: None,
            n_star: 1000,
            check_increment: 500,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            batch: BatchSchedule::default(),
            replications: 100,
            seed: 0,
            workers: 0,
            output: None,
        }
    }

    /// Per-interval delta after any Bonferroni adjustment.
    pub fn interval_delta(&self) -> Result<f64> {
        match self.overall_confidence {
            Some(level) => bonferroni_delta(level, self.bonferroni_k.unwrap_or(self.parameters.len())),
            None => Ok(self.delta),
        }
    }

    /// One plan per (rule, epsilon scale), rules outermost.
    pub fn plans(&self) -> Result<Vec<StopPlan>> {
        let base = self.epsilon.resolve(self.parameters.len())?;
        let delta = self.interval_delta()?;
        let mut plans = Vec::new();
        for &kind in &self.rules {
            for &scale in &self.epsilon_scales {
                let epsilons: Vec<f64> = base.iter().map(|e| e * scale).collect();
                let rule = StoppingRule {
                    kind,
                    epsilon: epsilons[0],
                    delta,
                    n_star: self.n_star,
                    check_increment: self.check_increment,
                    max_iterations: self.max_iterations,
                };
                plans.push(StopPlan { rule, epsilons });
            }
        }
        Ok(plans)
    }

    pub fn validate(&self) -> Result<()> {
        validate_specs(&self.parameters)?;
        if self.rules.is_empty() {
            return Err(Error::config("at least one rule is required"));
        }
        if self.epsilon_scales.is_empty() || self.epsilon_scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::config("epsilon scales must be positive"));
        }
        if self.replications == 0 {
            return Err(Error::config("replications must be >= 1"));
        }
        let dim = self.sampler.build()?.dim();
        if let Some(p) = self.parameters.iter().find(|p| p.component >= dim) {
            return Err(Error::config(format!(
                "parameter {} tracks component {} of a {dim}-dimensional chain",
                p.id, p.component
            )));
        }
        for plan in self.plans()? {
            for &e in &plan.epsilons {
                plan.rule.with_epsilon(e).validate()?;
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: HashMap<String, (usize, String)> = HashMap::new();
        let mut params: Vec<ParameterSpec> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {lineno}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(Error::config(format!("line {lineno}: empty key")));
            }
            if let Some(id) = key.strip_prefix("parameter.") {
                params.push(parse_parameter(id, value, lineno)?);
                continue;
            }
            if kv.insert(key.to_string(), (lineno, value.to_string())).is_some() {
                return Err(Error::config(format!("line {lineno}: duplicate key {key:?}")));
            }
        }
        let mut r = Reader { kv };
        let config = r.build(params)?;
        if let Some((key, (lineno, _))) = r.kv.iter().min_by_key(|(_, (l, _))| *l) {
            return Err(Error::config(format!("line {lineno}: unknown key {key:?}")));
        }
        config.validate()?;
        Ok(config)
    }
}

fn parse_parameter(id: &str, value: &str, lineno: usize) -> Result<ParameterSpec> {
    if id.is_empty() {
        return Err(Error::config(format!("line {lineno}: parameter needs an id")));
    }
    let fields: Vec<&str> = value.split_whitespace().collect();
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::config(format!("line {lineno}: bad number {s:?}")))
    };
    let component = |s: Option<&&str>| -> Result<usize> {
        s.map_or(Ok(0), |s| {
            s.parse()
                .map_err(|_| Error::config(format!("line {lineno}: bad component {s:?}")))
        })
    };
    match fields.first().copied() {
        Some("mean") if fields.len() <= 2 => Ok(ParameterSpec::mean(id, component(fields.get(1))?)),
        Some("quantile") if (2..=3).contains(&fields.len()) => {
            ParameterSpec::quantile(id, num(fields[1])?, component(fields.get(2))?)
                .map_err(|e| Error::config(format!("line {lineno}: {e}")))
        }
        _ => Err(Error::config(format!(
            "line {lineno}: parameter must be `mean [component]` or `quantile <q> [component]`"
        ))),
    }
}

struct Reader {
    kv: HashMap<String, (usize, String)>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.kv.remove(key)
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((lineno, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(format!("line {lineno}: bad value {v:?} for {key}"))),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some((lineno, v)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::config(format!("line {lineno}: bad number {s:?} in {key}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    fn start2(&mut self) -> Result<Option<[f64; 2]>> {
        match self.list("start")? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some([v[0], v[1]])),
            Some(v) => Err(Error::config(format!("start must have 2 values, got {}", v.len()))),
        }
    }

    fn mixture(&mut self) -> Result<MixtureParams> {
        let mut p = MixtureParams::default();
        let fields: [(&str, &mut f64); 9] = [
            ("mixture.p", &mut p.p),
            ("mixture.mu11", &mut p.mu11),
            ("mixture.mu12", &mut p.mu12),
            ("mixture.mu21", &mut p.mu21),
            ("mixture.mu22", &mut p.mu22),
            ("mixture.sigma11", &mut p.sigma11),
            ("mixture.sigma12", &mut p.sigma12),
            ("mixture.sigma21", &mut p.sigma21),
            ("mixture.sigma22", &mut p.sigma22),
        ];
        for (key, slot) in fields {
            if let Some(v) = self.parsed::<f64>(key)? {
                *slot = v;
            }
        }
        Ok(p)
    }

    fn sampler(&mut self) -> Result<SamplerConfig> {
        let (_, name) = self
            .take("sampler")
            .ok_or_else(|| Error::config("missing required key `sampler`"))?;
        Ok(match name.as_str() {
            "exp" => {
                let start = match self.list("start")? {
                    None => 1.0,
                    Some(v) if v.len() == 1 => v[0],
                    Some(_) => return Err(Error::config("exp sampler start must be a single value")),
                };
                SamplerConfig::Exp { start }
            }
            "mixture-gibbs" => SamplerConfig::MixtureGibbs {
                params: self.mixture()?,
                start: self.start2()?,
            },
            "mixture-rw-uniform" | "mixture-rw-normal" => SamplerConfig::MixtureRw {
                params: self.mixture()?,
                proposal: if name.ends_with("uniform") {
                    MixtureProposal::Uniform
                } else {
                    MixtureProposal::Normal
                },
                start: self.start2()?,
            },
            "iid-normal" => SamplerConfig::IidNormal,
            "ar1" => SamplerConfig::Ar1 {
                phi: self
                    .parsed("ar1.phi")?
                    .ok_or_else(|| Error::config("ar1 sampler needs `ar1.phi`"))?,
            },
            "random-walk" => {
                let (_, target) = self
                    .take("target")
                    .ok_or_else(|| Error::config("random-walk sampler needs `target`"))?;
                let target = BuiltinTarget::parse(&target)?;
                let scales = self
                    .list("scales")?
                    .ok_or_else(|| Error::config("random-walk sampler needs `scales`"))?;
                let start = self.list("start")?.unwrap_or_else(|| vec![0.0; scales.len()]);
                SamplerConfig::RandomWalk { target, scales, start }
            }
            other => return Err(Error::config(format!("unknown sampler {other:?}"))),
        })
    }

    fn build(&mut self, parameters: Vec<ParameterSpec>) -> Result<ExperimentConfig> {
        let sampler = self.sampler()?;
        let rules = match self.take("rule") {
            None => return Err(Error::config("missing required key `rule`")),
            Some((_, v)) => v.split(',').map(RuleKind::parse).collect::<Result<Vec<_>>>()?,
        };
        let epsilon = match self.list("epsilon")? {
            None => return Err(Error::config("missing required key `epsilon`")),
            Some(v) if v.len() == 1 => EpsilonSpec::Scalar(v[0]),
            Some(v) => EpsilonSpec::PerParameter(v),
        };
        let mut cfg = ExperimentConfig::new(sampler, parameters, rules[0], 1.0);
        cfg.rules = rules;
        cfg.epsilon = epsilon;
        if let Some(v) = self.list("epsilon_scale")? {
            cfg.epsilon_scales = v;
        }
        if let Some(v) = self.parsed("delta")? {
            cfg.delta = v;
        }
        cfg.overall_confidence = self.parsed("overall_confidence")?;
        cfg.bonferroni_k = self.parsed("bonferroni_k")?;
        if let Some(v) = self.parsed("n_star")? {
            cfg.n_star = v;
        }
        if let Some(v) = self.parsed("check_increment")? {
            cfg.check_increment = v;
        }
        if let Some(v) = self.parsed("max_iterations")? {
            cfg.max_iterations = v;
        }
        let tau = self.parsed("batch_tau")?.unwrap_or(0.5);
        let mode = match self.take("batch_mode") {
            None => BatchMode::FloorPow,
            Some((_, m)) if m == "floor" => BatchMode::FloorPow,
            Some((_, m)) if m == "power-of-two" => BatchMode::PowerOfTwo,
            Some((lineno, m)) => {
                return Err(Error::config(format!(
                    "line {lineno}: batch_mode must be floor or power-of-two, got {m:?}"
                )))
            }
        };
        cfg.batch = BatchSchedule::new(tau, mode).map_err(|e| Error::config(e.to_string()))?;
        if let Some(v) = self.parsed("replications")? {
            cfg.replications = v;
        }
        if let Some(v) = self.parsed("seed")? {
            cfg.seed = v;
        }
        if let Some(v) = self.parsed("workers")? {
            cfg.workers = v;
        }
        cfg.output = self.take("output").map(|(_, v)| PathBuf::from(v));
        Ok(cfg)
    }
}
