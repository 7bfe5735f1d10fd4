//! Two-component mixture of bivariate normals with diagonal covariances, and
//! three chains targeting it: component-wise random-walk Metropolis with
//! uniform or normal increments, and a two-block Gibbs sampler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::normal_cdf;
use crate::rng::RngStream;

use super::{ChainState, Sampler};

/// Mixture weight `p` on component 1; `mu_jk`/`sigma_jk` are the mean and sd
/// of coordinate `k` in component `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub p: f64,
    pub mu11: f64,
    pub mu12: f64,
    pub mu21: f64,
    pub mu22: f64,
    pub sigma11: f64,
    pub sigma12: f64,
    pub sigma21: f64,
    pub sigma22: f64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        MixtureParams {
            p: 0.25,
            mu11: 1.0,
            mu12: 10.0,
            mu21: 2.5,
            mu22: 25.0,
            sigma11: 0.5,
            sigma12: 5.0,
            sigma21: 0.7,
            sigma22: 7.0,
        }
    }
}

impl MixtureParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::config(format!("mixture weight p must lie in [0, 1], got {}", self.p)));
        }
        for s in [self.sigma11, self.sigma12, self.sigma21, self.sigma22] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::config(format!("mixture sds must be positive, got {s}")));
            }
        }
        Ok(())
    }

    /// `(mu_1k, sigma_1k, mu_2k, sigma_2k)` for coordinate `k` in {0, 1}.
    fn marginal(&self, k: usize) -> (f64, f64, f64, f64) {
        match k {
            0 => (self.mu11, self.sigma11, self.mu21, self.sigma21),
            1 => (self.mu12, self.sigma12, self.mu22, self.sigma22),
            _ => panic!("mixture has two coordinates, asked for {k}"),
        }
    }

    pub fn marginal_mean(&self, k: usize) -> f64 {
        let (m1, _, m2, _) = self.marginal(k);
        self.p * m1 + (1.0 - self.p) * m2
    }

    pub fn marginal_variance(&self, k: usize) -> f64 {
        let (m1, s1, m2, s2) = self.marginal(k);
        let mean = self.marginal_mean(k);
        self.p * (s1 * s1 + m1 * m1) + (1.0 - self.p) * (s2 * s2 + m2 * m2) - mean * mean
    }

    pub fn marginal_cdf(&self, k: usize, x: f64) -> f64 {
        let (m1, s1, m2, s2) = self.marginal(k);
        self.p * normal_cdf((x - m1) / s1) + (1.0 - self.p) * normal_cdf((x - m2) / s2)
    }
}

fn log_normal_kernel(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln()
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Log of the joint mixture density up to an additive constant.
pub fn mixture_log_density(params: &MixtureParams, x: &[f64]) -> f64 {
    let c1 = params.p.ln()
        + log_normal_kernel(x[0], params.mu11, params.sigma11)
        + log_normal_kernel(x[1], params.mu12, params.sigma12);
    let c2 = (1.0 - params.p).ln()
        + log_normal_kernel(x[0], params.mu21, params.sigma21)
        + log_normal_kernel(x[1], params.mu22, params.sigma22);
    log_sum_exp(c1, c2)
}

/// `1 / (1 + exp(t))` without overflow.
fn inv_one_plus_exp(t: f64) -> f64 {
    if t > 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

/// Probability that `X1 | X2 = x2` comes from component 1.
pub fn gibbs_weight_x2(params: &MixtureParams, x2: f64) -> f64 {
    let z1 = (x2 - params.mu12) / params.sigma12;
    let z2 = (x2 - params.mu22) / params.sigma22;
    let log_ratio = ((1.0 - params.p) * params.sigma12 / (params.p * params.sigma22)).ln()
        + 0.5 * (z1 * z1 - z2 * z2);
    inv_one_plus_exp(log_ratio)
}

/// Probability that `X2 | X1 = x1` comes from component 1.
pub fn gibbs_weight_x1(params: &MixtureParams, x1: f64) -> f64 {
    let z1 = (x1 - params.mu11) / params.sigma11;
    let z2 = (x1 - params.mu21) / params.sigma21;
    let log_ratio = ((1.0 - params.p) * params.sigma11 / (params.p * params.sigma21)).ln()
        + 0.5 * (z1 * z1 - z2 * z2);
    inv_one_plus_exp(log_ratio)
}

/// One Gibbs sweep: draw `X1 | X2`, then `X2 | X1`.
pub fn gibbs_mixture_step(state: &mut ChainState, rng: &mut RngStream, params: &MixtureParams) {
    let w = gibbs_weight_x2(params, state.coords[1]);
    state.coords[0] = if rng.uniform() < w {
        params.mu11 + params.sigma11 * rng.standard_normal()
    } else {
        params.mu21 + params.sigma21 * rng.standard_normal()
    };
    let w = gibbs_weight_x1(params, state.coords[0]);
    state.coords[1] = if rng.uniform() < w {
        params.mu12 + params.sigma12 * rng.standard_normal()
    } else {
        params.mu22 + params.sigma22 * rng.standard_normal()
    };
    state.iteration += 1;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixtureProposal {
    /// Unif(-3, 3) on X1 and Unif(-30, 30) on X2.
    Uniform,
    /// N(0, 3^2) on X1 and N(0, 30^2) on X2.
    Normal,
}

impl MixtureProposal {
    const SCALES: [f64; 2] = [3.0, 30.0];

    fn increment(self, k: usize, rng: &mut RngStream) -> f64 {
        let s = Self::SCALES[k];
        match self {
            MixtureProposal::Uniform => s * (2.0 * rng.uniform() - 1.0),
            MixtureProposal::Normal => s * rng.standard_normal(),
        }
    }
}

/// Metropolis accept/reject for a symmetric proposal given log densities
/// and a uniform in `[0, 1)`.
pub(crate) fn metropolis_accept(log_current: f64, log_proposed: f64, u: f64) -> bool {
    let diff = log_proposed - log_current;
    if diff >= 0.0 {
        return true;
    }
    u < diff.exp()
}

/// Component-wise random-walk Metropolis sweep: coordinate 1, then 2.
pub fn rw_metropolis_mixture_step(
    state: &mut ChainState,
    rng: &mut RngStream,
    proposal: MixtureProposal,
    params: &MixtureParams,
) {
    let mut current = mixture_log_density(params, &state.coords);
    for k in 0..2 {
        let old = state.coords[k];
        state.coords[k] = old + proposal.increment(k, rng);
        let proposed = mixture_log_density(params, &state.coords);
        if metropolis_accept(current, proposed, rng.uniform()) {
            current = proposed;
        } else {
            state.coords[k] = old;
        }
    }
    state.iteration += 1;
}

fn default_start(params: &MixtureParams) -> Vec<f64> {
    vec![params.marginal_mean(0), params.marginal_mean(1)]
}

#[derive(Debug, Clone)]
pub struct MixtureGibbs {
    pub params: MixtureParams,
    pub start: Option<[f64; 2]>,
}

impl MixtureGibbs {
    pub fn new(params: MixtureParams) -> Result<Self> {
        params.validate()?;
        Ok(MixtureGibbs { params, start: None })
    }
}

impl Sampler for MixtureGibbs {
    fn dim(&self) -> usize {
        2
    }

    fn start(&self) -> ChainState {
        ChainState::new(self.start.map_or_else(|| default_start(&self.params), |s| s.to_vec()))
    }

    fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) {
        gibbs_mixture_step(state, rng, &self.params)
    }
}

#[derive(Debug, Clone)]
pub struct MixtureRwm {
    pub params: MixtureParams,
    pub proposal: MixtureProposal,
    pub start: Option<[f64; 2]>,
}

impl MixtureRwm {
    pub fn new(params: MixtureParams, proposal: MixtureProposal) -> Result<Self> {
        params.validate()?;
        Ok(MixtureRwm {
            params,
            proposal,
            start: None,
        })
    }
}

impl Sampler for MixtureRwm {
    fn dim(&self) -> usize {
        2
    }

    fn start(&self) -> ChainState {
        ChainState::new(self.start.map_or_else(|| default_start(&self.params), |s| s.to_vec()))
    }

    fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) {
        rw_metropolis_mixture_step(state, rng, self.proposal, &self.params)
    }
}

/// Exact marginal means and, optionally, marginal `q`-quantiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureTruth {
    pub means: [f64; 2],
    pub quantiles: Option<[f64; 2]>,
}

fn mixture_quantile(params: &MixtureParams, k: usize, q: f64) -> f64 {
    let (m1, s1, m2, s2) = params.marginal(k);
    let mut lo = (m1 - 40.0 * s1).min(m2 - 40.0 * s2);
    let mut hi = (m1 + 40.0 * s1).max(m2 + 40.0 * s2);
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if params.marginal_cdf(k, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn mixture_truth(params: &MixtureParams, q: Option<f64>) -> Result<MixtureTruth> {
    params.validate()?;
    let quantiles = match q {
        None => None,
        Some(q) if q > 0.0 && q < 1.0 => {
            Some([mixture_quantile(params, 0, q), mixture_quantile(params, 1, q)])
        }
        Some(q) => return Err(Error::domain(format!("quantile level must lie in (0, 1), got {q}"))),
    };
    Ok(MixtureTruth {
        means: [params.marginal_mean(0), params.marginal_mean(1)],
        quantiles,
    })
}
