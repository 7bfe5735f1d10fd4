//! Benchmark Markov chains and a generic random-walk Metropolis sampler.
//!
//! Every sampler advances a [`ChainState`] in place and draws all randomness
//! from an [`RngStream`], so a `(seed, stream)` pair fixes the trajectory.

mod exp;
mod generic;
mod mixture;
mod simple;

pub use exp::{indep_exp_accept_prob, indep_exp_transition, indep_metropolis_exp_step, IndependenceExp};
pub use generic::{BuiltinTarget, LogTarget, RandomWalkMetropolis};
pub use mixture::{
    gibbs_mixture_step, gibbs_weight_x1, gibbs_weight_x2, mixture_log_density, mixture_truth,
    rw_metropolis_mixture_step, MixtureGibbs, MixtureParams, MixtureProposal, MixtureRwm,
    MixtureTruth,
};
pub use simple::{Ar1, IidNormal};

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub coords: Vec<f64>,
    pub iteration: u64,
}

impl ChainState {
    pub fn new(coords: Vec<f64>) -> Self {
        ChainState {
            coords,
            iteration: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A Markov transition kernel with a fixed state dimension and start point.
pub trait Sampler {
    fn dim(&self) -> usize;

    fn start(&self) -> ChainState;

    /// Advances `state` by one full iteration.
    fn step(&mut self, state: &mut ChainState, rng: &mut RngStream);
}

impl<S: Sampler + ?Sized> Sampler for Box<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn start(&self) -> ChainState {
        (**self).start()
    }

    fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) {
        (**self).step(state, rng)
    }
}

/// The first `n` values of coordinate `component` along a run from the
/// sampler's start (the start value included).
pub fn trajectory<S: Sampler + ?Sized>(
    sampler: &mut S,
    rng: &mut RngStream,
    n: usize,
    component: usize,
) -> Vec<f64> {
    let mut state = sampler.start();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(state.coords[component]);
    while out.len() < n {
        sampler.step(&mut state, rng);
        out.push(state.coords[component]);
    }
    out
}
