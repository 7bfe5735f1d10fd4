use crate::rng::RngStream;

use super::{ChainState, Sampler};

/// Proposal mean of the independence sampler. The proposal is exponential
/// with rate 1/2, i.e. mean 2.
pub const PROPOSAL_MEAN: f64 = 2.0;

/// Metropolis-Hastings acceptance probability for moving from `x` to `y`
/// when targeting Exp(1) with an Exp(rate 1/2) independence proposal:
/// `min(1, exp((x - y) / 2))`.
pub fn indep_exp_accept_prob(x: f64, y: f64) -> f64 {
    ((x - y) / 2.0).exp().min(1.0)
}

/// Next state given current `x`, proposal `y` and uniform `u` in `[0, 1)`.
pub fn indep_exp_transition(x: f64, y: f64, u: f64) -> f64 {
    if u < indep_exp_accept_prob(x, y) {
        y
    } else {
        x
    }
}

pub fn indep_metropolis_exp_step(state: &mut ChainState, rng: &mut RngStream) {
    let x = state.coords[0];
    let y = rng.exponential(PROPOSAL_MEAN);
    let u = rng.uniform();
    state.coords[0] = indep_exp_transition(x, y, u);
    state.iteration += 1;
}

/// Independence Metropolis chain targeting Exp(1).
#[derive(Debug, Clone)]
pub struct IndependenceExp {
    pub start: f64,
}

impl Default for IndependenceExp {
    fn default() -> Self {
        IndependenceExp { start: 1.0 }
    }
}

impl Sampler for IndependenceExp {
    fn dim(&self) -> usize {
        1
    }

    fn start(&self) -> ChainState {
        ChainState::new(vec![self.start])
    }

    fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) {
        indep_metropolis_exp_step(state, rng)
    }
}
