use crate::error::{Error, Result};
use crate::rng::RngStream;

use super::{ChainState, Sampler};

/// Independent N(0, 1) draws, the trivially mixing chain.
#[derive(Debug, Clone, Default)]
pub struct IidNormal;

impl Sampler for IidNormal {
    fn dim(&self) -> usize {
        1
    }

    fn start(&self) -> ChainState {
        ChainState::new(vec![0.0])
    }

    fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) {
        state.coords[0] = rng.standard_normal();
        state.iteration += 1;
    }
}

/// Gaussian AR(1): `X_t = phi X_{t-1} + e_t`, `e_t ~ N(0, 1)`.
///
/// Stationary variance `1 / (1 - phi^2)`; CLT variance of the mean
/// `1 / (1 - phi)^2`.
#[derive(Debug, Clone)]
pub struct Ar1 {
    phi: f64,
}

impl Ar1 {
    pub fn new(phi: f64) -> Result<Self> {
        if !(phi.abs() < 1.0) {
            return Err(Error::config(format!("AR(1) needs |phi| < 1, got {phi}")));
        }
        Ok(Ar1 { phi })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn stationary_sd(&self) -> f64 {
        (1.0 / (1.0 - self.phi * self.phi)).sqrt()
    }
}

impl Sampler for Ar1 {
    fn dim(&self) -> usize {
        1
    }

    fn start(&self) -> ChainState {
        ChainState::new(vec![0.0])
    }

    fn step(&mut self, state: &mut ChainState, rng: &mut RngStream) {
        state.coords[0] = self.phi * state.coords[0] + rng.standard_normal();
        state.iteration += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::trajectory;

    #[test]
    fn ar1_rejects_nonstationary() {
        assert!(Ar1::new(1.0).is_err());
        assert!(Ar1::new(-1.2).is_err());
    }

    #[test]
    fn ar1_stationary_variance() {
        let mut s = Ar1::new(0.5).unwrap();
        let t = trajectory(&mut s, &mut RngStream::new(8, 0), 300_000, 0);
        let (_, sd) = crate::mcse::mean_estimate(&t).unwrap();
        assert!((sd - s.stationary_sd()).abs() < 0.02);
    }
}
