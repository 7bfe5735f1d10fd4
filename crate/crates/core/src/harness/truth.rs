//! True parameter values for samplers whose stationary law is known.

use crate::error::{Error, Result};
use crate::harness::config::SamplerConfig;
use crate::normal::normal_quantile;
use crate::samplers::{mixture_truth, Ar1};
use crate::types::{ParameterKind, ParameterSpec};

/// Exact value of `spec` under the sampler's stationary distribution.
///
/// Samplers without a registered truth return [`Error::Unsupported`].
pub fn true_value(sampler: &SamplerConfig, spec: &ParameterSpec) -> Result<f64> {
    spec.validate()?;
    let q = spec.kind.quantile_level();
    match sampler {
        SamplerConfig::Exp { .. } => Ok(match q {
            None => 1.0,
            Some(q) => -(-q).ln_1p(),
        }),
        SamplerConfig::MixtureGibbs { params, .. } | SamplerConfig::MixtureRw { params, .. } => {
            if spec.component > 1 {
                return Err(Error::config(format!("mixture has no component {}", spec.component)));
            }
            let truth = mixture_truth(params, q)?;
            Ok(match truth.quantiles {
                None => truth.means[spec.component],
                Some(qs) => qs[spec.component],
            })
        }
        SamplerConfig::IidNormal => match spec.kind {
            ParameterKind::Mean => Ok(0.0),
            ParameterKind::Quantile { q } => normal_quantile(q),
        },
        SamplerConfig::Ar1 { phi } => {
            let sd = Ar1::new(*phi)?.stationary_sd();
            match spec.kind {
                ParameterKind::Mean => Ok(0.0),
                ParameterKind::Quantile { q } => Ok(sd * normal_quantile(q)?),
            }
        }
        SamplerConfig::RandomWalk { .. } => Err(Error::Unsupported(format!(
            "no true value is registered for the {} sampler",
            sampler.name()
        ))),
    }
}
