//! Quantile estimation and its asymptotic variance.
//!
//! The point estimate is the inverse empirical CDF. The CLT variance
//! `sigma^2(xi) / f(xi)^2` is estimated by batch means on the indicator
//! process `I(Y_i <= xi_hat)` divided by the squared Gaussian-kernel density
//! estimate at `xi_hat`. The target scale is `sqrt(q(1-q)) / f(xi_hat)`, the
//! i.i.d. asymptotic standard deviation of a sample quantile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcse::{bm_variance, mean_estimate, BatchSchedule};
use crate::normal::normal_pdf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub q: f64,
    pub xi_hat: f64,
    /// Kernel density estimate at `xi_hat`.
    pub f_hat: f64,
    /// Batch means variance of the indicator process at `xi_hat`.
    pub sigma2_ind: f64,
    pub gamma2_hat: f64,
    pub lambda_hat: f64,
    pub bandwidth: f64,
}

fn check_level(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("quantile level must lie in (0, 1), got {q}")))
    }
}

/// Zero-based index of the order statistic returned for level `q`:
/// `j = floor(n q)`, i.e. the `(j+1)`-th smallest value.
fn order_index(n: usize, q: f64) -> usize {
    ((n as f64 * q).floor() as usize).min(n - 1)
}

fn from_sorted(sorted: &[f64], q: f64) -> f64 {
    sorted[order_index(sorted.len(), q)]
}

/// Inverse of the empirical distribution function at `q`.
pub fn empirical_quantile(trace: &[f64], q: f64) -> Result<f64> {
    check_level(q)?;
    if trace.is_empty() {
        return Err(Error::InsufficientData {
            what: "empirical quantile",
            needed: 1,
            have: 0,
        });
    }
    let mut buf = trace.to_vec();
    let j = order_index(buf.len(), q);
    let (_, v, _) = buf.select_nth_unstable_by(j, f64::total_cmp);
    Ok(*v)
}

fn sorted_copy(trace: &[f64]) -> Vec<f64> {
    let mut v = trace.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

fn bandwidth_from(sd: f64, iqr: f64, n: usize) -> Result<f64> {
    let robust = iqr / 1.34;
    let spread = match (sd > 0.0, robust > 0.0) {
        (true, true) => sd.min(robust),
        (true, false) => sd,
        (false, true) => robust,
        (false, false) => {
            return Err(Error::Degenerate(
                "bandwidth undefined: sample sd and IQR are both zero".into(),
            ))
        }
    };
    Ok(0.9 * spread * (n as f64).powf(-0.2))
}

/// Silverman's rule-of-thumb bandwidth `0.9 min(s, IQR/1.34) n^(-1/5)`.
///
/// The quartiles use the same order-statistic definition as
/// [`empirical_quantile`].
pub fn silverman_bandwidth(trace: &[f64]) -> Result<f64> {
    let (_, sd) = mean_estimate(trace)?;
    let sorted = sorted_copy(trace);
    let iqr = from_sorted(&sorted, 0.75) - from_sorted(&sorted, 0.25);
    bandwidth_from(sd, iqr, trace.len())
}

/// Gaussian kernel density estimate at `x` with bandwidth `h`.
pub fn kde_at(trace: &[f64], x: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::domain(format!("bandwidth must be positive, got {h}")));
    }
    if trace.is_empty() {
        return Err(Error::InsufficientData {
            what: "kernel density",
            needed: 1,
            have: 0,
        });
    }
    let s: f64 = trace.iter().map(|&y| normal_pdf((x - y) / h)).sum();
    Ok(s / (trace.len() as f64 * h))
}

/// Batch means variance of the indicator sequence `I(Y_i <= xi_hat)`.
pub fn indicator_bm_variance(trace: &[f64], xi_hat: f64, sched: BatchSchedule) -> Result<f64> {
    let ind: Vec<f64> = trace
        .iter()
        .map(|&y| if y <= xi_hat { 1.0 } else { 0.0 })
        .collect();
    bm_variance(&ind, sched)
}

/// Point estimate, density, and asymptotic-variance estimate for the
/// `q`-quantile of the trace.
pub fn quantile_variance(trace: &[f64], q: f64, sched: BatchSchedule) -> Result<QuantileEstimate> {
    check_level(q)?;
    let (_, sd) = mean_estimate(trace)?;
    let sorted = sorted_copy(trace);
    let xi_hat = from_sorted(&sorted, q);
    let iqr = from_sorted(&sorted, 0.75) - from_sorted(&sorted, 0.25);
    let bandwidth = bandwidth_from(sd, iqr, trace.len())?;
    let f_hat = kde_at(trace, xi_hat, bandwidth)?;
    if !(f_hat > 0.0) {
        return Err(Error::Degenerate(format!(
            "density estimate at quantile {xi_hat} is zero"
        )));
    }
    let sigma2_ind = indicator_bm_variance(trace, xi_hat, sched)?;
    Ok(QuantileEstimate {
        q,
        xi_hat,
        f_hat,
        sigma2_ind,
        gamma2_hat: sigma2_ind / (f_hat * f_hat),
        lambda_hat: (q * (1.0 - q)).sqrt() / f_hat,
        bandwidth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcse::bm_variance_with_batch;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    // Order-statistic definition: smallest y with #{Y_i <= y} > floor(n q),
    // found by counting rather than sorting.
    fn by_counting(trace: &[f64], q: f64) -> f64 {
        let j = (trace.len() as f64 * q).floor() as usize;
        let mut candidates: Vec<f64> = trace.to_vec();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        for c in candidates {
            let below_or_eq = trace.iter().filter(|&&y| y <= c).count();
            if below_or_eq > j {
                return c;
            }
        }
        unreachable!()
    }

    #[test]
    fn empirical_quantile_examples() {
        let t = [7.0, 3.0, 10.0, 1.0, 5.0, 2.0, 9.0, 4.0, 8.0, 6.0];
        assert_eq!(empirical_quantile(&t, 0.5).unwrap(), 6.0);
        assert_eq!(empirical_quantile(&[7.0], 0.01).unwrap(), 7.0);
        assert_eq!(empirical_quantile(&[7.0], 0.99).unwrap(), 7.0);
        assert_eq!(empirical_quantile(&[3.0, 1.0, 2.0], 0.9).unwrap(), 3.0);
        assert!(matches!(empirical_quantile(&[], 0.5), Err(Error::InsufficientData { .. })));
        assert!(empirical_quantile(&[1.0], 1.0).is_err());
    }

    #[test]
    fn bandwidth_examples() {
        let mut rng = RngStream::new(2024, 0);
        let t: Vec<f64> = (0..10_000).map(|_| rng.standard_normal()).collect();
        let h = silverman_bandwidth(&t).unwrap();
        assert!((0.13..=0.18).contains(&h), "{h}");
        let scaled: Vec<f64> = t.iter().map(|y| -3.0 * y).collect();
        let hs = silverman_bandwidth(&scaled).unwrap();
        assert!((hs - 3.0 * h).abs() < 1e-12);
        assert!(matches!(silverman_bandwidth(&[0.0; 4]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bandwidth_falls_back_to_sd_when_iqr_zero() {
        // Quartiles coincide but the sd is positive.
        let t = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 10.0];
        let h = silverman_bandwidth(&t).unwrap();
        let (_, sd) = mean_estimate(&t).unwrap();
        assert!((h - 0.9 * sd * 8f64.powf(-0.2)).abs() < 1e-12);
    }

    #[test]
    fn kde_examples() {
        assert!((kde_at(&[0.0], 0.0, 1.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((kde_at(&[-1.0, 1.0], 0.0, 1.0).unwrap() - 0.241_970_724_519_143_37).abs() < 1e-15);
        assert!(kde_at(&[1.0, 2.0], 1e6, 0.5).unwrap() < 1e-300);
        assert!(kde_at(&[1.0, 2.0], -1e6, 0.5).unwrap() < 1e-300);
        assert!(matches!(kde_at(&[1.0], 0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn kde_integrates_to_one() {
        let mut rng = RngStream::new(9, 0);
        let t: Vec<f64> = (0..500).map(|_| rng.exponential(1.0)).collect();
        let h = silverman_bandwidth(&t).unwrap();
        let lo = t.iter().cloned().fold(f64::INFINITY, f64::min) - 6.0 * h;
        let hi = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 6.0 * h;
        let m = 20_000;
        let dx = (hi - lo) / m as f64;
        let mut area = 0.0;
        for i in 0..=m {
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            area += w * kde_at(&t, lo + i as f64 * dx, h).unwrap();
        }
        area *= dx;
        assert!((area - 1.0).abs() < 1e-3, "{area}");
    }

    #[test]
    fn indicator_examples() {
        let s = BatchSchedule::default();
        let t: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_eq!(indicator_bm_variance(&t, 0.5, s).unwrap(), 0.0);
        assert_eq!(indicator_bm_variance(&t, 9.0, s).unwrap(), 0.0);
        assert_eq!(indicator_bm_variance(&t, 100.0, s).unwrap(), 0.0);
        let ind = [1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let expected = bm_variance_with_batch(&ind, 3).unwrap();
        assert_eq!(indicator_bm_variance(&t, 5.0, s).unwrap(), expected);
        // batch means 1, 2/3, 0 about 5/9
        let ubar: f64 = 5.0 / 9.0;
        let direct = 1.5 * ((1.0 - ubar).powi(2) + (2.0 / 3.0 - ubar).powi(2) + ubar * ubar);
        assert!((expected - direct).abs() < 1e-15);
    }

    #[test]
    fn exp_median_estimate() {
        let mut rng = RngStream::new(77, 0);
        let t: Vec<f64> = (0..100_000).map(|_| rng.exponential(1.0)).collect();
        let est = quantile_variance(&t, 0.5, BatchSchedule::default()).unwrap();
        assert!((0.68..=0.71).contains(&est.xi_hat), "{est:?}");
        assert!((0.9..=1.1).contains(&est.lambda_hat), "{est:?}");
        assert!((0.85..=1.15).contains(&est.gamma2_hat), "{est:?}");
        assert!((est.gamma2_hat - est.sigma2_ind / est.f_hat.powi(2)).abs() < 1e-15);
        assert!((est.lambda_hat - 0.5 / est.f_hat).abs() < 1e-15);
    }

    #[test]
    fn quantile_variance_errors() {
        let s = BatchSchedule::default();
        assert!(matches!(quantile_variance(&[2.0; 100], 0.5, s), Err(Error::Degenerate(_))));
        assert!(matches!(quantile_variance(&[1.0], 0.5, s), Err(Error::InsufficientData { .. })));
        assert!(matches!(quantile_variance(&[1.0, 2.0], 1.5, s), Err(Error::Domain(_))));
    }

    #[test]
    fn exhaustive_small_traces() {
        let alphabet = [-1.5, 0.0, 0.0, 2.0, 3.25];
        let levels = [0.01, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.6, 0.75, 0.9, 0.99];
        for len in 1..=6usize {
            let total = alphabet.len().pow(len as u32);
            for code in 0..total {
                let mut c = code;
                let trace: Vec<f64> = (0..len)
                    .map(|_| {
                        let v = alphabet[c % alphabet.len()];
                        c /= alphabet.len();
                        v
                    })
                    .collect();
                for &q in &levels {
                    assert_eq!(empirical_quantile(&trace, q).unwrap(), by_counting(&trace, q));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn quantile_properties(mut trace in prop::collection::vec(-1e3f64..1e3, 1..200), q in 0.001f64..0.999, q2 in 0.001f64..0.999, c in 0.01f64..100.0, d in -100.0f64..100.0) {
            let v = empirical_quantile(&trace, q).unwrap();
            prop_assert!(trace.contains(&v));
            let (lo, hi) = if q <= q2 { (q, q2) } else { (q2, q) };
            prop_assert!(empirical_quantile(&trace, lo).unwrap() <= empirical_quantile(&trace, hi).unwrap());
            let affine: Vec<f64> = trace.iter().map(|y| c * y + d).collect();
            prop_assert_eq!(empirical_quantile(&affine, q).unwrap(), c * v + d);
            trace.reverse();
            prop_assert_eq!(empirical_quantile(&trace, q).unwrap(), v);
        }

        #[test]
        fn indicator_reduces_to_mean_case(trace in prop::collection::vec(-10.0f64..10.0, 4..300), q in 0.01f64..0.99) {
            let s = BatchSchedule::default();
            let xi = empirical_quantile(&trace, q).unwrap();
            let ind: Vec<f64> = trace.iter().map(|&y| if y <= xi { 1.0 } else { 0.0 }).collect();
            prop_assert_eq!(indicator_bm_variance(&trace, xi, s).unwrap(), bm_variance(&ind, s).unwrap());
        }
    }
}
