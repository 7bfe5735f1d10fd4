//! Non-overlapping batch means estimation of the asymptotic variance in the
//! Markov chain CLT for ergodic averages.
//!
//! With `b_n = floor(n^tau)` and `a_n = floor(n / b_n)`, the estimator is
//! strongly consistent for geometrically ergodic chains when `g` has slightly
//! more than `2 + eps1` moments and `(1 + eps1/2)^-1 < tau < 1`. Any `tau` in
//! `(0, 1)` is accepted here; `tau = 1/2` is the usual choice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    /// `b_n = floor(n^tau)`.
    FloorPow,
    /// `b_n` is the largest power of two not exceeding `floor(n^tau)`.
    PowerOfTwo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSchedule {
    pub tau: f64,
    pub mode: BatchMode,
}

impl Default for BatchSchedule {
    fn default() -> Self {
        BatchSchedule {
            tau: 0.5,
            mode: BatchMode::FloorPow,
        }
    }
}

impl BatchSchedule {
    pub fn new(tau: f64, mode: BatchMode) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::domain(format!("batch exponent tau must lie in (0, 1), got {tau}")));
        }
        Ok(BatchSchedule { tau, mode })
    }

    pub fn power_of_two(tau: f64) -> Result<Self> {
        Self::new(tau, BatchMode::PowerOfTwo)
    }

    /// `(b_n, a_n)` for a run of length `n`.
    pub fn batch_size(&self, n: usize) -> (usize, usize) {
        batch_size(n, *self)
    }
}

fn floor_pow(n: usize, tau: f64) -> usize {
    if tau == 0.5 {
        return n.isqrt();
    }
    let x = (n as f64).powf(tau);
    let r = x.round();
    // Snap exact integer powers that powf lands just below.
    let b = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.floor() };
    b as usize
}

/// Batch size and number of batches at run length `n` (`n >= 1`).
pub fn batch_size(n: usize, sched: BatchSchedule) -> (usize, usize) {
    let n = n.max(1);
    let mut b = floor_pow(n, sched.tau).clamp(1, n);
    if sched.mode == BatchMode::PowerOfTwo {
        b = 1 << (usize::BITS - 1 - b.leading_zeros());
    }
    (b, n / b)
}

/// Sample mean and sample standard deviation (divisor `n - 1`).
pub fn mean_estimate(trace: &[f64]) -> Result<(f64, f64)> {
    let n = trace.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "mean/sd estimate",
            needed: 2,
            have: n,
        });
    }
    let mean = trace.iter().sum::<f64>() / n as f64;
    let ss: f64 = trace.iter().map(|&y| (y - mean) * (y - mean)).sum();
    Ok((mean, (ss / (n - 1) as f64).sqrt()))
}

/// Batch means estimate of the asymptotic variance using the schedule.
pub fn bm_variance(trace: &[f64], sched: BatchSchedule) -> Result<f64> {
    let (b, _) = batch_size(trace.len(), sched);
    bm_variance_with_batch(trace, b)
}

/// Batch means estimate with an explicit batch size `b`.
///
/// Batches are the complete blocks of length `b`; trailing observations are
/// left out of the batches but still enter the grand mean they are centred on.
pub fn bm_variance_with_batch(trace: &[f64], b: usize) -> Result<f64> {
    let n = trace.len();
    if b == 0 {
        return Err(Error::domain("batch size must be >= 1"));
    }
    let a = n / b;
    if a < 2 {
        return Err(Error::InsufficientData {
            what: "batch means (a_n >= 2 batches)",
            needed: 2 * b,
            have: n,
        });
    }
    let grand = trace.iter().sum::<f64>() / n as f64;
    let bf = b as f64;
    let ss: f64 = trace[..a * b]
        .chunks_exact(b)
        .map(|batch| {
            let d = batch.iter().sum::<f64>() / bf - grand;
            d * d
        })
        .sum();
    Ok(bf * ss / (a - 1) as f64)
}

/// Streaming batch means for the power-of-two schedule.
///
/// Keeps only the completed batch sums and merges neighbours whenever the
/// schedule doubles the batch size, so memory is `O(a_n)` instead of `O(n)`.
/// At every `n` the result equals [`bm_variance`] with
/// [`BatchMode::PowerOfTwo`] on the stored trace, up to rounding.
#[derive(Debug, Clone)]
pub struct StreamingBatchMeans {
    tau: f64,
    batch: usize,
    sums: Vec<f64>,
    partial: f64,
    partial_len: usize,
    n: usize,
    // Welford state for mean and sample variance.
    mean: f64,
    m2: f64,
}

impl StreamingBatchMeans {
    pub fn new(tau: f64) -> Result<Self> {
        BatchSchedule::power_of_two(tau)?;
        Ok(StreamingBatchMeans {
            tau,
            batch: 1,
            sums: Vec::new(),
            partial: 0.0,
            partial_len: 0,
            n: 0,
            mean: 0.0,
            m2: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }

    pub fn push(&mut self, y: f64) {
        self.n += 1;
        let d = y - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (y - self.mean);

        self.partial += y;
        self.partial_len += 1;
        if self.partial_len == self.batch {
            self.sums.push(self.partial);
            self.partial = 0.0;
            self.partial_len = 0;
        }

        let sched = BatchSchedule {
            tau: self.tau,
            mode: BatchMode::PowerOfTwo,
        };
        let (target, _) = batch_size(self.n, sched);
        while self.batch < target {
            self.double();
        }
    }

    fn double(&mut self) {
        let odd = self.sums.len() % 2 == 1;
        let tail = if odd { self.sums.pop() } else { None };
        let merged: Vec<f64> = self.sums.chunks_exact(2).map(|p| p[0] + p[1]).collect();
        self.sums = merged;
        if let Some(t) = tail {
            self.partial += t;
            self.partial_len += self.batch;
        }
        self.batch *= 2;
        if self.partial_len == self.batch {
            self.sums.push(self.partial);
            self.partial = 0.0;
            self.partial_len = 0;
        }
    }

    /// `(mean, sample sd)` of everything pushed so far.
    pub fn mean_estimate(&self) -> Result<(f64, f64)> {
        if self.n < 2 {
            return Err(Error::InsufficientData {
                what: "mean/sd estimate",
                needed: 2,
                have: self.n,
            });
        }
        Ok((self.mean, (self.m2 / (self.n - 1) as f64).sqrt()))
    }

    pub fn variance(&self) -> Result<f64> {
        let a = self.sums.len();
        if a < 2 {
            return Err(Error::InsufficientData {
                what: "batch means (a_n >= 2 batches)",
                needed: 2 * self.batch,
                have: self.n,
            });
        }
        let bf = self.batch as f64;
        let ss: f64 = self
            .sums
            .iter()
            .map(|&s| {
                let d = s / bf - self.mean;
                d * d
            })
            .sum();
        Ok(bf * ss / (a - 1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Direct transcription of the batch means formula with 1-based batch indices.
    fn brute_force(trace: &[f64], b: usize) -> f64 {
        let n = trace.len();
        let a = n / b;
        let mut grand = 0.0;
        for y in trace {
            grand += y;
        }
        grand /= n as f64;
        let mut acc = 0.0;
        for j in 1..=a {
            let mut ybar = 0.0;
            for i in (j - 1) * b + 1..=j * b {
                ybar += trace[i - 1];
            }
            ybar /= b as f64;
            acc += (ybar - grand).powi(2);
        }
        b as f64 / (a as f64 - 1.0) * acc
    }

    #[test]
    fn batch_size_examples() {
        let s = BatchSchedule::default();
        assert_eq!(batch_size(100, s), (10, 10));
        assert_eq!(batch_size(1000, s), (31, 32));
        assert_eq!(batch_size(200, BatchSchedule::power_of_two(0.5).unwrap()), (8, 25));
        assert_eq!(batch_size(1, s), (1, 1));
        let third = BatchSchedule::new(1.0 / 3.0, BatchMode::FloorPow).unwrap();
        assert_eq!(batch_size(1000, third).0, 10);
        assert_eq!(batch_size(999, third).0, 9);
    }

    #[test]
    fn mean_estimate_examples() {
        assert_eq!(mean_estimate(&[1.0; 4]).unwrap(), (1.0, 0.0));
        let (m, s) = mean_estimate(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        assert!((s - std::f64::consts::SQRT_2).abs() < 1e-12);
        let (m, s) = mean_estimate(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(m, 3.0);
        assert!((s - 1.581_138_830_084_19).abs() < 1e-12);
        assert!(matches!(mean_estimate(&[1.0]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn bm_examples() {
        assert_eq!(bm_variance(&[2.5; 50], BatchSchedule::default()).unwrap(), 0.0);
        let alt: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(bm_variance_with_batch(&alt, 4).unwrap(), 0.0);
        let nine: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_eq!(brute_force(&nine, 3), 27.0);
        assert_eq!(bm_variance(&nine, BatchSchedule::default()).unwrap(), 27.0);
    }

    #[test]
    fn bm_needs_two_batches() {
        assert!(matches!(
            bm_variance(&[1.0], BatchSchedule::default()),
            Err(Error::InsufficientData { .. })
        ));
        assert!(bm_variance_with_batch(&[1.0; 10], 6).is_err());
        assert!(bm_variance_with_batch(&[1.0; 10], 0).is_err());
    }

    #[test]
    fn trailing_observations_enter_grand_mean_only() {
        // n = 10, b = 3: batches [0,1,2],[3,4,5],[6,7,8]; 9 is trailing.
        let mut t = vec![0.0; 10];
        t[9] = 10.0;
        // grand mean 1, every batch mean 0 -> 3/2 * 3 * 1 = 4.5
        assert!((bm_variance(&t, BatchSchedule::default()).unwrap() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn streaming_matches_stored_power_of_two() {
        let mut rng = crate::rng::RngStream::new(5, 0);
        let sched = BatchSchedule::power_of_two(0.5).unwrap();
        let mut acc = StreamingBatchMeans::new(0.5).unwrap();
        let mut trace = Vec::new();
        for _ in 0..5000 {
            let y = rng.standard_normal();
            trace.push(y);
            acc.push(y);
            let n = trace.len();
            assert_eq!(acc.batch_size(), batch_size(n, sched).0);
            match (acc.variance(), bm_variance(&trace, sched)) {
                (Ok(a), Ok(b)) => assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "n={n}: {a} vs {b}"),
                (Err(_), Err(_)) => {}
                (a, b) => panic!("n={n}: {a:?} vs {b:?}"),
            }
            if n >= 2 {
                let (m1, s1) = acc.mean_estimate().unwrap();
                let (m2, s2) = mean_estimate(&trace).unwrap();
                assert!((m1 - m2).abs() < 1e-10 && (s1 - s2).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn iid_normal_consistency() {
        let sched = BatchSchedule::default();
        let mut inside = 0;
        for seed in 0..100u64 {
            let mut rng = crate::rng::RngStream::new(seed, 0);
            let trace: Vec<f64> = (0..100_000).map(|_| rng.standard_normal()).collect();
            let v = bm_variance(&trace, sched).unwrap();
            if (0.85..=1.15).contains(&v) {
                inside += 1;
            }
        }
        assert!(inside >= 95, "only {inside}/100 within [0.85, 1.15]");
    }

    proptest! {
        #[test]
        fn matches_brute_force(trace in prop::collection::vec(-100.0f64..100.0, 4..64)) {
            let n = trace.len();
            for b in 1..=n / 2 {
                let fast = bm_variance_with_batch(&trace, b).unwrap();
                let slow = brute_force(&trace, b);
                prop_assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1e-300) + 1e-12);
            }
        }

        #[test]
        fn shift_and_scale(trace in prop::collection::vec(-10.0f64..10.0, 16..200), shift in -50.0f64..50.0, c in -4.0f64..4.0) {
            let sched = BatchSchedule::default();
            let base = bm_variance(&trace, sched).unwrap();
            let shifted: Vec<f64> = trace.iter().map(|y| y + shift).collect();
            let scaled: Vec<f64> = trace.iter().map(|y| y * c).collect();
            let vs = bm_variance(&shifted, sched).unwrap();
            let vc = bm_variance(&scaled, sched).unwrap();
            prop_assert!((vs - base).abs() <= 1e-8 * (1.0 + base));
            prop_assert!((vc - c * c * base).abs() <= 1e-9 * (1.0 + c * c * base));
        }

        #[test]
        fn schedule_invariants(n in 1usize..1_000_000, tau in 0.05f64..0.95, pow2 in any::<bool>()) {
            let mode = if pow2 { BatchMode::PowerOfTwo } else { BatchMode::FloorPow };
            let s = BatchSchedule::new(tau, mode).unwrap();
            let (b, a) = batch_size(n, s);
            prop_assert!(b >= 1 && b <= n && a >= 1);
            prop_assert_eq!(a, n / b);
            prop_assert!(batch_size(n + 1, s).0 >= b);
        }
    }
}
