//! Deterministic Monte-Carlo reductions.
//!
//! Trials are grouped into fixed-size blocks that run in parallel. Each
//! block reduces its trials in index order and the block results are merged
//! in block order, so the answer depends only on the trial count and seed,
//! never on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Trials per parallel block.
pub const BLOCK: usize = 4096;

/// Running mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl From<RunningStats> for Estimate {
    fn from(s: RunningStats) -> Self {
        Estimate {
            value: s.mean(),
            std_err: s.std_err(),
            samples: s.count(),
        }
    }
}

/// Run `trial(i)` for `i in 0..trials` and fold each block with `fold`,
/// returning per-block accumulators in block order.
pub fn par_blocks<A, T, F>(trials: usize, init: impl Fn() -> A + Sync, trial: T, fold: F) -> Result<Vec<A>>
where
    A: Send,
    T: Fn(u64) -> Result<f64> + Sync,
    F: Fn(&mut A, u64, f64) + Sync,
{
    let blocks = trials.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            let start = b * BLOCK;
            let end = (start + BLOCK).min(trials);
            for i in start..end {
                let v = trial(i as u64)?;
                fold(&mut acc, i as u64, v);
            }
            Ok(acc)
        })
        .collect()
}

/// Mean and standard error of `f(i)` over `trials` trials.
pub fn par_mean<F>(trials: usize, f: F) -> Result<RunningStats>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    let blocks = par_blocks(trials, RunningStats::default, f, |acc, _, v| acc.push(v))?;
    let mut total = RunningStats::default();
    for b in &blocks {
        total.merge(b);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut seq = RunningStats::default();
        xs.iter().for_each(|&x| seq.push(x));
        let mut a = RunningStats::default();
        let mut b = RunningStats::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count(), seq.count());
        assert!((a.mean() - seq.mean()).abs() < 1e-12);
        assert!((a.variance() - seq.variance()).abs() < 1e-10);
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let f = |i: u64| Ok(((i.wrapping_mul(2654435761) % 1000) as f64).sqrt());
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| par_mean(20_000, f)).unwrap();
        let b = four.install(|| par_mean(20_000, f)).unwrap();
        assert_eq!(a, b);
    }
}
