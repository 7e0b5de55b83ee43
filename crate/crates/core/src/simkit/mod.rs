//! End-to-end Monte-Carlo experiments: a random codebook over the AWGN
//! channel, Willie's optimal detector, Bob's decoder and empirical
//! divergence estimates.
//!
//! Every trial draws from its own counter-based substream, so a run is a
//! pure function of its configuration and seed.

mod channel;
mod codebook;
pub mod detect;
mod empirical;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use channel::{bob_decode, decode_error_rate, transmit};
pub use codebook::{build_codebook, Codebook, FORMAT_VERSION};
pub use detect::{observe, willie_detect, DetectionResult, Detector, Observations, ThresholdRule};
pub use empirical::{empirical_divergences, EmpiricalDivergences};

use crate::error::Result;
use crate::mc::Estimate;
use crate::planner::{psi_suf, CovertParams};
use crate::truncgauss::{RadialOutputDensity, TruncatedGaussianSpec};

/// What to simulate. `mu` and `psi` default to the planner's choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub mu: Option<f64>,
    pub psi: Option<f64>,
    /// Observations per hypothesis for the detector.
    pub willie_trials: usize,
    pub decode_trials: usize,
    /// Samples per divergence estimator; 0 skips the estimates.
    pub divergence_samples: usize,
    pub seed: u64,
    pub detector: Detector,
}

impl SimConfig {
    pub fn new(n: usize, delta: f64, epsilon: f64, seed: u64) -> Self {
        SimConfig {
            n,
            m: 16,
            delta,
            epsilon,
            mu: None,
            psi: None,
            willie_trials: 100_000,
            decode_trials: 100_000,
            divergence_samples: 100_000,
            seed,
            detector: Detector::Lrt,
        }
    }

    /// The input distribution this configuration resolves to.
    pub fn spec(&self) -> Result<TruncatedGaussianSpec> {
        let mut params = CovertParams::with_defaults(self.n, self.delta, self.epsilon)?;
        if let Some(mu) = self.mu {
            params.mu = mu;
        }
        let psi = match self.psi {
            Some(p) => p,
            None => psi_suf(&params)?,
        };
        TruncatedGaussianSpec::new(self.n, psi, params.mu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub config: SimConfig,
    pub spec: TruncatedGaussianSpec,
    pub codebook_average_power: f64,
    pub decode_error_rate: Estimate,
    pub detection: DetectionResult,
    pub divergences: Option<EmpiricalDivergences>,
    /// Not part of the deterministic output.
    pub wall_time_secs: f64,
}

pub fn simulate(config: &SimConfig) -> Result<SimulationResult> {
    let start = Instant::now();
    let spec = config.spec()?;
    let model = RadialOutputDensity::new(spec)?;
    let codebook = build_codebook(&spec, config.m, config.seed)?;
    let decode = decode_error_rate(&codebook, config.decode_trials, config.seed)?;
    let obs = observe(&spec, config.willie_trials, config.seed)?;
    let detection = willie_detect(&obs, config.detector, ThresholdRule::Bayes, Some(&model))?;
    let divergences = match config.divergence_samples {
        0 => None,
        k => Some(empirical_divergences(&model, k, config.seed)?),
    };
    Ok(SimulationResult {
        config: config.clone(),
        spec,
        codebook_average_power: codebook.average_power(),
        decode_error_rate: decode,
        detection,
        divergences,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let mut cfg = SimConfig::new(8, 0.05, 0.1, 17);
        cfg.willie_trials = 5000;
        cfg.decode_trials = 5000;
        cfg.divergence_samples = 5000;
        let mut a = simulate(&cfg).unwrap();
        let mut b = simulate(&cfg).unwrap();
        a.wall_time_secs = 0.0;
        b.wall_time_secs = 0.0;
        assert_eq!(a, b);
        let agree = a.detection.energy_lrt_agreement.unwrap();
        assert_eq!(agree, 1.0);
    }
}
