//! Willie's detector.
//!
//! Both hypotheses are spherically symmetric, so the received norm `‖z‖` is
//! a sufficient statistic and observations are stored as norms. Under `H₁`
//! each trial draws a fresh codeword from the generating distribution, so the
//! alternative is the ensemble output law `P̄₁`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Domain};
use crate::specfn::Probability;
use crate::truncgauss::{sample_radius_sq, RadialOutputDensity, TruncatedGaussianSpec};

/// `‖w‖²` for `w ~ N(0, I_n)`.
pub fn noise_norm_sq<R: Rng + ?Sized>(n: usize, rng: &mut R) -> f64 {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum()
}

/// `‖x + w‖²` for a codeword `x` from `spec` and independent noise.
///
/// By rotation invariance of the noise the codeword can be taken along the
/// first axis, so only its radius is drawn.
pub fn output_norm_sq<R: Rng + ?Sized>(spec: &TruncatedGaussianSpec, rng: &mut R) -> Result<f64> {
    let r = sample_radius_sq(spec, rng)?.sqrt();
    let first: f64 = r + rng.sample::<f64, _>(StandardNormal);
    Ok(first * first + noise_norm_sq(spec.n - 1, rng))
}

/// Received norms under both hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub h0: Vec<f64>,
    pub h1: Vec<f64>,
}

/// `trials` observations per hypothesis; observation `i` under each
/// hypothesis has its own substream.
pub fn observe(spec: &TruncatedGaussianSpec, trials: usize, seed: u64) -> Result<Observations> {
    let h0 = (0..trials as u64)
        .into_par_iter()
        .map(|i| noise_norm_sq(spec.n, &mut substream(seed, Domain::WillieH0, i)).sqrt())
        .collect();
    let h1 = (0..trials as u64)
        .into_par_iter()
        .map(|i| output_norm_sq(spec, &mut substream(seed, Domain::WillieH1, i)).map(f64::sqrt))
        .collect::<Result<Vec<_>>>()?;
    Ok(Observations { h0, h1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    /// Threshold on the received energy `‖z‖²`.
    Energy,
    /// Threshold on the exact log-likelihood ratio `ln(f̄/f₀)`.
    Lrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Equal-prior Bayes test: decide `H₁` when `f̄ > f₀`.
    Bayes,
    /// Decide `H₁` when the detector statistic exceeds this value.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub detector: Detector,
    /// In units of the detector statistic.
    pub threshold: f64,
    /// Missed detection, `P(decide H₀ | H₁)`.
    pub alpha: Probability,
    /// False alarm, `P(decide H₁ | H₀)`.
    pub beta: Probability,
    pub sum_error: f64,
    pub trials_h0: u64,
    pub trials_h1: u64,
    /// Standard error of `α + β`.
    pub std_err: f64,
    /// Fraction of observations on which the energy and LRT detectors agree
    /// under the Bayes rule, when a density model was supplied.
    pub energy_lrt_agreement: Option<f64>,
}

impl DetectionResult {
    /// `1 − (α + β)`, the detector's advantage.
    pub fn advantage(&self) -> f64 {
        1.0 - self.sum_error
    }
}

/// Run a detector over stored observations.
pub fn willie_detect(
    obs: &Observations,
    detector: Detector,
    rule: ThresholdRule,
    model: Option<&RadialOutputDensity>,
) -> Result<DetectionResult> {
    if obs.h0.is_empty() || obs.h1.is_empty() {
        return Err(Error::Input("both hypotheses need observations".into()));
    }
    let energy_bayes = match model {
        Some(m) => Some(m.crossing_radius()?.powi(2)),
        None => None,
    };
    let threshold = match (detector, rule) {
        (_, ThresholdRule::Fixed(t)) => t,
        (Detector::Lrt, ThresholdRule::Bayes) => 0.0,
        (Detector::Energy, ThresholdRule::Bayes) => energy_bayes
            .ok_or_else(|| Error::Input("the Bayes energy threshold needs a density model".into()))?,
    };
    let lrt = |norm: f64| -> Result<f64> {
        model
            .ok_or_else(|| Error::Input("the LRT detector needs a density model".into()))?
            .log_ratio(norm)
    };
    let stat = |norm: f64| -> Result<f64> {
        match detector {
            Detector::Energy => Ok(norm * norm),
            Detector::Lrt => lrt(norm),
        }
    };
    // (decisions for H₁, agreements)
    let count = |xs: &[f64]| -> Result<(u64, u64)> {
        xs.par_iter()
            .map(|&z| {
                let s = stat(z)?;
                let agree = match (model, energy_bayes) {
                    (Some(m), Some(e)) => {
                        let by_energy = z * z > e;
                        let by_lrt = if detector == Detector::Lrt { s > 0.0 } else { m.log_ratio(z)? > 0.0 };
                        u64::from(by_energy == by_lrt)
                    }
                    _ => 0,
                };
                Ok((u64::from(s > threshold), agree))
            })
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
    };
    let (alarms, agree0) = count(&obs.h0)?;
    let (hits, agree1) = count(&obs.h1)?;
    let (n0, n1) = (obs.h0.len() as u64, obs.h1.len() as u64);
    let beta = alarms as f64 / n0 as f64;
    let alpha = 1.0 - hits as f64 / n1 as f64;
    Ok(DetectionResult {
        detector,
        threshold,
        alpha: Probability::saturating(alpha),
        beta: Probability::saturating(beta),
        sum_error: alpha + beta,
        trials_h0: n0,
        trials_h1: n1,
        std_err: (alpha * (1.0 - alpha) / n1 as f64 + beta * (1.0 - beta) / n0 as f64).sqrt(),
        energy_lrt_agreement: model.map(|_| (agree0 + agree1) as f64 / (n0 + n1) as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_energy_mean() {
        let mut rng = substream(4, Domain::Oracle, 0);
        let k = 20_000;
        let mean = (0..k).map(|_| noise_norm_sq(10, &mut rng)).sum::<f64>() / (k as f64 * 10.0);
        // Var(‖w‖²/n) = 2/n per draw
        assert!((mean - 1.0).abs() < 4.0 * (0.2f64 / k as f64).sqrt());
    }

    #[test]
    fn zero_power_is_undetectable() {
        let spec = TruncatedGaussianSpec::new(8, 1e-12, 0.8).unwrap();
        let model = RadialOutputDensity::new(spec).unwrap();
        let obs = observe(&spec, 20_000, 2).unwrap();
        let r = willie_detect(&obs, Detector::Energy, ThresholdRule::Fixed(8.0), None).unwrap();
        assert!(r.advantage().abs() < 3.0 * r.std_err, "{r:?}");
        let l = willie_detect(&obs, Detector::Lrt, ThresholdRule::Bayes, Some(&model)).unwrap();
        assert!(l.advantage().abs() < 3.0 * l.std_err + 1e-3, "{l:?}");
    }

    #[test]
    fn missing_inputs() {
        let spec = TruncatedGaussianSpec::new(4, 0.5, 0.8).unwrap();
        let obs = observe(&spec, 10, 1).unwrap();
        assert!(willie_detect(&obs, Detector::Lrt, ThresholdRule::Bayes, None).is_err());
        assert!(willie_detect(&obs, Detector::Energy, ThresholdRule::Bayes, None).is_err());
        let empty = Observations { h0: vec![], h1: vec![1.0] };
        assert!(willie_detect(&empty, Detector::Energy, ThresholdRule::Fixed(1.0), None).is_err());
    }
}
