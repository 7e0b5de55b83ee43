//! Monte-Carlo estimates of the divergences between the channel output of
//! the truncated-Gaussian ensemble and the noise.

use serde::{Deserialize, Serialize};

use crate::divergences::{DivergenceReport, Method};
use crate::error::{Error, Result};
use crate::mc::{par_blocks, par_mean, Estimate, RunningStats};
use crate::nats_to_bits;
use crate::rng::{substream, Domain};
use crate::simkit::detect::{noise_norm_sq, output_norm_sq};
use crate::specfn::Probability;
use crate::truncgauss::RadialOutputDensity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDivergences {
    /// Mean of `log₂(f̄/f₀)` over channel outputs.
    pub kl_bits: Estimate,
    /// `½ E₀|f̄/f₀ − 1|` over noise samples.
    pub tvd_noise: Estimate,
    /// `E_m[|r − 1|/(r + 1)]` over the equal mixture of both laws, where
    /// `r = f̄/f₀`. Same quantity as `tvd_noise`, with a bounded integrand.
    pub tvd_mixture: Estimate,
    /// `1 − E_m[2√r/(1 + r)]` over the mixture.
    pub hellinger_sq: Estimate,
}

impl EmpiricalDivergences {
    pub fn report(&self) -> DivergenceReport {
        DivergenceReport {
            kl_bits: self.kl_bits.value.max(0.0),
            tvd: Probability::saturating(self.tvd_mixture.value),
            hellinger_sq: Probability::saturating(self.hellinger_sq.value),
            chi_sq: None,
            method: Method::MonteCarlo,
            mc_std_err: self
                .kl_bits
                .std_err
                .max(self.tvd_mixture.std_err)
                .max(self.hellinger_sq.std_err),
            samples: self.kl_bits.samples,
        }
    }
}

/// Interpolation nodes for the log-ratio; the interpolation error is far
/// below the Monte-Carlo error of any practical sample size.
const TABLE_POINTS: usize = 4096;

/// Estimate KL, total variation and squared Hellinger with `samples` draws
/// per estimator.
pub fn empirical_divergences(model: &RadialOutputDensity, samples: usize, seed: u64) -> Result<EmpiricalDivergences> {
    if samples < 2 {
        return Err(Error::Input("need at least two samples".into()));
    }
    let spec = &model.spec;
    let table = model.tabulate(TABLE_POINTS)?;
    let kl = par_mean(samples, |i| {
        let z = output_norm_sq(spec, &mut substream(seed, Domain::DivergenceKl, i))?;
        Ok(nats_to_bits(table.log_ratio(z.sqrt())?))
    })?;
    let tvd_noise = par_mean(samples, |i| {
        let z = noise_norm_sq(spec.n, &mut substream(seed, Domain::DivergenceTvd, i));
        Ok(0.5 * table.log_ratio(z.sqrt())?.exp_m1().abs())
    })?;
    // even indices from the noise, odd from the output; independent of the
    // streams above because the index space is offset
    let offset = 1u64 << 40;
    let mixture = |i: u64| -> Result<f64> {
        let mut rng = substream(seed, Domain::DivergenceTvd, offset + i);
        let z = if i % 2 == 0 {
            noise_norm_sq(spec.n, &mut rng)
        } else {
            output_norm_sq(spec, &mut rng)?
        };
        table.log_ratio(z.sqrt())
    };
    let blocks = par_blocks(
        samples,
        <(RunningStats, RunningStats)>::default,
        mixture,
        |(tv, h), _, lr| {
            // |r − 1|/(r + 1) = |tanh(lr/2)| and 2√r/(1 + r) = sech(lr/2)
            tv.push((0.5 * lr).tanh().abs());
            h.push(1.0 - 1.0 / (0.5 * lr).cosh());
        },
    )?;
    let (mut tvd_mixture, mut hellinger) = (RunningStats::default(), RunningStats::default());
    for (tv, h) in &blocks {
        tvd_mixture.merge(tv);
        hellinger.merge(h);
    }
    Ok(EmpiricalDivergences {
        kl_bits: kl.into(),
        tvd_noise: tvd_noise.into(),
        tvd_mixture: tvd_mixture.into(),
        hellinger_sq: hellinger.into(),
    })
}
