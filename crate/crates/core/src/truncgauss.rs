//! The shell-truncated Gaussian codebook distribution and its channel output.
//!
//! A codeword is `N(0, μΨ I_n)` conditioned on `μ²nΨ ≤ ‖x‖² ≤ nΨ`. Because
//! the law is spherically symmetric, the output after adding `N(0, I_n)`
//! noise has a density that depends on `‖y‖` only:
//!
//! `f̄(y) / f₀(y) = E_r[ exp(−r²/2) · ₀F₁(; n/2; r²‖y‖²/4) ]`
//!
//! where `r` follows the truncated radius law. The expectation over `r` is
//! discretised with Gauss–Legendre nodes on `[r_inner, r_outer]`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::divergences::{DivergenceReport, Method};
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::specfn::{
    inv_reg_inc_gamma_bracketed, log_gamma, log_sph_bessel_factor, reg_inc_gamma_pair, Probability,
};

/// Parameters of the truncated Gaussian codebook distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedGaussianSpec {
    pub n: usize,
    /// Per-coordinate power scale Ψ(n).
    pub psi: f64,
    /// Truncation parameter μ ∈ (0, 1).
    pub mu: f64,
    /// μΨ, the variance of the untruncated Gaussian.
    pub variance: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    /// Δ, probability of the shell under the untruncated Gaussian.
    pub delta_mass: Probability,
}

impl TruncatedGaussianSpec {
    pub fn new(n: usize, psi: f64, mu: f64) -> Result<Self> {
        if !(psi.is_finite() && psi > 0.0) {
            return Err(Error::domain("TruncatedGaussianSpec::new", format!("psi = {psi} must be > 0")));
        }
        let delta_mass = shell_mass(n, mu)?;
        let nf = n as f64;
        Ok(TruncatedGaussianSpec {
            n,
            psi,
            mu,
            variance: mu * psi,
            r_inner: (mu * mu * nf * psi).sqrt(),
            r_outer: (nf * psi).sqrt(),
            delta_mass,
        })
    }

    /// Shell bounds expressed for the Gamma(n/2, 1) variable `‖x‖²/(2μΨ)`.
    fn gamma_bounds(&self) -> (f64, f64) {
        let nf = self.n as f64;
        (0.5 * nf * self.mu, 0.5 * nf / self.mu)
    }

    /// ln of the density of `‖x‖` (untruncated), at radius `r`.
    fn log_radius_density_full(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        let s = self.variance;
        std::f64::consts::LN_2 + (nf - 1.0) * r.ln() - r * r / (2.0 * s)
            - 0.5 * nf * (2.0 * s).ln()
            - crate::specfn::log_gamma(0.5 * nf).expect("n >= 1")
    }
}

fn check_shell(func: &'static str, n: usize, mu: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain(func, "n must be >= 1"));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain(func, format!("mu = {mu} must lie in (0, 1)")));
    }
    Ok(())
}

/// Δ = P(n/2, n/(2μ)) − P(n/2, nμ/2).
pub fn shell_mass(n: usize, mu: f64) -> Result<Probability> {
    check_shell("shell_mass", n, mu)?;
    let a = 0.5 * n as f64;
    let (p_lo, q_lo) = reg_inc_gamma_pair(a, a * mu)?;
    let (p_hi, q_hi) = reg_inc_gamma_pair(a, a / mu)?;
    // subtract the representation that is not close to 1
    let delta = if p_hi < 0.5 { p_hi - p_lo } else { q_lo - q_hi };
    Ok(Probability::saturating(delta))
}

/// 1 − Δ, computed from the two tails so it keeps relative precision.
pub fn shell_tail_mass(n: usize, mu: f64) -> Result<f64> {
    check_shell("shell_tail_mass", n, mu)?;
    let a = 0.5 * n as f64;
    let (p_lo, _) = reg_inc_gamma_pair(a, a * mu)?;
    let (_, q_hi) = reg_inc_gamma_pair(a, a / mu)?;
    Ok((p_lo + q_hi).min(1.0))
}

/// Total variation between the truncated and untruncated input laws, 1 − Δ.
pub fn tvd_trunc_vs_full(spec: &TruncatedGaussianSpec) -> Probability {
    Probability::saturating(shell_tail_mass(spec.n, spec.mu).expect("validated spec"))
}

/// Draw ‖x‖² from the truncated law by inverting the incomplete gamma.
pub fn sample_radius_sq<R: Rng + ?Sized>(spec: &TruncatedGaussianSpec, rng: &mut R) -> Result<f64> {
    let (lo, hi) = spec.gamma_bounds();
    let u: f64 = rng.random();
    let g = inv_reg_inc_gamma_bracketed(0.5 * spec.n as f64, lo, hi, u)?;
    // map back and guard the endpoints against rounding
    let r2 = 2.0 * spec.variance * g;
    Ok(r2.clamp(spec.r_inner * spec.r_inner, spec.r_outer * spec.r_outer))
}

/// Exact draw from the truncated Gaussian: inverse-CDF radius, uniform direction.
pub fn sample_codeword<R: Rng + ?Sized>(spec: &TruncatedGaussianSpec, rng: &mut R) -> Result<Vec<f64>> {
    let mut out = vec![0.0; spec.n];
    sample_codeword_into(spec, rng, &mut out)?;
    Ok(out)
}

pub fn sample_codeword_into<R: Rng + ?Sized>(
    spec: &TruncatedGaussianSpec,
    rng: &mut R,
    out: &mut [f64],
) -> Result<()> {
    let radius = sample_radius_sq(spec, rng)?.sqrt();
    loop {
        let mut norm_sq = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            norm_sq += *v * *v;
        }
        if norm_sq > 0.0 {
            let scale = radius / norm_sq.sqrt();
            out.iter_mut().for_each(|v| *v *= scale);
            return Ok(());
        }
    }
}

/// Characteristic function of `N(0, μΨ I_n)` at `t`: exp(−½ μΨ ‖t‖²).
pub fn char_function_gaussian(n: usize, psi: f64, mu: f64, t: &[f64]) -> Result<f64> {
    if t.len() != n {
        return Err(Error::Input(format!("t has {} coordinates, expected {n}", t.len())));
    }
    let tt: f64 = t.iter().map(|v| v * v).sum();
    Ok((-0.5 * mu * psi * tt).exp())
}

/// ln f₀ at a point of norm `y_norm`, `f₀ = N(0, I_n)`.
pub fn noise_log_density(n: usize, y_norm: f64) -> f64 {
    -0.5 * n as f64 * (2.0 * PI).ln() - 0.5 * y_norm * y_norm
}

/// ln of the density of `‖y‖` for `y ~ N(0, s I_n)`.
pub fn chi_log_pdf(n: usize, s: f64, rho: f64) -> f64 {
    if rho <= 0.0 {
        return if n == 1 {
            (2.0 / (PI * s)).sqrt().ln()
        } else {
            f64::NEG_INFINITY
        };
    }
    let nf = n as f64;
    std::f64::consts::LN_2 + (nf - 1.0) * rho.ln() - rho * rho / (2.0 * s)
        - 0.5 * nf * (2.0 * s).ln()
        - log_gamma(0.5 * nf).expect("n >= 1")
}

/// Default Gauss–Legendre node count for the radius law.
pub const DEFAULT_RADIAL_NODES: usize = 256;
const MAX_RADIAL_NODES: usize = 1 << 15;

/// Output density of the channel driven by a truncated Gaussian input.
#[derive(Debug, Clone)]
pub struct RadialOutputDensity {
    pub spec: TruncatedGaussianSpec,
    /// `(radius, weight)` with weights summing to 1.
    pub quadrature_nodes: Vec<(f64, f64)>,
    /// ln w_k − r_k²/2 per node.
    offsets: Vec<f64>,
}

impl RadialOutputDensity {
    /// Build with 256 nodes, doubled until the radius-law weights integrate
    /// to Δ within a relative 1e-10.
    pub fn new(spec: TruncatedGaussianSpec) -> Result<Self> {
        let mut count = DEFAULT_RADIAL_NODES;
        loop {
            match Self::with_nodes(spec, count) {
                Ok(model) => return Ok(model),
                Err(Error::Numeric { .. }) if count < MAX_RADIAL_NODES => count *= 2,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn with_nodes(spec: TruncatedGaussianSpec, count: usize) -> Result<Self> {
        const FUNC: &str = "RadialOutputDensity::with_nodes";
        if count < DEFAULT_RADIAL_NODES {
            return Err(Error::Input(format!("need at least {DEFAULT_RADIAL_NODES} nodes, got {count}")));
        }
        let delta = spec.delta_mass.get();
        if delta <= 0.0 {
            return Err(Error::numeric(FUNC, "shell carries no probability mass"));
        }
        let gl = GaussLegendre::new(count);
        let nodes: Vec<(f64, f64)> = gl
            .points(spec.r_inner, spec.r_outer)
            .map(|(r, w)| (r, w * spec.log_radius_density_full(r).exp() / delta))
            .collect();
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        if !total.is_finite() || (total - 1.0).abs() > 1e-10 {
            return Err(Error::numeric(
                FUNC,
                format!("radius weights sum to {total} with {count} nodes"),
            ));
        }
        // renormalise the residual rounding away
        let nodes: Vec<(f64, f64)> = nodes.into_iter().map(|(r, w)| (r, w / total)).collect();
        let offsets = nodes.iter().map(|&(r, w)| w.ln() - 0.5 * r * r).collect();
        Ok(RadialOutputDensity {
            spec,
            quadrature_nodes: nodes,
            offsets,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// ln(f̄(y) / f₀(y)) at `‖y‖ = y_norm`.
    pub fn log_ratio(&self, y_norm: f64) -> Result<f64> {
        if !(y_norm >= 0.0) || !y_norm.is_finite() {
            return Err(Error::domain("radial_output_log_density", format!("norm {y_norm}")));
        }
        let b = 0.5 * self.spec.n as f64;
        let mut terms = Vec::with_capacity(self.offsets.len());
        let mut max = f64::NEG_INFINITY;
        for (&(r, _), off) in self.quadrature_nodes.iter().zip(&self.offsets) {
            let v = off + log_sph_bessel_factor(b, r * y_norm)?;
            max = max.max(v);
            terms.push(v);
        }
        let sum: f64 = terms.iter().map(|v| (v - max).exp()).sum();
        let out = max + sum.ln();
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::numeric("radial_output_log_density", format!("non-finite at norm {y_norm}")))
        }
    }

    /// `ln(f̄/f₀)` and its derivative in the norm.
    pub fn log_ratio_and_slope(&self, y_norm: f64) -> Result<(f64, f64)> {
        if !(y_norm >= 0.0) || !y_norm.is_finite() {
            return Err(Error::domain("radial_output_log_density", format!("norm {y_norm}")));
        }
        let b = 0.5 * self.spec.n as f64;
        let mut terms = Vec::with_capacity(self.offsets.len());
        let mut max = f64::NEG_INFINITY;
        for (&(r, _), off) in self.quadrature_nodes.iter().zip(&self.offsets) {
            let t = r * y_norm;
            let lf = log_sph_bessel_factor(b, t)?;
            // d/dt ln ₀F₁(; b; t²/4) = (t/2b)·₀F₁(; b+1; t²/4)/₀F₁(; b; t²/4)
            let dlf = t / (2.0 * b) * (log_sph_bessel_factor(b + 1.0, t)? - lf).exp();
            let v = off + lf;
            max = max.max(v);
            terms.push((v, r * dlf));
        }
        let (mut sum, mut slope) = (0.0, 0.0);
        for (v, d) in terms {
            let w = (v - max).exp();
            sum += w;
            slope += w * d;
        }
        let out = max + sum.ln();
        if out.is_finite() && slope.is_finite() {
            Ok((out, slope / sum))
        } else {
            Err(Error::numeric("radial_output_log_density", format!("non-finite at norm {y_norm}")))
        }
    }

    /// Cubic Hermite table of `ln(f̄/f₀)` on `points` equally spaced norms
    /// covering all but a negligible part of both laws.
    pub fn tabulate(&self, points: usize) -> Result<LogRatioTable<'_>> {
        if points < 2 {
            return Err(Error::Input("a table needs at least two points".into()));
        }
        let (_, hi) = self.norm_window();
        let step = hi / (points - 1) as f64;
        let mut values = Vec::with_capacity(points);
        let mut slopes = Vec::with_capacity(points);
        for i in 0..points {
            let (v, d) = self.log_ratio_and_slope(i as f64 * step)?;
            values.push(v);
            slopes.push(d);
        }
        Ok(LogRatioTable {
            model: self,
            step,
            values,
            slopes,
        })
    }

    /// f̄(y)/f₀(y).
    pub fn ratio(&self, y_norm: f64) -> Result<f64> {
        self.log_ratio(y_norm).map(f64::exp)
    }

    /// Norm at which f̄ = f₀. The ratio is below 1 at the origin and
    /// increasing in the norm.
    pub fn crossing_radius(&self) -> Result<f64> {
        const FUNC: &str = "RadialOutputDensity::crossing_radius";
        let mut lo = 0.0;
        let mut hi = (self.spec.n as f64).sqrt().max(1.0);
        let mut expand = 0;
        while self.log_ratio(hi)? <= 0.0 {
            lo = hi;
            hi *= 2.0;
            expand += 1;
            if expand > 60 {
                return Err(Error::numeric(FUNC, "could not bracket the crossing"));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.log_ratio(mid)? <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Integration window in `‖y‖` holding all but a negligible part of both
    /// f₀ and f̄.
    fn norm_window(&self) -> (f64, f64) {
        let root = (self.spec.n as f64).sqrt();
        ((root - 12.0).max(0.0), root + self.spec.r_outer + 12.0)
    }

    /// `∫ χ_n(ρ) g(f̄/f₀(ρ)) dρ` with the integrand split at `split`.
    fn radial_expectation<G: Fn(f64) -> f64>(&self, split: Option<f64>, g: G) -> Result<f64> {
        const PANELS: usize = 64;
        let gl = GaussLegendre::new(32);
        let (a, b) = self.norm_window();
        let mut cuts = vec![a];
        if let Some(s) = split {
            if s > a && s < b {
                cuts.push(s);
            }
        }
        cuts.push(b);
        let n = self.spec.n;
        let mut total = 0.0;
        let mut err: Option<Error> = None;
        for w in cuts.windows(2) {
            total += gl.integrate(w[0], w[1], PANELS, |rho| match self.log_ratio(rho) {
                Ok(lr) => chi_log_pdf(n, 1.0, rho).exp() * g(lr),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            });
        }
        match err {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }

    /// ∫ f̄ over ℝⁿ by radial quadrature; should be 1.
    pub fn normalization(&self) -> Result<f64> {
        self.radial_expectation(None, f64::exp)
    }

    /// KL, TVD, Hellinger² and χ² of the output against the noise, by
    /// radial quadrature.
    pub fn divergences(&self) -> Result<DivergenceReport> {
        let cross = self.crossing_radius()?;
        let kl_nats = self.radial_expectation(Some(cross), |lr| lr.exp() * lr)?;
        let tvd = 0.5 * self.radial_expectation(Some(cross), |lr| lr.exp_m1().abs())?;
        let bc = self.radial_expectation(Some(cross), |lr| (0.5 * lr).exp())?;
        let chi = self.radial_expectation(Some(cross), |lr| lr.exp_m1().powi(2))?;
        Ok(DivergenceReport {
            kl_bits: crate::nats_to_bits(kl_nats.max(0.0)),
            tvd: Probability::saturating(tvd),
            hellinger_sq: Probability::saturating(1.0 - bc),
            chi_sq: Some(chi.max(0.0)),
            method: Method::Quadrature,
            mc_std_err: 0.0,
            samples: 0,
        })
    }
}

/// Interpolated `ln(f̄/f₀)`, exact beyond the tabulated range.
#[derive(Debug, Clone)]
pub struct LogRatioTable<'a> {
    model: &'a RadialOutputDensity,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl LogRatioTable<'_> {
    pub fn log_ratio(&self, y_norm: f64) -> Result<f64> {
        let pos = y_norm / self.step;
        let last = self.values.len() - 1;
        if !(pos >= 0.0) || pos >= last as f64 {
            return self.model.log_ratio(y_norm);
        }
        let i = pos as usize;
        let t = pos - i as f64;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        Ok(h00 * self.values[i]
            + h10 * self.step * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.step * self.slopes[i + 1])
    }
}

/// ln f̄ at a point of norm `y_norm`.
pub fn radial_output_log_density(model: &RadialOutputDensity, y_norm: f64) -> Result<f64> {
    Ok(noise_log_density(model.n(), y_norm) + model.log_ratio(y_norm)?)
}
