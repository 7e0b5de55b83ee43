//! Divergences between zero-mean Gaussian laws and the channel output.
//!
//! The reference law is always the noise `N(0, I_n)`. Closed forms are used
//! where they exist; the exact total variation uses the fact that the
//! likelihood ratio of two isotropic Gaussians is monotone in `‖y‖`, which
//! reduces it to two incomplete-gamma values.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{par_mean, Estimate};
use crate::rng::{substream, Domain};
use crate::specfn::{reg_inc_gamma_pair, Probability};
use crate::truncgauss::RadialOutputDensity;
use crate::{nats_to_bits, LN_2};

/// `P₁ = N(0, σ₁² I_n)` against `P₀ = N(0, I_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotropicGaussianPair {
    pub n: usize,
    pub sigma1_sq: f64,
    /// σ₁² − 1, kept separately so small powers do not lose precision.
    power: f64,
}

impl IsotropicGaussianPair {
    pub fn new(n: usize, sigma1_sq: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("IsotropicGaussianPair::new", "n must be >= 1"));
        }
        if !(sigma1_sq.is_finite() && sigma1_sq > 0.0) {
            return Err(Error::domain(
                "IsotropicGaussianPair::new",
                format!("sigma1_sq = {sigma1_sq} must be positive"),
            ));
        }
        Ok(IsotropicGaussianPair {
            n,
            sigma1_sq,
            power: sigma1_sq - 1.0,
        })
    }

    /// The pair induced by per-coordinate input power `x`, i.e. σ₁² = 1 + x.
    pub fn from_power(n: usize, x: f64) -> Result<Self> {
        if !(x > -1.0) {
            return Err(Error::domain("IsotropicGaussianPair::from_power", format!("x = {x} must exceed -1")));
        }
        let mut pair = Self::new(n, 1.0 + x)?;
        pair.power = x;
        Ok(pair)
    }

    /// σ₁² − 1.
    pub fn power(&self) -> f64 {
        self.power
    }

    /// ln(p₁/p₀) at a point of squared norm `norm_sq`.
    pub fn log_ratio(&self, norm_sq: f64) -> f64 {
        let s = self.sigma1_sq;
        -0.5 * self.n as f64 * s.ln() + 0.5 * norm_sq * (1.0 - 1.0 / s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// KL (bits), total variation, squared Hellinger and χ² for one pair of laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub kl_bits: f64,
    pub tvd: Probability,
    pub hellinger_sq: Probability,
    pub chi_sq: Option<f64>,
    pub method: Method,
    pub mc_std_err: f64,
    pub samples: u64,
}

impl DivergenceReport {
    /// `H² ≤ V ≤ √(1 − (1 − H²)²)`, with `3·mc_std_err` of slack.
    pub fn sandwich_holds(&self) -> bool {
        let h = self.hellinger_sq.get();
        let v = self.tvd.get();
        let slack = 3.0 * self.mc_std_err + 1e-12;
        h <= v + slack && v <= (1.0 - (1.0 - h).powi(2)).sqrt() + slack
    }

    /// Pinsker: `V ≤ √(D·ln2/2)`.
    pub fn pinsker_holds(&self) -> bool {
        self.tvd.get() <= (self.kl_bits * LN_2 / 2.0).sqrt() + 3.0 * self.mc_std_err + 1e-12
    }
}

/// Eigenvalues of `K + I_n` for a Gaussian input with covariance `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    pub trace_power: f64,
}

impl CovarianceSpec {
    /// Build from eigenvalues, deriving `trace_power = Σλ/n − 1`.
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::domain("CovarianceSpec::new", "no eigenvalues"));
        }
        if let Some(bad) = eigenvalues.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::domain("CovarianceSpec::new", format!("eigenvalue {bad} is not positive")));
        }
        let n = eigenvalues.len();
        let trace_power = eigenvalues.iter().sum::<f64>() / n as f64 - 1.0;
        Ok(CovarianceSpec {
            n,
            eigenvalues,
            trace_power,
        })
    }
}

/// `(n/2)(x − ln(1+x)) log₂e` for σ₁² = 1 + x.
pub fn kl_isotropic(pair: &IsotropicGaussianPair) -> f64 {
    let x = pair.power();
    let nats = -0.5 * pair.n as f64 * crate::specfn::log1pmx(x);
    nats_to_bits(nats.max(0.0))
}

/// `½ Σ(λᵢ − 1 − ln λᵢ) log₂e`.
pub fn kl_general_covariance(spec: &CovarianceSpec) -> Result<f64> {
    if spec.eigenvalues.len() != spec.n {
        return Err(Error::Input(format!(
            "{} eigenvalues for dimension {}",
            spec.eigenvalues.len(),
            spec.n
        )));
    }
    let mut sum = 0.0;
    let mut trace = 0.0;
    for &l in &spec.eigenvalues {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::domain("kl_general_covariance", format!("eigenvalue {l} is not positive")));
        }
        sum -= crate::specfn::log1pmx(l - 1.0);
        trace += l;
    }
    let implied = trace / spec.n as f64 - 1.0;
    if (implied - spec.trace_power).abs() > 1e-12 * (1.0 + implied.abs()) {
        return Err(Error::Input(format!(
            "trace_power {} does not match eigenvalues ({implied})",
            spec.trace_power
        )));
    }
    Ok(nats_to_bits(0.5 * sum))
}

/// `1 − (2σ₁/(1 + σ₁²))^{n/2}`.
pub fn hellinger_sq_isotropic(pair: &IsotropicGaussianPair) -> Probability {
    let t = pair.power();
    // ln(2σ/(1+σ²)) = ½ln(1+t) − ln(1+t/2)
    let log_bc = 0.5 * pair.n as f64 * (0.5 * t.ln_1p() - (0.5 * t).ln_1p());
    Probability::saturating(-log_bc.exp_m1())
}

/// Squared norm at which the two isotropic densities are equal.
pub fn crossing_norm_sq(pair: &IsotropicGaussianPair) -> Option<f64> {
    let t = pair.power();
    if t == 0.0 {
        return None;
    }
    Some(pair.n as f64 * pair.sigma1_sq * t.ln_1p() / t)
}

/// Exact total variation between `N(0, σ₁² I_n)` and `N(0, I_n)`.
pub fn tvd_isotropic_exact(pair: &IsotropicGaussianPair) -> Result<Probability> {
    let Some(rho_sq) = crossing_norm_sq(pair) else {
        return Ok(Probability::saturating(0.0));
    };
    let a = 0.5 * pair.n as f64;
    let (p0, q0) = reg_inc_gamma_pair(a, 0.5 * rho_sq)?;
    let (p1, q1) = reg_inc_gamma_pair(a, 0.5 * rho_sq / pair.sigma1_sq)?;
    // difference of whichever tails are small
    let v = if p0.max(p1) < 0.5 { p0 - p1 } else { q1 - q0 };
    Ok(Probability::saturating(v.abs()))
}

/// `D_χ²(P₁‖P₀) = (2σ₁² − σ₁⁴)^{−n/2} − 1`, infinite for σ₁² ≥ 2.
pub fn chi_sq_isotropic(pair: &IsotropicGaussianPair) -> Option<f64> {
    let s = pair.sigma1_sq;
    if s >= 2.0 {
        return None;
    }
    // 2s − s² = 1 − t², t = s − 1
    let t = pair.power();
    Some((-0.5 * pair.n as f64 * (-t * t).ln_1p()).exp_m1())
}

/// All closed-form divergences for an isotropic pair.
pub fn isotropic_report(pair: &IsotropicGaussianPair) -> Result<DivergenceReport> {
    Ok(DivergenceReport {
        kl_bits: kl_isotropic(pair),
        tvd: tvd_isotropic_exact(pair)?,
        hellinger_sq: hellinger_sq_isotropic(pair),
        chi_sq: chi_sq_isotropic(pair),
        method: Method::ClosedForm,
        mc_std_err: 0.0,
        samples: 0,
    })
}

/// Monte-Carlo mean of `ln(p₁/p₀)` under `P₁`, in bits.
pub fn kl_isotropic_mc(pair: &IsotropicGaussianPair, samples: usize, seed: u64) -> Result<Estimate> {
    let s = pair.sigma1_sq;
    let stats = par_mean(samples, |i| {
        let mut rng = substream(seed, Domain::DivergenceKl, i);
        let mut norm_sq = 0.0;
        for _ in 0..pair.n {
            let z: f64 = StandardNormal.sample(&mut rng);
            norm_sq += z * z;
        }
        Ok(nats_to_bits(pair.log_ratio(s * norm_sq)))
    })?;
    Ok(stats.into())
}

/// Importance-sampling estimate of `D_χ²(P‖Q) = E_Q[(p/q − 1)²]`.
///
/// `sample_q` draws from the reference `Q`; sample `i` uses its own
/// substream of `seed`, so the estimate does not depend on the thread count.
pub fn chi_sq_mc<T, S, LP, LQ>(sample_q: S, log_p: LP, log_q: LQ, samples: usize, seed: u64) -> Result<Estimate>
where
    S: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
    LP: Fn(&T) -> f64 + Sync,
    LQ: Fn(&T) -> f64 + Sync,
{
    if samples < 1000 {
        return Err(Error::Input(format!("chi_sq_mc needs at least 1000 samples, got {samples}")));
    }
    let stats = par_mean(samples, |i| {
        let mut rng = substream(seed, Domain::ChiSquare, i);
        let x = sample_q(&mut rng)?;
        let (lp, lq) = (log_p(&x), log_q(&x));
        if !lp.is_finite() || !lq.is_finite() {
            return Err(Error::numeric(
                "chi_sq_mc",
                format!("sample {i}: log p = {lp}, log q = {lq}"),
            ));
        }
        Ok((lp - lq).exp_m1().powi(2))
    })?;
    Ok(stats.into())
}

/// Grid evaluation of `h(y) = (f̄(y)/f₀(y) − 1)/ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HWitness {
    pub epsilon: f64,
    pub sup_abs_h: f64,
    /// Norm at which the grid supremum is attained.
    pub argmax: f64,
    /// `(‖y‖, h)` pairs in grid order.
    pub grid_values: Vec<(f64, f64)>,
}

impl HWitness {
    /// Whether the grid supremum stays within `1 + tol`.
    pub fn bounded_by_one(&self, tol: f64) -> bool {
        self.sup_abs_h <= 1.0 + tol
    }
}

/// Default witness grid: 10⁴ points on `[0, √(3n)]` plus 200 points within
/// 1% of the crossing norm.
pub fn default_h_grid(model: &RadialOutputDensity) -> Result<Vec<f64>> {
    const POINTS: usize = 10_000;
    let top = (3.0 * model.n() as f64).sqrt();
    let mut grid: Vec<f64> = (0..POINTS).map(|i| top * i as f64 / (POINTS - 1) as f64).collect();
    let cross = model.crossing_radius()?;
    grid.extend((0..200).map(|i| cross * (0.99 + 0.02 * i as f64 / 199.0)));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Evaluate `h` on `radial_grid` (or the default grid) and report its
/// supremum over the grid.
pub fn h_function_witness(
    model: &RadialOutputDensity,
    epsilon: f64,
    radial_grid: Option<&[f64]>,
) -> Result<HWitness> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::domain("h_function_witness", format!("epsilon = {epsilon}")));
    }
    let owned;
    let grid = match radial_grid {
        Some(g) => g,
        None => {
            owned = default_h_grid(model)?;
            &owned
        }
    };
    let mut grid_values = Vec::with_capacity(grid.len());
    let (mut sup, mut argmax) = (0.0f64, 0.0);
    for &r in grid {
        let h = model.log_ratio(r)?.exp_m1() / epsilon;
        if h.abs() > sup {
            sup = h.abs();
            argmax = r;
        }
        grid_values.push((r, h));
    }
    Ok(HWitness {
        epsilon,
        sup_abs_h: sup,
        argmax,
        grid_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(n: usize, s: f64) -> IsotropicGaussianPair {
        IsotropicGaussianPair::new(n, s).unwrap()
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_isotropic(&pair(7, 1.0)), 0.0);
        let v = kl_isotropic(&IsotropicGaussianPair::from_power(2, 1.0).unwrap());
        assert!((v - 0.442_695_040_888_963_4).abs() < 1e-15);
        assert!(IsotropicGaussianPair::from_power(2, -1.0).is_err());
        assert!(IsotropicGaussianPair::new(0, 1.0).is_err());
    }

    #[test]
    fn general_covariance() {
        let iso = CovarianceSpec::new(vec![2.0, 2.0]).unwrap();
        let skew = CovarianceSpec::new(vec![1.5, 2.5]).unwrap();
        let a = kl_general_covariance(&iso).unwrap();
        assert!((a - kl_isotropic(&pair(2, 2.0))).abs() < 1e-15);
        assert!(kl_general_covariance(&skew).unwrap() > a);
        assert_eq!(kl_general_covariance(&CovarianceSpec::new(vec![1.0; 5]).unwrap()).unwrap(), 0.0);
        assert!(CovarianceSpec::new(vec![1.0, 0.0]).is_err());
        let mut bad = iso.clone();
        bad.trace_power = 0.5;
        assert!(kl_general_covariance(&bad).is_err());
    }

    #[test]
    fn hellinger_examples() {
        assert_eq!(hellinger_sq_isotropic(&pair(3, 1.0)).get(), 0.0);
        assert!((hellinger_sq_isotropic(&pair(2, 4.0)).get() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn tvd_examples() {
        assert_eq!(tvd_isotropic_exact(&pair(5, 1.0)).unwrap().get(), 0.0);
        let v = tvd_isotropic_exact(&pair(1, 4.0)).unwrap().get();
        assert!((v - 0.322_674_568_8).abs() < 1e-9, "{v}");
        // σ₁² < 1 takes the other branch
        let w = tvd_isotropic_exact(&pair(3, 0.5)).unwrap().get();
        assert!(w > 0.0 && w < 1.0);
    }

    #[test]
    fn chi_sq_closed_form() {
        let v = chi_sq_isotropic(&pair(1, 1.2)).unwrap();
        assert!((v - 0.020_620_726_159_657_6).abs() < 1e-15);
        assert!(chi_sq_isotropic(&pair(1, 2.0)).is_none());
    }

    #[test]
    fn chi_sq_mc_identical_laws() {
        let est = chi_sq_mc(
            |rng| Ok(StandardNormal.sample(rng)),
            |x: &f64| -0.5 * x * x,
            |x: &f64| -0.5 * x * x,
            2000,
            1,
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
        assert!(chi_sq_mc(|_| Ok(0.0), |_: &f64| 0.0, |_: &f64| 0.0, 10, 1).is_err());
        let nan = chi_sq_mc(|_| Ok(0.0), |_: &f64| f64::NAN, |_: &f64| 0.0, 1000, 1);
        assert!(matches!(nan, Err(Error::Numeric { .. })));
    }

    #[test]
    fn report_json_field_names() {
        let r = isotropic_report(&pair(4, 1.1)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["kl_bits", "tvd", "hellinger_sq", "chi_sq", "method", "mc_std_err", "samples"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["method"], "closed_form");
        assert!(r.sandwich_holds() && r.pinsker_holds());
    }
}
