//! Normal-approximation throughput bounds under a KL covertness budget, and
//! divergence sweeps along power schedules `θ_n = c·n^{−τ}`.
//!
//! Every bound is reported in bits with its unspecified `O(1)` remainder set
//! to zero, so absolute values are meaningful only up to a constant; the
//! `up_to_constant` flag on each record says so.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergences::{hellinger_sq_isotropic, kl_isotropic, tvd_isotropic_exact, IsotropicGaussianPair};
use crate::error::{Error, Result};
use crate::planner::CovertParams;
use crate::specfn::gaussian_q_inv;
use crate::{LN_2, LOG2_E};

/// Dispersion factor of the achievability bound.
pub fn v1(params: &CovertParams) -> f64 {
    let CovertParams { n, delta, mu, nu, .. } = *params;
    let nf = n as f64;
    let num = delta * LN_2 + mu * nu * (delta * nf * LN_2).sqrt();
    num / (num + 0.25 * nf * mu * mu * nu * nu)
}

/// Dispersion factor of the converse bound.
pub fn v2(params: &CovertParams) -> f64 {
    let CovertParams { n, delta, eta, .. } = *params;
    let nf = n as f64;
    let num = delta * eta * LN_2 + (delta * eta * nf * LN_2).sqrt();
    num / (num + 0.25 * nf)
}

/// Lower bound on `log₂ M*(n, ε, δ)`.
pub fn achievability_bound(params: &CovertParams) -> Result<f64> {
    params.validate()?;
    let CovertParams { n, delta, epsilon, mu, nu, .. } = *params;
    let nf = n as f64;
    let dl = (delta * LN_2).sqrt();
    let capacity = 0.5 * nf * (4.0 * delta * LN_2 / (nf * nu * nu)).sqrt().ln_1p() * LOG2_E;
    let ratio = (mu * mu * nu * nf.sqrt() + dl) / (mu * nu * nf.sqrt() + dl);
    let dispersion = (0.5 * nf * LOG2_E * LOG2_E * ratio * v1(params)).sqrt();
    Ok(capacity - dispersion * gaussian_q_inv(epsilon)? + 0.5 * nf.log2())
}

/// Upper bound on `log₂ M*(n, ε, δ)`.
pub fn converse_bound(params: &CovertParams) -> Result<f64> {
    params.validate()?;
    let CovertParams { n, delta, epsilon, eta, .. } = *params;
    let nf = n as f64;
    let capacity = 0.5 * nf * (4.0 * eta * delta * LN_2 / nf).sqrt().ln_1p() * LOG2_E;
    let dispersion = (0.5 * nf * LOG2_E * LOG2_E * v2(params)).sqrt();
    Ok(capacity - dispersion * gaussian_q_inv(epsilon)? + 1.5 * nf.log2())
}

/// Leading terms of the expansions of both bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    /// `√(nδ log₂e)`.
    pub first_order: f64,
    /// `√2 (nδ)^{1/4} (log₂e)^{3/4} Q⁻¹(ε)`.
    pub second_order_conv: f64,
    /// As above with coefficient `(2/μ)^{1/2}`.
    pub second_order_achiev: f64,
}

pub fn simplified_asymptotics(params: &CovertParams) -> Result<Asymptotics> {
    params.validate()?;
    let nd = params.n as f64 * params.delta;
    let base = nd.powf(0.25) * LOG2_E.powf(0.75) * gaussian_q_inv(params.epsilon)?;
    Ok(Asymptotics {
        first_order: (nd * LOG2_E).sqrt(),
        second_order_conv: 2f64.sqrt() * base,
        second_order_achiev: (2.0 / params.mu).sqrt() * base,
    })
}

/// Both bounds and their decomposition at one blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputBounds {
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub achievability_bits: f64,
    pub converse_bits: f64,
    pub first_order: f64,
    pub second_order_conv: f64,
    pub second_order_achiev: f64,
    pub v1: f64,
    pub v2: f64,
    /// Always true: the `O(1)` remainders are omitted.
    pub up_to_constant: bool,
}

/// Column order of [`ThroughputBounds::csv_row`].
pub const CSV_HEADER: &str =
    "n,delta,epsilon,achievability_bits,converse_bits,first_order,second_order_conv,second_order_achiev,v1,v2";

impl ThroughputBounds {
    pub fn compute(params: &CovertParams) -> Result<Self> {
        let asym = simplified_asymptotics(params)?;
        Ok(ThroughputBounds {
            n: params.n,
            delta: params.delta,
            epsilon: params.epsilon,
            achievability_bits: achievability_bound(params)?,
            converse_bits: converse_bound(params)?,
            first_order: asym.first_order,
            second_order_conv: asym.second_order_conv,
            second_order_achiev: asym.second_order_achiev,
            v1: v1(params),
            v2: v2(params),
            up_to_constant: true,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.delta,
            self.epsilon,
            self.achievability_bits,
            self.converse_bits,
            self.first_order,
            self.second_order_conv,
            self.second_order_achiev,
            self.v1,
            self.v2
        )
    }
}

/// Bounds over a grid of blocklengths, in grid order.
pub fn bounds_over(grid: &[usize], make: impl Fn(usize) -> Result<CovertParams> + Sync) -> Result<Vec<ThroughputBounds>> {
    grid.par_iter().map(|&n| ThroughputBounds::compute(&make(n)?)).collect()
}

/// Smallest `n` in `rows` from which achievability ≤ converse holds on every
/// later row. `None` if it fails at the last row.
pub fn ordering_crossover(rows: &[ThroughputBounds]) -> Option<usize> {
    let mut from = None;
    for r in rows.iter().rev() {
        if r.achievability_bits <= r.converse_bits {
            from = Some(r.n);
        } else {
            break;
        }
    }
    from
}

/// Integer blocklengths log-spaced over `[lo, hi]`, `per_decade` points per
/// decade, deduplicated after rounding.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<usize>> {
    if !(lo >= 1.0 && hi >= lo && hi.is_finite()) || per_decade == 0 {
        return Err(Error::Input(format!("bad grid [{lo}, {hi}] with {per_decade} per decade")));
    }
    let decades = (hi / lo).log10();
    let steps = (decades * per_decade as f64).round() as usize;
    let mut grid: Vec<usize> = (0..=steps)
        .map(|i| {
            let t = if steps == 0 { 0.0 } else { i as f64 / steps as f64 };
            (lo * 10f64.powf(t * decades)).round() as usize
        })
        .collect();
    grid.dedup();
    Ok(grid)
}

/// Default sweep grid spacing.
pub const SWEEP_POINTS_PER_DECADE: usize = 40;

/// Limiting behavior of a sweep over its top decade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// KL grows without bound and the total variation climbs toward 1.
    Diverging,
    /// KL and total variation settle to constants.
    Plateau,
    /// KL and total variation both decay to 0.
    Vanishing,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub theta: f64,
    pub kl_bits: f64,
    pub tvd: f64,
    pub hellinger_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSweep {
    pub c: f64,
    pub tau: f64,
    pub n_grid: Vec<usize>,
    pub trajectories: Vec<SweepPoint>,
    pub regime: Regime,
    /// First grid point from which KL and total variation are both monotone.
    pub monotone_from: Option<usize>,
}

/// Relative change tolerated over the top decade for a plateau.
pub const PLATEAU_TOLERANCE: f64 = 0.01;

/// Divergences between `N(0, (1+θ_n) I_n)` and `N(0, I_n)` with
/// `θ_n = c·n^{−τ}`.
pub fn asymptotic_sweep(c: f64, tau: f64, n_grid: &[usize]) -> Result<AsymptoticSweep> {
    if !(c > 0.0 && tau > 0.0) {
        return Err(Error::domain("asymptotic_sweep", format!("c = {c}, tau = {tau} must be positive")));
    }
    if n_grid.len() < 2 || n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] == 0 {
        return Err(Error::Input("sweep grid must be increasing with at least two points".into()));
    }
    let trajectories = n_grid
        .par_iter()
        .map(|&n| {
            let theta = c * (n as f64).powf(-tau);
            let pair = IsotropicGaussianPair::from_power(n, theta)?;
            Ok(SweepPoint {
                n,
                theta,
                kl_bits: kl_isotropic(&pair),
                tvd: tvd_isotropic_exact(&pair)?.get(),
                hellinger_sq: hellinger_sq_isotropic(&pair).get(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let regime = classify(&trajectories);
    let monotone_from = monotone_from(&trajectories);
    Ok(AsymptoticSweep {
        c,
        tau,
        n_grid: n_grid.to_vec(),
        trajectories,
        regime,
        monotone_from,
    })
}

fn classify(points: &[SweepPoint]) -> Regime {
    let last = points[points.len() - 1];
    let top: Vec<&SweepPoint> = points.iter().filter(|p| p.n as f64 >= last.n as f64 / 10.0).collect();
    let first = top[0];
    let rel = |a: f64, b: f64| if a == 0.0 { f64::INFINITY } else { (b - a).abs() / a.abs() };
    if rel(first.kl_bits, last.kl_bits) <= PLATEAU_TOLERANCE && rel(first.tvd, last.tvd) <= PLATEAU_TOLERANCE {
        return Regime::Plateau;
    }
    let kl_down = top.windows(2).all(|w| w[1].kl_bits < w[0].kl_bits);
    let tvd_down = top.windows(2).all(|w| w[1].tvd < w[0].tvd);
    let kl_up = top.windows(2).all(|w| w[1].kl_bits > w[0].kl_bits);
    // the total variation may saturate at 1 in floating point
    let tvd_up = top.windows(2).all(|w| w[1].tvd >= w[0].tvd) && last.tvd > first.tvd.min(1.0 - 1e-15);
    if kl_down && tvd_down {
        Regime::Vanishing
    } else if kl_up && (tvd_up || last.tvd == 1.0) {
        Regime::Diverging
    } else {
        Regime::Unclassified
    }
}

fn monotone_from(points: &[SweepPoint]) -> Option<usize> {
    fn monotone(xs: &[f64]) -> bool {
        xs.windows(2).all(|w| w[1] >= w[0]) || xs.windows(2).all(|w| w[1] <= w[0])
    }
    let kl: Vec<f64> = points.iter().map(|p| p.kl_bits).collect();
    let tv: Vec<f64> = points.iter().map(|p| p.tvd).collect();
    (0..points.len())
        .find(|&i| monotone(&kl[i..]) && monotone(&tv[i..]))
        .map(|i| points[i].n)
}
