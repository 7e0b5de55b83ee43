//! Covert power planning.
//!
//! Budgets `δ` are in bits. Power levels are per-coordinate input powers
//! against unit-variance noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfn::log1pmx;
use crate::{LN_2, LOG2_E};

/// How the slack `ν(n)` is derived from `n` when not given explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuSchedule {
    /// `ν²(n) = 1 + 1/n`, the choice used for the throughput bounds.
    #[default]
    SquaredNu,
    /// `ν(n) = 1 + 1/n`, the choice used for the shell-mass bound.
    LinearNu,
}

impl NuSchedule {
    pub fn nu(self, n: usize) -> f64 {
        let inv = 1.0 / n as f64;
        match self {
            NuSchedule::SquaredNu => (1.0 + inv).sqrt(),
            NuSchedule::LinearNu => 1.0 + inv,
        }
    }
}

/// A covert communication problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovertParams {
    pub n: usize,
    /// KL budget in bits.
    pub delta: f64,
    /// Target decoding error probability.
    pub epsilon: f64,
    pub mu: f64,
    pub nu: f64,
    pub eta: f64,
}

impl CovertParams {
    pub fn new(n: usize, delta: f64, epsilon: f64, mu: f64, nu: f64, eta: f64) -> Result<Self> {
        let p = CovertParams {
            n,
            delta,
            epsilon,
            mu,
            nu,
            eta,
        };
        p.validate()?;
        Ok(p)
    }

    /// `μ = 1 − 1/(n+1)`, `ν² = 1 + 1/n`, `η = 1 + 1/n`.
    pub fn with_defaults(n: usize, delta: f64, epsilon: f64) -> Result<Self> {
        Self::with_schedule(n, delta, epsilon, NuSchedule::default())
    }

    pub fn with_schedule(n: usize, delta: f64, epsilon: f64, schedule: NuSchedule) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("CovertParams", "n must be >= 1"));
        }
        let nf = n as f64;
        Self::new(n, delta, epsilon, 1.0 - 1.0 / (nf + 1.0), schedule.nu(n), 1.0 + 1.0 / nf)
    }

    pub fn validate(&self) -> Result<()> {
        const FUNC: &str = "CovertParams";
        if self.n == 0 {
            return Err(Error::domain(FUNC, "n must be >= 1"));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::domain(FUNC, format!("delta = {} must be > 0", self.delta)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::domain(FUNC, format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::domain(FUNC, format!("mu = {} must lie in (0, 1)", self.mu)));
        }
        if !(self.nu.is_finite() && self.nu > 1.0) {
            return Err(Error::domain(FUNC, format!("nu = {} must exceed 1", self.nu)));
        }
        if !(self.eta.is_finite() && self.eta > 1.0) {
            return Err(Error::domain(FUNC, format!("eta = {} must exceed 1", self.eta)));
        }
        Ok(())
    }
}

/// `Ψ_NEC = √(4δη ln2 / n)`.
pub fn psi_nec(params: &CovertParams) -> Result<f64> {
    params.validate()?;
    Ok((4.0 * params.delta * params.eta * LN_2 / params.n as f64).sqrt())
}

/// `Ψ_SUF = √(4δ ln2 / (nμ²ν²))`.
pub fn psi_suf(params: &CovertParams) -> Result<f64> {
    params.validate()?;
    let CovertParams { n, delta, mu, nu, .. } = *params;
    Ok((4.0 * delta * LN_2 / (n as f64 * mu * mu * nu * nu)).sqrt())
}

fn kl_bits_at(n: usize, x: f64) -> f64 {
    -0.5 * n as f64 * log1pmx(x) * LOG2_E
}

/// The unique `x > 0` with `(n/2)(x − ln(1+x)) log₂e = δ`.
pub fn solve_exact_power(n: usize, delta: f64) -> Result<f64> {
    const FUNC: &str = "solve_exact_power";
    if n == 0 {
        return Err(Error::domain(FUNC, "n must be >= 1"));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::domain(FUNC, format!("delta = {delta} must be > 0")));
    }
    let nf = n as f64;
    let f = |x: f64| kl_bits_at(n, x) - delta;
    let mut lo = 0.0;
    // the quadratic approximation undershoots, so this is usually a lower bound
    let mut hi = (4.0 * delta * LN_2 / nf).sqrt();
    let mut expansions = 0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::numeric(FUNC, format!("no bracket found (n = {n}, delta = {delta})")));
        }
    }
    let mut x = hi;
    for _ in 0..200 {
        let fx = f(x);
        if fx.abs() <= 1e-13 * delta {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = 0.5 * nf * x / (1.0 + x) * LOG2_E;
        let newton = x - fx / slope;
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let fx = f(x);
    if fx.abs() <= 1e-12 * delta {
        Ok(x)
    } else {
        Err(Error::numeric(FUNC, format!("residual {fx:e} at x = {x:e}")))
    }
}

/// Outcome of evaluating `x²/(4η) < ½(x − ln(1+x)) < x²/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `3(η − 1)/(2η)`: below it the lower inequality is guaranteed.
    pub threshold: f64,
}

pub fn taylor_bracket_check(x: f64, eta: f64) -> BracketCheck {
    let mid = -0.5 * log1pmx(x);
    BracketCheck {
        lower_ok: x * x / (4.0 * eta) < mid,
        upper_ok: mid < x * x / 4.0,
        threshold: 3.0 * (eta - 1.0) / (2.0 * eta),
    }
}

/// Flags describing which guarantees hold for a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFlags {
    /// The exact power lies below the bracket threshold, so the necessary
    /// power is guaranteed to dominate it.
    pub bracket_valid: bool,
    /// `μ·Ψ_SUF ≤ Ψ_exact ≤ Ψ_NEC` as evaluated.
    pub ordering_holds: bool,
}

/// Power levels for one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPlan {
    pub psi_suf: f64,
    pub psi_nec: f64,
    pub psi_exact: f64,
    pub bracket_valid_below: f64,
    pub flags: PlanFlags,
}

impl PowerPlan {
    pub fn new(params: &CovertParams) -> Result<Self> {
        let psi_suf = psi_suf(params)?;
        let psi_nec = psi_nec(params)?;
        let psi_exact = solve_exact_power(params.n, params.delta)?;
        let threshold = taylor_bracket_check(psi_exact, params.eta).threshold;
        Ok(PowerPlan {
            psi_suf,
            psi_nec,
            psi_exact,
            bracket_valid_below: threshold,
            flags: PlanFlags {
                bracket_valid: psi_exact < threshold,
                ordering_holds: params.mu * psi_suf <= psi_exact && psi_exact <= psi_nec,
            },
        })
    }
}
