//! ln ₀F₁(; b; t²/4), the spherical average of a plane wave.
//!
//! For a unit vector `u` uniform on the sphere in ℝⁿ and `b = n/2`,
//! `E[exp(t⟨u, e⟩)] = ₀F₁(; b; t²/4) = Γ(b) (t/2)^{1−b} I_{b−1}(t)`.

use std::f64::consts::PI;

use super::gamma::ln_gamma;
use crate::error::{Error, Result};

/// Series is summed directly up to this argument.
const SERIES_LIMIT: f64 = 1e4;

/// ln ₀F₁(; b; t²/4) for `b > 0`, `t ≥ 0`.
///
/// Zero at `t = 0`, increasing in `t`, and finite for `t` up to at least 1e6.
pub fn log_sph_bessel_factor(order_param: f64, t: f64) -> Result<f64> {
    const FUNC: &str = "log_sph_bessel_factor";
    if !order_param.is_finite() || order_param <= 0.0 {
        return Err(Error::domain(FUNC, format!("order parameter {order_param} must be > 0")));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(FUNC, format!("t = {t} must be finite and >= 0")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let v = if t <= SERIES_LIMIT {
        series_log_0f1(order_param, t)
    } else {
        asymptotic_log_0f1(order_param, t)
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::numeric(FUNC, format!("non-finite result for b = {order_param}, t = {t}")))
    }
}

/// Term recursion with periodic rescaling to stay inside f64 range.
pub(crate) fn series_log_0f1(b: f64, t: f64) -> f64 {
    const RESCALE: f64 = 1e200;
    let z = 0.25 * t * t;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut log_scale = 0.0f64;
    let max_terms = 1000 + (10.0 * t) as usize;
    for k in 0..max_terms {
        let kf = k as f64;
        term *= z / ((b + kf) * (kf + 1.0));
        sum += term;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            log_scale += RESCALE.ln();
        }
        // terms grow until the peak, so a negligible term means we are past it
        if term < sum * 1e-17 {
            break;
        }
    }
    sum.ln() + log_scale
}

/// Large-argument branch: Hankel expansion when `ν² ≪ t`, otherwise the
/// uniform (Debye) expansion of `I_ν(ν z)`.
pub(crate) fn asymptotic_log_0f1(b: f64, t: f64) -> f64 {
    let nu = b - 1.0;
    let log_prefix = ln_gamma(b) - nu * (0.5 * t).ln();
    let log_i = if nu * nu <= t / 20.0 {
        hankel_log_i(nu, t)
    } else {
        debye_log_i(nu, t)
    };
    log_prefix + log_i
}

fn hankel_log_i(nu: f64, t: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..60 {
        let kf = k as f64;
        let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * t);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    t - 0.5 * (2.0 * PI * t).ln() + sum.ln()
}

fn debye_log_i(nu: f64, t: f64) -> f64 {
    let z = t / nu;
    let sq = (1.0 + z * z).sqrt();
    let eta = sq + (z / (1.0 + sq)).ln();
    let p = 1.0 / sq;
    let p2 = p * p;
    let u1 = p * (3.0 - 5.0 * p2) / 24.0;
    let u2 = p2 * (81.0 - 462.0 * p2 + 385.0 * p2 * p2) / 1152.0;
    let u3 = p * p2 * (30375.0 - 369603.0 * p2 + 765765.0 * p2 * p2 - 425425.0 * p2 * p2 * p2)
        / 414_720.0;
    let u4 = p2
        * p2
        * (4_465_125.0 - 94_121_676.0 * p2 + 349_922_430.0 * p2 * p2
            - 446_185_740.0 * p2 * p2 * p2
            + 185_910_725.0 * p2 * p2 * p2 * p2)
        / 39_813_120.0;
    let inv = 1.0 / nu;
    let corr = 1.0 + inv * (u1 + inv * (u2 + inv * (u3 + inv * u4)));
    nu * eta - 0.5 * (2.0 * PI * nu).ln() - 0.5 * sq.ln() + corr.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_argument() {
        for b in [0.5, 1.0, 7.5, 1e3] {
            assert_eq!(log_sph_bessel_factor(b, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn domain() {
        assert!(log_sph_bessel_factor(1.0, -1.0).is_err());
        assert!(log_sph_bessel_factor(0.0, 1.0).is_err());
        assert!(log_sph_bessel_factor(1.0, f64::NAN).is_err());
    }

    #[test]
    fn one_dimension_is_log_cosh() {
        for t in [0.1f64, 1.0, 5.0, 40.0, 300.0, 9_999.0, 2e4, 1e6] {
            let exact = t + (-2.0 * t).exp().ln_1p() - 2f64.ln();
            let got = log_sph_bessel_factor(0.5, t).unwrap();
            assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "t = {t}: {got} vs {exact}");
        }
    }

    #[test]
    fn three_dimensions_is_sinhc() {
        let got = log_sph_bessel_factor(1.5, 2.0).unwrap();
        assert!((got - 0.595_220_192_054_222_8).abs() < 1e-13);
        for t in [0.3f64, 7.0, 100.0, 5e4, 1e6] {
            // ln(sinh t / t) = t - ln 2 + ln(1 - e^{-2t}) - ln t
            let exact = t - 2f64.ln() + (-(-2.0 * t).exp()).ln_1p() - t.ln();
            let got = log_sph_bessel_factor(1.5, t).unwrap();
            assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "t = {t}");
        }
    }

    #[test]
    fn branches_agree_at_limit() {
        for b in [0.5, 1.0, 2.0, 4.0, 32.0, 200.0, 2_000.0, 50_000.0] {
            let s = series_log_0f1(b, SERIES_LIMIT);
            let a = asymptotic_log_0f1(b, SERIES_LIMIT);
            assert!((s - a).abs() <= 1e-10 * s.abs(), "b = {b}: {s} vs {a}");
        }
    }

    #[test]
    fn increasing_and_stable_to_1e6() {
        for b in [0.5, 1.0, 4.0, 64.0, 5e5] {
            let mut prev = 0.0;
            for i in 1..=120 {
                let t = 10f64.powf(-3.0 + 9.0 * i as f64 / 120.0);
                let v = log_sph_bessel_factor(b, t).unwrap();
                assert!(v.is_finite() && v > prev, "b = {b}, t = {t}");
                prev = v;
            }
        }
    }
}
