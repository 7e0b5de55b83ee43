//! Standard normal upper tail and its inverse.

use std::f64::consts::PI;

use super::gamma::reg_inc_gamma_pair;
use crate::error::{Error, Result};

/// ln φ(x) for the standard normal density.
#[inline]
pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}

/// Q(x) = P[N(0,1) > x].
///
/// Uses erfc(x/√2) = Q_Γ(½, x²/2), so both tails keep full relative
/// precision.
pub fn gaussian_q(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    // a = 1/2 with finite x never fails to converge
    let (p, q) = reg_inc_gamma_pair(0.5, 0.5 * x * x).expect("incomplete gamma at a = 1/2");
    if x >= 0.0 {
        0.5 * q
    } else {
        0.5 + 0.5 * p
    }
}

// Rational approximation of the normal quantile (lower tail).
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

fn normal_quantile_initial(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Q⁻¹(p) for `p ∈ (0, 1)`: rational start refined by two Newton steps on Q.
pub fn gaussian_q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("gaussian_q_inv", format!("p = {p} not in (0, 1)")));
    }
    // Q⁻¹(p) = −Φ⁻¹(p)
    let mut x = -normal_quantile_initial(p);
    for _ in 0..2 {
        let err = gaussian_q(x) - p;
        x += err / std_normal_log_pdf(x).exp();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_examples() {
        assert_eq!(gaussian_q(0.0), 0.5);
        assert_eq!(gaussian_q_inv(0.5).unwrap().abs() < 1e-15, true);
        assert!((gaussian_q_inv(0.1).unwrap() - 1.281_551_565_544_600_5).abs() < 1e-12);
    }

    #[test]
    fn q_inv_domain() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(gaussian_q_inv(p).is_err());
        }
    }

    #[test]
    fn reflection() {
        for i in 0..=1600 {
            let x = -8.0 + 16.0 * i as f64 / 1600.0;
            assert!((gaussian_q(x) + gaussian_q(-x) - 1.0).abs() <= 1e-14, "x = {x}");
        }
    }

    #[test]
    fn round_trip_and_monotone() {
        let mut ps = Vec::new();
        for i in 0..=1000 {
            let s = -8.0 + (8.0 - 2f64.log10()) * i as f64 / 1000.0;
            let p = 10f64.powf(s);
            ps.push(p);
            ps.push(1.0 - p);
        }
        ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = f64::INFINITY;
        for p in ps {
            let x = gaussian_q_inv(p).unwrap();
            assert!((gaussian_q(x) - p).abs() <= 1e-10, "p = {p}");
            assert!(x <= prev, "not decreasing at p = {p}");
            prev = x;
        }
    }

    #[test]
    fn q_tails() {
        // Q(x) for x >> 0 follows the Mills-ratio asymptote.
        let x = 30.0f64;
        let asym = std_normal_log_pdf(x).exp() / x * (1.0 - 1.0 / (x * x) + 3.0 / x.powi(4));
        assert!((gaussian_q(x) / asym - 1.0).abs() < 1e-6);
        assert_eq!(gaussian_q(f64::INFINITY), 0.0);
        assert_eq!(gaussian_q(f64::NEG_INFINITY), 1.0);
    }
}
