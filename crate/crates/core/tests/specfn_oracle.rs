//! Special functions against statrs and against direct Monte-Carlo
//! averaging over the sphere.

use covert_core::mc::par_mean;
use covert_core::rng::{substream, Domain};
use covert_core::specfn::{
    gaussian_q, gaussian_q_inv, log_gamma, log_sph_bessel_factor, reg_inc_gamma_lower, reg_inc_gamma_upper,
};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma as sg;

#[test]
fn log_gamma_matches_statrs() {
    let mut a = 1e-3;
    while a < 1e6 {
        let ours = log_gamma(a).unwrap();
        let theirs = sg::ln_gamma(a);
        assert!((ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0), "a = {a}: {ours} vs {theirs}");
        a *= 1.37;
    }
}

#[test]
fn incomplete_gamma_matches_statrs() {
    for &a in &[0.5, 1.0, 3.5, 20.0, 200.0, 5000.0] {
        for &f in &[0.01, 0.3, 0.8, 1.0, 1.2, 2.0, 5.0] {
            let x = a * f;
            let p = reg_inc_gamma_lower(a, x).unwrap();
            let q = reg_inc_gamma_upper(a, x).unwrap();
            // statrs itself is good to about 1e-11 here
            assert!((p - sg::gamma_lr(a, x)).abs() <= 1e-10, "P({a}, {x})");
            assert!((q - sg::gamma_ur(a, x)).abs() <= 1e-10, "Q({a}, {x})");
        }
    }
}

#[test]
fn incomplete_gamma_frozen_values() {
    // 30-digit mpmath
    for (a, x, want) in [
        (5000.0, 5000.0, 0.501_880_634_033_817_355_35),
        (200.0, 200.0, 0.509_403_418_007_236_325_03),
    ] {
        let got = reg_inc_gamma_lower(a, x).unwrap();
        assert!((got - want).abs() <= 1e-14, "P({a}, {x}) = {got}");
    }
}

#[test]
fn gaussian_tail_frozen_values() {
    for (x, want) in [
        (-2.0, 0.977_249_868_051_820_792_8),
        (-1.0, 0.841_344_746_068_542_948_59),
        (-0.5, 0.691_462_461_274_013_103_64),
        (2.0, 0.022_750_131_948_179_207_2),
    ] {
        assert!((gaussian_q(x) - want).abs() <= 1e-14 * want, "x = {x}: {}", gaussian_q(x));
    }
}

#[test]
fn gaussian_tail_matches_statrs() {
    let normal = Normal::standard();
    for i in -80..=80 {
        let x = i as f64 * 0.1;
        let ours = gaussian_q(x);
        let theirs = normal.sf(x);
        assert!((ours - theirs).abs() <= 1e-10 * theirs.max(1e-4), "x = {x}");
    }
    for &p in &[1e-8, 1e-4, 0.01, 0.1, 0.3, 0.5, 0.9, 0.999] {
        let ours = gaussian_q_inv(p).unwrap();
        let theirs = normal.inverse_cdf(1.0 - p);
        assert!((ours - theirs).abs() <= 1e-7 * theirs.abs().max(1.0), "p = {p}: {ours} vs {theirs}");
    }
}

#[test]
fn sphere_average_matches_monte_carlo() {
    // ₀F₁(; n/2; t²/4) = E[exp(t·u₁)] for u uniform on the unit sphere
    const SAMPLES: usize = 1_000_000;
    for (k, &n) in [2usize, 4, 8].iter().enumerate() {
        for (j, &t) in [0.5, 2.0, 10.0].iter().enumerate() {
            let stream = ((k * 3 + j) * SAMPLES) as u64;
            let est = par_mean(SAMPLES, |i| {
                let mut rng = substream(99, Domain::Oracle, stream + i);
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                Ok((t * g[0] / norm).exp())
            })
            .unwrap();
            let exact = log_sph_bessel_factor(0.5 * n as f64, t).unwrap().exp();
            assert!(
                (est.mean() - exact).abs() <= 3.0 * est.std_err(),
                "n = {n}, t = {t}: {} ± {} vs {exact}",
                est.mean(),
                est.std_err()
            );
        }
    }
}

proptest! {
    #[test]
    fn lower_and_upper_sum_to_one(a in 0.05f64..2000.0, f in 0.0f64..4.0) {
        let x = a * f;
        let p = reg_inc_gamma_lower(a, x).unwrap();
        let q = reg_inc_gamma_upper(a, x).unwrap();
        prop_assert!((p + q - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn q_inverse_round_trip(s in -8.0f64..-0.302) {
        let p = 10f64.powf(s);
        for p in [p, 1.0 - p] {
            let x = gaussian_q_inv(p).unwrap();
            prop_assert!((gaussian_q(x) - p).abs() <= 1e-10);
        }
    }

    #[test]
    fn sphere_factor_monotone(b in 0.5f64..500.0, t in 0.0f64..1e5, dt in 1e-3f64..10.0) {
        let lo = log_sph_bessel_factor(b, t).unwrap();
        let hi = log_sph_bessel_factor(b, t + dt).unwrap();
        prop_assert!(hi >= lo);
    }
}
