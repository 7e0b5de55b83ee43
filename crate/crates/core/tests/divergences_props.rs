//! Closed-form divergences against an independent chi-squared oracle,
//! Monte-Carlo χ² checks and the standard divergence inequalities.

use covert_core::divergences::{
    chi_sq_isotropic, chi_sq_mc, hellinger_sq_isotropic, isotropic_report, kl_general_covariance, kl_isotropic,
    tvd_isotropic_exact, CovarianceSpec, IsotropicGaussianPair,
};
use covert_core::truncgauss::{RadialOutputDensity, TruncatedGaussianSpec};
use covert_core::LOG2_E;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn tvd_matches_chi_squared_oracle() {
    for n in [1usize, 2, 10, 100, 400] {
        for s in [1.001, 1.05, 1.5, 4.0] {
            let pair = IsotropicGaussianPair::new(n, s).unwrap();
            let rho = n as f64 * s * f64::ln(s) / (s - 1.0);
            let chi = ChiSquared::new(n as f64).unwrap();
            // P₀(‖y‖² ≥ ρ*) − P₁(‖y‖² ≥ ρ*)
            let want = chi.sf(rho / s) - chi.sf(rho);
            let got = tvd_isotropic_exact(&pair).unwrap().get();
            assert!((got - want).abs() < 1e-9, "n = {n}, s = {s}: {got} vs {want}");
        }
    }
}

#[test]
fn chi_sq_mc_one_dimensional() {
    let s: f64 = 1.2;
    let exact = chi_sq_isotropic(&IsotropicGaussianPair::new(1, s).unwrap()).unwrap();
    assert!((exact - 0.020_620_726_159_657_6).abs() < 1e-15);
    let log_p = |y: &f64| -0.5 * y * y / s - 0.5 * s.ln();
    let log_q = |y: &f64| -0.5 * y * y;
    let est = chi_sq_mc(|rng| Ok(StandardNormal.sample(rng)), log_p, log_q, 200_000, 17).unwrap();
    assert!((est.value - exact).abs() <= 3.0 * est.std_err, "{} ± {} vs {exact}", est.value, est.std_err);
}

#[test]
fn chi_sq_mc_truncated_output() {
    let spec = TruncatedGaussianSpec::new(8, 0.15, 0.8).unwrap();
    let model = RadialOutputDensity::new(spec).unwrap();
    let exact = model.divergences().unwrap().chi_sq.unwrap();
    // Willie's statistic is the norm; χ² of the norm law equals χ² of the full law
    let est = chi_sq_mc(
        |rng| {
            let e: f64 = (0..8).map(|_| StandardNormal.sample(rng)).map(|z: f64| z * z).sum();
            Ok(e.sqrt())
        },
        |rho: &f64| model.log_ratio(*rho).unwrap(),
        |_| 0.0,
        200_000,
        21,
    )
    .unwrap();
    assert!((est.value - exact).abs() <= 3.0 * est.std_err, "{} ± {} vs {exact}", est.value, est.std_err);
}

#[test]
fn tvd_below_chi_sq_bound() {
    for n in [1usize, 8, 64, 400] {
        for x in [1e-3, 0.05, 0.3, 0.9] {
            let pair = IsotropicGaussianPair::from_power(n, x).unwrap();
            let r = isotropic_report(&pair).unwrap();
            if let Some(c) = r.chi_sq {
                assert!(r.tvd.get() <= 0.5 * c.sqrt() + 1e-15);
                assert!(r.kl_bits <= (c.ln_1p()) * LOG2_E + 1e-12);
            }
        }
    }
    let model = RadialOutputDensity::new(TruncatedGaussianSpec::new(16, 0.11, 0.8).unwrap()).unwrap();
    let r = model.divergences().unwrap();
    let c = r.chi_sq.unwrap();
    assert!(r.tvd.get() <= 0.5 * c.sqrt());
    assert!(r.kl_bits <= c.ln_1p() * LOG2_E);
    // small-divergence regime: KL ≈ χ²/2 nats to first order
    assert!((r.kl_bits / LOG2_E / (0.5 * c) - 1.0).abs() < 0.2);
}

#[test]
fn zero_power_is_zero() {
    let pair = IsotropicGaussianPair::new(12, 1.0).unwrap();
    let r = isotropic_report(&pair).unwrap();
    assert_eq!(r.kl_bits, 0.0);
    assert_eq!(r.tvd.get(), 0.0);
    assert_eq!(r.hellinger_sq.get(), 0.0);
    assert_eq!(r.chi_sq, Some(0.0));
    assert_eq!(chi_sq_isotropic(&IsotropicGaussianPair::new(3, 2.0).unwrap()), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sandwich_and_pinsker(n in 1usize..=1000, log_s in -0.5f64..0.7) {
        let pair = IsotropicGaussianPair::new(n, 10f64.powf(log_s)).unwrap();
        let r = isotropic_report(&pair).unwrap();
        prop_assert!(r.sandwich_holds(), "{r:?}");
        prop_assert!(r.pinsker_holds(), "{r:?}");
        prop_assert!(hellinger_sq_isotropic(&pair).get() <= r.tvd.get() + 1e-15);
    }

    #[test]
    fn kl_monotone_in_power(n in 1usize..=1000, x in 1e-6f64..2.0, f in 1.0001f64..3.0) {
        let a = kl_isotropic(&IsotropicGaussianPair::from_power(n, x).unwrap());
        let b = kl_isotropic(&IsotropicGaussianPair::from_power(n, x * f).unwrap());
        prop_assert!(b > a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn isotropic_covariance_minimizes_kl(
        weights in prop::collection::vec(0.01f64..10.0, 1..48),
        x in 1e-4f64..3.0,
    ) {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let eig: Vec<f64> = weights.iter().map(|w| w / total * n as f64 * (1.0 + x)).collect();
        let spec = CovarianceSpec::new(eig).unwrap();
        let pair = IsotropicGaussianPair::from_power(n, spec.trace_power).unwrap();
        let gap = kl_general_covariance(&spec).unwrap() - kl_isotropic(&pair);
        prop_assert!(gap >= -1e-9 * (1.0 + kl_isotropic(&pair)), "gap {gap}");
    }
}

#[test]
fn equal_eigenvalues_attain_the_minimum() {
    for n in [1usize, 5, 40] {
        let spec = CovarianceSpec::new(vec![1.3; n]).unwrap();
        let pair = IsotropicGaussianPair::from_power(n, spec.trace_power).unwrap();
        assert!((kl_general_covariance(&spec).unwrap() - kl_isotropic(&pair)).abs() < 1e-12);
    }
    let mut eig = vec![1.3; 40];
    eig[0] += 1e-3;
    eig[1] -= 1e-3;
    let spec = CovarianceSpec::new(eig).unwrap();
    let pair = IsotropicGaussianPair::from_power(40, spec.trace_power).unwrap();
    assert!(kl_general_covariance(&spec).unwrap() > kl_isotropic(&pair));
}
