//! Radial output density against values computed independently with
//! 30-digit nested adaptive quadrature over the codeword radius and the
//! received norm (Bessel-function form of the spherical average).

use covert_core::divergences::{h_function_witness, Method};
use covert_core::truncgauss::{RadialOutputDensity, TruncatedGaussianSpec};

const PSI_16: f64 = 0.112_879_033_098_420_39;

fn model_16() -> RadialOutputDensity {
    RadialOutputDensity::new(TruncatedGaussianSpec::new(16, PSI_16, 0.8).unwrap()).unwrap()
}

fn close(got: f64, want: f64, rel: f64) {
    assert!((got - want).abs() <= rel * want.abs(), "got {got}, want {want}");
}

#[test]
fn shell_mass_and_origin_ratio() {
    let m = model_16();
    close(m.spec.delta_mass.get(), 0.467_100_404_377_450_43, 1e-12);
    close(m.ratio(0.0).unwrap(), 0.485_030_075_515_863_48, 1e-10);
    close(m.crossing_radius().unwrap(), 4.079_923_079_526_604, 1e-10);
}

#[test]
fn quadrature_divergences() {
    let m = model_16();
    close(m.normalization().unwrap(), 1.0, 1e-9);
    let r = m.divergences().unwrap();
    assert_eq!(r.method, Method::Quadrature);
    close(r.kl_bits, 0.045_046_153_208_878, 1e-8);
    close(r.tvd.get(), 0.097_462_487_517_882, 1e-8);
    close(r.hellinger_sq.get(), 0.007_572_769_705_004_95, 1e-7);
    close(r.chi_sq.unwrap(), 0.068_235_988_491_485_5, 1e-8);
    assert!(r.sandwich_holds() && r.pinsker_holds());
}

#[test]
fn h_witness_at_sixteen() {
    let m = model_16();
    let eps = m.divergences().unwrap().chi_sq.unwrap().sqrt();
    let w = h_function_witness(&m, eps, None).unwrap();
    let eps_frozen = 0.068_235_988_491_485_5f64.sqrt();
    // at the origin f̄ < f₀
    close(w.grid_values[0].1, (0.485_030_075_515_863_48 - 1.0) / eps_frozen, 1e-8);
    // the ratio grows without bound in the norm, so the grid supremum sits
    // at the outer edge √(3n)
    close(w.argmax, 48f64.sqrt(), 1e-15);
    close(w.sup_abs_h, (3.504_572_939_885_512_8 - 1.0) / eps_frozen, 1e-8);
    assert!(!w.bounded_by_one(0.0));
    assert!(w.grid_values.len() >= 10_000);
}

#[test]
fn zero_power_witness_vanishes() {
    let m = RadialOutputDensity::new(TruncatedGaussianSpec::new(16, 1e-15, 0.8).unwrap()).unwrap();
    let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.035).collect();
    let w = h_function_witness(&m, 0.1, Some(&grid)).unwrap();
    assert!(w.sup_abs_h < 1e-11, "{}", w.sup_abs_h);
}
