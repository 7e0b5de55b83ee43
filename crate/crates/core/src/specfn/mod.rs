//! Special functions used by the closed forms and the samplers.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
mod gamma;
mod normal;

pub use bessel::log_sph_bessel_factor;
pub use gamma::{
    inv_reg_inc_gamma_bracketed, log1pmx, log_gamma, log_gamma_density, reg_inc_gamma_lower,
    reg_inc_gamma_pair, reg_inc_gamma_upper,
};
pub use normal::{gaussian_q, gaussian_q_inv, std_normal_log_pdf};


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain(
                "Probability::new",
                format!("{value} is not in [0, 1]"),
            ))
        }
    }

    /// Clamp a value that is a probability up to rounding.
    pub fn saturating(value: f64) -> Self {
        Probability(if value.is_nan() { 0.0 } else { value.clamp(0.0, 1.0) })
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_range() {
        assert!(Probability::new(0.0).is_ok());
        assert!(Probability::new(1.0).is_ok());
        assert!(Probability::new(-1e-9).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert_eq!(Probability::saturating(1.0 + 1e-15).get(), 1.0);
    }
}
