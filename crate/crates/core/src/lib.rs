//! Numerical toolkit for covert communication over AWGN channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfn`]: log-gamma, regularized incomplete gamma, the Gaussian tail
//!   `Q` and its inverse, and the log of the spherical plane-wave average
//!   `₀F₁(; n/2; t²/4)`.
//! * [`divergences`]: KL, total variation, Hellinger and χ² between the
//!   isotropic Gaussian families, plus Monte-Carlo estimators.
//! * [`truncgauss`]: the shell-truncated Gaussian codebook distribution,
//!   exact sampling and the radial output density after the AWGN channel.
//! * [`planner`]: sufficient, necessary and exact covert power levels.
//! * [`bounds`]: normal-approximation throughput bounds and divergence sweeps.
//! * [`simkit`]: end-to-end Monte-Carlo experiments (codebooks, channel,
//!   detector, decoder, empirical divergences).
//! * [`verify`]: the acceptance gates, shared by the test suite and the CLI.
//!
//! All divergences are reported in bits unless a name says otherwise.

pub mod bounds;
pub mod divergences;
pub mod mc;
pub mod error;
pub mod planner;
pub mod quad;
pub mod rng;
pub mod simkit;
pub mod specfn;
pub mod truncgauss;
pub mod verify;

pub use error::{Error, Result};

/// log₂(e)
pub const LOG2_E: f64 = std::f64::consts::LOG2_E;
/// ln(2)
pub const LN_2: f64 = std::f64::consts::LN_2;

/// Convert a divergence in nats to bits.
#[inline]
pub fn nats_to_bits(nats: f64) -> f64 {
    nats * LOG2_E
}

/// Convert a divergence in bits to nats.
#[inline]
pub fn bits_to_nats(bits: f64) -> f64 {
    bits * LN_2
}
