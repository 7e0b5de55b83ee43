//! The unit-variance AWGN channel and Bob's decoder.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mc::{par_mean, Estimate};
use crate::rng::{substream, Domain};
use crate::simkit::Codebook;

/// Codeword `message` plus independent `N(0, I_n)` noise.
pub fn transmit<R: Rng + ?Sized>(codebook: &Codebook, message: usize, rng: &mut R) -> Result<Vec<f64>> {
    if message >= codebook.m {
        return Err(Error::Input(format!("message {message} out of range for M = {}", codebook.m)));
    }
    Ok(codebook
        .codeword(message)
        .iter()
        .map(|&c| c + rng.sample::<f64, _>(StandardNormal))
        .collect())
}

/// Minimum-distance decision, which is maximum likelihood under AWGN. Ties
/// go to the lowest index.
pub fn bob_decode(codebook: &Codebook, received: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in codebook.codewords().enumerate() {
        let d: f64 = c.iter().zip(received).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Fraction of trials in which Bob decodes the wrong message. Messages are
/// uniform; trial `i` draws its message and noise from its own substreams.
pub fn decode_error_rate(codebook: &Codebook, trials: usize, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Input("decode_error_rate needs at least one trial".into()));
    }
    let stats = par_mean(trials, |i| {
        let w = substream(seed, Domain::Message, i).random_range(0..codebook.m);
        let y = transmit(codebook, w, &mut substream(seed, Domain::Bob, i))?;
        Ok(if bob_decode(codebook, &y) == w { 0.0 } else { 1.0 })
    })?;
    Ok(stats.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkit::build_codebook;
    use crate::truncgauss::TruncatedGaussianSpec;

    #[test]
    fn antipodal_matches_q() {
        // ±a at n = 1: error probability Q(a)
        let spec = TruncatedGaussianSpec::new(1, 1.0, 0.5).unwrap();
        let cb = Codebook::from_rows(&spec, 0, &[vec![1.0], vec![-1.0]]).unwrap();
        let est = decode_error_rate(&cb, 200_000, 9).unwrap();
        let exact = crate::specfn::gaussian_q(1.0);
        assert!((est.value - exact).abs() < 4.0 * est.std_err, "{est:?} vs {exact}");
    }

    #[test]
    fn noiseless_and_ties() {
        let spec = TruncatedGaussianSpec::new(4, 1.0, 0.5).unwrap();
        let cb = build_codebook(&spec, 8, 5).unwrap();
        for i in 0..cb.m {
            assert_eq!(bob_decode(&cb, cb.codeword(i)), i);
        }
        let row = cb.codeword(3).to_vec();
        let dup = Codebook::from_rows(&spec, 0, &[cb.codeword(1).to_vec(), row.clone(), row.clone()]).unwrap();
        assert_eq!(bob_decode(&dup, &row), 1);
        assert!(transmit(&cb, 8, &mut substream(0, Domain::Bob, 0)).is_err());
    }
}
