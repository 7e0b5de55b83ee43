//! Counter-based random substreams.
//!
//! Every random quantity is drawn from a ChaCha stream keyed by the run seed
//! and selected by a `(domain, index)` pair, so a trial's randomness does not
//! depend on which worker runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Disjoint purposes for which substreams are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    Codebook = 1,
    Bob = 2,
    WillieH0 = 3,
    WillieH1 = 4,
    DivergenceKl = 5,
    DivergenceTvd = 6,
    ChiSquare = 7,
    Oracle = 8,
    Message = 9,
}

/// The substream for `(domain, index)` under `seed`.
pub fn substream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    debug_assert!(index < 1 << 56, "substream index overflows its field");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 56) | index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn deterministic_and_disjoint() {
        let a: u64 = substream(7, Domain::Bob, 3).random();
        let b: u64 = substream(7, Domain::Bob, 3).random();
        let c: u64 = substream(7, Domain::Bob, 4).random();
        let d: u64 = substream(7, Domain::WillieH0, 3).random();
        let e: u64 = substream(8, Domain::Bob, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_ne!(a, e);
    }
}
