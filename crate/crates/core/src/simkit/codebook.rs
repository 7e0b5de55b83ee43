//! Random truncated-Gaussian codebooks and their binary file format.
//!
//! File layout, all little-endian: the 4 bytes `CVTG`, then `u64` version,
//! `u64` n, `u64` M, `u64` seed, `f64` μ, `f64` Ψ, then `M·n` `f64` values
//! row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{substream, Domain};
use crate::truncgauss::{sample_codeword_into, TruncatedGaussianSpec};

const MAGIC: &[u8; 4] = b"CVTG";
pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub spec: TruncatedGaussianSpec,
    codewords: Vec<f64>,
}

/// Draw `m` codewords; codeword `i` uses its own substream of `seed`.
pub fn build_codebook(spec: &TruncatedGaussianSpec, m: usize, seed: u64) -> Result<Codebook> {
    if m < 2 {
        return Err(Error::Input(format!("a codebook needs at least 2 messages, got {m}")));
    }
    let n = spec.n;
    let mut codewords = vec![0.0; m * n];
    codewords
        .par_chunks_mut(n)
        .enumerate()
        .try_for_each(|(i, row)| {
            let mut rng = substream(seed, Domain::Codebook, i as u64);
            sample_codeword_into(spec, &mut rng, row)
        })?;
    Ok(Codebook {
        n,
        m,
        seed,
        spec: *spec,
        codewords,
    })
}

impl Codebook {
    /// A codebook with given rows, each of which must lie in the shell of `spec`.
    pub fn from_rows(spec: &TruncatedGaussianSpec, seed: u64, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Input(format!("a codebook needs at least 2 messages, got {}", rows.len())));
        }
        let (lo, hi) = (spec.r_inner * (1.0 - 1e-12), spec.r_outer * (1.0 + 1e-12));
        let mut codewords = Vec::with_capacity(rows.len() * spec.n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != spec.n {
                return Err(Error::Input(format!("row {i} has length {}, expected {}", row.len(), spec.n)));
            }
            let r = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r < lo || r > hi {
                return Err(Error::Input(format!("row {i} has norm {r} outside the shell")));
            }
            codewords.extend_from_slice(row);
        }
        Ok(Codebook {
            n: spec.n,
            m: rows.len(),
            seed,
            spec: *spec,
            codewords,
        })
    }

    pub fn codeword(&self, i: usize) -> &[f64] {
        &self.codewords[i * self.n..(i + 1) * self.n]
    }

    pub fn codewords(&self) -> impl Iterator<Item = &[f64]> {
        self.codewords.chunks_exact(self.n)
    }

    /// `(1/(Mn)) Σ ‖c_i‖²`.
    pub fn average_power(&self) -> f64 {
        self.codewords.iter().map(|v| v * v).sum::<f64>() / (self.m * self.n) as f64
    }

    /// `max_i ‖c_i‖² / n`.
    pub fn max_power(&self) -> f64 {
        self.codewords()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>())
            .fold(0.0, f64::max)
            / self.n as f64
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [FORMAT_VERSION, self.n as u64, self.m as u64, self.seed] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.spec.mu.to_le_bytes())?;
        w.write_all(&self.spec.psi.to_le_bytes())?;
        for v in &self.codewords {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Input("not a codebook file (bad magic)".into()));
        }
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let version = u64::from_le_bytes(next(&mut r)?);
        if version != FORMAT_VERSION {
            return Err(Error::Input(format!("unsupported codebook version {version}")));
        }
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let m = u64::from_le_bytes(next(&mut r)?) as usize;
        let seed = u64::from_le_bytes(next(&mut r)?);
        let mu = f64::from_le_bytes(next(&mut r)?);
        let psi = f64::from_le_bytes(next(&mut r)?);
        let spec = TruncatedGaussianSpec::new(n, psi, mu)?;
        let len = n
            .checked_mul(m)
            .ok_or_else(|| Error::Input(format!("codebook size {m} x {n} overflows")))?;
        let mut codewords = Vec::with_capacity(len);
        for _ in 0..len {
            codewords.push(f64::from_le_bytes(next(&mut r)?));
        }
        Ok(Codebook {
            n,
            m,
            seed,
            spec,
            codewords,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
