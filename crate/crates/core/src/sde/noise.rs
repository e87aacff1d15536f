//! Pre-generated Wiener increments with seed provenance.
//!
//! Each trajectory draws from a ChaCha8 stream keyed by `(seed, stream)`,
//! so a path depends only on the run seed and the trajectory index, never
//! on scheduling.
//!
//! File layout (little endian): `b"HSNP"`, version u32, seed u64,
//! stream u64, dt f64, kind u8 (0 = ξ under Q, 1 = W under P),
//! length u64, then `length` increments as f64.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// ξ, driving the linear equation under Q.
    XiMeasureQ,
    /// W, driving the nonlinear equation under P.
    WMeasureP,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub dt: f64,
    pub increments: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    pub kind: NoiseKind,
}

impl NoisePath {
    /// Draws `n_steps` i.i.d. N(0, dt) increments.
    pub fn generate(seed: u64, stream: u64, dt: f64, n_steps: usize, kind: NoiseKind) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let s = dt.sqrt();
        let increments = (0..n_steps)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                z * s
            })
            .collect();
        Self {
            dt,
            increments,
            seed,
            stream,
            kind,
        }
    }

    pub fn zeros(dt: f64, n_steps: usize, kind: NoiseKind) -> Self {
        Self {
            dt,
            increments: vec![0.0; n_steps],
            seed: 0,
            stream: 0,
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.len() as f64
    }

    /// W_{t_j} for j = 0..=len, with W_0 = 0.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for d in &self.increments {
            acc += d;
            out.push(acc);
        }
        out
    }

    /// Sums consecutive groups of `factor` increments, giving the same
    /// Brownian path sampled at `factor * dt`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.len() % factor != 0 {
            return Err(Error::LengthMismatch {
                expected: self.len() - self.len() % factor.max(1),
                actual: self.len(),
            });
        }
        Ok(Self {
            dt: self.dt * factor as f64,
            increments: self
                .increments
                .chunks(factor)
                .map(|c| c.iter().sum())
                .collect(),
            seed: self.seed,
            stream: self.stream,
            kind: self.kind,
        })
    }

    /// First `n` increments.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            increments: self.increments[..n.min(self.len())].to_vec(),
            ..self.clone()
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"HSNP")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.stream.to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&[match self.kind {
            NoiseKind::XiMeasureQ => 0u8,
            NoiseKind::WMeasureP => 1u8,
        }])?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for d in &self.increments {
            w.write_all(&d.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"HSNP" {
            return Err(Error::Format("not a noise-path file".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != 1 {
            return Err(Error::Format("unsupported noise-path version".into()));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let stream = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let dt = f64::from_le_bytes(b8);
        let mut b1 = [0u8; 1];
        r.read_exact(&mut b1)?;
        let kind = match b1[0] {
            0 => NoiseKind::XiMeasureQ,
            1 => NoiseKind::WMeasureP,
            k => return Err(Error::Format(format!("unknown noise kind {k}"))),
        };
        r.read_exact(&mut b8)?;
        let len = u64::from_le_bytes(b8) as usize;
        let mut increments = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut b8)?;
            increments.push(f64::from_le_bytes(b8));
        }
        Ok(Self {
            dt,
            increments,
            seed,
            stream,
            kind,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(41 + 8 * self.len());
        self.write(&mut buf)?;
        crate::harness::persist::write_atomic(path, &buf)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
