//! Reproducible random streams.
//!
//! Every sampler in the crate draws from a [`GeometricStream`], a ChaCha8
//! generator addressed by a `(seed, stream id)` pair. Independent sub-streams
//! for parallel work are derived with [`GeometricStream::split`], never by
//! sharing one generator across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{JepError, Result};

/// Identifies a stream: enough to reconstruct it bit for bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSeed {
    pub seed: u64,
    pub stream: u64,
}

#[derive(Clone, Debug)]
pub struct GeometricStream {
    id: StreamSeed,
    rng: ChaCha8Rng,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl GeometricStream {
    pub fn new(seed: u64) -> Self {
        Self::from_id(StreamSeed { seed, stream: 0 })
    }

    pub fn from_id(id: StreamSeed) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(id.seed);
        rng.set_stream(id.stream);
        GeometricStream { id, rng }
    }

    pub fn id(&self) -> StreamSeed {
        self.id
    }

    /// A fresh stream for `label`, independent of this one and of every other label.
    /// Splitting does not advance the parent.
    pub fn split(&self, label: u64) -> Self {
        let stream = splitmix(self.id.stream ^ splitmix(label.wrapping_add(1)));
        Self::from_id(StreamSeed {
            seed: self.id.seed,
            stream,
        })
    }

    /// Uniform variate on `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    /// Geometric variate with `P(k) = (1 - alpha) alpha^k`, `k >= 0`, by inversion.
    pub fn geometric(&mut self, alpha: f64) -> u64 {
        debug_assert!(alpha > 0.0 && alpha < 1.0);
        let u = self.uniform();
        let k = (u.ln() / alpha.ln()).floor();
        if k >= u64::MAX as f64 {
            u64::MAX
        } else {
            k as u64
        }
    }

    /// Uniform index in `[0, m)` from a single uniform variate.
    pub fn index(&mut self, m: u64) -> u64 {
        debug_assert!(m > 0);
        let u = 1.0 - self.uniform(); // [0, 1)
        ((u * m as f64) as u64).min(m - 1)
    }

    /// Exponential variate with the given rate.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform().ln() / rate
    }
}

/// Validates a geometric ratio `alpha` in the open unit interval.
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(JepError::domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )))
    }
}
