//! Closed-form equilibrium of the memoryless dynamics.
//!
//! The stationary law is the Gibbs measure `Z⁻¹ exp(−β Σ x)` on `n`-sets with
//! `β = −ln α`. Its base-set generalisation weighs only the sites outside a
//! fixed set `A`, each by the number of free sites below it. Both are also the
//! laws of noncolliding unions of independent geometric variates, which gives
//! an exact sampler.

use serde::Serialize;

use crate::error::{JepError, Result};
use crate::exact::{DistVector, TruncatedStateSpace};
use crate::sets::ParticleConfig;
use crate::stream::{check_alpha, GeometricStream};

/// Parameters of a Gibbs measure. `alpha` is canonical; `beta` is derived.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GibbsParams {
    pub n: usize,
    alpha: f64,
    pub base: ParticleConfig,
}

impl GibbsParams {
    pub fn from_alpha(n: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if n == 0 {
            return Err(JepError::domain("particle count must be positive"));
        }
        Ok(GibbsParams {
            n,
            alpha,
            base: ParticleConfig::empty(),
        })
    }

    pub fn from_beta(n: usize, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Self::from_alpha(n, (-beta).exp())
    }

    pub fn with_base(mut self, base: ParticleConfig) -> Self {
        self.base = base;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        -self.alpha.ln()
    }

    /// Probability of `b` under this measure (base-set form when `base` is non-empty).
    pub fn pmf(&self, b: &ParticleConfig) -> Result<f64> {
        gibbs_super_pmf(&self.base, self.n, self.beta(), b)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(JepError::domain(format!(
            "beta must be positive, got {beta}"
        )))
    }
}

fn log_partition(n: usize, beta: f64) -> f64 {
    // log Π e^β / (e^{βk} − 1) = Σ −β(k−1) − ln(1 − e^{−βk})
    (1..=n)
        .map(|k| {
            let k = k as f64;
            -beta * (k - 1.0) - (-(-beta * k).exp()).ln_1p()
        })
        .sum()
}

/// `Z_{n,β} = Π_{k=1}^n e^β / (e^{βk} − 1)`.
pub fn partition_function(n: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(log_partition(n, beta).exp())
}

/// `Z⁻¹ exp(−β Σ_{x∈B} x)`.
pub fn gibbs_pmf(n: usize, beta: f64, b: &ParticleConfig) -> Result<f64> {
    check_beta(beta)?;
    if b.len() != n {
        return Err(JepError::domain(format!(
            "configuration {b} has {} particles, expected {n}",
            b.len()
        )));
    }
    Ok((-beta * b.energy() as f64 - log_partition(n, beta)).exp())
}

/// `A`-neglecting energy `Σ_{x ∈ B\A} h_A(x)`.
pub fn base_energy(a: &ParticleConfig, b: &ParticleConfig) -> u64 {
    b.difference(a).iter().map(|x| a.count_below(x)).sum()
}

/// `Z⁻¹ exp(−β H_A(B))` on supersets `B ⊇ A` with `|B \ A| = n`.
pub fn gibbs_super_pmf(a: &ParticleConfig, n: usize, beta: f64, b: &ParticleConfig) -> Result<f64> {
    check_beta(beta)?;
    if !a.is_subset_of(b) || b.len() != a.len() + n {
        return Err(JepError::domain(format!(
            "{b} is not a superset of {a} with {n} extra sites"
        )));
    }
    Ok((-beta * base_energy(a, b) as f64 - log_partition(n, beta)).exp())
}

/// `U(A, ξ_1, ..., ξ_n)` with fresh geometric draws.
pub fn sample_gibbs(
    a: &ParticleConfig,
    n: usize,
    alpha: f64,
    stream: &mut GeometricStream,
) -> Result<ParticleConfig> {
    check_alpha(alpha)?;
    let mut out = a.clone();
    for _ in 0..n {
        let y = out.avoiding_shift(stream.geometric(alpha));
        out.insert_free(y);
    }
    Ok(out)
}

/// Gibbs probabilities on a truncated space (mass outside the space omitted).
pub fn gibbs_vector(space: &TruncatedStateSpace, alpha: f64) -> Result<DistVector> {
    let params = GibbsParams::from_alpha(space.n(), alpha)?;
    let beta = params.beta();
    DistVector::from_fn(space, |b| gibbs_pmf(space.n(), beta, b))
}

/// Upper bound on the Gibbs mass outside `[0, h_max)`: `n α^{h_max − n + 1}`.
///
/// A set escapes only if its maximum reaches `h_max`, which needs at least one
/// of the geometric draws to reach `h_max − n + 1`.
pub fn truncation_tail_bound(n: usize, alpha: f64, h_max: u64) -> f64 {
    let gap = h_max.saturating_sub(n as u64) + 1;
    n as f64 * alpha.powf(gap as f64)
}

/// Summary statistics of the equilibrium.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumStats {
    pub n: usize,
    pub alpha: f64,
    pub mean_height: f64,
    pub ground_state_prob: f64,
    pub zero_occupied_prob: f64,
    /// `α^n`: the minimum is geometric with this ratio.
    pub min_ratio: f64,
}

impl EquilibriumStats {
    /// `P(min G_n ≥ m) = α^{n m}`.
    pub fn min_tail(&self, m: u64) -> f64 {
        self.min_ratio.powf(m as f64)
    }
}

pub fn equilibrium_stats(n: usize, alpha: f64) -> Result<EquilibriumStats> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(JepError::domain("particle count must be positive"));
    }
    let nf = n as f64;
    let mean_height = (1..=n)
        .map(|k| k as f64 / (1.0 - alpha.powi(k as i32)))
        .sum::<f64>()
        / nf
        - 1.0;
    let ground_state_prob = alpha.powf(nf * (nf + 1.0) / 2.0)
        * (1..=n)
            .map(|k| {
                let ak = alpha.powi(k as i32);
                (1.0 - ak) / ak
            })
            .product::<f64>();
    let min_ratio = alpha.powi(n as i32);
    Ok(EquilibriumStats {
        n,
        alpha,
        mean_height,
        ground_state_prob,
        zero_occupied_prob: 1.0 - min_ratio,
        min_ratio,
    })
}
