//! Two comparison models with known equilibria.
//!
//! * The bounded uniform jump model on `[0, M)`, whose equilibrium is a
//!   product formula normalised by a Stirling number of the second kind.
//! * A continuous-time simple exclusion process on the half-line with a
//!   reflecting wall at zero. Up attempts at rate `λ`, down attempts at rate
//!   `η`, blocked attempts are suppressed. Its equilibrium is the same Gibbs
//!   measure as the memoryless jump dynamics with `α = λ/η`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{JepError, Result};
use crate::exact::{
    enumerate_states, stationary_distribution, DistVector, StochasticMatrix, TruncatedStateSpace,
};
use crate::sets::ParticleConfig;
use crate::stream::GeometricStream;

/// Stirling number of the second kind `S(a, b)`, exact.
pub fn stirling2(a: u64, b: u64) -> Result<BigUint> {
    if b < 1 || b > a {
        return Err(JepError::domain(format!("S({a},{b}) needs 1 <= b <= a")));
    }
    let (a, b) = (a as usize, b as usize);
    // row[k] = S(i, k), built up to i = a
    let mut row = vec![BigUint::zero(); b + 1];
    row[0] = BigUint::one();
    for i in 1..=a {
        for k in (1..=b.min(i)).rev() {
            row[k] = &row[k] * BigUint::from(k) + &row[k - 1];
        }
        row[0] = BigUint::zero();
    }
    Ok(row[b].clone())
}

/// Unnormalised weight `Π_{x∈B} (1 + |[x+1, M−1] \ B|)`.
pub fn warrington_weight(m: u64, b: &ParticleConfig) -> BigUint {
    let n = b.len() as u64;
    b.iter()
        .enumerate()
        .map(|(i, x)| {
            // sites above x: M−1−x, of which n−1−i are occupied
            let free_above = (m - 1 - x) - (n - 1 - i as u64);
            BigUint::from(1 + free_above)
        })
        .product()
}

/// Equilibrium of the bounded uniform model: weight over `S(M+1, M+1−n)`.
pub fn warrington_pmf(n: usize, m: u64, b: &ParticleConfig) -> Result<f64> {
    if n == 0 || n as u64 > m {
        return Err(JepError::domain(format!(
            "need 1 <= n <= M, got n={n}, M={m}"
        )));
    }
    if b.len() != n || b.highest().is_some_and(|x| x >= m) {
        return Err(JepError::domain(format!(
            "{b} is not an {n}-subset of [0,{m})"
        )));
    }
    let z = stirling2(m + 1, m + 1 - n as u64)?;
    Ok(ratio(&warrington_weight(m, b), &z))
}

fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    // scale down together so both fit in f64 without losing the ratio
    let shift = den.bits().saturating_sub(1000);
    let (num, den) = (num >> shift, den >> shift);
    num.to_f64().unwrap_or(f64::INFINITY) / den.to_f64().unwrap_or(f64::INFINITY)
}

/// Rates of the reflecting exclusion process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsepParams {
    pub n: usize,
    pub lambda: f64,
    pub eta: f64,
}

impl AsepParams {
    pub fn new(n: usize, lambda: f64, eta: f64) -> Result<Self> {
        if n == 0 {
            return Err(JepError::domain("particle count must be positive"));
        }
        if !(lambda.is_finite() && eta.is_finite() && lambda > 0.0 && lambda < eta) {
            return Err(JepError::domain(format!(
                "rates must satisfy 0 < lambda < eta, got lambda={lambda}, eta={eta}"
            )));
        }
        Ok(AsepParams { n, lambda, eta })
    }

    /// `λ/η`, the geometric ratio of the equilibrium.
    pub fn ratio(&self) -> f64 {
        self.lambda / self.eta
    }

    fn total_rate(&self) -> f64 {
        self.n as f64 * (self.lambda + self.eta)
    }
}

/// Final state and event counts of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct AsepRun {
    pub state: ParticleConfig,
    pub attempts: u64,
    pub accepted: u64,
}

/// Event-driven simulation up to time `t_end`.
///
/// Attempts arrive at aggregate rate `n(λ+η)`. Each picks a particle
/// uniformly and a direction (up with probability `λ/(λ+η)`), then the move
/// is dropped if the target is occupied or negative.
pub fn asep_run(
    params: &AsepParams,
    x0: &ParticleConfig,
    t_end: f64,
    stream: &mut GeometricStream,
) -> Result<AsepRun> {
    if x0.len() != params.n {
        return Err(JepError::domain(format!(
            "initial state {x0} does not have {} particles",
            params.n
        )));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(JepError::domain(format!("invalid end time {t_end}")));
    }
    let rate = params.total_rate();
    let p_up = params.lambda / (params.lambda + params.eta);
    let mut heights = x0.clone().into_vec();
    let mut t = 0.0;
    let mut attempts = 0;
    let mut accepted = 0;
    loop {
        t += stream.exponential(rate);
        if t > t_end {
            break;
        }
        attempts += 1;
        let i = stream.index(params.n as u64) as usize;
        let up = 1.0 - stream.uniform() < p_up;
        let x = heights[i];
        let target = if up { Some(x + 1) } else { x.checked_sub(1) };
        // heights stay sorted, so only the neighbours can block
        let blocked = match target {
            None => true,
            Some(y) if up => heights.get(i + 1) == Some(&y),
            Some(y) => i > 0 && heights[i - 1] == y,
        };
        if !blocked {
            heights[i] = target.unwrap();
            accepted += 1;
        }
    }
    Ok(AsepRun {
        state: ParticleConfig::new(heights)?,
        attempts,
        accepted,
    })
}

/// State of the process at time `t_end`.
pub fn asep_simulate(
    params: &AsepParams,
    x0: &ParticleConfig,
    t_end: f64,
    stream: &mut GeometricStream,
) -> Result<ParticleConfig> {
    Ok(asep_run(params, x0, t_end, stream)?.state)
}

/// The process restricted to `[0, h_max)`, with up moves past the top suppressed.
#[derive(Clone, Debug)]
pub struct AsepGenerator {
    pub params: AsepParams,
    space: TruncatedStateSpace,
    /// Off-diagonal rates `q(i, j)`.
    rates: Vec<Vec<(usize, f64)>>,
}

/// Truncation tolerance for the exact solve.
pub const ASEP_TAIL_TOL: f64 = 1e-10;

impl AsepGenerator {
    pub fn new(params: AsepParams, h_max: u64) -> Result<Self> {
        let tail = params
            .ratio()
            .powf(h_max.saturating_sub(params.n as u64) as f64);
        if tail > ASEP_TAIL_TOL {
            return Err(JepError::Truncation {
                row: 0,
                state: ParticleConfig::ground(params.n),
                escaped: tail,
                tol: ASEP_TAIL_TOL,
            });
        }
        let space = enumerate_states(params.n, h_max)?;
        let rates = space
            .states()
            .iter()
            .map(|x| {
                let mut row = Vec::new();
                for (i, h) in x.iter().enumerate() {
                    let mut moved = x.clone().into_vec();
                    if h + 1 < h_max && !x.contains(h + 1) {
                        moved[i] = h + 1;
                        let to = ParticleConfig::new(moved.clone()).unwrap();
                        row.push((space.index_of(&to).unwrap(), params.lambda));
                    }
                    if h > 0 && !x.contains(h - 1) {
                        moved[i] = h - 1;
                        let to = ParticleConfig::new(moved).unwrap();
                        row.push((space.index_of(&to).unwrap(), params.eta));
                    }
                }
                row
            })
            .collect();
        Ok(AsepGenerator {
            params,
            space,
            rates,
        })
    }

    pub fn space(&self) -> &TruncatedStateSpace {
        &self.space
    }

    pub fn rates(&self, i: usize) -> &[(usize, f64)] {
        &self.rates[i]
    }

    fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    /// Uniformised jump chain `I + Q/Λ` with `Λ = n(λ+η)`; same stationary law as `Q`.
    pub fn uniformized(&self) -> Result<StochasticMatrix> {
        let big = self.params.total_rate();
        let rows = self
            .rates
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let out: f64 = row.iter().map(|e| e.1).sum();
                let mut r: Vec<(usize, f64)> = row.iter().map(|&(j, q)| (j, q / big)).collect();
                let stay = 1.0 - out / big;
                if stay > 0.0 {
                    r.push((i, stay));
                }
                r
            })
            .collect();
        StochasticMatrix::from_rows(self.space.clone(), rows, 1e-12)
    }

    /// `max |π(x) q(x,y) − π(y) q(y,x)|` over neighbouring pairs.
    pub fn detailed_balance_residual(&self, pi: &DistVector) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rates.iter().enumerate() {
            for &(j, q) in row {
                let flow = pi.probs[i] * q - pi.probs[j] * self.rate(j, i);
                worst = worst.max(flow.abs());
            }
        }
        worst
    }
}

/// Stationary law of the truncated process, solved from its generator.
pub fn asep_stationary_exact(
    params: &AsepParams,
    h_max: u64,
) -> Result<(TruncatedStateSpace, DistVector)> {
    let generator = AsepGenerator::new(*params, h_max)?;
    let pi = stationary_distribution(&generator.uniformized()?, 1e-10)?;
    Ok((generator.space, pi))
}
