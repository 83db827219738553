//! Monte-Carlo bookkeeping and convergence profiles.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{JepError, Result};
use crate::exact::{build_matrix, tv_distance, DistVector, TruncatedStateSpace};
use crate::gibbs::gibbs_vector;
use crate::jump::MemorylessFamily;
use crate::sets::ParticleConfig;
use crate::stream::GeometricStream;

/// Samples per Monte-Carlo batch. Batch `i` always uses sub-stream `i`, so
/// results do not depend on how batches are spread over threads.
pub const BATCH_SIZE: usize = 1 << 16;

/// Occurrence counts of sampled configurations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmpiricalSetDistribution {
    counts: BTreeMap<ParticleConfig, u64>,
    total: u64,
}

impl EmpiricalSetDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, sample: ParticleConfig) {
        *self.counts.entry(sample).or_insert(0) += 1;
        self.total += 1;
    }

    /// Merging is associative and commutative.
    pub fn merge(&mut self, other: EmpiricalSetDistribution) {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, b: &ParticleConfig) -> u64 {
        self.counts.get(b).copied().unwrap_or(0)
    }

    pub fn prob(&self, b: &ParticleConfig) -> f64 {
        self.count(b) as f64 / self.total as f64
    }

    pub fn support(&self) -> impl Iterator<Item = (&ParticleConfig, u64)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }

    /// Fraction of samples satisfying `pred`.
    pub fn fraction(&self, pred: impl Fn(&ParticleConfig) -> bool) -> f64 {
        let hits: u64 = self
            .support()
            .filter(|(b, _)| pred(b))
            .map(|(_, c)| c)
            .sum();
        hits as f64 / self.total as f64
    }

    /// TV distance to an exact pmf on all of `S_n`, taken over the union of
    /// supports; the unseen part contributes `1 − Σ_{seen} p`.
    pub fn tv_to(&self, pmf: impl Fn(&ParticleConfig) -> Result<f64>) -> Result<f64> {
        let mut diff = 0.0;
        let mut seen_mass = 0.0;
        for (b, c) in self.support() {
            let p = pmf(b)?;
            seen_mass += p;
            diff += (c as f64 / self.total as f64 - p).abs();
        }
        Ok(0.5 * (diff + (1.0 - seen_mass).max(0.0)))
    }

    /// TV distance between two empirical distributions.
    pub fn tv_between(&self, other: &EmpiricalSetDistribution) -> f64 {
        let mut diff = 0.0;
        for (b, _) in self.support() {
            diff += (self.prob(b) - other.prob(b)).abs();
        }
        for (b, _) in other.support() {
            if !self.counts.contains_key(b) {
                diff += other.prob(b);
            }
        }
        0.5 * diff
    }

    /// `state,probability` CSV sorted by state.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "state,probability")?;
        for (b, _) in self.support() {
            writeln!(out, "\"{}\",{}", b.key(), self.prob(b))?;
        }
        Ok(())
    }
}

pub fn empirical_distribution(
    samples: impl IntoIterator<Item = ParticleConfig>,
) -> Result<EmpiricalSetDistribution> {
    let mut d = EmpiricalSetDistribution::new();
    for s in samples {
        d.add(s);
    }
    if d.total == 0 {
        return Err(JepError::domain("no samples"));
    }
    Ok(d)
}

/// Worker count from `JEP_THREADS`, defaulting to one.
pub fn worker_count() -> usize {
    std::env::var("JEP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

/// Draws `samples` values with `draw`, batch `i` on `root.split(i)`, spread
/// over `threads` workers. Output is identical for every thread count.
pub fn monte_carlo<F>(
    root: &GeometricStream,
    samples: usize,
    threads: usize,
    draw: F,
) -> Result<EmpiricalSetDistribution>
where
    F: Fn(&mut GeometricStream) -> Result<ParticleConfig> + Sync,
{
    if samples == 0 {
        return Err(JepError::domain("sample count must be positive"));
    }
    let batches = samples.div_ceil(BATCH_SIZE);
    let run_batch = |i: usize| -> Result<EmpiricalSetDistribution> {
        let mut stream = root.split(i as u64);
        let len = BATCH_SIZE.min(samples - i * BATCH_SIZE);
        let mut d = EmpiricalSetDistribution::new();
        for _ in 0..len {
            d.add(draw(&mut stream)?);
        }
        Ok(d)
    };
    let threads = threads.clamp(1, batches);
    let mut total = EmpiricalSetDistribution::new();
    if threads == 1 {
        for i in 0..batches {
            total.merge(run_batch(i)?);
        }
        return Ok(total);
    }
    let parts: Vec<Result<EmpiricalSetDistribution>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let run_batch = &run_batch;
                scope.spawn(move || {
                    let mut acc = EmpiricalSetDistribution::new();
                    for i in (w..batches).step_by(threads) {
                        acc.merge(run_batch(i)?);
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    for p in parts {
        total.merge(p?);
    }
    Ok(total)
}

/// One point of a convergence profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub t: u64,
    pub tv: f64,
}

/// Exact TV distance between the law of `X_t` (memoryless dynamics from `a`)
/// and the Gibbs measure, for `t = 0..=horizon`.
///
/// Mass outside the truncation counts toward the distance, so both laws are
/// compared as measures on all of `S_n`.
pub fn convergence_profile(
    a: &ParticleConfig,
    alpha: f64,
    horizon: u64,
    space: &TruncatedStateSpace,
    escape_tol: f64,
) -> Result<Vec<ProfilePoint>> {
    let start = DistVector::point_mass(space, a)?;
    convergence_profile_from(start, alpha, horizon, space, escape_tol)
}

/// As [`convergence_profile`], from an arbitrary initial law on the space.
pub fn convergence_profile_from(
    start: DistVector,
    alpha: f64,
    horizon: u64,
    space: &TruncatedStateSpace,
    escape_tol: f64,
) -> Result<Vec<ProfilePoint>> {
    let family = MemorylessFamily::new(alpha)?;
    let matrix = build_matrix(&family, space, escape_tol)?;
    if horizon as f64 * matrix.max_escaped() > escape_tol {
        return Err(JepError::Truncation {
            row: 0,
            state: ParticleConfig::ground(space.n()),
            escaped: horizon as f64 * matrix.max_escaped(),
            tol: escape_tol,
        });
    }
    let gibbs = gibbs_vector(space, alpha)?;
    let gibbs_out = 1.0 - gibbs.mass();
    let mut law = start;
    let mut out = Vec::with_capacity(horizon as usize + 1);
    for t in 0..=horizon {
        let inside = tv_distance(&law, &gibbs)?;
        let outside = 0.5 * ((1.0 - law.mass()) - gibbs_out).abs();
        out.push(ProfilePoint {
            t,
            tv: inside + outside,
        });
        if t < horizon {
            law = matrix.push_forward(&law);
        }
    }
    Ok(out)
}

/// A validated description of one CLI run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: String,
    pub family: Option<String>,
    pub alpha: Option<f64>,
    pub m: Option<u64>,
    pub n: Option<usize>,
    pub init: Option<ParticleConfig>,
    pub horizon: Option<u64>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub h_max: Option<u64>,
    pub tol: f64,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn new(model: &str) -> Self {
        RunConfig {
            model: model.to_string(),
            family: None,
            alpha: None,
            m: None,
            n: None,
            init: None,
            horizon: None,
            samples: None,
            seed: 0,
            h_max: None,
            tol: 1e-9,
            out: None,
        }
    }

    /// Checks field ranges and cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(JepError::Config(m));
        const MODELS: [&str; 8] = [
            "simulate",
            "stationary",
            "gibbs",
            "gibbs-sample",
            "converge",
            "warrington",
            "asep",
            "verify",
        ];
        if !MODELS.contains(&self.model.as_str()) {
            return bad(format!("unknown model {:?}", self.model));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("alpha must lie in (0,1), got {a}"));
            }
        }
        if let Some(f) = &self.family {
            match f.as_str() {
                "memoryless" if self.alpha.is_none() => {
                    return bad("memoryless family needs --alpha".into())
                }
                "bounded-uniform" if self.m.is_none() => {
                    return bad("bounded-uniform family needs --m".into())
                }
                "memoryless" | "bounded-uniform" | "table" => {}
                other => return bad(format!("unknown family {other:?}")),
            }
        }
        if self.n == Some(0) {
            return bad("n must be positive".into());
        }
        if let (Some(n), Some(init)) = (self.n, &self.init) {
            if init.len() != n {
                return bad(format!("initial state {init} does not have {n} particles"));
            }
        }
        if let (Some(n), Some(m)) = (self.n, self.m) {
            if n as u64 > m {
                return bad(format!("n={n} exceeds M={m}"));
            }
        }
        if let (Some(n), Some(h)) = (self.n, self.h_max) {
            if n as u64 > h {
                return bad(format!("n={n} exceeds h_max={h}"));
            }
        }
        if let (Some(init), Some(h)) = (&self.init, self.h_max) {
            if init.highest().is_some_and(|x| x >= h) {
                return bad(format!("initial state {init} exceeds h_max={h}"));
            }
        }
        if self.samples == Some(0) {
            return bad("sample count must be positive".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tolerance must be positive, got {}", self.tol));
        }
        Ok(())
    }
}
