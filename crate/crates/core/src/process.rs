//! The discrete-time dynamics.
//!
//! Each step every particle moves down by one site, except that a particle at
//! zero jumps to a free site drawn from the family at the index set left by
//! the others (after they moved down).

use std::io::Write;

use serde::Serialize;

use crate::error::{JepError, Result};
use crate::jump::JumpFamily;
use crate::sets::ParticleConfig;
use crate::stream::{check_alpha, GeometricStream, StreamSeed};

/// One transition from `x`.
pub fn step(
    x: &ParticleConfig,
    family: &dyn JumpFamily,
    stream: &mut GeometricStream,
) -> Result<ParticleConfig> {
    match x.lowest() {
        None => Err(JepError::domain("cannot step an empty configuration")),
        Some(m) if m > 0 => x.shift_down(1),
        Some(_) => {
            let rest = x.delete_min()?.shift_down(1)?;
            let y = family.sample(&rest, stream)?;
            rest.with(y).map_err(|_| {
                JepError::domain(format!(
                    "{} placed a particle on occupied site {y} of {rest}",
                    family.describe()
                ))
            })
        }
    }
}

/// A recorded run: `states[t]` is the configuration at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub seed: StreamSeed,
    pub states: Vec<ParticleConfig>,
}

#[derive(Serialize)]
struct StepRecord<'a> {
    t: usize,
    state: &'a ParticleConfig,
}

impl Trajectory {
    pub fn initial(&self) -> &ParticleConfig {
        &self.states[0]
    }

    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn steps(&self) -> impl Iterator<Item = (usize, &ParticleConfig)> {
        self.states.iter().enumerate()
    }

    /// One `{"t": .., "state": [..]}` object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (t, state) in self.steps() {
            serde_json::to_writer(&mut out, &StepRecord { t, state })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Runs `horizon` steps from `x0` and records every state.
pub fn simulate(
    x0: &ParticleConfig,
    family: &dyn JumpFamily,
    horizon: usize,
    stream: &mut GeometricStream,
) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(JepError::domain("horizon must be at least 1"));
    }
    let seed = stream.id();
    let mut states = Vec::with_capacity(horizon + 1);
    states.push(x0.clone());
    for _ in 0..horizon {
        let next = step(states.last().unwrap(), family, stream)?;
        states.push(next);
    }
    Ok(Trajectory { seed, states })
}

/// Runs `horizon` steps without recording, folding `f` over the visited
/// states `X_1, ..., X_T`. Returns the accumulator and the final state.
pub fn simulate_fold<T>(
    x0: &ParticleConfig,
    family: &dyn JumpFamily,
    horizon: usize,
    stream: &mut GeometricStream,
    init: T,
    mut f: impl FnMut(T, &ParticleConfig) -> T,
) -> Result<(T, ParticleConfig)> {
    let mut acc = init;
    let mut x = x0.clone();
    for _ in 0..horizon {
        x = step(&x, family, stream)?;
        acc = f(acc, &x);
    }
    Ok((acc, x))
}

/// `τ_k`: the step at which the `k`-th lowest initial particle has just jumped.
pub fn jump_times(a: &ParticleConfig) -> Result<Vec<u64>> {
    if a.is_empty() {
        return Err(JepError::domain("jump times of an empty configuration"));
    }
    Ok(a.iter().map(|x| x + 1).collect())
}

/// Draws `X_t` for the memoryless dynamics started at `a`, directly from its
/// closed-form law instead of by stepping.
pub fn transient_law_sample(
    a: &ParticleConfig,
    alpha: f64,
    t: u64,
    stream: &mut GeometricStream,
) -> Result<ParticleConfig> {
    check_alpha(alpha)?;
    let taus = jump_times(a)?;
    let jumped = taus.iter().take_while(|&&tau| tau <= t).count();
    let draws: Vec<u64> = (0..jumped).map(|_| stream.geometric(alpha)).collect();
    let base = ParticleConfig::new(a.as_slice()[jumped..].to_vec())?.shift_down(t)?;
    Ok(base.noncolliding_union(&draws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump::{BoundedUniformFamily, MemorylessFamily};
    use crate::sets::pc;

    #[test]
    fn drift_step_is_deterministic() {
        let fam = BoundedUniformFamily::new(9).unwrap();
        let mut s = GeometricStream::new(0);
        assert_eq!(step(&pc(&[2, 5]), &fam, &mut s).unwrap(), pc(&[1, 4]));
    }

    #[test]
    fn jump_step_uses_noncolliding_union() {
        let fam = MemorylessFamily::new(0.5).unwrap();
        let mut s = GeometricStream::new(42);
        let mut raw = s.clone();
        for _ in 0..200 {
            let xi = raw.geometric(0.5);
            let got = step(&pc(&[0, 3]), &fam, &mut s).unwrap();
            assert_eq!(got, pc(&[2]).noncolliding_union(&[xi]));
        }
        // θ_{2}(2) = 3
        assert_eq!(pc(&[2]).noncolliding_union(&[2]), pc(&[2, 3]));
    }

    #[test]
    fn one_particle_jump_is_raw_draw() {
        let fam = MemorylessFamily::new(0.4).unwrap();
        let mut s = GeometricStream::new(3);
        let mut raw = s.clone();
        for _ in 0..100 {
            let k = raw.geometric(0.4);
            assert_eq!(step(&pc(&[0]), &fam, &mut s).unwrap(), pc(&[k]));
        }
    }

    #[test]
    fn simulate_short_and_reproducible() {
        let fam = MemorylessFamily::new(0.5).unwrap();
        let t = simulate(&pc(&[1]), &fam, 1, &mut GeometricStream::new(1)).unwrap();
        assert_eq!(t.states, vec![pc(&[1]), pc(&[0])]);

        let a = simulate(&pc(&[1, 4, 7]), &fam, 500, &mut GeometricStream::new(9)).unwrap();
        let b = simulate(&pc(&[1, 4, 7]), &fam, 500, &mut GeometricStream::new(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.states.iter().all(|s| s.len() == 3));
        assert!(simulate(&pc(&[1]), &fam, 0, &mut GeometricStream::new(1)).is_err());
    }

    #[test]
    fn jump_times_examples() {
        assert_eq!(jump_times(&pc(&[1, 4, 7])).unwrap(), vec![2, 5, 8]);
        assert_eq!(jump_times(&pc(&[0])).unwrap(), vec![1]);
        assert_eq!(jump_times(&pc(&[0, 1])).unwrap(), vec![1, 2]);
        assert!(jump_times(&ParticleConfig::empty()).is_err());
    }

    #[test]
    fn transient_sample_before_first_jump() {
        let mut s = GeometricStream::new(2);
        for t in 0..2 {
            let x = transient_law_sample(&pc(&[1, 4, 7]), 0.5, t, &mut s).unwrap();
            assert_eq!(x, pc(&[1, 4, 7]).shift_down(t).unwrap());
        }
    }

    #[test]
    fn transient_sample_after_last_jump_ignores_start() {
        let mut s1 = GeometricStream::new(2);
        let mut s2 = GeometricStream::new(2);
        for t in 8..20 {
            let x = transient_law_sample(&pc(&[1, 4, 7]), 0.5, t, &mut s1).unwrap();
            let y = transient_law_sample(&pc(&[0, 1, 2]), 0.5, t, &mut s2).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn trajectory_jsonl_format() {
        let fam = MemorylessFamily::new(0.5).unwrap();
        let t = simulate(&pc(&[2, 5]), &fam, 2, &mut GeometricStream::new(1)).unwrap();
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"t\":0,\"state\":[2,5]}\n{\"t\":1,\"state\":[1,4]}\n{\"t\":2,\"state\":[0,3]}\n"
        );
    }
}
