//! Exact analysis on a truncated state space.
//!
//! The space holds every `n`-subset of `[0, h_max)` in colexicographic order,
//! so a state's index is its rank in the combinatorial number system. Jump
//! rows of the transition matrix may lose mass to sites at or above `h_max`;
//! that mass is recorded per row instead of being silently renormalised.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{JepError, Result};
use crate::jump::{weighted_sum, JumpFamily};
use crate::sets::ParticleConfig;

/// Largest space solved by dense LU; bigger spaces use power iteration.
pub const DENSE_LIMIT: usize = 1500;
/// Hard cap on enumerated states.
pub const MAX_STATES: u64 = 20_000_000;

const POWER_STEP_TOL: f64 = 1e-12;
const POWER_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct TruncatedStateSpace {
    n: usize,
    h_max: u64,
    states: Vec<ParticleConfig>,
    // binom[x][k] = C(x, k) for x <= h_max, k <= n
    binom: Vec<Vec<u64>>,
}

fn binomial_table(h: u64, n: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n + 1]; h as usize + 1];
    for x in 0..=h as usize {
        t[x][0] = 1;
        for k in 1..=n.min(x) {
            t[x][k] = t[x - 1][k - 1].saturating_add(if k < x { t[x - 1][k] } else { 0 });
        }
    }
    t
}

/// All `n`-subsets of `[0, h_max)`, colexicographic order.
pub fn enumerate_states(n: usize, h_max: u64) -> Result<TruncatedStateSpace> {
    if n == 0 || n as u64 > h_max {
        return Err(JepError::domain(format!(
            "need 1 <= n <= h_max, got n={n}, h_max={h_max}"
        )));
    }
    let binom = binomial_table(h_max, n);
    let count = binom[h_max as usize][n];
    if count > MAX_STATES {
        return Err(JepError::domain(format!(
            "C({h_max},{n}) = {count} states exceeds the limit of {MAX_STATES}"
        )));
    }
    let mut states = Vec::with_capacity(count as usize);
    let mut cur: Vec<u64> = (0..n as u64).collect();
    loop {
        states.push(ParticleConfig::new(cur.clone())?);
        // colex successor: bump the lowest element that has room
        let mut i = 0;
        while i < n {
            let limit = if i + 1 < n { cur[i + 1] } else { h_max };
            if cur[i] + 1 < limit {
                break;
            }
            i += 1;
        }
        if i == n {
            break;
        }
        cur[i] += 1;
        for (j, c) in cur.iter_mut().enumerate().take(i) {
            *c = j as u64;
        }
    }
    debug_assert_eq!(states.len() as u64, count);
    Ok(TruncatedStateSpace {
        n,
        h_max,
        states,
        binom,
    })
}

impl TruncatedStateSpace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h_max(&self) -> u64 {
        self.h_max
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ParticleConfig] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &ParticleConfig {
        &self.states[i]
    }

    /// Colex rank of `a`, or `None` when `a` is not in the space.
    pub fn index_of(&self, a: &ParticleConfig) -> Option<usize> {
        if a.len() != self.n || a.highest().is_some_and(|m| m >= self.h_max) {
            return None;
        }
        Some(
            a.iter()
                .enumerate()
                .map(|(i, x)| self.binom[x as usize][i + 1])
                .sum::<u64>() as usize,
        )
    }
}

/// Sparse transition kernel on a truncated space.
#[derive(Clone, Debug)]
pub struct StochasticMatrix {
    space: TruncatedStateSpace,
    rows: Vec<Vec<(usize, f64)>>,
    escaped: Vec<f64>,
    escape_tol: f64,
}

impl StochasticMatrix {
    /// Assembles a kernel from explicit rows. Rows must hold non-negative
    /// entries with mass at most one; the deficit is recorded as escaped.
    pub fn from_rows(
        space: TruncatedStateSpace,
        rows: Vec<Vec<(usize, f64)>>,
        escape_tol: f64,
    ) -> Result<Self> {
        if rows.len() != space.len() {
            return Err(JepError::domain("row count differs from state count"));
        }
        let mut escaped = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row
                .iter()
                .any(|&(j, p)| j >= space.len() || p.is_nan() || p < 0.0)
            {
                return Err(JepError::domain(format!("row {i} has an invalid entry")));
            }
            let mass: f64 = row.iter().map(|&(_, p)| p).sum();
            if mass > 1.0 + 1e-12 {
                return Err(JepError::domain(format!("row {i} has mass {mass} > 1")));
            }
            escaped.push((1.0 - mass).max(0.0));
        }
        let m = StochasticMatrix {
            space,
            rows,
            escaped,
            escape_tol,
        };
        m.check_escape(escape_tol)?;
        Ok(m)
    }

    pub fn space(&self) -> &TruncatedStateSpace {
        &self.space
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn escaped(&self, i: usize) -> f64 {
        self.escaped[i]
    }

    pub fn max_escaped(&self) -> f64 {
        self.escaped.iter().copied().fold(0.0, f64::max)
    }

    pub fn escape_tol(&self) -> f64 {
        self.escape_tol
    }

    fn check_escape(&self, tol: f64) -> Result<()> {
        match self.escaped.iter().position(|&e| e > tol) {
            Some(row) => Err(JepError::Truncation {
                row,
                state: self.space.state(row).clone(),
                escaped: self.escaped[row],
                tol,
            }),
            None => Ok(()),
        }
    }

    /// `p P` with the raw (sub-stochastic) kernel.
    pub fn push_forward(&self, p: &DistVector) -> DistVector {
        let mut out = vec![0.0; self.rows.len()];
        for (row, &pi) in self.rows.iter().zip(&p.probs) {
            if pi == 0.0 {
                continue;
            }
            for &(j, v) in row {
                out[j] += pi * v;
            }
        }
        DistVector { probs: out }
    }

    fn push_forward_normalized(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for ((row, &pi), &esc) in self.rows.iter().zip(p).zip(&self.escaped) {
            if pi == 0.0 {
                continue;
            }
            let scale = pi / (1.0 - esc);
            for &(j, v) in row {
                out[j] += scale * v;
            }
        }
    }

    /// JSON dump: states, sparse rows as `[col, prob]` pairs, escaped mass per row.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Dump<'a> {
            n: usize,
            h_max: u64,
            states: &'a [ParticleConfig],
            rows: &'a [Vec<(usize, f64)>],
            escaped: &'a [f64],
        }
        serde_json::to_writer(
            out,
            &Dump {
                n: self.space.n,
                h_max: self.space.h_max,
                states: &self.space.states,
                rows: &self.rows,
                escaped: &self.escaped,
            },
        )?;
        Ok(())
    }
}

/// Transition kernel of the dynamics restricted to `space`.
///
/// Fails with a truncation error if any jump row leaks more than `escape_tol`.
pub fn build_matrix(
    family: &dyn JumpFamily,
    space: &TruncatedStateSpace,
    escape_tol: f64,
) -> Result<StochasticMatrix> {
    let h = space.h_max;
    let mut rows = Vec::with_capacity(space.len());
    let mut escaped = Vec::with_capacity(space.len());
    for a in space.states() {
        if a.lowest() != Some(0) {
            let b = a.shift_down(1)?;
            rows.push(vec![(space.index_of(&b).unwrap(), 1.0)]);
            escaped.push(0.0);
            continue;
        }
        let rest = a.delete_min()?.shift_down(1)?;
        let mut row = Vec::new();
        for y in 0..h {
            let p = family.pmf(&rest, y)?;
            if rest.contains(y) {
                if p != 0.0 {
                    return Err(JepError::domain(format!(
                        "{} puts mass {p} on occupied site {y} of {rest}",
                        family.describe()
                    )));
                }
                continue;
            }
            if p > 0.0 {
                let target = rest.with(y)?;
                row.push((space.index_of(&target).unwrap(), p));
            }
        }
        escaped.push(family.tail_mass(&rest, h)?.max(0.0));
        rows.push(row);
    }
    let m = StochasticMatrix {
        space: space.clone(),
        rows,
        escaped,
        escape_tol,
    };
    m.check_escape(escape_tol)?;
    Ok(m)
}

/// Dense probability vector indexed like a [`TruncatedStateSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct DistVector {
    pub probs: Vec<f64>,
}

impl DistVector {
    pub fn point_mass(space: &TruncatedStateSpace, a: &ParticleConfig) -> Result<Self> {
        let i = space
            .index_of(a)
            .ok_or_else(|| JepError::domain(format!("{a} is outside the state space")))?;
        let mut probs = vec![0.0; space.len()];
        probs[i] = 1.0;
        Ok(DistVector { probs })
    }

    pub fn from_fn(
        space: &TruncatedStateSpace,
        f: impl Fn(&ParticleConfig) -> Result<f64>,
    ) -> Result<Self> {
        Ok(DistVector {
            probs: space.states().iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn uniform(len: usize) -> Self {
        DistVector {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `state,probability` lines, state quoted as a comma-joined literal.
    pub fn write_csv<W: Write>(&self, space: &TruncatedStateSpace, mut out: W) -> Result<()> {
        if space.len() != self.len() {
            return Err(JepError::domain("distribution and space sizes differ"));
        }
        writeln!(out, "state,probability")?;
        for (s, p) in space.states().iter().zip(&self.probs) {
            writeln!(out, "\"{}\",{}", s.key(), p)?;
        }
        Ok(())
    }
}

fn normalize(mut v: Vec<f64>) -> Result<DistVector> {
    for x in v.iter_mut() {
        if !x.is_finite() {
            return Err(JepError::Numerical("non-finite entry in solution".into()));
        }
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let total: f64 = v.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(JepError::Numerical("solution has no mass".into()));
    }
    v.iter_mut().for_each(|x| *x /= total);
    Ok(DistVector { probs: v })
}

fn solve_dense(matrix: &StochasticMatrix) -> Result<DistVector> {
    let n = matrix.space.len();
    // (P^T - I) π = 0 with the last equation replaced by Σ π = 1
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, (row, &esc)) in matrix.rows.iter().zip(&matrix.escaped).enumerate() {
        let scale = 1.0 / (1.0 - esc);
        for &(j, p) in row {
            a[(j, i)] += p * scale;
        }
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| JepError::Numerical("singular balance system".into()))?;
    normalize(sol.iter().copied().collect())
}

fn solve_power(matrix: &StochasticMatrix) -> Result<DistVector> {
    let n = matrix.space.len();
    let mut cur = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..POWER_BUDGET {
        matrix.push_forward_normalized(&cur, &mut next);
        // lazy step (π + πP)/2: same fixed point, immune to periodicity
        let mut change = 0.0;
        for (c, x) in cur.iter_mut().zip(next.iter()) {
            let v = 0.5 * (*c + *x);
            change += (v - *c).abs();
            *c = v;
        }
        if change <= POWER_STEP_TOL {
            return normalize(cur);
        }
    }
    Err(JepError::Numerical(format!(
        "power iteration did not converge in {POWER_BUDGET} steps"
    )))
}

/// Stationary law of the truncated chain with jump rows conditioned to stay
/// in range. Requires every escaped mass to be at most `tol`, and verifies
/// `‖πP − π‖₁ ≤ tol` against the raw kernel afterwards.
pub fn stationary_distribution(matrix: &StochasticMatrix, tol: f64) -> Result<DistVector> {
    matrix.check_escape(tol)?;
    let pi = if matrix.space.len() <= DENSE_LIMIT {
        solve_dense(matrix)?
    } else {
        solve_power(matrix)?
    };
    let r = balance_residual(&pi, matrix)?;
    if r > tol {
        return Err(JepError::Numerical(format!(
            "balance residual {r:e} exceeds tolerance {tol:e}"
        )));
    }
    Ok(pi)
}

/// `‖πP − π‖₁`.
pub fn balance_residual(pi: &DistVector, matrix: &StochasticMatrix) -> Result<f64> {
    if pi.len() != matrix.space.len() {
        return Err(JepError::domain("distribution and matrix sizes differ"));
    }
    let pushed = matrix.push_forward(pi);
    Ok(pushed
        .probs
        .iter()
        .zip(&pi.probs)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// Law of `X_t` from `a` under the raw truncated kernel.
pub fn distribution_at_time(
    a: &ParticleConfig,
    matrix: &StochasticMatrix,
    t: u64,
) -> Result<DistVector> {
    let leak = t as f64 * matrix.max_escaped();
    if leak > matrix.escape_tol {
        let row = matrix
            .escaped
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        return Err(JepError::Truncation {
            row,
            state: matrix.space.state(row).clone(),
            escaped: leak,
            tol: matrix.escape_tol,
        });
    }
    let mut p = DistVector::point_mass(&matrix.space, a)?;
    for _ in 0..t {
        p = matrix.push_forward(&p);
    }
    Ok(p)
}

/// `½ Σ |p − q|`.
pub fn tv_distance(p: &DistVector, q: &DistVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(JepError::domain(format!(
            "dimension mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5
        * p.probs
            .iter()
            .zip(&q.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Equilibrium of the one-particle chain: `π(x) = ν[x, ∞) / (1 + mean(ν))`.
///
/// The `+1` accounts for the step spent at zero in each renewal cycle.
pub fn renewal_equilibrium(nu: &[f64]) -> Result<Vec<f64>> {
    if nu.is_empty() {
        return Err(JepError::domain("empty jump distribution"));
    }
    if nu.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(JepError::domain(
            "jump probabilities must be finite and non-negative",
        ));
    }
    let total: f64 = nu.iter().sum();
    if (total - 1.0).abs() > crate::jump::MASS_TOL {
        return Err(JepError::domain(format!(
            "jump distribution has mass {total}"
        )));
    }
    let mean: f64 = nu.iter().enumerate().map(|(x, p)| x as f64 * p).sum();
    if !mean.is_finite() {
        return Err(JepError::domain("jump distribution has no finite mean"));
    }
    let mut tail = vec![0.0; nu.len()];
    let mut acc = 0.0;
    for x in (0..nu.len()).rev() {
        acc += nu[x];
        tail[x] = acc;
    }
    Ok(tail.into_iter().map(|t| t / (1.0 + mean)).collect())
}

/// `E[max X_1 | X_0 = A] − max A`.
pub fn drift_statistic(family: &dyn JumpFamily, a: &ParticleConfig) -> Result<f64> {
    let top = a
        .highest()
        .ok_or_else(|| JepError::domain("drift of an empty configuration"))?;
    if a.lowest() != Some(0) {
        return Ok(-1.0);
    }
    let rest = a.delete_min()?.shift_down(1)?;
    let expected_max = match rest.highest() {
        None => weighted_sum(family, &rest, 0, |y| y as f64)?,
        Some(m) => {
            let above = family.tail_mass(&rest, m + 1)?;
            m as f64 * (1.0 - above) + weighted_sum(family, &rest, m + 1, |y| y as f64)?
        }
    };
    Ok(expected_max - top as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump::{BoundedUniformFamily, MemorylessFamily, TableFamily};
    use crate::sets::pc;

    #[test]
    fn enumerate_examples() {
        let s = enumerate_states(2, 3).unwrap();
        assert_eq!(s.states(), &[pc(&[0, 1]), pc(&[0, 2]), pc(&[1, 2])]);
        assert_eq!(enumerate_states(1, 4).unwrap().len(), 4);
        assert!(enumerate_states(3, 2).is_err());
        assert!(enumerate_states(0, 2).is_err());
    }

    #[test]
    fn colex_rank_is_position() {
        let s = enumerate_states(3, 9).unwrap();
        assert_eq!(s.len(), 84);
        for (i, a) in s.states().iter().enumerate() {
            assert_eq!(s.index_of(a), Some(i));
        }
        assert_eq!(s.index_of(&pc(&[0, 1, 9])), None);
        assert_eq!(s.index_of(&pc(&[0, 1])), None);
    }

    #[test]
    fn drift_row_and_jump_row() {
        let fam = MemorylessFamily::new(0.5).unwrap();
        let s = enumerate_states(2, 4).unwrap();
        let m = build_matrix(&fam, &s, 1.0).unwrap();
        let i = s.index_of(&pc(&[1, 2])).unwrap();
        assert_eq!(m.row(i), &[(s.index_of(&pc(&[0, 1])).unwrap(), 1.0)]);

        let s = enumerate_states(2, 40).unwrap();
        let m = build_matrix(&fam, &s, 1e-9).unwrap();
        let i = s.index_of(&pc(&[0, 1])).unwrap();
        let row = m.row(i);
        let at = |b: &[u64]| {
            let j = s.index_of(&pc(b)).unwrap();
            row.iter().find(|e| e.0 == j).unwrap().1
        };
        assert_eq!(at(&[0, 1]), 0.5);
        assert_eq!(at(&[0, 2]), 0.25);
        assert_eq!(at(&[0, 3]), 0.125);
        for k in 0..s.len() {
            let mass: f64 = m.row(k).iter().map(|e| e.1).sum();
            assert!((mass + m.escaped(k) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_error_names_row() {
        let fam = MemorylessFamily::new(0.9).unwrap();
        let s = enumerate_states(2, 10).unwrap();
        match build_matrix(&fam, &s, 1e-9) {
            Err(JepError::Truncation { state, .. }) => assert_eq!(state.lowest(), Some(0)),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn one_particle_geometric_equilibrium() {
        let fam = MemorylessFamily::new(0.5).unwrap();
        let s = enumerate_states(1, 60).unwrap();
        let m = build_matrix(&fam, &s, 1e-12).unwrap();
        let pi = stationary_distribution(&m, 1e-12).unwrap();
        for (x, p) in pi.probs.iter().enumerate() {
            assert!((p - 0.5f64.powi(x as i32 + 1)).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_and_power_agree() {
        let fam = MemorylessFamily::new(0.4).unwrap();
        let s = enumerate_states(2, 30).unwrap();
        let m = build_matrix(&fam, &s, 1e-9).unwrap();
        let a = solve_dense(&m).unwrap();
        let b = solve_power(&m).unwrap();
        assert!(tv_distance(&a, &b).unwrap() < 1e-11);
    }

    #[test]
    fn residual_examples() {
        let fam = MemorylessFamily::new(0.5).unwrap();
        let s = enumerate_states(2, 40).unwrap();
        let m = build_matrix(&fam, &s, 1e-9).unwrap();
        let pi = stationary_distribution(&m, 1e-9).unwrap();
        assert!(balance_residual(&pi, &m).unwrap() <= 1e-10);
        assert!(balance_residual(&DistVector::uniform(s.len()), &m).unwrap() > 1e-3);

        // point mass at G={0,1}: πP is row G, so the residual is
        // (1 - P(G,G)) + Σ_{B≠G} P(G,B) = 2 (1 - P(G,G)) - escaped(G)
        let g = pc(&[0, 1]);
        let gi = s.index_of(&g).unwrap();
        let delta = DistVector::point_mass(&s, &g).unwrap();
        let want = 2.0 * (1.0 - 0.5) - m.escaped(gi);
        assert!((balance_residual(&delta, &m).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn distribution_at_time_basics() {
        let fam = MemorylessFamily::new(0.5).unwrap();
        let s = enumerate_states(2, 40).unwrap();
        let m = build_matrix(&fam, &s, 1e-9).unwrap();
        let a = pc(&[0, 3]);
        assert_eq!(
            distribution_at_time(&a, &m, 0).unwrap(),
            DistVector::point_mass(&s, &a).unwrap()
        );
        let one = distribution_at_time(&a, &m, 1).unwrap();
        let i = s.index_of(&a).unwrap();
        for &(j, p) in m.row(i) {
            assert_eq!(one.probs[j], p);
        }
        let b = pc(&[5, 9]);
        for t in 0..5 {
            let d = distribution_at_time(&b, &m, t).unwrap();
            assert_eq!(d.probs[s.index_of(&b.shift_down(t).unwrap()).unwrap()], 1.0);
        }
        assert!(matches!(
            distribution_at_time(&a, &m, 10_000_000),
            Err(JepError::Truncation { .. })
        ));
    }

    #[test]
    fn tv_examples() {
        let p = DistVector {
            probs: vec![0.5, 0.5],
        };
        let q = DistVector {
            probs: vec![1.0, 0.0],
        };
        let r = DistVector {
            probs: vec![0.0, 1.0],
        };
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(tv_distance(&q, &r).unwrap(), 1.0);
        assert_eq!(tv_distance(&p, &q).unwrap(), 0.5);
        assert!(tv_distance(&p, &DistVector { probs: vec![1.0] }).is_err());
    }

    #[test]
    fn renewal_examples() {
        let pi = renewal_equilibrium(&[0.0, 0.0, 1.0]).unwrap();
        for p in &pi {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        let pi = renewal_equilibrium(&[1.0 / 3.0; 3]).unwrap();
        let want = [0.5, 1.0 / 3.0, 1.0 / 6.0];
        for (p, w) in pi.iter().zip(want) {
            assert!((p - w).abs() < 1e-15);
        }
        assert!(renewal_equilibrium(&[]).is_err());
        assert!(renewal_equilibrium(&[0.5, 0.4]).is_err());
        assert!(renewal_equilibrium(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn drift_examples() {
        let mem = MemorylessFamily::new(0.5).unwrap();
        let uni = BoundedUniformFamily::new(8).unwrap();
        assert_eq!(drift_statistic(&mem, &pc(&[2, 5])).unwrap(), -1.0);
        assert_eq!(drift_statistic(&uni, &pc(&[2, 5])).unwrap(), -1.0);
        assert!((drift_statistic(&mem, &pc(&[0])).unwrap() - 1.0).abs() < 1e-12);
        assert!(drift_statistic(&mem, &pc(&[0, 30])).unwrap() <= -0.5);

        // uniform on {0..7} \ {1}: E max(1, y) = (1 + 2+3+4+5+6+7)/7 = 4
        let d = drift_statistic(&uni, &pc(&[0, 2])).unwrap();
        assert!((d - 2.0).abs() < 1e-12);

        let mut table = TableFamily::new();
        table.insert(pc(&[4]), vec![(0, 1.0)]).unwrap();
        assert_eq!(drift_statistic(&table, &pc(&[0, 5])).unwrap(), -1.0);
    }

    #[test]
    fn csv_and_json_dumps() {
        let fam = BoundedUniformFamily::new(3).unwrap();
        let s = enumerate_states(2, 3).unwrap();
        let m = build_matrix(&fam, &s, 0.0).unwrap();
        let mut buf = Vec::new();
        m.write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["states"][2], serde_json::json!([1, 2]));
        assert_eq!(v["rows"][2], serde_json::json!([[0, 1.0]]));

        let mut buf = Vec::new();
        DistVector::uniform(3).write_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("state,probability\n\"0,1\","));
    }
}
