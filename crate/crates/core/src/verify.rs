//! The invariant suite behind `jep verify`.
//!
//! Every check is exact or uses a fixed seed, so a clean build passes
//! deterministically. Each returns a [`Check`] rather than panicking.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::exact::{
    build_matrix, distribution_at_time, drift_statistic, enumerate_states, renewal_equilibrium,
    stationary_distribution,
};
use crate::gibbs::{equilibrium_stats, gibbs_pmf, gibbs_super_pmf, gibbs_vector, sample_gibbs};
use crate::harness::{convergence_profile, monte_carlo};
use crate::jump::{
    check_aperiodicity, check_noncolliding, tail_first_moment, BoundedUniformFamily, JumpFamily,
    MemorylessFamily, TableFamily,
};
use crate::related::{asep_stationary_exact, stirling2, warrington_pmf, AsepGenerator, AsepParams};
use crate::sets::{subsets_up_to, ParticleConfig};
use crate::stream::GeometricStream;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Literal reading of the avoiding shift: smallest `m` with `|[0,m] \ A| >= x+1`.
pub fn avoiding_shift_by_scan(a: &ParticleConfig, x: u64) -> u64 {
    let mut free = 0;
    let mut m = 0;
    loop {
        if !a.contains(m) {
            free += 1;
            if free > x {
                return m;
            }
        }
        m += 1;
    }
}

/// Identities of the avoiding shift and the noncolliding union, checked
/// exhaustively over `A ⊆ [0, set_bound)`, `|A| <= max_len`, arguments `<= arg_max`.
/// Returns the number of cases checked and the failures found.
pub fn set_identities(set_bound: u64, max_len: usize, arg_max: u64) -> (u64, Vec<String>) {
    let mut cases = 0u64;
    let mut fails = Vec::new();
    let mut fail = |s: String| {
        if fails.len() < 20 {
            fails.push(s);
        }
    };
    for a in subsets_up_to(set_bound, max_len) {
        let up = a.shift_up(1);
        let star = a.delete_min().ok();
        for x in 0..=arg_max {
            cases += 1;
            let th = a.avoiding_shift(x);
            if th != avoiding_shift_by_scan(&a, x) {
                fail(format!("shift definition: A={a} x={x}"));
            }
            if up.avoiding_shift(x + 1) != th + 1 {
                fail(format!("shift translation: A={a} x={x}"));
            }
            if let Some(star) = &star {
                let want = if x < a.lowest().unwrap() {
                    x
                } else {
                    star.avoiding_shift(x + 1)
                };
                if th != want {
                    fail(format!("shift deletion: A={a} x={x}"));
                }
            }
            if !a.contains(x) && a.avoiding_shift(a.count_below(x)) != x {
                fail(format!("shift inverse: A={a} x={x}"));
            }
            if a.contains(th) {
                fail(format!("shift lands in A: A={a} x={x}"));
            }
            if x > 0 && a.avoiding_shift(x - 1) >= th {
                fail(format!("shift not increasing: A={a} x={x}"));
            }
            let u = a.noncolliding_union(&[x]);
            if let Some(star) = &star {
                let want = if x < a.lowest().unwrap() {
                    a.clone()
                } else {
                    star.noncolliding_union(&[x + 1])
                };
                if u.delete_min().unwrap() != want {
                    fail(format!("union deletion: A={a} x={x}"));
                }
            }
            for x2 in 0..=arg_max {
                let xs = [x, x2];
                let u2 = a.noncolliding_union(&xs);
                let min_all = a.iter().chain(xs).min();
                if u2.lowest() != min_all || u2.len() != a.len() + 2 || !a.is_subset_of(&u2) {
                    fail(format!("union minimum/size: A={a} xs={xs:?}"));
                }
                if up.noncolliding_union(&[x + 1, x2 + 1]) != u2.shift_up(1) {
                    fail(format!("union translation: A={a} xs={xs:?}"));
                }
            }
            if u.lowest() != a.iter().chain([x]).min() {
                fail(format!("union minimum: A={a} x={x}"));
            }
            if up.noncolliding_union(&[x + 1]) != u.shift_up(1) {
                fail(format!("union translation: A={a} x={x}"));
            }
        }
    }
    (cases, fails)
}

/// Law of `U(A, ξ_1, ..., ξ_n)` by enumerating every draw tuple with
/// `ξ_i <= cutoff`. Missing mass is at most `n α^{cutoff+1}`.
pub fn union_law_by_enumeration(
    a: &ParticleConfig,
    n: usize,
    alpha: f64,
    cutoff: u64,
) -> HashMap<ParticleConfig, f64> {
    let weights: Vec<f64> = (0..=cutoff)
        .map(|k| (1.0 - alpha) * alpha.powi(k as i32))
        .collect();
    let mut law = HashMap::new();
    let mut draws = vec![0u64; n];
    loop {
        let p: f64 = draws.iter().map(|&k| weights[k as usize]).product();
        *law.entry(a.noncolliding_union(&draws)).or_insert(0.0) += p;
        // odometer increment
        let mut i = 0;
        while i < n {
            draws[i] += 1;
            if draws[i] <= cutoff {
                break;
            }
            draws[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    law
}

fn max_abs_diff(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    pairs.map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn shipped_family_diagnostics() -> Result<(bool, String)> {
    let mem = MemorylessFamily::new(0.5)?;
    let uni = BoundedUniformFamily::new(6)?;
    let index_sets = subsets_up_to(9, 3);
    let uni_sets: Vec<_> = subsets_up_to(6, 3)
        .into_iter()
        .filter(|b| b.len() < 6)
        .collect();
    let mut notes = Vec::new();
    let mut ok = true;
    for (fam, sets) in [
        (&mem as &dyn JumpFamily, &index_sets),
        (&uni as &dyn JumpFamily, &uni_sets),
    ] {
        let nc = check_noncolliding(fam, sets);
        let ap = check_aperiodicity(fam, sets);
        let ui_10 = tail_first_moment(fam, 10, sets)?;
        let ui_40 = tail_first_moment(fam, 40, sets)?;
        ok &= nc.is_clean() && ap.is_clean() && ui_40 <= ui_10 && ui_40 < 1e-6;
        notes.push(format!(
            "{}: noncolliding {} aperiodic {} tail(10)={ui_10:.2e} tail(40)={ui_40:.2e}",
            fam.describe(),
            nc.is_clean(),
            ap.is_clean()
        ));
    }
    Ok((ok, notes.join("; ")))
}

/// Runs the whole suite.
pub fn run_all() -> Vec<Check> {
    let mut checks = Vec::new();

    checks.push(timed("set identities (exhaustive)", || {
        let (cases, fails) = set_identities(13, 4, 15);
        Ok((
            fails.is_empty(),
            format!("{cases} cases, failures: {fails:?}"),
        ))
    }));

    checks.push(timed("one-particle renewal equilibrium", || {
        let nu: Vec<f64> = (0..80).map(|x| 0.5f64.powi(x + 1)).collect();
        let pi = renewal_equilibrium(&nu)?;
        let geo = max_abs_diff(pi.iter().copied().zip(nu.iter().copied()));
        let mut worst = 0.0f64;
        for nu in [vec![1.0 / 3.0; 3], vec![0.0, 0.0, 1.0]] {
            let mut table = TableFamily::new();
            let row = nu.iter().enumerate().map(|(y, &p)| (y as u64, p)).collect();
            table.insert(ParticleConfig::empty(), row)?;
            let space = enumerate_states(1, nu.len() as u64)?;
            let solved = stationary_distribution(&build_matrix(&table, &space, 0.0)?, 1e-12)?;
            let closed = renewal_equilibrium(&nu)?;
            worst = worst.max(max_abs_diff(solved.probs.iter().copied().zip(closed)));
        }
        Ok((
            geo <= 1e-12 && worst <= 1e-10,
            format!("geometric {geo:.1e}, linear solve {worst:.1e}"),
        ))
    }));

    checks.push(timed("memoryless stationary law is Gibbs", || {
        let mut worst = 0.0f64;
        for (n, alpha) in [(2usize, 0.5), (3, 0.3)] {
            let space = enumerate_states(n, 40)?;
            let m = build_matrix(&MemorylessFamily::new(alpha)?, &space, 1e-9)?;
            let pi = stationary_distribution(&m, 1e-9)?;
            let g = gibbs_vector(&space, alpha)?;
            worst = worst.max(max_abs_diff(
                pi.probs.iter().copied().zip(g.probs.iter().copied()),
            ));
        }
        Ok((worst <= 1e-9, format!("max sitewise error {worst:.2e}")))
    }));

    checks.push(timed("base-set Gibbs law by outcome enumeration", || {
        let mut worst_excess = 0.0f64;
        let mut cases = 0;
        for a in ["", "0", "0,2,3"] {
            let a: ParticleConfig = a.parse()?;
            for n in 1..=3 {
                for alpha in [0.3f64, 0.5] {
                    let bound = n as f64 * alpha.powi(25);
                    let beta = -f64::ln(alpha);
                    for (b, p) in union_law_by_enumeration(&a, n, alpha, 25) {
                        let exact = gibbs_super_pmf(&a, n, beta, &b)?;
                        worst_excess = worst_excess.max((exact - p).abs() / bound);
                        cases += 1;
                    }
                }
            }
        }
        Ok((
            worst_excess <= 1.0,
            format!("{cases} sets, worst error / tail bound = {worst_excess:.3}"),
        ))
    }));

    checks.push(timed("ultrafast convergence", || {
        let space = enumerate_states(3, 40)?;
        let prof = convergence_profile(&"1,4,7".parse()?, 0.5, 8, &space, 1e-9)?;
        let space2 = enumerate_states(2, 40)?;
        let prof2 = convergence_profile(&"0,5".parse()?, 0.5, 6, &space2, 1e-9)?;
        let ok = prof[8].tv <= 1e-9 && prof[7].tv >= 1e-3 && prof2[6].tv <= 1e-9;
        Ok((
            ok,
            format!(
                "TV(7)={:.3e} TV(8)={:.3e}; n=2 TV(6)={:.3e}",
                prof[7].tv, prof[8].tv, prof2[6].tv
            ),
        ))
    }));

    checks.push(timed("transient law at a fixed time", || {
        let space = enumerate_states(2, 40)?;
        let m = build_matrix(&MemorylessFamily::new(0.5)?, &space, 1e-9)?;
        let law = distribution_at_time(&"1,3".parse()?, &m, 4)?;
        let g = gibbs_vector(&space, 0.5)?;
        let err = max_abs_diff(law.probs.iter().copied().zip(g.probs.iter().copied()));
        Ok((err <= 1e-9, format!("max error at t=4: {err:.2e}")))
    }));

    checks.push(timed("equilibrium closed forms", || {
        let st = equilibrium_stats(2, 0.5)?;
        let space = enumerate_states(2, 60)?;
        let beta = std::f64::consts::LN_2;
        let mut zero = 0.0;
        let mut mean = 0.0;
        for b in space.states() {
            let p = gibbs_pmf(2, beta, b)?;
            if b.contains(0) {
                zero += p;
            }
            mean += p * b.energy() as f64 / 2.0;
        }
        let ground = gibbs_pmf(2, beta, &ParticleConfig::ground(2))?;
        let exact_ok = (zero - st.zero_occupied_prob).abs() <= 1e-9
            && (ground - st.ground_state_prob).abs() <= 1e-9
            && (mean - st.mean_height).abs() <= 1e-9;
        let samples = 1_000_000;
        let emp = monte_carlo(&GeometricStream::new(2024), samples, 1, |s| {
            sample_gibbs(&ParticleConfig::empty(), 2, 0.5, s)
        })?;
        let z_hat = emp.fraction(|b| b.contains(0));
        let se = (st.zero_occupied_prob * (1.0 - st.zero_occupied_prob) / samples as f64).sqrt();
        let mc_ok = (z_hat - st.zero_occupied_prob).abs() <= 4.0 * se;
        Ok((
            exact_ok && mc_ok,
            format!("P(0 occupied) exact {zero:.12} MC {z_hat:.5}; ground {ground:.12}"),
        ))
    }));

    checks.push(timed("bounded uniform equilibrium", || {
        let mut worst = 0.0f64;
        for (n, m) in [(1usize, 2u64), (1, 5), (2, 4), (3, 5)] {
            let space = enumerate_states(n, m)?;
            let pi = stationary_distribution(
                &build_matrix(&BoundedUniformFamily::new(m)?, &space, 0.0)?,
                1e-12,
            )?;
            for (b, p) in space.states().iter().zip(&pi.probs) {
                worst = worst.max((p - warrington_pmf(n, m, b)?).abs());
            }
        }
        let s = stirling2(6, 3)?;
        Ok((
            worst <= 1e-10 && s == 90u32.into(),
            format!("max error {worst:.2e}"),
        ))
    }));

    checks.push(timed("reflecting exclusion process equilibrium", || {
        let params = AsepParams::new(2, 0.5, 1.0)?;
        let (space, pi) = asep_stationary_exact(&params, 40)?;
        let beta = std::f64::consts::LN_2;
        let mut worst = 0.0f64;
        for (b, p) in space.states().iter().zip(&pi.probs) {
            worst = worst.max((p - gibbs_pmf(2, beta, b)?).abs());
        }
        let db = AsepGenerator::new(params, 40)?.detailed_balance_residual(&pi);
        Ok((
            worst <= 1e-8 && db <= 1e-9,
            format!("max error {worst:.2e}, detailed balance {db:.2e}"),
        ))
    }));

    checks.push(timed("drift diagnostic", || {
        let mem = MemorylessFamily::new(0.5)?;
        let mut ok = true;
        let mut worst_big = f64::NEG_INFINITY;
        for a in subsets_up_to(16, 3).into_iter().filter(|a| !a.is_empty()) {
            let d = drift_statistic(&mem, &a)?;
            if !a.contains(0) {
                ok &= d == -1.0;
            } else if a.highest().unwrap() >= 10 {
                worst_big = worst_big.max(d);
                ok &= d <= -0.5;
            }
        }
        Ok((
            ok,
            format!("largest drift with 0 in A, max A >= 10: {worst_big:.4}"),
        ))
    }));

    checks.push(timed(
        "shipped family diagnostics",
        shipped_family_diagnostics,
    ));

    checks
}
