//! Jump-height distribution families `ν_B`.
//!
//! A family assigns to every index set `B` (the `n-1` particles left behind
//! after the lowest one fell off) a distribution of the landing site of the
//! jumping particle. The exclusion constraint requires zero mass on `B`.
//!
//! Three families ship with the crate: the memoryless family on `B^c`, the
//! bounded uniform family on `[0, M) \ B`, and explicit tables read from JSON.
//! The `check_*` functions are structural diagnostics over a caller-chosen
//! list of index sets. They cannot certify a family over all of `S_{n-1}`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{JepError, Result};
use crate::sets::ParticleConfig;
use crate::stream::{check_alpha, GeometricStream};

/// Mass-sum tolerance for families.
pub const MASS_TOL: f64 = 1e-12;

/// Series summation stops once the remaining weighted tail falls below this.
const SERIES_TOL: f64 = 1e-17;
const SERIES_BUDGET: u64 = 10_000_000;

pub trait JumpFamily: Send + Sync {
    /// `ν_B(y)`.
    fn pmf(&self, b: &ParticleConfig, y: u64) -> Result<f64>;

    /// Exclusive upper bound on the support of `ν_B`, or `None` if unbounded.
    fn support_bound(&self, b: &ParticleConfig) -> Result<Option<u64>>;

    /// `ν_B[t, ∞)`.
    fn tail_mass(&self, b: &ParticleConfig, t: u64) -> Result<f64> {
        match self.support_bound(b)? {
            Some(bound) => (t..bound).map(|y| self.pmf(b, y)).sum(),
            None => {
                let head: f64 = (0..t).map(|y| self.pmf(b, y)).sum::<Result<f64>>()?;
                Ok((1.0 - head).max(0.0))
            }
        }
    }

    /// Draws a landing site, consuming exactly one uniform variate.
    fn sample(&self, b: &ParticleConfig, stream: &mut GeometricStream) -> Result<u64>;

    fn describe(&self) -> String;
}

/// `Σ_{y >= from} weight(y) ν_B(y)` for weights growing at most linearly.
pub(crate) fn weighted_sum(
    family: &dyn JumpFamily,
    b: &ParticleConfig,
    from: u64,
    weight: impl Fn(u64) -> f64,
) -> Result<f64> {
    let mut acc = 0.0;
    if let Some(bound) = family.support_bound(b)? {
        for y in from..bound {
            acc += weight(y) * family.pmf(b, y)?;
        }
        return Ok(acc);
    }
    let mut y = from;
    loop {
        acc += weight(y) * family.pmf(b, y)?;
        y += 1;
        let rest = family.tail_mass(b, y)?;
        let scale = weight(y).abs().max(1.0) * (y as f64 + 1.0);
        if rest * scale < SERIES_TOL {
            return Ok(acc);
        }
        if y - from > SERIES_BUDGET {
            return Err(JepError::Numerical(format!(
                "series for {} at B={b} did not converge after {SERIES_BUDGET} terms",
                family.describe()
            )));
        }
    }
}

/// The memoryless distribution on `B^c`: `ν_B(y) = (1-α) α^{h_B(y)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MemorylessFamily {
    alpha: f64,
}

impl MemorylessFamily {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(MemorylessFamily { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl JumpFamily for MemorylessFamily {
    fn pmf(&self, b: &ParticleConfig, y: u64) -> Result<f64> {
        Ok(memoryless_mass(b, self.alpha, y))
    }

    fn support_bound(&self, _b: &ParticleConfig) -> Result<Option<u64>> {
        Ok(None)
    }

    fn tail_mass(&self, b: &ParticleConfig, t: u64) -> Result<f64> {
        Ok(self.alpha.powf(b.count_below(t) as f64))
    }

    fn sample(&self, b: &ParticleConfig, stream: &mut GeometricStream) -> Result<u64> {
        Ok(b.avoiding_shift(stream.geometric(self.alpha)))
    }

    fn describe(&self) -> String {
        format!("memoryless(alpha={})", self.alpha)
    }
}

fn memoryless_mass(b: &ParticleConfig, alpha: f64, y: u64) -> f64 {
    if b.contains(y) {
        0.0
    } else {
        (1.0 - alpha) * alpha.powf(b.count_below(y) as f64)
    }
}

pub fn memoryless_pmf(b: &ParticleConfig, alpha: f64, y: u64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(memoryless_mass(b, alpha, y))
}

/// `θ_B(ξ)` for the next geometric variate `ξ`.
pub fn sample_memoryless(
    b: &ParticleConfig,
    alpha: f64,
    stream: &mut GeometricStream,
) -> Result<u64> {
    check_alpha(alpha)?;
    Ok(b.avoiding_shift(stream.geometric(alpha)))
}

/// Uniform jumps onto the free sites of `[0, M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundedUniformFamily {
    m: u64,
}

impl BoundedUniformFamily {
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(JepError::domain("height bound M must be positive"));
        }
        Ok(BoundedUniformFamily { m })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    fn free_sites(&self, b: &ParticleConfig) -> Result<u64> {
        let k = b.len() as u64;
        if k >= self.m || b.highest().is_some_and(|x| x >= self.m) {
            return Err(JepError::domain(format!(
                "index set {b} leaves no free site in [0,{})",
                self.m
            )));
        }
        Ok(self.m - k)
    }
}

impl JumpFamily for BoundedUniformFamily {
    fn pmf(&self, b: &ParticleConfig, y: u64) -> Result<f64> {
        bounded_uniform_pmf(b, self.m, y)
    }

    fn support_bound(&self, _b: &ParticleConfig) -> Result<Option<u64>> {
        Ok(Some(self.m))
    }

    fn sample(&self, b: &ParticleConfig, stream: &mut GeometricStream) -> Result<u64> {
        let free = self.free_sites(b)?;
        Ok(b.avoiding_shift(stream.index(free)))
    }

    fn describe(&self) -> String {
        format!("bounded-uniform(M={})", self.m)
    }
}

pub fn bounded_uniform_pmf(b: &ParticleConfig, m: u64, y: u64) -> Result<f64> {
    let free = BoundedUniformFamily::new(m)?.free_sites(b)?;
    if y >= m || b.contains(y) {
        Ok(0.0)
    } else {
        Ok(1.0 / free as f64)
    }
}

/// A family given explicitly as a finite table per index set.
///
/// Lookups for index sets absent from the table are hard errors.
#[derive(Clone, Debug, Default)]
pub struct TableFamily {
    rows: HashMap<ParticleConfig, Vec<(u64, f64)>>,
}

impl TableFamily {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the row for `b`; sites must be distinct and probabilities non-negative.
    pub fn insert(&mut self, b: ParticleConfig, mut row: Vec<(u64, f64)>) -> Result<()> {
        row.sort_by_key(|&(y, _)| y);
        if row.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(JepError::Config(format!(
                "duplicate site in table row for {b}"
            )));
        }
        if let Some(&(y, p)) = row.iter().find(|&&(_, p)| !(p.is_finite() && p >= 0.0)) {
            return Err(JepError::Config(format!(
                "invalid probability {p} at site {y} for {b}"
            )));
        }
        self.rows.insert(b, row);
        Ok(())
    }

    /// Parses `{"0,2,3": [[1, 0.5], [4, 0.5]], "": [[0, 1.0]]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: HashMap<String, Vec<(u64, f64)>> =
            serde_json::from_str(text).map_err(|e| JepError::Config(format!("jump table: {e}")))?;
        let mut table = TableFamily::new();
        for (key, row) in raw {
            let b: ParticleConfig = key.parse()?;
            table.insert(b, row)?;
        }
        Ok(table)
    }

    pub fn index_sets(&self) -> impl Iterator<Item = &ParticleConfig> {
        self.rows.keys()
    }

    fn row(&self, b: &ParticleConfig) -> Result<&[(u64, f64)]> {
        self.rows
            .get(b)
            .map(Vec::as_slice)
            .ok_or_else(|| JepError::MissingFamilyEntry(b.clone()))
    }
}

impl JumpFamily for TableFamily {
    fn pmf(&self, b: &ParticleConfig, y: u64) -> Result<f64> {
        let row = self.row(b)?;
        Ok(row
            .binary_search_by_key(&y, |&(s, _)| s)
            .map_or(0.0, |i| row[i].1))
    }

    fn support_bound(&self, b: &ParticleConfig) -> Result<Option<u64>> {
        Ok(Some(self.row(b)?.last().map_or(0, |&(y, _)| y + 1)))
    }

    fn sample(&self, b: &ParticleConfig, stream: &mut GeometricStream) -> Result<u64> {
        let row = self.row(b)?;
        let total: f64 = row.iter().map(|&(_, p)| p).sum();
        if row.is_empty() || total <= 0.0 {
            return Err(JepError::domain(format!("table row for {b} has no mass")));
        }
        let target = (1.0 - stream.uniform()) * total;
        let mut acc = 0.0;
        for &(y, p) in row {
            acc += p;
            if target < acc {
                return Ok(y);
            }
        }
        Ok(row
            .iter()
            .rev()
            .find(|&&(_, p)| p > 0.0)
            .map(|&(y, _)| y)
            .unwrap())
    }

    fn describe(&self) -> String {
        format!("table({} index sets)", self.rows.len())
    }
}

/// Outcome of a structural family check.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub checked: usize,
    pub violations: Vec<String>,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Total mass of `ν_B`, summing the head explicitly and adding the tail mass.
fn total_mass(family: &dyn JumpFamily, b: &ParticleConfig) -> Result<f64> {
    match family.support_bound(b)? {
        Some(bound) => (0..bound).map(|y| family.pmf(b, y)).sum(),
        None => {
            let cut = b.highest().map_or(0, |m| m + 1) + 64;
            let head: f64 = (0..cut).map(|y| family.pmf(b, y)).sum::<Result<f64>>()?;
            Ok(head + family.tail_mass(b, cut)?)
        }
    }
}

/// Zero mass on occupied sites and unit total mass, for every supplied index set.
pub fn check_noncolliding(family: &dyn JumpFamily, states: &[ParticleConfig]) -> CheckReport {
    let mut report = CheckReport::new("noncolliding");
    for b in states {
        report.checked += 1;
        let res: Result<()> = (|| {
            for y in b.iter() {
                let p = family.pmf(b, y)?;
                if p != 0.0 {
                    report
                        .violations
                        .push(format!("B={b}: mass {p} on occupied site {y}"));
                }
            }
            let total = total_mass(family, b)?;
            if (total - 1.0).abs() > MASS_TOL {
                report
                    .violations
                    .push(format!("B={b}: total mass {total} differs from 1"));
            }
            Ok(())
        })();
        if let Err(e) = res {
            report.violations.push(format!("B={b}: {e}"));
        }
    }
    report
}

/// Positive mass on the lowest free site, for every supplied index set.
pub fn check_aperiodicity(family: &dyn JumpFamily, states: &[ParticleConfig]) -> CheckReport {
    let mut report = CheckReport::new("aperiodicity");
    for b in states {
        report.checked += 1;
        let lowest = b.avoiding_shift(0);
        match family.pmf(b, lowest) {
            Ok(p) if p > 0.0 => {}
            Ok(_) => report
                .violations
                .push(format!("B={b}: no mass on lowest free site {lowest}")),
            Err(e) => report.violations.push(format!("B={b}: {e}")),
        }
    }
    report
}

/// `max_B Σ_{x > K} x ν_B(x)` over the supplied index sets.
///
/// Small values for large `K` are necessary, not sufficient, for uniform
/// integrability over all of `S_{n-1}`.
pub fn tail_first_moment(
    family: &dyn JumpFamily,
    k: u64,
    states: &[ParticleConfig],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in states {
        let v = weighted_sum(family, b, k + 1, |x| x as f64)?;
        worst = worst.max(v);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{pc, subsets_up_to};

    struct FarJump;

    impl JumpFamily for FarJump {
        fn pmf(&self, b: &ParticleConfig, y: u64) -> Result<f64> {
            Ok(if y == b.highest().map_or(0, |m| m + 2) {
                1.0
            } else {
                0.0
            })
        }
        fn support_bound(&self, b: &ParticleConfig) -> Result<Option<u64>> {
            Ok(Some(b.highest().map_or(0, |m| m + 2) + 1))
        }
        fn sample(&self, b: &ParticleConfig, _: &mut GeometricStream) -> Result<u64> {
            Ok(b.highest().map_or(0, |m| m + 2))
        }
        fn describe(&self) -> String {
            "far".into()
        }
    }

    #[test]
    fn memoryless_pmf_examples() {
        let e = ParticleConfig::empty();
        for y in 0..10 {
            let want = 0.3 * 0.7f64.powi(y as i32);
            assert!((memoryless_pmf(&e, 0.7, y).unwrap() - want).abs() < 1e-15);
        }
        assert_eq!(memoryless_pmf(&pc(&[0, 2, 3]), 0.5, 1).unwrap(), 0.5);
        assert_eq!(memoryless_pmf(&pc(&[0, 2, 3]), 0.5, 2).unwrap(), 0.0);
        assert!(memoryless_pmf(&e, 1.0, 0).is_err());
    }

    #[test]
    fn memoryless_tail_identity() {
        let fam = MemorylessFamily::new(0.6).unwrap();
        let b = pc(&[1, 2, 5]);
        for t in 0..12 {
            let summed: f64 = (t..400).map(|y| fam.pmf(&b, y).unwrap()).sum();
            assert!((summed - fam.tail_mass(&b, t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_memoryless_shifts_draws() {
        // θ_{0}(k) = k + 1, replay the same stream to recover the raw draws
        let mut s = GeometricStream::new(5);
        let mut raw = s.clone();
        for _ in 0..50 {
            let y = sample_memoryless(&pc(&[0]), 0.5, &mut s).unwrap();
            assert_eq!(y, raw.geometric(0.5) + 1);
        }
        let mut s = GeometricStream::new(6);
        let mut raw = s.clone();
        for _ in 0..50 {
            let y = sample_memoryless(&ParticleConfig::empty(), 0.3, &mut s).unwrap();
            assert_eq!(y, raw.geometric(0.3));
        }
    }

    #[test]
    fn bounded_uniform_examples() {
        assert_eq!(bounded_uniform_pmf(&pc(&[0, 2]), 4, 1).unwrap(), 0.5);
        assert_eq!(bounded_uniform_pmf(&pc(&[0, 2]), 4, 3).unwrap(), 0.5);
        assert_eq!(bounded_uniform_pmf(&pc(&[0, 2]), 4, 2).unwrap(), 0.0);
        assert_eq!(bounded_uniform_pmf(&pc(&[0, 2]), 4, 9).unwrap(), 0.0);
        assert!(bounded_uniform_pmf(&pc(&[0, 1]), 2, 0).is_err());
        assert!(bounded_uniform_pmf(&pc(&[5]), 4, 0).is_err());
    }

    #[test]
    fn bounded_uniform_samples_free_sites() {
        let fam = BoundedUniformFamily::new(6).unwrap();
        let b = pc(&[1, 4]);
        let mut s = GeometricStream::new(1);
        let mut seen = [0u32; 6];
        for _ in 0..4000 {
            seen[fam.sample(&b, &mut s).unwrap() as usize] += 1;
        }
        assert_eq!(seen[1], 0);
        assert_eq!(seen[4], 0);
        assert!([0, 2, 3, 5].iter().all(|&i| seen[i] > 800));
    }

    #[test]
    fn noncolliding_reports() {
        let mem = MemorylessFamily::new(0.5).unwrap();
        assert!(check_noncolliding(&mem, &subsets_up_to(9, 3)).is_clean());

        let mut table = TableFamily::new();
        table.insert(pc(&[1]), vec![(0, 0.9), (1, 0.1)]).unwrap();
        let r = check_noncolliding(&table, &[pc(&[1])]);
        assert_eq!(r.violations.len(), 1);

        let uni = BoundedUniformFamily::new(6).unwrap();
        let pairs: Vec<_> = subsets_up_to(6, 2)
            .into_iter()
            .filter(|b| b.len() == 2)
            .collect();
        assert_eq!(pairs.len(), 15);
        assert!(check_noncolliding(&uni, &pairs).is_clean());
    }

    #[test]
    fn missing_table_entry_is_reported() {
        let table = TableFamily::new();
        let r = check_noncolliding(&table, &[pc(&[3])]);
        assert!(!r.is_clean());
        assert!(matches!(
            table.pmf(&pc(&[3]), 0),
            Err(JepError::MissingFamilyEntry(_))
        ));
    }

    #[test]
    fn aperiodicity_reports() {
        let states = subsets_up_to(8, 3);
        assert!(check_aperiodicity(&MemorylessFamily::new(0.9).unwrap(), &states).is_clean());
        let r = check_aperiodicity(&FarJump, &states);
        // only the empty set gets its mass on the lowest free site
        assert_eq!(r.violations.len(), states.len() - 1);
        let uni = BoundedUniformFamily::new(6).unwrap();
        let valid: Vec<_> = subsets_up_to(6, 3)
            .into_iter()
            .filter(|b| b.len() < 6)
            .collect();
        assert!(check_aperiodicity(&uni, &valid).is_clean());
    }

    #[test]
    fn tail_first_moment_examples() {
        let mem = MemorylessFamily::new(0.5).unwrap();
        let v = tail_first_moment(&mem, 30, &[ParticleConfig::empty()]).unwrap();
        // Σ_{x>K} x (1-α) α^x = α^{K+1} (K + 1 + α/(1-α))
        let closed = 0.5f64.powi(31) * 32.0;
        assert!((v - closed).abs() < 1e-15);
        assert!(v < 1e-7);

        let mut point = TableFamily::new();
        point
            .insert(ParticleConfig::empty(), vec![(0, 1.0)])
            .unwrap();
        assert_eq!(
            tail_first_moment(&point, 0, &[ParticleConfig::empty()]).unwrap(),
            0.0
        );

        let slow = MemorylessFamily::new(0.9).unwrap();
        let states = [ParticleConfig::empty(), pc(&[0, 3])];
        let at10 = tail_first_moment(&slow, 10, &states).unwrap();
        let at20 = tail_first_moment(&slow, 20, &states).unwrap();
        assert!(at10 >= at20 && at20 > 0.0);
    }

    #[test]
    fn table_json_roundtrip() {
        let t =
            TableFamily::from_json(r#"{"": [[0, 0.25], [2, 0.75]], "0,2": [[1, 1.0]]}"#).unwrap();
        assert_eq!(t.pmf(&ParticleConfig::empty(), 2).unwrap(), 0.75);
        assert_eq!(t.pmf(&pc(&[0, 2]), 1).unwrap(), 1.0);
        assert!(TableFamily::from_json(r#"{"2,0": [[1, 1.0]]}"#).is_err());
        assert!(TableFamily::from_json(r#"{"": [[1, -1.0]]}"#).is_err());
        assert!(TableFamily::from_json(r#"{"": [[1, 0.5], [1, 0.5]]}"#).is_err());
    }

    #[test]
    fn table_sampling_follows_row() {
        let mut t = TableFamily::new();
        t.insert(ParticleConfig::empty(), vec![(0, 0.25), (2, 0.75)])
            .unwrap();
        let mut s = GeometricStream::new(9);
        let n = 40_000;
        let twos = (0..n)
            .filter(|_| t.sample(&ParticleConfig::empty(), &mut s).unwrap() == 2)
            .count() as f64
            / n as f64;
        assert!((twos - 0.75).abs() < 4.0 * (0.1875 / n as f64).sqrt());
    }
}
