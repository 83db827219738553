//! Finite sets of particle heights and the set-avoiding combinatorics built on them.
//!
//! A [`ParticleConfig`] is a strictly increasing list of non-negative lattice
//! sites. The operations here are the building blocks of the dynamics: shifting
//! every particle down, removing the lowest particle, counting free sites below a
//! height, mapping an integer onto the complement of a set (the avoiding shift),
//! and inserting a sequence of points one after another through that map (the
//! noncolliding union).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{JepError, Result};

/// An `n`-element set of distinct particle heights, stored sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ParticleConfig(Vec<u64>);

impl ParticleConfig {
    /// Builds a configuration from heights that must already be strictly increasing.
    pub fn new(heights: Vec<u64>) -> Result<Self> {
        if heights.windows(2).any(|w| w[0] >= w[1]) {
            return Err(JepError::domain(format!(
                "heights must be strictly increasing, got {heights:?}"
            )));
        }
        Ok(ParticleConfig(heights))
    }

    /// Sorts the heights first; duplicates are still rejected.
    pub fn from_unsorted(mut heights: Vec<u64>) -> Result<Self> {
        heights.sort_unstable();
        Self::new(heights)
    }

    pub fn empty() -> Self {
        ParticleConfig(Vec::new())
    }

    /// The ground state `{0, 1, ..., n-1}`.
    pub fn ground(n: usize) -> Self {
        ParticleConfig((0..n as u64).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lowest(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn highest(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    /// Sum of heights.
    pub fn energy(&self) -> u64 {
        self.0.iter().sum()
    }

    /// `{a - t : a in A}`. Fails when some particle would go below zero.
    pub fn shift_down(&self, t: u64) -> Result<Self> {
        match self.lowest() {
            Some(m) if m < t => Err(JepError::domain(format!(
                "cannot shift {self} down by {t}: minimum is {m}"
            ))),
            _ => Ok(ParticleConfig(self.0.iter().map(|a| a - t).collect())),
        }
    }

    /// `{a + t : a in A}`.
    pub fn shift_up(&self, t: u64) -> Self {
        ParticleConfig(self.0.iter().map(|a| a + t).collect())
    }

    /// Removes the smallest element.
    pub fn delete_min(&self) -> Result<Self> {
        if self.is_empty() {
            return Err(JepError::domain("delete_min of an empty configuration"));
        }
        Ok(ParticleConfig(self.0[1..].to_vec()))
    }

    /// Number of free sites strictly below `x`, i.e. `|[0, x-1] \ A|`.
    pub fn count_below(&self, x: u64) -> u64 {
        let occupied = self.0.partition_point(|&a| a < x) as u64;
        x - occupied
    }

    /// The `(x+1)`-th smallest site not in `A`.
    ///
    /// Walks the sorted set once: every occupied site at or below the running
    /// candidate pushes the candidate up by one.
    pub fn avoiding_shift(&self, x: u64) -> u64 {
        let mut y = x;
        for &a in &self.0 {
            if a <= y {
                y += 1;
            } else {
                break;
            }
        }
        y
    }

    /// Inserts a site known to be free.
    pub(crate) fn insert_free(&mut self, y: u64) {
        match self.0.binary_search(&y) {
            Ok(_) => unreachable!("site {y} already occupied"),
            Err(pos) => self.0.insert(pos, y),
        }
    }

    /// Returns `A ∪ {y}`, rejecting occupied sites.
    pub fn with(&self, y: u64) -> Result<Self> {
        if self.contains(y) {
            return Err(JepError::domain(format!("site {y} is occupied in {self}")));
        }
        let mut out = self.clone();
        out.insert_free(y);
        Ok(out)
    }

    /// Returns `A ∪ B` for disjoint `B`.
    pub fn union_disjoint(&self, other: &ParticleConfig) -> Result<Self> {
        let mut out = self.clone();
        for y in other.iter() {
            if out.contains(y) {
                return Err(JepError::domain(format!("{self} and {other} intersect")));
            }
            out.insert_free(y);
        }
        Ok(out)
    }

    /// True when every element of `self` is in `other`.
    pub fn is_subset_of(&self, other: &ParticleConfig) -> bool {
        self.iter().all(|a| other.contains(a))
    }

    /// `self \ other`.
    pub fn difference(&self, other: &ParticleConfig) -> ParticleConfig {
        ParticleConfig(self.iter().filter(|&a| !other.contains(a)).collect())
    }

    /// Inserts each point of `xs` in order, each through the avoiding shift of
    /// the set built so far.
    pub fn noncolliding_union(&self, xs: &[u64]) -> Self {
        let mut out = self.clone();
        out.0.reserve(xs.len());
        for &x in xs {
            let y = out.avoiding_shift(x);
            out.insert_free(y);
        }
        out
    }

    /// Comma-joined heights, the key format of jump tables and CSV output.
    pub fn key(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        parts.join(",")
    }
}

impl fmt::Display for ParticleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

impl FromStr for ParticleConfig {
    type Err = JepError;

    /// Parses `"1,4,7"`; the empty string is the empty set.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(ParticleConfig::empty());
        }
        let heights = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|e| JepError::Config(format!("bad height {p:?} in {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ParticleConfig::new(heights).map_err(|e| match e {
            JepError::Domain(m) => JepError::Config(m),
            other => other,
        })
    }
}

impl<'de> Deserialize<'de> for ParticleConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let heights = Vec::<u64>::deserialize(d)?;
        ParticleConfig::new(heights).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<&[u64]> for ParticleConfig {
    type Error = JepError;

    fn try_from(value: &[u64]) -> Result<Self> {
        ParticleConfig::new(value.to_vec())
    }
}

/// Shorthand for tests and examples: `pc(&[0, 2, 3])`. Panics on invalid input.
pub fn pc(heights: &[u64]) -> ParticleConfig {
    ParticleConfig::new(heights.to_vec()).expect("valid configuration literal")
}

/// All subsets of `[0, bound)` with at most `max_len` elements, smallest first.
pub fn subsets_up_to(bound: u64, max_len: usize) -> Vec<ParticleConfig> {
    let mut out = vec![ParticleConfig::empty()];
    let mut frontier = vec![ParticleConfig::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.highest().map_or(0, |m| m + 1);
            for y in start..bound {
                let mut s = set.clone();
                s.0.push(y);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal reading of the avoiding shift: smallest `m` with `|[0,m] \ A| >= x+1`.
    fn avoiding_shift_by_scan(a: &ParticleConfig, x: u64) -> u64 {
        (0..)
            .find(|&m| (0..=m).filter(|&s| !a.contains(s)).count() as u64 > x)
            .unwrap()
    }

    #[test]
    fn shift_down_examples() {
        assert_eq!(pc(&[1, 4, 7]).shift_down(1).unwrap(), pc(&[0, 3, 6]));
        assert_eq!(pc(&[3]).shift_down(3).unwrap(), pc(&[0]));
        assert!(pc(&[0, 2]).shift_down(1).is_err());
        assert_eq!(
            ParticleConfig::empty().shift_down(5).unwrap(),
            ParticleConfig::empty()
        );
    }

    #[test]
    fn delete_min_examples() {
        assert_eq!(pc(&[0, 2, 3]).delete_min().unwrap(), pc(&[2, 3]));
        assert_eq!(pc(&[5]).delete_min().unwrap(), ParticleConfig::empty());
        assert!(ParticleConfig::empty().delete_min().is_err());
    }

    #[test]
    fn count_below_examples() {
        assert_eq!(ParticleConfig::empty().count_below(7), 7);
        assert_eq!(pc(&[0, 2, 3]).count_below(5), 2);
        assert_eq!(pc(&[0, 2, 3]).count_below(4), 1);
        assert_eq!(pc(&[0, 2, 3]).count_below(0), 0);
    }

    #[test]
    fn avoiding_shift_examples() {
        let a = pc(&[0, 2, 3]);
        assert_eq!(a.avoiding_shift(0), 1);
        assert_eq!(a.avoiding_shift(1), 4);
        assert_eq!(a.avoiding_shift(2), 5);
        for x in 0..20 {
            assert_eq!(ParticleConfig::empty().avoiding_shift(x), x);
        }
        assert_eq!(pc(&[1]).avoiding_shift(0), 0);
        assert_eq!(pc(&[1]).avoiding_shift(1), 2);
    }

    #[test]
    fn avoiding_shift_matches_scan_definition() {
        for a in subsets_up_to(9, 4) {
            for x in 0..12 {
                assert_eq!(
                    a.avoiding_shift(x),
                    avoiding_shift_by_scan(&a, x),
                    "A={a} x={x}"
                );
            }
        }
    }

    #[test]
    fn noncolliding_union_examples() {
        let e = ParticleConfig::empty();
        assert_eq!(e.noncolliding_union(&[0, 0, 0]), pc(&[0, 1, 2]));
        assert_eq!(pc(&[0, 2, 3]).noncolliding_union(&[1]), pc(&[0, 2, 3, 4]));
        assert_eq!(e.noncolliding_union(&[5]), pc(&[5]));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ParticleConfig::new(vec![1, 1]).is_err());
        assert!(ParticleConfig::new(vec![3, 2]).is_err());
        assert_eq!(
            ParticleConfig::from_unsorted(vec![7, 1, 4]).unwrap(),
            pc(&[1, 4, 7])
        );
        assert!(ParticleConfig::from_unsorted(vec![2, 2]).is_err());
    }

    #[test]
    fn parse_and_key() {
        let a: ParticleConfig = "1, 4,7".parse().unwrap();
        assert_eq!(a, pc(&[1, 4, 7]));
        assert_eq!(a.key(), "1,4,7");
        assert_eq!(a.to_string(), "{1,4,7}");
        assert_eq!(
            "".parse::<ParticleConfig>().unwrap(),
            ParticleConfig::empty()
        );
        assert!("4,1".parse::<ParticleConfig>().is_err());
        assert!("x".parse::<ParticleConfig>().is_err());
    }

    #[test]
    fn serde_rejects_unsorted() {
        let a: ParticleConfig = serde_json::from_str("[0,2,3]").unwrap();
        assert_eq!(a, pc(&[0, 2, 3]));
        assert!(serde_json::from_str::<ParticleConfig>("[2,0]").is_err());
    }

    #[test]
    fn subsets_enumeration_counts() {
        // 1 + 5 + 10 subsets of [0,5) with at most two elements
        assert_eq!(subsets_up_to(5, 2).len(), 16);
    }
}
