//! Set partitions of collision labels, Ursell coefficients, even partitions
//! and the counting lemmas for the sum over pairings.

mod counting;
mod even;
mod flip;
mod lumps;
mod ursell;

pub use counting::{count_by_ladder, degree_sum, DegreeSum, LadderCount};
pub use even::{compatible_permutations, EvenLump, EvenPartition};
pub use flip::{greedy_flip, internal_ladder_indices, joint_degree, FlipOutcome};
pub use lumps::{break_lump, break_to_singletons, AuxMomentaLedger, BreakRecord};
pub use ursell::{ursell, ursell_closed_form, UrsellMode};

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_PARTITION_CAP: usize = 10;

/// A partition of `{1..k}` into nonempty lumps, kept in canonical order:
/// each lump sorted, lumps ordered by smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    k: usize,
    lumps: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(k: usize, mut lumps: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; k + 1];
        for lump in &mut lumps {
            if lump.is_empty() {
                return Err(Error::InvalidPartition("empty lump".into()));
            }
            lump.sort_unstable();
            for &x in lump.iter() {
                if x == 0 || x > k || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidPartition(format!("label {x} invalid or repeated")));
                }
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::InvalidPartition(format!("lumps do not cover 1..={k}")));
        }
        lumps.sort_unstable_by_key(|l| l[0]);
        Ok(Partition { k, lumps })
    }

    /// Every label in its own lump.
    pub fn trivial(k: usize) -> Self {
        Partition { k, lumps: (1..=k).map(|i| vec![i]).collect() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lumps(&self) -> &[Vec<usize>] {
        &self.lumps
    }

    pub fn num_lumps(&self) -> usize {
        self.lumps.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.lumps.iter().all(|l| l.len() == 1)
    }

    /// S(A): union of the nontrivial lumps.
    pub fn nontrivial_support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.lumps.iter().filter(|l| l.len() > 1).flatten().copied().collect();
        s.sort_unstable();
        s
    }

    /// s(A) = |S(A)|
    pub fn s(&self) -> usize {
        self.lumps.iter().filter(|l| l.len() > 1).map(Vec::len).sum()
    }

    pub fn lump_of(&self, i: usize) -> usize {
        self.lumps.iter().position(|l| l.contains(&i)).expect("label in partition")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}]",
            self.lumps.iter().map(|l| format!("[{}]", l.iter().join(","))).join(",")
        )
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses "[[1,3],[2]]".
    fn from_str(s: &str) -> Result<Self> {
        let lumps: Vec<Vec<usize>> = serde_json::from_str(s)
            .map_err(|e| Error::InvalidPartition(format!("{s:?}: {e}")))?;
        let k = lumps.iter().map(Vec::len).sum();
        Partition::new(k, lumps)
    }
}

/// Restricted-growth-string enumeration of all partitions of `{1..k}`.
pub struct Partitions {
    k: usize,
    rgs: Vec<usize>,
    done: bool,
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let blocks = self.rgs.iter().max().map_or(0, |m| m + 1);
        let mut lumps = vec![Vec::new(); blocks];
        for (i, &b) in self.rgs.iter().enumerate() {
            lumps[b].push(i + 1);
        }
        let out = Partition { k: self.k, lumps };

        // advance: rightmost position that can still grow
        self.done = true;
        for i in (1..self.k).rev() {
            let max_prefix = self.rgs[..i].iter().max().copied().unwrap_or(0);
            if self.rgs[i] <= max_prefix {
                self.rgs[i] += 1;
                for x in &mut self.rgs[i + 1..] {
                    *x = 0;
                }
                self.done = false;
                break;
            }
        }
        Some(out)
    }
}

pub fn enumerate_partitions(k: usize, cap: usize) -> Result<Partitions> {
    if k > cap {
        return Err(Error::BudgetExceeded { what: "partition ground set", requested: k as u64, cap: cap as u64 });
    }
    Ok(Partitions { k, rgs: vec![0; k], done: false })
}

/// Bell numbers by the triangle recursion.
pub fn bell(k: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..k {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}
