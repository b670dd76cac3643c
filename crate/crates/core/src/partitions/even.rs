use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::Serialize;

use super::Partition;
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// A lump of left labels `i` and right labels `ĩ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EvenLump {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// A partition of I_k ∪ Ĩ_k with as many left as right labels in each lump.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EvenPartition {
    k: usize,
    lumps: Vec<EvenLump>,
}

fn check_cover(k: usize, labels: impl Iterator<Item = usize>, side: &str) -> Result<()> {
    let mut seen = vec![false; k + 1];
    for x in labels {
        if x == 0 || x > k || std::mem::replace(&mut seen[x], true) {
            return Err(Error::InvalidPartition(format!("{side} label {x} invalid or repeated")));
        }
    }
    if seen[1..].iter().any(|s| !s) {
        return Err(Error::InvalidPartition(format!("{side} labels do not cover 1..={k}")));
    }
    Ok(())
}

impl EvenPartition {
    pub fn new(k: usize, mut lumps: Vec<EvenLump>) -> Result<Self> {
        check_cover(k, lumps.iter().flat_map(|l| l.left.iter().copied()), "left")?;
        check_cover(k, lumps.iter().flat_map(|l| l.right.iter().copied()), "right")?;
        for l in &mut lumps {
            l.left.sort_unstable();
            l.right.sort_unstable();
        }
        lumps.retain(|l| !(l.left.is_empty() && l.right.is_empty()));
        lumps.sort_by_key(|l| (l.left.first().copied().unwrap_or(usize::MAX), l.right.first().copied()));
        for (idx, l) in lumps.iter().enumerate() {
            if l.left.len() != l.right.len() {
                return Err(Error::NotEven { lump: idx, left: l.left.len(), right: l.right.len() });
            }
        }
        Ok(EvenPartition { k, lumps })
    }

    /// P(A, σ) = { A_μ ∪ σ(A_μ)~ }.
    pub fn from_pairing(a: &Partition, sigma: &Permutation) -> Self {
        assert_eq!(a.k(), sigma.k());
        let lumps = a
            .lumps()
            .iter()
            .map(|l| EvenLump { left: l.clone(), right: l.iter().map(|&i| sigma.at(i)).collect() })
            .collect();
        EvenPartition::new(a.k(), lumps).expect("pairing partitions are even")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lumps(&self) -> &[EvenLump] {
        &self.lumps
    }

    /// π(P): the partition of left labels.
    pub fn projection(&self) -> Partition {
        Partition::new(self.k, self.lumps.iter().map(|l| l.left.clone()).collect()).expect("left labels cover")
    }

    pub fn count_compatible(&self) -> u64 {
        self.lumps.iter().map(|l| (1..=l.left.len() as u64).product::<u64>()).product()
    }

    pub fn is_compatible(&self, sigma: &Permutation) -> bool {
        self.lumps.iter().all(|l| l.left.iter().all(|&i| l.right.contains(&sigma.at(i))))
    }

    /// The compatible permutation pairing each lump's left labels with its
    /// right labels in increasing order; lexicographically smallest.
    pub fn smallest_compatible(&self) -> Permutation {
        let mut map = vec![0; self.k];
        for l in &self.lumps {
            for (&i, &r) in l.left.iter().zip(&l.right) {
                map[i - 1] = r;
            }
        }
        Permutation::new(map).expect("lump bijections form a permutation")
    }
}

impl fmt::Display for EvenPartition {
    /// "[[1,2,~1,~3],[3,~2]]"
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .lumps
            .iter()
            .map(|l| {
                let mut items = l.left.iter().map(|i| i.to_string()).chain(l.right.iter().map(|i| format!("~{i}")));
                format!("[{}]", items.join(","))
            })
            .join(",");
        write!(f, "[{body}]")
    }
}

impl FromStr for EvenPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPartition(format!("cannot parse even partition {s:?}"));
        let inner = s.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(bad)?;
        let mut lumps = Vec::new();
        for chunk in inner.split(']').map(|c| c.trim_start_matches(',').trim()).filter(|c| !c.is_empty()) {
            let body = chunk.strip_prefix('[').ok_or_else(bad)?;
            let mut lump = EvenLump { left: vec![], right: vec![] };
            for tok in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                match tok.strip_prefix('~') {
                    Some(r) => lump.right.push(r.parse().map_err(|_| bad())?),
                    None => lump.left.push(tok.parse().map_err(|_| bad())?),
                }
            }
            lumps.push(lump);
        }
        let k = lumps.iter().map(|l| l.left.len()).sum();
        EvenPartition::new(k, lumps)
    }
}

/// All σ with (i, σ(i)~) in a common lump, and their number Π (|P_μ|/2)!.
pub fn compatible_permutations(p: &EvenPartition) -> (Vec<Permutation>, u64) {
    let per_lump: Vec<Vec<Vec<(usize, usize)>>> = p
        .lumps
        .iter()
        .map(|l| {
            l.right
                .iter()
                .copied()
                .permutations(l.right.len())
                .map(|img| l.left.iter().copied().zip(img).collect())
                .collect()
        })
        .collect();
    let perms: Vec<Permutation> = per_lump
        .into_iter()
        .multi_cartesian_product()
        .map(|choice| {
            let mut map = vec![0; p.k];
            for (i, r) in choice.into_iter().flatten() {
                map[i - 1] = r;
            }
            Permutation::new(map).expect("bijection")
        })
        .collect();
    let perms = if p.k == 0 { vec![Permutation::identity(0)] } else { perms };
    (perms, p.count_compatible())
}
