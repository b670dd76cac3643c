//! Pairing permutations, their tower matrices and the index classification
//! that drives the degree bound.

mod classify;
mod momenta;
mod tower;

pub use classify::{classify, IndexClass, IndexClassification, LadderRun};
pub use momenta::{constraint_residual, resolve_tilde, MomentumAssignment, Momenta};
pub use tower::{inverse_identity_holds, tower_matrix, unimodularity_check, IntMatrix, Tower, TowerMatrix, UnimodularityOptions, UnimodularityReport};

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `{1..k}`, stored one-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let k = map.len();
        let mut seen = vec![false; k + 1];
        for &x in &map {
            if x == 0 || x > k {
                return Err(Error::InvalidPermutation(format!("value {x} outside 1..={k}")));
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidPermutation(format!("value {x} repeated")));
            }
        }
        Ok(Permutation { map })
    }

    pub fn identity(k: usize) -> Self {
        Permutation { map: (1..=k).collect() }
    }

    pub fn k(&self) -> usize {
        self.map.len()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(j, &x)| x == j + 1)
    }

    /// σ(j) for `j` in `1..=k`.
    pub fn at(&self, j: usize) -> usize {
        self.map[j - 1]
    }

    /// The extension σ̃ on `0..=k+1` with σ̃(0) = 0 and σ̃(k+1) = k+1.
    pub fn ext(&self, j: usize) -> usize {
        if j == 0 || j == self.k() + 1 {
            j
        } else {
            self.map[j - 1]
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.k()];
        for (j, &x) in self.map.iter().enumerate() {
            inv[x - 1] = j + 1;
        }
        Permutation { map: inv }
    }

    /// σ̃⁻¹ on `0..=k+1`.
    pub fn ext_inverse(&self, i: usize) -> usize {
        if i == 0 || i == self.k() + 1 {
            return i;
        }
        self.map.iter().position(|&x| x == i).map(|p| p + 1).expect("bijection")
    }

    pub fn values(&self) -> &[usize] {
        &self.map
    }

    /// Swap the images of `a` and `b`.
    pub fn swap_images(&mut self, a: usize, b: usize) {
        self.map.swap(a - 1, b - 1);
    }

    /// All of 𝔖_k in lexicographic order.
    pub fn all(k: usize) -> impl Iterator<Item = Permutation> {
        (1..=k)
            .permutations(k)
            .map(|map| Permutation { map })
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.map.iter().join(" "))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts "1 2 7 6", "1,2,7,6" or "(1,2,7,6)".
    fn from_str(s: &str) -> Result<Self> {
        let map = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidPermutation(format!("bad entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let p: Permutation = "1 2 7 6 5 3 4 8".parse().unwrap();
        assert_eq!(p.to_string(), "1 2 7 6 5 3 4 8");
        assert_eq!("(2,1)".parse::<Permutation>().unwrap().values(), &[2, 1]);
        assert!("1 1".parse::<Permutation>().is_err());
        assert!("0 1".parse::<Permutation>().is_err());
    }

    #[test]
    fn extension_and_inverse() {
        let p: Permutation = "3 1 2".parse().unwrap();
        assert_eq!(p.ext(0), 0);
        assert_eq!(p.ext(4), 4);
        assert_eq!(p.inverse().values(), &[2, 3, 1]);
        for i in 0..=4 {
            assert_eq!(p.ext(p.ext_inverse(i)), i);
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(Permutation::all(0).count(), 1);
        assert_eq!(Permutation::all(4).count(), 24);
        assert!(Permutation::all(3).next().unwrap().is_identity());
    }
}
