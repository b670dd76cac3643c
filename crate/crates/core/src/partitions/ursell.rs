use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const URSELL_BRUTE_FORCE_MAX: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UrsellMode {
    /// Poisson point process: only singletons survive.
    Continuum,
    /// Signed count of connected spanning subgraphs of K_n.
    Lattice,
}

impl std::str::FromStr for UrsellMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuum" => Ok(UrsellMode::Continuum),
            "lattice" => Ok(UrsellMode::Lattice),
            _ => Err(Error::ConfigInvalid(format!("unknown ursell mode {s:?}"))),
        }
    }
}

/// (−1)^{n−1}(n−1)!
pub fn ursell_closed_form(n: usize) -> i64 {
    assert!(n >= 1);
    let f: i64 = (1..n as i64).product();
    if n % 2 == 1 {
        f
    } else {
        -f
    }
}

pub fn ursell(n: usize, mode: UrsellMode) -> Result<i64> {
    match (mode, n) {
        (_, 0) => Err(Error::ConfigInvalid("ursell coefficient needs n >= 1".into())),
        (_, 1) => Ok(1),
        (UrsellMode::Continuum, _) => Ok(0),
        (UrsellMode::Lattice, n) if n > URSELL_BRUTE_FORCE_MAX => Err(Error::BudgetExceeded {
            what: "ursell subgraph enumeration order",
            requested: n as u64,
            cap: URSELL_BRUTE_FORCE_MAX as u64,
        }),
        (UrsellMode::Lattice, n) => Ok(connected_subgraph_sum(n)),
    }
}

/// Σ over connected spanning subgraphs Γ ⊂ K_n of (−1)^{|Γ|}.
///
/// Edge subsets are visited in Gray-code order so each step toggles one edge
/// of the adjacency bitmasks; connectivity is a bitmask flood fill.
fn connected_subgraph_sum(n: usize) -> i64 {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let m = edges.len();
    let mut adj = vec![0u32; n];
    let mut size = 0usize;
    let full = (1u32 << n) - 1;
    let connected = |adj: &[u32]| {
        let mut seen = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let mut next = 0;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= adj[v];
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen == full
    };
    let mut total = 0i64;
    for step in 0u64..(1u64 << m) {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            let (a, b) = edges[bit];
            adj[a] ^= 1 << b;
            adj[b] ^= 1 << a;
            if adj[a] & (1 << b) != 0 {
                size += 1;
            } else {
                size -= 1;
            }
        }
        if connected(&adj) {
            total += if size % 2 == 0 { 1 } else { -1 };
        }
    }
    total
}
