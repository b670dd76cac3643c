use serde::Serialize;

use super::{EvenPartition, Partition};
use crate::perm::{classify, IndexClass, Permutation};

/// I*_ℓ: ladder indices whose σ̃⁻¹-neighbours on both sides are adjacent.
pub fn internal_ladder_indices(sigma: &Permutation) -> Vec<usize> {
    let c = classify(sigma);
    let inv = |i| sigma.ext_inverse(i);
    (1..=sigma.k())
        .filter(|&i| c.class(i) == IndexClass::Ladder)
        .filter(|&i| inv(i - 1).abs_diff(inv(i)) == 1 && inv(i + 1).abs_diff(inv(i)) == 1)
        .collect()
}

/// q(A, σ) = max{deg σ, s(A)/2}
pub fn joint_degree(a: &Partition, sigma: &Permutation) -> f64 {
    let deg = classify(sigma).degree as f64;
    deg.max(a.s() as f64 / 2.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct FlipOutcome {
    pub sigma: Permutation,
    pub start: Permutation,
    pub flips: usize,
    /// |I*_ℓ ∩ σ(S(A))| before each flip and at the end.
    pub protected_counts: Vec<usize>,
}

impl FlipOutcome {
    pub fn strictly_decreasing(&self) -> bool {
        self.protected_counts.windows(2).all(|w| w[1] < w[0])
    }
}

fn offending(sigma: &Permutation, in_support: &[bool]) -> Vec<usize> {
    internal_ladder_indices(sigma)
        .into_iter()
        .filter(|&i| in_support[sigma.ext_inverse(i)])
        .collect()
}

/// Start from the smallest compatible permutation and, while an internal
/// ladder index sits in a nontrivial lump, swap its preimage's image with that
/// of the smallest other lump-mate.
pub fn greedy_flip(p: &EvenPartition) -> FlipOutcome {
    let a = p.projection();
    let k = p.k();
    let mut in_support = vec![false; k + 2];
    for i in a.nontrivial_support() {
        in_support[i] = true;
    }
    let start = p.smallest_compatible();
    let mut sigma = start.clone();
    let mut counts = Vec::new();
    let cap = (1..=k).product::<usize>().max(1);
    loop {
        let bad = offending(&sigma, &in_support);
        counts.push(bad.len());
        let Some(&i) = bad.first() else { break };
        if counts.len() > cap {
            break;
        }
        let ip = sigma.ext_inverse(i);
        let lump = &a.lumps()[a.lump_of(ip)];
        let jp = *lump.iter().find(|&&j| j != ip).expect("nontrivial lump");
        sigma.swap_images(ip, jp);
    }
    FlipOutcome { flips: counts.len() - 1, sigma, start, protected_counts: counts }
}
