use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{classify, Permutation};

pub const EXHAUSTIVE_K_MAX: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderCount {
    pub k: usize,
    pub l: usize,
    pub count: u64,
    /// 2(2k)^{k−ℓ}
    pub bound: f64,
}

impl LadderCount {
    pub fn within_bound(&self) -> bool {
        self.count as f64 <= self.bound
    }
}

fn budget(k: usize) -> Result<()> {
    if k > EXHAUSTIVE_K_MAX {
        return Err(Error::BudgetExceeded {
            what: "exhaustive permutation order",
            requested: k as u64,
            cap: EXHAUSTIVE_K_MAX as u64,
        });
    }
    Ok(())
}

/// Number of σ ∈ 𝔖_k with exactly ℓ ladder indices, for ℓ = 0..=k.
pub fn count_by_ladder(k: usize) -> Result<Vec<LadderCount>> {
    budget(k)?;
    let mut counts = vec![0u64; k + 1];
    for sigma in Permutation::all(k) {
        counts[classify(&sigma).l()] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(l, count)| LadderCount { k, l, count, bound: 2.0 * ((2 * k) as f64).powi((k - l) as i32) })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegreeSum {
    pub exact: f64,
    /// 2 Σ_{m=D}^{k} (2kλ^γ)^m
    pub bound: f64,
}

/// Σ_{deg σ ≥ D} λ^{γ deg σ} over 𝔖_k, with the geometric bound from the
/// ladder counts.
pub fn degree_sum(k: usize, gamma: f64, lambda: f64, min_degree: usize) -> Result<DegreeSum> {
    budget(k)?;
    let ratio = 2.0 * k as f64 * lambda.powf(gamma);
    if ratio >= 1.0 {
        return Err(Error::DivergentBound { ratio });
    }
    let mut exact = 0.0;
    for sigma in Permutation::all(k) {
        let deg = classify(&sigma).degree;
        if deg >= min_degree {
            exact += lambda.powf(gamma * deg as f64);
        }
    }
    let bound = 2.0 * (min_degree..=k).map(|m| ratio.powi(m as i32)).sum::<f64>();
    Ok(DegreeSum { exact, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_and_k3() {
        let c = count_by_ladder(2).unwrap();
        assert_eq!(c.iter().map(|x| x.count).collect::<Vec<_>>(), vec![1, 0, 1]);
        let c = count_by_ladder(3).unwrap();
        assert_eq!(c.iter().map(|x| x.count).sum::<u64>(), 6);
        assert_eq!(c[2].count, 0);
        assert_eq!(c[3].count, 1);
    }

    #[test]
    fn degree_sums() {
        assert_eq!(degree_sum(3, 1.0, 0.1, 4).unwrap().exact, 0.0);
        let s = degree_sum(4, 1.0, 0.1, 2).unwrap();
        assert!(s.exact > 0.0 && s.exact <= s.bound);
        assert!(matches!(degree_sum(4, 1.0, 0.2, 2), Err(Error::DivergentBound { .. })));
    }
}
