use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Permutation;
use crate::error::{Error, Result};

/// Dense square integer matrix, one-based accessors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, entries: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 1..=n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        IntMatrix { n, entries: rows.concat() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.entries[(i - 1) * self.n + (j - 1)] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.entries[(i - 1) * self.n..i * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n.max(1)).map(<[i64]>::to_vec).take(self.n).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = IntMatrix::zeros(n);
        for i in 1..=n {
            for j in 1..=n {
                let s = (1..=n).map(|l| self.get(i, l) * other.get(l, j)).sum();
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (1..=self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a as f64 * b).sum())
            .collect()
    }

    /// Exact determinant of the submatrix on the given one-based rows and columns.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> i64 {
        let m = rows.len();
        let mut a: Vec<Vec<i128>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j) as i128).collect())
            .collect();
        bareiss(&mut a, m) as i64
    }
}

// Fraction-free elimination; exact for integer input.
fn bareiss(a: &mut [Vec<i128>], m: usize) -> i128 {
    if m == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..m - 1 {
        if a[k][k] == 0 {
            match (k + 1..m).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..m {
            for j in k + 1..m {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[m - 1][m - 1]
}

/// Extent of the nonzero run in one column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Tower {
    pub top: usize,
    pub bottom: usize,
    pub sign: i8,
}

impl Tower {
    pub fn height(&self) -> usize {
        self.bottom + 1 - self.top
    }

    pub fn contains(&self, row: usize) -> bool {
        (self.top..=self.bottom).contains(&row)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerMatrix {
    pub matrix: IntMatrix,
    /// `towers[j - 1]` describes column `j`.
    pub towers: Vec<Tower>,
}

impl TowerMatrix {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.matrix.get(i, j)
    }

    pub fn tower(&self, j: usize) -> Tower {
        self.towers[j - 1]
    }

    /// b(j)
    pub fn bottom(&self, j: usize) -> usize {
        self.towers[j - 1].bottom
    }

    /// t(j)
    pub fn top(&self, j: usize) -> usize {
        self.towers[j - 1].top
    }

    /// True when every column is a single run of identical nonzero entries
    /// and the recorded towers match the entries.
    pub fn is_tower_matrix(&self) -> bool {
        let n = self.n();
        (1..=n).all(|j| {
            let t = self.tower(j);
            (1..=n).all(|i| {
                let want = if t.contains(i) { t.sign as i64 } else { 0 };
                self.get(i, j) == want
            })
        })
    }
}

pub fn tower_matrix(sigma: &Permutation) -> TowerMatrix {
    let n = sigma.k() + 1;
    let mut matrix = IntMatrix::zeros(n);
    let mut towers = Vec::with_capacity(n);
    for j in 1..=n {
        let (lo, hi) = (sigma.ext(j - 1), sigma.ext(j));
        let (top, bottom, sign) = if lo < hi { (lo + 1, hi, 1) } else { (hi + 1, lo, -1) };
        for i in top..=bottom {
            matrix.set(i, j, sign as i64);
        }
        towers.push(Tower { top, bottom, sign });
    }
    TowerMatrix { matrix, towers }
}

#[derive(Clone, Debug)]
pub struct UnimodularityOptions {
    pub max_order: usize,
    /// Maximum number of subdeterminants evaluated exhaustively.
    pub budget: u64,
    /// Random submatrices drawn when the exhaustive count exceeds the budget.
    pub samples: u64,
    pub seed: u64,
    /// Refuse to sample and fail instead.
    pub strict: bool,
}

impl Default for UnimodularityOptions {
    fn default() -> Self {
        UnimodularityOptions {
            max_order: usize::MAX,
            budget: 10_000_000,
            samples: 100_000,
            seed: 0,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnimodularityReport {
    pub order: usize,
    pub checked: u64,
    pub sampled: bool,
    pub violations: Vec<Violation>,
}

impl UnimodularityReport {
    pub fn totally_unimodular(&self) -> bool {
        self.violations.is_empty()
    }
}

fn binomial(n: usize, r: usize) -> u64 {
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Checks every square subdeterminant up to `max_order` lies in {-1, 0, 1}.
pub fn unimodularity_check(m: &IntMatrix, opts: &UnimodularityOptions) -> Result<UnimodularityReport> {
    let n = m.n();
    let order = opts.max_order.min(n);
    let total: u64 = (1..=order)
        .map(|r| binomial(n, r).saturating_pow(2))
        .fold(0u64, u64::saturating_add);
    let mut violations = Vec::new();
    let mut record = |rows: &[usize], cols: &[usize]| {
        let det = m.minor(rows, cols);
        if det.abs() > 1 {
            violations.push(Violation { rows: rows.to_vec(), cols: cols.to_vec(), det });
        }
    };

    if total <= opts.budget {
        for r in 1..=order {
            for rows in (1..=n).combinations(r) {
                for cols in (1..=n).combinations(r) {
                    record(&rows, &cols);
                }
            }
        }
        return Ok(UnimodularityReport { order, checked: total, sampled: false, violations });
    }
    if opts.strict {
        return Err(Error::BudgetExceeded {
            what: "subdeterminants",
            requested: total,
            cap: opts.budget,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for s in 0..opts.samples {
        let r = 1 + (s as usize % order);
        let mut rows: Vec<usize> = sample(&mut rng, n, r).into_iter().map(|x| x + 1).collect();
        let mut cols: Vec<usize> = sample(&mut rng, n, r).into_iter().map(|x| x + 1).collect();
        rows.sort_unstable();
        cols.sort_unstable();
        record(&rows, &cols);
    }
    Ok(UnimodularityReport { order, checked: opts.samples, sampled: true, violations })
}

/// M(σ)·M(σ⁻¹) = I
pub fn inverse_identity_holds(sigma: &Permutation) -> bool {
    let m = tower_matrix(sigma).matrix;
    let minv = tower_matrix(&sigma.inverse()).matrix;
    m.mul(&minv) == IntMatrix::identity(m.n())
}
