use serde::Serialize;

use super::{tower_matrix, Permutation};
use crate::error::{Error, Result};

/// A list of `len` momenta in `d` dimensions, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Momenta {
    d: usize,
    data: Vec<f64>,
}

impl Momenta {
    pub fn zeros(len: usize, d: usize) -> Self {
        Momenta { d, data: vec![0.0; len * d] }
    }

    pub fn from_vecs(d: usize, vecs: &[Vec<f64>]) -> Self {
        assert!(vecs.iter().all(|v| v.len() == d));
        Momenta { d, data: vecs.concat() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        if self.d == 0 {
            0
        } else {
            self.data.len() / self.d
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Zero-based access.
    pub fn get(&self, j: usize) -> &[f64] {
        &self.data[j * self.d..(j + 1) * self.d]
    }

    pub fn get_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.d..(j + 1) * self.d]
    }

    pub fn sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.d];
        for j in 0..self.len() {
            for (a, b) in s.iter_mut().zip(self.get(j)) {
                *a += b;
            }
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentumAssignment {
    /// p_1 .. p_{k+1}
    pub p: Momenta,
    /// u_1 .. u_k, summing to zero
    pub u: Momenta,
    pub xi: Vec<f64>,
}

impl MomentumAssignment {
    /// v_l = ξ + u_1 + … + u_{l-1}, for l = 1..=k+1.
    pub fn v(&self) -> Momenta {
        let n = self.p.len();
        let d = self.xi.len();
        let mut v = Momenta::zeros(n, d);
        let mut acc = self.xi.clone();
        for l in 0..n {
            v.get_mut(l).copy_from_slice(&acc);
            if l < self.u.len() {
                for (a, b) in acc.iter_mut().zip(self.u.get(l)) {
                    *a += b;
                }
            }
        }
        v
    }
}

/// p̃ = M(σ)p − M(σ)v, column by column in each spatial coordinate.
pub fn resolve_tilde(sigma: &Permutation, assign: &MomentumAssignment, tol: f64) -> Result<Momenta> {
    let k = sigma.k();
    let d = assign.xi.len();
    assert_eq!(assign.p.len(), k + 1);
    assert_eq!(assign.u.len(), k);
    let residual = assign.u.sum().iter().map(|x| x.abs()).fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::AuxiliarySumNonzero { residual });
    }
    let m = tower_matrix(sigma).matrix;
    let v = assign.v();
    let mut out = Momenta::zeros(k + 1, d);
    for c in 0..d {
        let diff: Vec<f64> = (0..=k).map(|j| assign.p.get(j)[c] - v.get(j)[c]).collect();
        for (i, val) in m.mul_vec(&diff).into_iter().enumerate() {
            out.get_mut(i)[c] = val;
        }
    }
    Ok(out)
}

/// Largest violation of the delta constraints
/// p̃_{k+1} = p_{k+1} − ξ and p_{l+1} − p_l − (p̃_{σ(l)+1} − p̃_{σ(l)}) − u_l = 0.
pub fn constraint_residual(sigma: &Permutation, assign: &MomentumAssignment, tilde: &Momenta) -> f64 {
    let k = sigma.k();
    let d = assign.xi.len();
    let mut worst: f64 = 0.0;
    for c in 0..d {
        worst = worst.max((tilde.get(k)[c] - assign.p.get(k)[c] + assign.xi[c]).abs());
    }
    for l in 1..=k {
        let s = sigma.at(l);
        for c in 0..d {
            let r = assign.p.get(l)[c] - assign.p.get(l - 1)[c]
                - (tilde.get(s)[c] - tilde.get(s - 1)[c])
                - assign.u.get(l - 1)[c];
            worst = worst.max(r.abs());
        }
    }
    worst
}
