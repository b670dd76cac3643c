use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{theta_with, theta_opts};
use crate::error::{Error, Result};
use crate::profile::RadialProfile;

/// Θ(e) on a fixed energy grid, interpolated with 4-point Lagrange stencils.
#[derive(Clone, Debug)]
pub struct ThetaTable {
    meta: TableMeta,
    grid: Vec<f64>,
    values: Vec<Complex64>,
    errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub profile: RadialProfile,
    pub profile_hash: String,
    pub d: usize,
    pub points: usize,
    pub e_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

#[derive(Serialize, Deserialize)]
struct Row {
    alpha: f64,
    re: f64,
    im: f64,
    err: f64,
}

const LOG_FLOOR: f64 = 1e-6;

/// 0, then log-spaced up to 1, then linear up to `e_max`.
pub fn energy_grid(e_max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 8 && e_max > LOG_FLOOR);
    let logspace = |hi: f64, n: usize| {
        let (a, b) = (LOG_FLOOR.ln(), hi.ln());
        (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
    };
    let mut g = vec![0.0];
    if e_max <= 1.0 {
        g.extend(logspace(e_max, points - 1));
    } else {
        let n_log = points / 4;
        let n_lin = points - 1 - n_log;
        g.extend(logspace(1.0, n_log));
        g.extend((1..=n_lin).map(|i| 1.0 + (e_max - 1.0) * i as f64 / n_lin as f64));
    }
    g
}

impl ThetaTable {
    pub const DEFAULT_POINTS: usize = 2048;

    pub fn build(profile: &RadialProfile, d: usize, e_max: f64, points: usize) -> Result<Self> {
        let opts = theta_opts();
        let grid = energy_grid(e_max, points);
        let vals: Vec<_> = grid
            .par_iter()
            .map(|&e| theta_with(e, 0.0, profile, d, &opts))
            .collect::<Result<_>>()?;
        Ok(ThetaTable {
            meta: TableMeta {
                profile: *profile,
                profile_hash: profile.hash(),
                d,
                points,
                e_max,
                abs_tol: opts.abs_tol,
                rel_tol: opts.rel_tol,
            },
            values: vals.iter().map(|v| v.value).collect(),
            errors: vals.iter().map(|v| v.error).collect(),
            grid,
        })
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn e_max(&self) -> f64 {
        self.meta.e_max
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eval(&self, e: f64) -> Result<Complex64> {
        if !(0.0..=self.meta.e_max).contains(&e) {
            return Err(Error::OutOfTable { energy: e, max: self.meta.e_max });
        }
        let n = self.grid.len();
        let i = self.grid.partition_point(|&x| x <= e).clamp(2, n - 2) - 2;
        let xs = &self.grid[i..i + 4];
        let ys = &self.values[i..i + 4];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            let w: f64 = (0..4).filter(|&m| m != j).map(|m| (e - xs[m]) / (xs[j] - xs[m])).product();
            acc += ys[j] * w;
        }
        Ok(acc)
    }

    /// Writes `theta.csv` (alpha, re, im, err) and the `theta.json` sidecar.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::ConfigInvalid(format!("writing table: {e}"));
        fs::create_dir_all(dir).map_err(io)?;
        let mut w = csv::Writer::from_path(dir.join("theta.csv")).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        for ((&alpha, v), &err) in self.grid.iter().zip(&self.values).zip(&self.errors) {
            w.serialize(Row { alpha, re: v.re, im: v.im, err })
                .map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        }
        w.flush().map_err(io)?;
        let json = serde_json::to_string_pretty(&self.meta).expect("meta serialises");
        fs::write(dir.join("theta.json"), json).map_err(io)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let bad = |e: String| Error::ConfigInvalid(format!("reading table: {e}"));
        let meta: TableMeta = serde_json::from_str(&fs::read_to_string(dir.join("theta.json")).map_err(|e| bad(e.to_string()))?)
            .map_err(|e| bad(e.to_string()))?;
        let mut r = csv::Reader::from_path(dir.join("theta.csv")).map_err(|e| bad(e.to_string()))?;
        let rows: Vec<Row> = r.deserialize().collect::<std::result::Result<_, _>>().map_err(|e| bad(e.to_string()))?;
        if rows.len() < 4 {
            return Err(bad("fewer than 4 rows".into()));
        }
        Ok(ThetaTable {
            grid: rows.iter().map(|r| r.alpha).collect(),
            values: rows.iter().map(|r| Complex64::new(r.re, r.im)).collect(),
            errors: rows.iter().map(|r| r.err).collect(),
            meta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::self_energy::theta;

    #[test]
    fn grid_shape() {
        let g = energy_grid(50.0, 2048);
        assert_eq!(g.len(), 2048);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*g.last().unwrap(), 50.0);
    }

    #[test]
    fn interpolation_matches_direct() {
        let p = RadialProfile::default_potential();
        let t = ThetaTable::build(&p, 3, 8.0, ThetaTable::DEFAULT_POINTS).unwrap();
        for e in [0.013, 0.4, 1.7, 5.3] {
            let a = t.eval(e).unwrap();
            let b = theta(e, 0.0, &p, 3).unwrap().value;
            assert!((a - b).norm() < 1e-6 * b.norm(), "e={e}: {a} vs {b}");
        }
        assert!(matches!(t.eval(9.0), Err(Error::OutOfTable { .. })));
    }

    #[test]
    fn roundtrip() {
        let p = RadialProfile::default_potential();
        let t = ThetaTable::build(&p, 3, 2.0, 64).unwrap();
        let dir = tempfile::tempdir().unwrap();
        t.save(dir.path()).unwrap();
        let u = ThetaTable::load(dir.path()).unwrap();
        assert_eq!(u.meta(), t.meta());
        assert_eq!(u.eval(0.77).unwrap(), t.eval(0.77).unwrap());
    }
}
