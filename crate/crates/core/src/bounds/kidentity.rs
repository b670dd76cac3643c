use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate_breaks, QuadOptions};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// exp[x_0, …, x_k] by the recursive divided-difference table. Fails when two
/// nodes are closer than `tol`.
pub fn divided_difference_exp(x: &[Complex64], tol: f64) -> Result<Complex64> {
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if (x[i] - x[j]).norm() < tol {
                return Err(Error::DegenerateFrequencies { i, j, tol });
            }
        }
    }
    let mut col: Vec<Complex64> = x.iter().map(|z| z.exp()).collect();
    for level in 1..x.len() {
        for i in (level..x.len()).rev() {
            col[i] = (col[i] - col[i - 1]) / (x[i] - x[i - level]);
        }
    }
    Ok(col[x.len() - 1])
}

type CMat = Vec<Vec<Complex64>>;

fn matmul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let mut c = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for l in i..n {
            let ail = a[i][l];
            if ail == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in l..n {
                c[i][j] += ail * b[l][j];
            }
        }
    }
    c
}

/// exp[x_0, …, x_k] as the top-right entry of exp of the bidiagonal matrix
/// with diagonal x and unit superdiagonal. Stable at confluent nodes.
pub fn divided_difference_exp_matrix(x: &[Complex64]) -> Complex64 {
    let n = x.len();
    let norm = x.iter().map(|z| z.norm()).fold(0.0, f64::max) + 1.0;
    let s = norm.log2().ceil().max(0.0) as i32 + 1;
    let scale = 0.5f64.powi(s);
    let mut a = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        a[i][i] = x[i] * scale;
        if i + 1 < n {
            a[i][i + 1] = Complex64::new(scale, 0.0);
        }
    }
    let mut e = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, row) in e.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    let mut term = e.clone();
    for m in 1..=24 {
        term = matmul(&term, &a);
        let inv = 1.0 / m as f64;
        for i in 0..n {
            for j in i..n {
                term[i][j] *= inv;
                e[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        e = matmul(&e, &e);
    }
    e[0][n - 1]
}

fn phases(omegas: &[Complex64], t: f64) -> Vec<Complex64> {
    omegas.iter().map(|w| -I * t * w).collect()
}

/// ∫ over s_1+…+s_{k+1} = t of Π e^{−i s_j ω_j}, computed as t^k·exp[−itω].
/// Well separated nodes use the divided-difference table, the rest the
/// matrix exponential.
pub fn simplex_integral(omegas: &[Complex64], t: f64) -> Complex64 {
    let k = omegas.len() - 1;
    let x = phases(omegas, t);
    let dd = match k {
        0 => Ok(x[0].exp()),
        1 | 2 => divided_difference_exp(&x, 1e-3),
        _ => divided_difference_exp(&x, 1e-1),
    };
    dd.unwrap_or_else(|_| divided_difference_exp_matrix(&x)) * t.powi(k as i32)
}

/// Same integral by nested Gauss–Legendre quadrature over the simplex.
pub fn simplex_integral_nested(omegas: &[Complex64], t: f64, nodes: usize) -> Complex64 {
    let rule = gauss_legendre(nodes);
    nested(omegas, t, &rule)
}

fn nested(omegas: &[Complex64], t: f64, rule: &(Vec<f64>, Vec<f64>)) -> Complex64 {
    let w0 = omegas[0];
    if omegas.len() == 1 {
        return (-I * t * w0).exp();
    }
    let span = t * omegas.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let panels = (span / 20.0).ceil().max(1.0) as usize;
    let h = t / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let s = c + r * x;
            acc += (-I * s * w0).exp() * nested(&omegas[1..], t - s, rule) * (w * r);
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct KIdentityOptions {
    /// Node gap below which the divided-difference oracle is abandoned.
    pub confluence_tol: f64,
    /// Fail with `DegenerateFrequencies` instead of switching oracle.
    pub strict: bool,
    /// Order of the asymptotic subtraction on the contour side.
    pub subtraction_order: usize,
    pub abs_tol: f64,
}

impl Default for KIdentityOptions {
    fn default() -> Self {
        KIdentityOptions { confluence_tol: 1e-6, strict: false, subtraction_order: 8, abs_tol: 1e-11 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct KIdentityReport {
    pub k: usize,
    pub t: f64,
    pub eta: f64,
    /// Time-simplex side.
    pub lhs: Complex64,
    /// Contour side exactly as displayed, (i e^{ηt}/2π)∫ e^{−iαt} Π (α−ω_j+iη)^{−1} dα.
    pub rhs: Complex64,
    /// |lhs − i^k·rhs|
    pub residual: f64,
    /// |lhs − rhs|, nonzero by the phase i^k when k is not a multiple of 4.
    pub residual_literal: f64,
    pub modulus_residual: f64,
    pub quadrature_error: f64,
    pub confluent: bool,
    pub cutoff: f64,
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Complete homogeneous symmetric polynomials h_0..=h_m of `w`.
fn complete_homogeneous(w: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); m + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for &wj in w {
        for n in 1..=m {
            let prev = h[n - 1];
            h[n] += wj * prev;
        }
    }
    h
}

/// ∫_ℝ e^{−iαt} Π (α − z_j)^{−1} dα with every z_j in the open lower half plane.
///
/// Subtracts the expansion Σ h_N(z − a)/(α − a)^{k+1+N} around a point `a`
/// in the upper half plane; each subtracted term integrates to zero for
/// t > 0, and the remainder decays fast enough to truncate.
pub fn contour_integral(z: &[Complex64], t: f64, order: usize, abs_tol: f64) -> Result<(Complex64, f64, f64)> {
    if t <= 0.0 {
        return Err(Error::ConfigInvalid(format!("contour side needs t > 0, got {t}")));
    }
    if let Some(bad) = z.iter().find(|z| z.im >= 0.0) {
        return Err(Error::HypothesisViolated(format!("pole {bad} not below the real axis")));
    }
    let k = z.len() - 1;
    let zmax = z.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let a = Complex64::new(0.0, 1.0 + 2.0 * zmax);
    let w: Vec<Complex64> = z.iter().map(|zj| zj - a).collect();
    let wmax = w.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let h = complete_homogeneous(&w, order);
    let f = |alpha: f64| -> Complex64 {
        let x = Complex64::new(alpha, 0.0);
        let exact = z.iter().fold(Complex64::new(1.0, 0.0), |acc, zj| acc / (x - zj));
        let r = 1.0 / (x - a);
        let mut pow = r.powi(k as i32 + 1);
        let mut series = Complex64::new(0.0, 0.0);
        for hn in &h {
            series += hn * pow;
            pow *= r;
        }
        (-I * alpha * t).exp() * (exact - series)
    };
    // Tail: |remainder| ≤ 4·C(M+1+k, k)·W^{M+1}/|α|^{k+2+M} for |α| ≥ 2W.
    let p = (k + 1 + order) as f64;
    let c = 8.0 * binomial(order + 1 + k, k) * wmax.powi(order as i32 + 1) / p;
    let cutoff = (c / (0.1 * abs_tol)).powf(1.0 / p).max(2.0 * wmax).max(zmax + 10.0);

    let mut pts = Vec::new();
    let panel = (PI / t).min(1.0);
    let n = (2.0 * cutoff / panel).ceil() as usize;
    pts.extend((0..=n).map(|i| -cutoff + 2.0 * cutoff * i as f64 / n as f64));
    for zj in z {
        let width = -zj.im;
        let mut step = width;
        while step < 4.0 {
            pts.extend([zj.re - step, zj.re + step]);
            step *= 4.0;
        }
        pts.push(zj.re);
    }
    pts.retain(|x| x.abs() <= cutoff);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let opts = QuadOptions { abs_tol, rel_tol: 1e-13, max_intervals: 8 * pts.len() + 4000 };
    let est = integrate_breaks(f, &pts, &opts)?;
    Ok((est.value, est.error, cutoff))
}

fn closest_pair(w: &[Complex64], tol: f64) -> Option<(usize, usize)> {
    (0..w.len()).flat_map(|i| (i + 1..w.len()).map(move |j| (i, j))).find(|&(i, j)| (w[i] - w[j]).norm() < tol)
}

/// Compares the time-simplex integral with its contour representation.
pub fn k_identity_check(omegas: &[Complex64], t: f64, eta: f64, opts: &KIdentityOptions) -> Result<KIdentityReport> {
    if omegas.is_empty() {
        return Err(Error::ConfigInvalid("no frequencies".into()));
    }
    if eta <= 0.0 {
        return Err(Error::HypothesisViolated(format!("η = {eta} must be positive")));
    }
    if let Some(w) = omegas.iter().find(|w| w.im > 0.0) {
        return Err(Error::HypothesisViolated(format!("Im ω = {} > 0", w.im)));
    }
    let k = omegas.len() - 1;
    let x = phases(omegas, t);
    let tk = t.powi(k as i32);
    let (lhs, confluent) = match closest_pair(omegas, opts.confluence_tol) {
        None => (divided_difference_exp(&x, 0.0)? * tk, false),
        Some((i, j)) if opts.strict => {
            return Err(Error::DegenerateFrequencies { i, j, tol: opts.confluence_tol })
        }
        Some(_) => (simplex_integral_nested(omegas, t, 48), true),
    };
    let z: Vec<Complex64> = omegas.iter().map(|w| w - I * eta).collect();
    let (integral, err, cutoff) = contour_integral(&z, t, opts.subtraction_order, opts.abs_tol)?;
    let pre = I * (eta * t).exp() / (2.0 * PI);
    let rhs = pre * integral;
    let phase = I.powi(k as i32);
    Ok(KIdentityReport {
        k,
        t,
        eta,
        lhs,
        rhs,
        residual: (lhs - phase * rhs).norm(),
        residual_literal: (lhs - rhs).norm(),
        modulus_residual: (lhs.norm() - rhs.norm()).abs(),
        quadrature_error: pre.norm() * err,
        confluent,
        cutoff,
    })
}
