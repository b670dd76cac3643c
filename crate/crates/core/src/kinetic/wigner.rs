use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

/// ψ on the periodic grid x_j = (j − N/2)h, j = 0..N in each axis, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    pub n: usize,
    pub d: usize,
    pub length: f64,
    pub values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn from_fn(n: usize, d: usize, length: f64, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::ConfigInvalid(format!("grid size {n} must be even and at least 4")));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::ConfigInvalid(format!("dimension {d} not in 1..=3")));
        }
        let mut psi = WaveFunction { n, d, length, values: vec![Complex64::new(0.0, 0.0); n.pow(d as u32)] };
        let mut x = vec![0.0; d];
        for idx in 0..psi.values.len() {
            psi.coords_into(idx, &mut x);
            psi.values[idx] = f(&x);
        }
        Ok(psi)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.spacing()
    }

    pub fn coords_into(&self, mut idx: usize, out: &mut [f64]) {
        for a in (0..self.d).rev() {
            out[a] = self.coord(idx % self.n);
            idx /= self.n;
        }
    }

    /// Σ h^d |ψ_j|²
    pub fn norm_sq(&self) -> f64 {
        self.spacing().powi(self.d as i32) * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn normalised(mut self) -> Self {
        let s = self.norm_sq().sqrt();
        self.values.iter_mut().for_each(|v| *v /= s);
        self
    }

    /// Σ h^d |x|² |ψ|², with coordinates taken in (−L/2, L/2].
    pub fn second_moment(&self) -> f64 {
        let mut x = vec![0.0; self.d];
        let hd = self.spacing().powi(self.d as i32);
        (0..self.len())
            .map(|i| {
                self.coords_into(i, &mut x);
                x.iter().map(|c| c * c).sum::<f64>() * self.values[i].norm_sqr()
            })
            .sum::<f64>()
            * hd
    }

    pub fn distance(&self, other: &WaveFunction) -> f64 {
        let hd = self.spacing().powi(self.d as i32);
        (hd * self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn add(&self, other: &WaveFunction) -> WaveFunction {
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += b);
        out
    }

    pub fn scale(&self, c: f64) -> WaveFunction {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|a| *a *= c);
        out
    }
}

/// 1D Fourier coefficients ψ̂_m = h Σ_j e^{−2πi m x_j/L} ψ_j for integer m in [−N/2, N/2).
pub fn fourier_1d(psi: &WaveFunction) -> Vec<(i64, Complex64)> {
    let n = psi.n;
    let h = psi.spacing();
    let mut buf = psi.values.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = (n / 2) as i64;
    (0..n)
        .map(|k| {
            let m = if (k as i64) < half { k as i64 } else { k as i64 - n as i64 };
            // x_j = (j − N/2)h shifts the phase by e^{iπm}
            let phase = if m.rem_euclid(2) == 0 { h } else { -h };
            (m, buf[k] * phase)
        })
        .collect()
}

/// ψ̂ at v = μ/(2L), by direct summation.
pub fn fourier_at(psi: &WaveFunction, v: f64) -> Complex64 {
    let h = psi.spacing();
    psi.values
        .iter()
        .enumerate()
        .map(|(j, &p)| p * Complex64::from_polar(h, -2.0 * PI * v * psi.coord(j)))
        .sum()
}

/// W(x_j, v_μ) for x_j in the central half-window and v_μ = μ/(2L), μ ∈ [−N/2, N/2).
#[derive(Clone, Debug, Serialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Row-major over (x, v).
    pub values: Vec<f64>,
    pub dx: f64,
    pub dv: f64,
    /// Largest imaginary part discarded.
    pub max_imag: f64,
    pub epsilon: f64,
}

impl WignerGrid {
    pub fn at(&self, i: usize, mu: usize) -> f64 {
        self.values[i * self.v.len() + mu]
    }

    /// ∫W dv at each x.
    pub fn position_marginal(&self) -> Vec<f64> {
        let nv = self.v.len();
        (0..self.x.len()).map(|i| self.values[i * nv..(i + 1) * nv].iter().sum::<f64>() * self.dv).collect()
    }

    /// ∫W dX at each v.
    pub fn velocity_marginal(&self) -> Vec<f64> {
        let nv = self.v.len();
        (0..nv).map(|mu| (0..self.x.len()).map(|i| self.at(i, mu)).sum::<f64>() * self.dx).collect()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx * self.dv
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Fraction of ‖ψ‖² allowed outside the central window or the resolved band.
pub const SUPPORT_TOL: f64 = 1e-20;

/// Rescaled Wigner transform ε^{−1}W(X/ε, v) of a 1D grid function.
pub fn wigner(psi: &WaveFunction, epsilon: f64) -> Result<WignerGrid> {
    if psi.d != 1 {
        return Err(Error::ConfigInvalid(format!("wigner grids are one-dimensional, got d = {}", psi.d)));
    }
    if epsilon <= 0.0 {
        return Err(Error::ConfigInvalid(format!("epsilon = {epsilon} must be positive")));
    }
    let n = psi.n;
    let h = psi.spacing();
    let l = psi.length;
    let total = psi.norm_sq();
    let outside: f64 = (0..n)
        .filter(|&j| psi.coord(j).abs() >= l / 4.0)
        .map(|j| h * psi.values[j].norm_sqr())
        .sum();
    if outside > SUPPORT_TOL * total {
        return Err(Error::GridTooCoarse(format!(
            "fraction {:.1e} of the mass lies outside |x| < L/4",
            outside / total
        )));
    }
    let band: f64 = fourier_1d(psi)
        .iter()
        .filter(|(m, _)| m.unsigned_abs() as usize >= n / 4)
        .map(|(_, c)| c.norm_sqr() / l)
        .sum();
    if band > SUPPORT_TOL * total {
        return Err(Error::GridTooCoarse(format!(
            "fraction {:.1e} of the mass lies above |p| = 1/(4h)",
            band / total
        )));
    }
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let half = n / 2;
    let window: Vec<usize> = (n / 4..3 * n / 4).collect();
    let mut values = Vec::with_capacity(window.len() * n);
    let mut max_imag = 0.0f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for &j in &window {
        // f_m = conj ψ_{j+m} ψ_{j−m}, m stored mod N
        for (k, slot) in buf.iter_mut().enumerate() {
            let m = k as i64;
            let a = (j as i64 + m).rem_euclid(n as i64) as usize;
            let b = (j as i64 - m).rem_euclid(n as i64) as usize;
            *slot = psi.values[a].conj() * psi.values[b];
        }
        fft.process(&mut buf);
        // μ runs over [−N/2, N/2); index k = μ mod N
        for mu in 0..n {
            let k = (mu + half) % n;
            let w = buf[k] * (2.0 * h);
            max_imag = max_imag.max(w.im.abs());
            values.push(w.re / epsilon);
        }
    }
    Ok(WignerGrid {
        x: window.iter().map(|&j| epsilon * psi.coord(j)).collect(),
        v: (0..n).map(|mu| (mu as f64 - half as f64) / (2.0 * l)).collect(),
        values,
        dx: epsilon * h,
        dv: 1.0 / (2.0 * l),
        max_imag: max_imag / epsilon,
        epsilon,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WignerIdentities {
    pub normalisation: f64,
    pub position_marginal: f64,
    pub velocity_marginal: f64,
    pub max_imag: f64,
}

impl WignerIdentities {
    pub fn worst(&self) -> f64 {
        self.normalisation.max(self.position_marginal).max(self.velocity_marginal)
    }
}

/// Errors of ∫∫W = ‖ψ‖², ∫W dv = ε^{−1}|ψ(X/ε)|² and ∫W dX = |ψ̂(v)|².
pub fn wigner_identities(psi: &WaveFunction, w: &WignerGrid) -> WignerIdentities {
    let eps = w.epsilon;
    let n = psi.n;
    let normalisation = (w.total() - psi.norm_sq()).abs();
    let pos = w.position_marginal();
    let position_marginal = (n / 4..3 * n / 4)
        .zip(&pos)
        .map(|(j, m)| (m - psi.values[j].norm_sqr() / eps).abs())
        .fold(0.0, f64::max);
    let vel = w.velocity_marginal();
    let velocity_marginal = w
        .v
        .iter()
        .zip(&vel)
        .map(|(&v, m)| (m - fourier_at(psi, v).norm_sqr()).abs())
        .fold(0.0, f64::max);
    WignerIdentities { normalisation, position_marginal, velocity_marginal, max_imag: w.max_imag }
}

/// Closed-form Wigner function of Σ c_k exp(−(x − x_k)²/(2s²)).
pub fn gaussian_sum_wigner(coeffs: &[(Complex64, f64)], s: f64, x: f64, v: f64) -> f64 {
    let mut w = Complex64::new(0.0, 0.0);
    for &(ck, xk) in coeffs {
        for &(cl, xl) in coeffs {
            let mid = 0.5 * (xk + xl);
            let amp = 2.0 * PI.sqrt() * s * (-(x - mid).powi(2) / (s * s) - 4.0 * PI * PI * v * v * s * s).exp();
            w += ck.conj() * cl * Complex64::from_polar(amp, 2.0 * PI * v * (xk - xl));
        }
    }
    w.re
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContinuityReport {
    /// |⟨Ô,Ŵ_ψ⟩ − ⟨Ô,Ŵ_ψ₁⟩|
    pub lhs: f64,
    /// 2(∫ sup_v|Ô| dξ) √((‖ψ₁‖² + ‖ψ₂‖²)‖ψ₂‖²)
    pub rhs: f64,
    pub ratio: f64,
    pub observable_norm: f64,
}

/// ⟨Ô,Ŵ_ψ⟩ = ∫∫ conj Ô(ξ,v) conj ψ̂(v−ξ/2) ψ̂(v+ξ/2) dξ dv on the grid of frequency pairs.
pub fn wigner_pairing(psi: &WaveFunction, obs: &impl Fn(f64, f64) -> Complex64) -> Complex64 {
    let l = psi.length;
    let coeffs = fourier_1d(psi);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(a, ca) in &coeffs {
        for &(b, cb) in &coeffs {
            let xi = (b - a) as f64 / l;
            let v = (a + b) as f64 / (2.0 * l);
            acc += obs(xi, v).conj() * ca.conj() * cb;
        }
    }
    acc / (l * l)
}

/// ∫ sup_v |Ô(ξ,v)| dξ with the sup taken over the grid velocities.
pub fn observable_norm(n: usize, l: f64, obs: &impl Fn(f64, f64) -> Complex64) -> f64 {
    let n = n as i64;
    (-n..n)
        .map(|k| {
            let xi = k as f64 / l;
            (-n..n).map(|m| obs(xi, m as f64 / (2.0 * l)).norm()).fold(0.0, f64::max)
        })
        .sum::<f64>()
        / l
}

pub fn wigner_continuity_check(
    psi1: &WaveFunction,
    psi2: &WaveFunction,
    obs: &impl Fn(f64, f64) -> Complex64,
) -> Result<ContinuityReport> {
    if psi1.n != psi2.n || psi1.d != 1 || psi2.d != 1 || psi1.length != psi2.length {
        return Err(Error::ConfigInvalid("continuity check needs two 1D states on the same grid".into()));
    }
    let psi = psi1.add(psi2);
    let lhs = (wigner_pairing(&psi, obs) - wigner_pairing(psi1, obs)).norm();
    let norm = observable_norm(psi1.n, psi1.length, obs);
    let (a, b) = (psi1.norm_sq(), psi2.norm_sq());
    let rhs = 2.0 * norm * ((a + b) * b).sqrt();
    Ok(ContinuityReport { lhs, rhs, ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 }, observable_norm: norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(n: usize, l: f64, s: f64, x0: f64, p0: f64) -> WaveFunction {
        WaveFunction::from_fn(n, 1, l, |x| {
            Complex64::from_polar((-(x[0] - x0).powi(2) / (2.0 * s * s)).exp(), 2.0 * PI * p0 * x[0])
        })
        .unwrap()
        .normalised()
    }

    #[test]
    fn fourier_matches_direct_sum() {
        let psi = gaussian(64, 16.0, 1.0, 0.7, 0.3);
        for (m, c) in fourier_1d(&psi) {
            let direct = fourier_at(&psi, m as f64 / psi.length);
            assert!((c - direct).norm() < 1e-12, "{m}");
        }
    }

    #[test]
    fn coherent_state_is_positive() {
        let psi = gaussian(256, 40.0, 1.0, 0.0, 0.3);
        let w = wigner(&psi, 1.0).unwrap();
        assert!(w.min() > -1e-12);
        assert!(w.max_imag < 1e-12);
        assert!(wigner_identities(&psi, &w).worst() < 1e-10);
    }

    #[test]
    fn wide_state_refused() {
        let psi = gaussian(128, 20.0, 3.0, 0.0, 0.0);
        assert!(matches!(wigner(&psi, 1.0), Err(Error::GridTooCoarse(_))));
    }
}
