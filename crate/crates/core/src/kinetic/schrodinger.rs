use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::task_rng;
use super::wigner::WaveFunction;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;

/// μ = Σ v_γ δ_{y_γ} on the torus [−L/2, L/2)^d with Rademacher weights.
#[derive(Clone, Debug, Serialize)]
pub struct PoissonPotential {
    pub length: f64,
    pub d: usize,
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub profile: RadialProfile,
    pub seed: u64,
}

impl PoissonPotential {
    pub fn count(&self) -> usize {
        self.centers.len()
    }

    /// V on the grid of `like`, from V̂(p) = B̂(p) Σ v_γ e^{−2πip·y_γ}.
    pub fn on_grid(&self, like: &WaveFunction) -> Result<Vec<f64>> {
        if like.d != self.d || (like.length - self.length).abs() > 1e-12 * self.length {
            return Err(Error::ConfigInvalid("potential and wave function live on different boxes".into()));
        }
        let (n, d) = (like.n, like.d);
        let total = n.pow(d as u32);
        let mut spec = vec![Complex64::new(0.0, 0.0); total];
        if self.centers.is_empty() {
            return Ok(vec![0.0; total]);
        }
        let mut p = vec![0.0; d];
        for (idx, slot) in spec.iter_mut().enumerate() {
            freq_into(idx, n, d, self.length, &mut p);
            let b = self.profile.eval(p.iter().map(|x| x * x).sum::<f64>().sqrt());
            if b == 0.0 {
                continue;
            }
            let s: Complex64 = self
                .centers
                .iter()
                .zip(&self.weights)
                .map(|(y, &w)| Complex64::from_polar(w, -2.0 * PI * p.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()))
                .sum();
            // grid offset −L/2 contributes (−1)^{Σm}
            let odd = digits(idx, n, d).iter().map(|&k| freq_index(k, n)).sum::<i64>().rem_euclid(2) == 1;
            *slot = s * if odd { -b } else { b };
        }
        // V(x_j) = L^{−d} Σ_p V̂(p) e^{2πip·x_j}
        let mut grid = FftGrid::new(n, d);
        grid.inverse(&mut spec);
        let scale = self.length.powi(-(d as i32));
        Ok(spec.iter().map(|c| c.re * scale).collect())
    }
}

fn digits(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; d];
    for a in (0..d).rev() {
        out[a] = idx % n;
        idx /= n;
    }
    out
}

/// Signed frequency index of FFT slot k.
fn freq_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn freq_into(idx: usize, n: usize, d: usize, length: f64, out: &mut [f64]) {
    for (a, k) in digits(idx, n, d).into_iter().enumerate() {
        out[a] = freq_index(k, n) as f64 / length;
    }
}

pub fn sample_poisson_potential(length: f64, d: usize, profile: &RadialProfile, seed: u64) -> Result<PoissonPotential> {
    if length <= 0.0 {
        return Err(Error::ConfigInvalid(format!("box length {length} must be positive")));
    }
    let mut rng = task_rng(seed, 0);
    let mean = length.powi(d as i32);
    let m = Poisson::new(mean).map_err(|e| Error::ConfigInvalid(e.to_string()))?.sample(&mut rng) as usize;
    let centers = (0..m)
        .map(|_| (0..d).map(|_| rng.gen_range(-0.5 * length..0.5 * length)).collect())
        .collect();
    let weights = (0..m).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    Ok(PoissonPotential { length, d, centers, weights, profile: *profile, seed })
}

/// In-place d-dimensional FFT by passes along each axis.
struct FftGrid {
    n: usize,
    d: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    line: Vec<Complex64>,
}

impl FftGrid {
    fn new(n: usize, d: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftGrid {
            n,
            d,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            line: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn run(&mut self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        let fft = if forward { self.forward.clone() } else { self.inverse.clone() };
        for axis in 0..self.d {
            let stride = n.pow((self.d - 1 - axis) as u32);
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    for (i, slot) in self.line.iter_mut().enumerate() {
                        *slot = data[start + i * stride];
                    }
                    fft.process(&mut self.line);
                    for (i, v) in self.line.iter().enumerate() {
                        data[start + i * stride] = *v;
                    }
                }
            }
        }
    }

    fn forward(&mut self, data: &mut [Complex64]) {
        self.run(data, true)
    }

    fn inverse(&mut self, data: &mut [Complex64]) {
        self.run(data, false)
    }
}

/// Strang splitting for i∂_tψ = (−Δ/(8π²) + λV)ψ on the periodic grid.
pub struct SplitStep {
    n: usize,
    d: usize,
    dt: f64,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    fft: FftGrid,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CflLimits {
    /// dt·λ‖V‖∞
    pub potential_phase: f64,
    /// dt·max e(p)
    pub kinetic_phase: f64,
}

pub const MAX_POTENTIAL_PHASE: f64 = 1.0;
pub const MAX_KINETIC_PHASE: f64 = PI;

impl SplitStep {
    pub fn new(like: &WaveFunction, potential: &[f64], lambda: f64, dt: f64) -> Result<Self> {
        let (n, d) = (like.n, like.d);
        let limits = Self::limits(like, potential, lambda, dt);
        if limits.potential_phase > MAX_POTENTIAL_PHASE {
            return Err(Error::CflViolation(format!(
                "dt·λ‖V‖∞ = {:.3} > {MAX_POTENTIAL_PHASE}",
                limits.potential_phase
            )));
        }
        if limits.kinetic_phase > MAX_KINETIC_PHASE {
            return Err(Error::CflViolation(format!("dt·max e(p) = {:.3} > π", limits.kinetic_phase)));
        }
        let half_potential = potential.iter().map(|&v| Complex64::from_polar(1.0, -0.5 * dt * lambda * v)).collect();
        let mut p = vec![0.0; d];
        let total = n.pow(d as u32);
        let inv = 1.0 / total as f64;
        let kinetic = (0..total)
            .map(|idx| {
                freq_into(idx, n, d, like.length, &mut p);
                let e = 0.5 * p.iter().map(|x| x * x).sum::<f64>();
                // folds in the 1/N^d of the unnormalised inverse transform
                Complex64::from_polar(inv, -dt * e)
            })
            .collect();
        Ok(SplitStep { n, d, dt, half_potential, kinetic, fft: FftGrid::new(n, d) })
    }

    pub fn limits(like: &WaveFunction, potential: &[f64], lambda: f64, dt: f64) -> CflLimits {
        let vmax = potential.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let pmax = like.n as f64 / (2.0 * like.length);
        CflLimits { potential_phase: dt * lambda.abs() * vmax, kinetic_phase: dt * 0.5 * like.d as f64 * pmax * pmax }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&mut self, psi: &mut WaveFunction) {
        debug_assert_eq!((psi.n, psi.d), (self.n, self.d));
        psi.values.iter_mut().zip(&self.half_potential).for_each(|(a, b)| *a *= b);
        self.fft.forward(&mut psi.values);
        psi.values.iter_mut().zip(&self.kinetic).for_each(|(a, b)| *a *= b);
        self.fft.inverse(&mut psi.values);
        psi.values.iter_mut().zip(&self.half_potential).for_each(|(a, b)| *a *= b);
    }
}

/// Evolves to time t with the largest step ≤ dt that divides t.
pub fn evolve_splitstep(
    psi0: &WaveFunction,
    potential: Option<&PoissonPotential>,
    lambda: f64,
    t: f64,
    dt: f64,
) -> Result<WaveFunction> {
    let v = match potential {
        Some(p) => p.on_grid(psi0)?,
        None => vec![0.0; psi0.len()],
    };
    evolve_on_grid(psi0, &v, lambda, t, dt)
}

pub fn evolve_on_grid(psi0: &WaveFunction, v: &[f64], lambda: f64, t: f64, dt: f64) -> Result<WaveFunction> {
    if t < 0.0 || dt <= 0.0 {
        return Err(Error::ConfigInvalid(format!("need t ≥ 0 and dt > 0, got t = {t}, dt = {dt}")));
    }
    let steps = (t / dt).ceil().max(1.0) as usize;
    let mut ss = SplitStep::new(psi0, v, lambda, t / steps as f64)?;
    let mut psi = psi0.clone();
    if t > 0.0 {
        (0..steps).for_each(|_| ss.step(&mut psi));
    }
    Ok(psi)
}

/// exp(−itp²/2) applied exactly in Fourier space.
pub fn free_propagator(psi0: &WaveFunction, t: f64) -> WaveFunction {
    let mut psi = psi0.clone();
    let mut fft = FftGrid::new(psi.n, psi.d);
    let total = psi.len();
    let mut p = vec![0.0; psi.d];
    fft.forward(&mut psi.values);
    for (idx, a) in psi.values.iter_mut().enumerate() {
        freq_into(idx, psi0.n, psi0.d, psi0.length, &mut p);
        *a *= Complex64::from_polar(1.0 / total as f64, -0.5 * t * p.iter().map(|x| x * x).sum::<f64>());
    }
    fft.inverse(&mut psi.values);
    psi
}

#[derive(Clone, Debug, Serialize)]
pub struct MsdSeries {
    pub times: Vec<f64>,
    /// ⟨ψ_t, |x|²ψ_t⟩ − ⟨ψ₀, |x|²ψ₀⟩
    pub msd: Vec<f64>,
    pub norm_drift: f64,
}

impl MsdSeries {
    /// Δlog MSD/Δlog t between consecutive positive times.
    pub fn local_slopes(&self) -> Vec<f64> {
        self.times
            .windows(2)
            .zip(self.msd.windows(2))
            .filter(|(t, m)| t[0] > 0.0 && m[0] > 0.0 && m[1] > 0.0)
            .map(|(t, m)| (m[1] / m[0]).ln() / (t[1] / t[0]).ln())
            .collect()
    }

    /// Largest local slope; the a-priori envelope allows growth up to t⁴.
    pub fn max_slope(&self) -> f64 {
        self.local_slopes().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// MSD at increasing times along one evolution.
pub fn msd_series(psi0: &WaveFunction, v: &[f64], lambda: f64, times: &[f64], dt: f64) -> Result<MsdSeries> {
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::ConfigInvalid("times must be non-negative and increasing".into()));
    }
    let m0 = psi0.second_moment();
    let n0 = psi0.norm_sq();
    let mut psi = psi0.clone();
    let mut now = 0.0;
    let mut msd = Vec::with_capacity(times.len());
    let mut drift = 0.0f64;
    for &t in times {
        if t > now {
            psi = evolve_on_grid(&psi, v, lambda, t - now, dt)?;
            now = t;
        }
        msd.push(psi.second_moment() - m0);
        drift = drift.max((psi.norm_sq() - n0).abs());
    }
    Ok(MsdSeries { times: times.to_vec(), msd, norm_drift: drift })
}

/// Average MSD over independent potential realisations with seeds (seed, i).
pub fn ensemble_msd(
    psi0: &WaveFunction,
    profile: &RadialProfile,
    lambda: f64,
    times: &[f64],
    dt: f64,
    realisations: usize,
    seed: u64,
) -> Result<MsdSeries> {
    use rayon::prelude::*;
    let runs: Vec<MsdSeries> = (0..realisations)
        .into_par_iter()
        .map(|i| {
            let s = task_rng(seed, i as u64).gen::<u64>();
            let pot = sample_poisson_potential(psi0.length, psi0.d, profile, s)?;
            msd_series(psi0, &pot.on_grid(psi0)?, lambda, times, dt)
        })
        .collect::<Result<_>>()?;
    let k = runs.len().max(1) as f64;
    let msd = (0..times.len()).map(|j| runs.iter().map(|r| r.msd[j]).sum::<f64>() / k).collect();
    let norm_drift = runs.iter().map(|r| r.norm_drift).fold(0.0, f64::max);
    Ok(MsdSeries { times: times.to_vec(), msd, norm_drift })
}
