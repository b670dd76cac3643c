use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{sphere_area, RadialProfile};
use crate::quad::{integrate, integrate_breaks, integrate_to_infinity, QuadOptions};

/// [h](e) = (2e)^{d/2−1} ∫_{S^{d−1}} h(√(2e)φ) dφ for radial h.
pub fn coarea_bracket(h: impl Fn(f64) -> f64, e: f64, d: usize) -> f64 {
    if e < 0.0 {
        return 0.0;
    }
    (2.0 * e).powf(d as f64 / 2.0 - 1.0) * sphere_area(d - 1) * h((2.0 * e).sqrt())
}

/// ∫₀^∞ [h](e) de, which should equal ∫ h dv.
pub fn coarea_total(h: impl Fn(f64) -> f64, d: usize) -> Result<f64> {
    // e = s² keeps the (2e)^{d/2−1} factor smooth at the origin
    let opts = QuadOptions::tol(1e-14, 1e-11);
    Ok(integrate_to_infinity(|s: f64| 2.0 * s * coarea_bracket(&h, s * s, d), 0.0, &opts)?.value)
}

/// ∫ h dv in polar coordinates.
pub fn radial_total(h: impl Fn(f64) -> f64, d: usize) -> Result<f64> {
    let opts = QuadOptions::tol(1e-14, 1e-11);
    let area = sphere_area(d - 1);
    Ok(integrate_to_infinity(|r: f64| area * r.powi(d as i32 - 1) * h(r), 0.0, &opts)?.value)
}

/// Weight of the relative angle θ between incoming and outgoing directions,
/// |B̂(2r sin(θ/2))|² |S^{d−2}| sin^{d−2}θ, with r = √(2e).
fn angle_weight(profile: &RadialProfile, r: f64, d: usize, theta: f64) -> f64 {
    let chord = 2.0 * r * (0.5 * theta).sin();
    profile.sq(chord) * sphere_area(d - 2) * theta.sin().powi(d as i32 - 2)
}

fn angle_breaks(profile: &RadialProfile, r: f64) -> Vec<f64> {
    let mut pts = vec![0.0, PI];
    // the weight decays on the scale θ ~ width/r
    if let Some(reach) = profile.reach(1e-3) {
        let mut th = (reach / r).min(PI);
        while th > 1e-6 {
            pts.push(th);
            th *= 0.25;
        }
    }
    if let Some(c) = profile.cutoff {
        if c < 2.0 * r {
            pts.push(2.0 * (c / (2.0 * r)).asin());
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// (σ₀, σ₁): total cross section and its first angular moment on Σ_e.
pub fn sigma_moments(e: f64, profile: &RadialProfile, d: usize) -> Result<(f64, f64)> {
    if e <= 0.0 {
        return Err(Error::HypothesisViolated(format!("energy {e} must be positive")));
    }
    if d < 2 {
        return Err(Error::ConfigInvalid("collision kernel needs d ≥ 2".into()));
    }
    let r = (2.0 * e).sqrt();
    let jac = 2.0 * PI * (2.0 * e).powf(d as f64 / 2.0 - 1.0);
    let pts = angle_breaks(profile, r);
    let opts = QuadOptions::tol(1e-15, 1e-12);
    let s0 = integrate_breaks(|t: f64| angle_weight(profile, r, d, t), &pts, &opts)?;
    // σ₁ may vanish, so its tolerance is pinned to σ₀
    let opts1 = QuadOptions::tol(1e-12 * s0.value, 1e-12);
    let s1 = integrate_breaks(|t: f64| t.cos() * angle_weight(profile, r, d, t), &pts, &opts1)?;
    Ok((jac * s0.value, jac * s1.value))
}

/// A point on Σ_e: |p| = √(2e), velocity p/2π.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyShellState {
    pub e: f64,
    pub direction: Vec<f64>,
}

impl EnergyShellState {
    pub fn new(e: f64, direction: Vec<f64>) -> Self {
        let n = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        EnergyShellState { e, direction: direction.into_iter().map(|x| x / n).collect() }
    }

    pub fn momentum(&self) -> Vec<f64> {
        let r = (2.0 * self.e).sqrt();
        self.direction.iter().map(|x| r * x).collect()
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.momentum().into_iter().map(|p| p / (2.0 * PI)).collect()
    }
}

pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

#[derive(Clone, Debug)]
enum Method {
    /// Uniform proposal accepted with probability |B̂|²/sup|B̂|².
    Rejection { sup: f64 },
    /// Inverse CDF of the relative angle on a fixed θ grid.
    Table { theta: Vec<f64>, cdf: Vec<f64> },
}

/// Draws post-collision directions on one energy shell.
#[derive(Clone, Debug)]
pub struct DirectionSampler {
    profile: RadialProfile,
    d: usize,
    r: f64,
    method: Method,
    /// Expected acceptance of the uniform proposal.
    pub acceptance: f64,
}

const TABLE_POINTS: usize = 8192;
/// Below this acceptance the sampler switches to the angle table.
pub const MIN_ACCEPTANCE: f64 = 0.1;
const REJECTION_CAP: usize = 1_000_000;

impl DirectionSampler {
    pub fn new(e: f64, profile: &RadialProfile, d: usize) -> Result<Self> {
        let (s0, _) = sigma_moments(e, profile, d)?;
        if s0 <= 0.0 {
            return Err(Error::HypothesisViolated(format!("no collisions on the shell e = {e}")));
        }
        let r = (2.0 * e).sqrt();
        let sup = profile.sup().powi(2);
        let shell = 2.0 * PI * (2.0 * e).powf(d as f64 / 2.0 - 1.0) * sphere_area(d - 1);
        let acceptance = s0 / (shell * sup);
        let method = if acceptance >= MIN_ACCEPTANCE {
            Method::Rejection { sup }
        } else {
            let theta: Vec<f64> = (0..TABLE_POINTS).map(|i| PI * i as f64 / (TABLE_POINTS - 1) as f64).collect();
            let w: Vec<f64> = theta.iter().map(|&t| angle_weight(profile, r, d, t)).collect();
            let mut cdf = vec![0.0; TABLE_POINTS];
            for i in 1..TABLE_POINTS {
                cdf[i] = cdf[i - 1] + 0.5 * (w[i] + w[i - 1]) * (theta[i] - theta[i - 1]);
            }
            let total = cdf[TABLE_POINTS - 1];
            cdf.iter_mut().for_each(|c| *c /= total);
            Method::Table { theta, cdf }
        };
        Ok(DirectionSampler { profile: *profile, d, r, method, acceptance })
    }

    pub fn uses_table(&self) -> bool {
        matches!(self.method, Method::Table { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, from: &[f64], rng: &mut R) -> Vec<f64> {
        match &self.method {
            Method::Rejection { sup } => {
                for _ in 0..REJECTION_CAP {
                    let cand = uniform_direction(rng, self.d);
                    let dist2: f64 = cand.iter().zip(from).map(|(a, b)| (a - b).powi(2)).sum();
                    if rng.gen::<f64>() * sup < self.profile.sq(self.r * dist2.sqrt()) {
                        return cand;
                    }
                }
                unreachable!("acceptance {} is above {MIN_ACCEPTANCE}", self.acceptance)
            }
            Method::Table { theta, cdf } => {
                let u: f64 = rng.gen();
                let i = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
                let span = cdf[i] - cdf[i - 1];
                let frac = if span > 0.0 { (u - cdf[i - 1]) / span } else { 0.5 };
                let th = theta[i - 1] + frac * (theta[i] - theta[i - 1]);
                rotate_by(from, th, rng)
            }
        }
    }
}

/// A unit vector at angle θ from `from` with uniform azimuth.
fn rotate_by<R: Rng + ?Sized>(from: &[f64], theta: f64, rng: &mut R) -> Vec<f64> {
    let perp = loop {
        let g: Vec<f64> = from.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let dot: f64 = g.iter().zip(from).map(|(a, b)| a * b).sum();
        let p: Vec<f64> = g.iter().zip(from).map(|(a, b)| a - dot * b).collect();
        let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            break p.into_iter().map(|x| x / n).collect::<Vec<_>>();
        }
    };
    let (s, c) = theta.sin_cos();
    from.iter().zip(&perp).map(|(a, b)| c * a + s * b).collect()
}

/// ⟨cos θ⟩ for the Gaussian kernel exp(−|p|²) in d = 3: coth(4e) − 1/(4e).
pub fn gaussian_mean_cosine(e: f64) -> f64 {
    let x = 4.0 * e;
    if x < 1e-4 {
        return x / 3.0;
    }
    1.0 / x.tanh() - 1.0 / x
}

/// ∫ over S^{d−1} of a function of the polar angle, for tests and reports.
pub fn polar_average(f: impl Fn(f64) -> f64, d: usize) -> Result<f64> {
    let opts = QuadOptions::tol(1e-15, 1e-12);
    let w = |t: f64| f(t) * sphere_area(d - 2) * t.sin().powi(d as i32 - 2);
    Ok(integrate(w, 0.0, PI, &opts)?.value / sphere_area(d - 1))
}
