//! Self-energy Θ(α), the renormalised dispersion ω(p) and checks on
//! propagator integrals.

pub mod appendix;
pub mod lemma;
pub mod params;
pub mod table;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{sphere_area, RadialProfile, Shape};
use crate::quad::{gauss_legendre, integrate_breaks, integrate_to_infinity, QuadOptions};

pub use appendix::{appendix_integrals, triple_norm, AppendixInput, AppendixReport};
pub use lemma::{lemma33_check, lemma_lhs, LemmaCase, LemmaContext, LemmaEntry, LemmaReport};
pub use params::{omega, PropagatorParams};
pub use table::ThetaTable;

/// Θ_ε(α), or the boundary value when `epsilon == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyValue {
    pub alpha: f64,
    pub value: Complex64,
    pub epsilon: f64,
    /// Quadrature error estimate on `value`.
    pub error: f64,
}

fn angular_opts() -> QuadOptions {
    QuadOptions::tol(1e-15, 1e-12)
}

pub(crate) fn theta_opts() -> QuadOptions {
    QuadOptions::tol(1e-13, 1e-11)
}

/// A(u, q) = ∫_{S^{d−1}} |f(uφ − q)|² dφ with |q| = q.
pub fn shell_average(profile: &RadialProfile, u: f64, q: f64, d: usize) -> Result<f64> {
    if let Some(v) = shell_average_closed(profile, u, q, d) {
        return Ok(v);
    }
    shell_average_polar(profile, u, q, d)
}

fn shell_average_closed(profile: &RadialProfile, u: f64, q: f64, d: usize) -> Option<f64> {
    match (profile.shape, profile.cutoff) {
        (Shape::Constant { value }, None) => Some(value * value * sphere_area(d - 1)),
        (Shape::Constant { value }, Some(c)) if d == 3 => {
            if u * q == 0.0 {
                let r = u.max(q);
                return Some(if r <= c { value * value * 4.0 * PI } else { 0.0 });
            }
            let cmin = ((u * u + q * q - c * c) / (2.0 * u * q)).clamp(-1.0, 1.0);
            Some(value * value * 2.0 * PI * (1.0 - cmin))
        }
        (Shape::Gaussian { amplitude, width }, None) if d == 3 => {
            let w2 = width * width;
            let x = 4.0 * u * q / w2;
            let factor = if x == 0.0 { 1.0 } else { -(-x).exp_m1() / x };
            Some(4.0 * PI * amplitude * amplitude * (-(u - q).powi(2) / w2).exp() * factor)
        }
        _ => None,
    }
}

/// Polar-angle quadrature of `shell_average`, valid in any d ≥ 2.
pub fn shell_average_polar(profile: &RadialProfile, u: f64, q: f64, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::ConfigInvalid(format!("dimension {d} < 2")));
    }
    let uq = u * q;
    let lateral = sphere_area(d - 2);
    let radius = |th: f64| ((u - q).powi(2) + 4.0 * uq * (0.5 * th).sin().powi(2)).max(0.0).sqrt();
    let g = |th: f64| profile.sq(radius(th)) * th.sin().powi(d as i32 - 2) * lateral;
    let mut pts = vec![0.0, PI];
    let scale = 1.0 / (uq + 1.0).sqrt();
    pts.extend([1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|j| j * scale).filter(|&t| t < PI));
    if let Some(c) = profile.cutoff {
        let rhs = c * c - (u - q).powi(2);
        if rhs > 0.0 && rhs < 4.0 * uq {
            pts.push(2.0 * (rhs / (4.0 * uq)).sqrt().asin());
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(integrate_breaks(g, &pts, &angular_opts())?.value)
}

/// S(e) = ∫_{S^{d−1}} |B̂(√(2e)(φ_r − φ))|² dφ
pub fn angular_s(e: f64, profile: &RadialProfile, d: usize) -> Result<f64> {
    let r = (2.0 * e.max(0.0)).sqrt();
    shell_average(profile, r, r, d)
}

/// `angular_s` by polar quadrature only, bypassing closed forms.
pub fn angular_s_polar(e: f64, profile: &RadialProfile, d: usize) -> Result<f64> {
    let r = (2.0 * e.max(0.0)).sqrt();
    shell_average_polar(profile, r, r, d)
}

/// `angular_s` in d = 3 by a product rule over the whole sphere, with φ_r
/// tilted off the pole so no symmetry is used.
pub fn angular_s_cubature(e: f64, profile: &RadialProfile, nodes: usize) -> Result<f64> {
    let tilt: f64 = 0.7;
    let axis = [tilt.sin(), 0.0, tilt.cos()];
    let k = (2.0 * e.max(0.0)).sqrt();
    let rule = gauss_legendre(nodes);
    let m = 2 * nodes;
    let dphi = 2.0 * PI / m as f64;
    let mut total = 0.0;
    for (&c, &w) in rule.0.iter().zip(&rule.1) {
        let s = (1.0 - c * c).sqrt();
        let mut ring = 0.0;
        for j in 0..m {
            let phi = j as f64 * dphi;
            let p = [s * phi.cos(), s * phi.sin(), c];
            let dist2: f64 = axis.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum();
            ring += profile.sq(k * dist2.sqrt());
        }
        total += w * ring * dphi;
    }
    if !total.is_finite() {
        return Err(Error::QuadratureFailure { estimate: total, error: f64::INFINITY });
    }
    Ok(total)
}

/// Plain Monte Carlo estimate of `angular_s`: (mean, standard error).
pub fn angular_s_monte_carlo(e: f64, profile: &RadialProfile, d: usize, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = (2.0 * e.max(0.0)).sqrt();
    let area = sphere_area(d - 1);
    let (mut sum, mut sum2) = (0.0, 0.0);
    let mut x = vec![0.0; d];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = StandardNormal.sample(&mut rng);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        // φ_r = e_1
        let dist2: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| (v / norm - if i == 0 { 1.0 } else { 0.0 }).powi(2))
            .sum();
        let v = area * profile.sq(k * dist2.sqrt());
        sum += v;
        sum2 += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// f(e) = (2e)^{d/2−1} S(e), the co-area density of |B̂|² on the shell e(p) = e.
pub fn shell_density(e: f64, profile: &RadialProfile, d: usize) -> Result<f64> {
    if e <= 0.0 {
        return Ok(if d == 2 { angular_s(0.0, profile, d)? } else { 0.0 });
    }
    Ok((2.0 * e).powf(d as f64 / 2.0 - 1.0) * angular_s(e, profile, d)?)
}

fn pole_breaks(s0: f64, w: f64, s1: f64) -> Vec<f64> {
    let mut pts = vec![0.0, s1];
    if s0 > 0.0 && s0 < s1 {
        pts.push(s0);
    }
    let mut h = if w > 0.0 { w } else { s1 * 1e-9 };
    while h < s1 {
        pts.extend([s0 - h, s0 + h].into_iter().filter(|&p| p > 0.0 && p < s1));
        h *= 10.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Θ_ε(α) = ∫₀^∞ f(e) de / (α − e + iε); for ε = 0 the boundary value with
/// Im Θ = −π f(α) and the real part as a principal value.
pub fn theta(alpha: f64, epsilon: f64, profile: &RadialProfile, d: usize) -> Result<SelfEnergyValue> {
    theta_with(alpha, epsilon, profile, d, &theta_opts())
}

pub fn theta_with(
    alpha: f64,
    epsilon: f64,
    profile: &RadialProfile,
    d: usize,
    opts: &QuadOptions,
) -> Result<SelfEnergyValue> {
    if epsilon < 0.0 || !epsilon.is_finite() || !alpha.is_finite() {
        return Err(Error::ConfigInvalid(format!("need finite α and ε ≥ 0, got α={alpha}, ε={epsilon}")));
    }
    let reach = profile
        .reach(1e-16)
        .ok_or_else(|| Error::HypothesisViolated("profile without decay or cutoff: Θ diverges".into()))?;
    if d < 3 && epsilon == 0.0 && alpha <= 0.0 {
        return Err(Error::HypothesisViolated(format!("Θ(α ≤ 0) diverges in d = {d}")));
    }
    let f = |e: f64| shell_density(e, profile, d).unwrap_or(f64::NAN);
    let e1 = 2.0 * alpha.max(0.0) + 4.0 * reach * reach + 1.0;
    let s1 = e1.sqrt();
    let s0 = alpha.max(0.0).sqrt();

    if epsilon > 0.0 {
        let w = if s0 > 0.0 { epsilon / (2.0 * s0) } else { epsilon.sqrt() };
        let pts = pole_breaks(s0, w, s1);
        let g = |s: f64| {
            let e = s * s;
            Complex64::new(f(e) * 2.0 * s, 0.0) / Complex64::new(alpha - e, epsilon)
        };
        let head = integrate_breaks(g, &pts, opts)?;
        let tail = integrate_to_infinity(|e: f64| Complex64::new(f(e), 0.0) / Complex64::new(alpha - e, epsilon), e1, opts)?;
        return Ok(SelfEnergyValue {
            alpha,
            value: head.value + tail.value,
            epsilon,
            error: head.error + tail.error,
        });
    }

    let tail = integrate_to_infinity(|e: f64| f(e) / (alpha - e), e1, opts)?;
    if alpha <= 0.0 {
        let g = |s: f64| f(s * s) * 2.0 * s / (alpha - s * s);
        let pts = pole_breaks(0.0, 1e-3, s1);
        let head = integrate_breaks(g, &pts, opts)?;
        return Ok(SelfEnergyValue {
            alpha,
            value: Complex64::new(head.value + tail.value, 0.0),
            epsilon,
            error: head.error + tail.error,
        });
    }
    let fa = f(alpha);
    let s2 = (2.0 * alpha).sqrt();
    // Symmetric subtraction on [0, 2α]; the subtracted PV integral vanishes.
    let sub = |s: f64| {
        let e = s * s;
        if e == alpha {
            0.0
        } else {
            (f(e) - fa) / (alpha - e) * 2.0 * s
        }
    };
    let near = integrate_breaks(sub, &[0.0, s0, s2], opts)?;
    let mid = integrate_breaks(|s: f64| f(s * s) * 2.0 * s / (alpha - s * s), &[s2, s2.max(s1)], opts)?;
    Ok(SelfEnergyValue {
        alpha,
        value: Complex64::new(near.value + mid.value + tail.value, -PI * fa),
        epsilon,
        error: near.error + mid.error + tail.error,
    })
}
