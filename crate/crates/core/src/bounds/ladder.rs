use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::kidentity::simplex_integral;
use crate::error::{Error, Result};
use crate::profile::{RadialProfile, Shape};
use crate::quad::{gauss_legendre, integrate_breaks, QuadOptions};
use crate::self_energy::{omega, shell_average, PropagatorParams, ThetaTable};

const REACH_TOL: f64 = 1e-14;

/// Profiles, parameters and a Θ table covering every energy the ladder
/// quadratures touch. Three dimensions only.
#[derive(Clone, Debug)]
pub struct LadderSetup {
    pub params: PropagatorParams,
    pub potential: RadialProfile,
    pub initial: RadialProfile,
    table: ThetaTable,
    r_init: f64,
    r_pot: f64,
}

impl LadderSetup {
    pub const D: usize = 3;

    pub fn new(params: PropagatorParams, potential: RadialProfile, initial: RadialProfile) -> Result<Self> {
        let r_pot = potential
            .reach(REACH_TOL)
            .ok_or_else(|| Error::HypothesisViolated("potential profile does not decay".into()))?;
        let r_init = initial
            .reach(REACH_TOL)
            .ok_or_else(|| Error::HypothesisViolated("initial profile does not decay".into()))?;
        let u_max = r_init + 2.0 * r_pot;
        let table = ThetaTable::build(&potential, Self::D, 0.5 * u_max * u_max + 1.0, 4096)?;
        Ok(LadderSetup { params, potential, initial, table, r_init, r_pot })
    }

    pub fn defaults(params: PropagatorParams) -> Result<Self> {
        Self::new(params, RadialProfile::default_potential(), RadialProfile::default_initial(Self::D))
    }

    pub fn table(&self) -> &ThetaTable {
        &self.table
    }

    fn omega(&self, u: f64) -> Complex64 {
        omega(u, &self.params, &self.table).expect("radii stay inside the table")
    }

    /// Γ(p) = 2λ²|Im Θ(e(p))|
    pub fn collision_rate(&self, u: f64) -> f64 {
        -2.0 * self.omega(u).im
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LadderValue {
    pub t: f64,
    pub k: usize,
    pub value: Complex64,
    pub error: f64,
}

fn breaks_around(centre: f64, widths: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for w in widths {
        let mut h = w.max(1e-9);
        while h < hi - lo {
            pts.extend([centre - h, centre + h]);
            h *= 4.0;
        }
    }
    pts.push(centre);
    pts.retain(|&x| x >= lo && x <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn inner_opts(k: usize) -> QuadOptions {
    if k >= 2 {
        QuadOptions::tol(1e-10, 1e-6)
    } else {
        QuadOptions::tol(1e-12, 1e-8)
    }
}

/// Resonance breakpoints for |S_t|² in the next radius given the current one.
fn resonance_breaks(setup: &LadderSetup, u: f64, t: f64, lo: f64, hi: f64) -> Vec<f64> {
    let gamma = setup.collision_rate(u).max(1e-12);
    let de = (1.0 / t.max(1e-12)).min(1.0);
    let scale = u.max(0.1);
    breaks_around(u, &[gamma / scale, de / scale], lo, hi)
}

/// λ^{2k} ∫ dp |ψ̂₀(p₁)|² Π|B̂(p_{j+1}−p_j)|² |S_t(ω(p₁), …, ω(p_{k+1}))|²,
/// the σ = id term after the contour integrals are undone.
pub fn ladder_value(t: f64, k: usize, setup: &LadderSetup) -> Result<LadderValue> {
    if k >= 3 {
        return Err(Error::BudgetExceeded { what: "ladder order", requested: k as u64, cap: 2 });
    }
    if t < 0.0 {
        return Err(Error::ConfigInvalid(format!("t = {t} must be non-negative")));
    }
    let lam2 = setup.params.lambda.powi(2);
    let psi2 = |u: f64| setup.initial.sq(u);
    let outer = QuadOptions::tol(1e-13, if k == 0 { 1e-11 } else { 1e-6 });
    let mut pts1 = breaks_around(0.0, &[], 0.0, setup.r_init);
    pts1.extend((1..8).map(|i| setup.r_init * i as f64 / 8.0));
    pts1.sort_by(f64::total_cmp);

    let est = match k {
        0 => integrate_breaks(
            |u: f64| {
                let w = setup.omega(u);
                4.0 * PI * u * u * psi2(u) * (2.0 * t * w.im).exp()
            },
            &pts1,
            &outer,
        )?,
        1 => {
            let inner = |u1: f64| -> f64 {
                let w1 = setup.omega(u1);
                let pts = resonance_breaks(setup, u1, t, 0.0, u1 + setup.r_pot);
                integrate_breaks(
                    |u2: f64| {
                        let s = simplex_integral(&[w1, setup.omega(u2)], t);
                        u2 * u2 * shell_average(&setup.potential, u2, u1, 3).unwrap_or(f64::NAN) * s.norm_sqr()
                    },
                    &pts,
                    &inner_opts(k),
                )
                .map_or(f64::NAN, |e| e.value)
            };
            integrate_breaks(|u1: f64| 4.0 * PI * lam2 * u1 * u1 * psi2(u1) * inner(u1), &pts1, &outer)?
        }
        _ => {
            let inner = |u1: f64| -> f64 {
                let w1 = setup.omega(u1);
                let pts2 = resonance_breaks(setup, u1, t, 0.0, u1 + setup.r_pot);
                integrate_breaks(
                    |u2: f64| {
                        let w2 = setup.omega(u2);
                        let pts3 = resonance_breaks(setup, u2, t, 0.0, u2 + setup.r_pot);
                        let third = integrate_breaks(
                            |u3: f64| {
                                let s = simplex_integral(&[w1, w2, setup.omega(u3)], t);
                                u3 * u3 * shell_average(&setup.potential, u3, u2, 3).unwrap_or(f64::NAN) * s.norm_sqr()
                            },
                            &pts3,
                            &inner_opts(k),
                        )
                        .map_or(f64::NAN, |e| e.value);
                        u2 * u2 * shell_average(&setup.potential, u2, u1, 3).unwrap_or(f64::NAN) * third
                    },
                    &pts2,
                    &inner_opts(k),
                )
                .map_or(f64::NAN, |e| e.value)
            };
            integrate_breaks(|u1: f64| 4.0 * PI * lam2 * lam2 * u1 * u1 * psi2(u1) * inner(u1), &pts1, &outer)?
        }
    };
    if !est.value.is_finite() {
        return Err(Error::QuadratureFailure { estimate: est.value, error: est.error });
    }
    Ok(LadderValue { t, k, value: Complex64::new(est.value, 0.0), error: est.error })
}

/// Probability that the momentum jump process with rate Γ(p) = 2λ²|Im Θ|
/// has made exactly one jump by time t, started from |ψ̂₀|².
pub fn markov_one_collision(t: f64, setup: &LadderSetup) -> Result<f64> {
    let pts: Vec<f64> = (0..=8).map(|i| setup.r_init * i as f64 / 8.0).collect();
    let est = integrate_breaks(
        |u: f64| {
            let g = setup.collision_rate(u) * t;
            4.0 * PI * u * u * setup.initial.sq(u) * g * (-g).exp()
        },
        &pts,
        &QuadOptions::tol(1e-14, 1e-11),
    )?;
    Ok(est.value)
}

/// Probability of no jump by time t; the k = 0 ladder value.
pub fn markov_no_collision(t: f64, setup: &LadderSetup) -> Result<f64> {
    let pts: Vec<f64> = (0..=8).map(|i| setup.r_init * i as f64 / 8.0).collect();
    let est = integrate_breaks(
        |u: f64| 4.0 * PI * u * u * setup.initial.sq(u) * (-setup.collision_rate(u) * t).exp(),
        &pts,
        &QuadOptions::tol(1e-14, 1e-11),
    )?;
    Ok(est.value)
}

/// Ô(ξ, v) = exp(−|ξ|²/2a²)·exp(−(|v|−v̄)²/2b²)
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Observable {
    pub xi_width: f64,
    pub v_centre: f64,
    pub v_width: f64,
}

impl Observable {
    pub fn eval(&self, xi: f64, v: f64) -> f64 {
        (-0.5 * (xi / self.xi_width).powi(2)).exp() * (-0.5 * ((v - self.v_centre) / self.v_width).powi(2)).exp()
    }

    fn xi_reach(&self) -> f64 {
        self.xi_width * (-2.0 * REACH_TOL.ln()).sqrt()
    }

    fn v_range(&self) -> (f64, f64) {
        let r = self.v_width * (-2.0 * REACH_TOL.ln()).sqrt();
        ((self.v_centre - r).max(0.0), self.v_centre + r)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FreeTerm {
    pub t: f64,
    pub epsilon: f64,
    pub value: Complex64,
    /// ⟨|Ô|, |Ŵ₀|⟩, an upper bound for |value|.
    pub bound: f64,
    pub error: f64,
}

/// Angular integral over the relative direction c = cos∠(v, ξ) of
/// e^{iac}·Ŵ₀(εξ, v), with Ŵ₀(ξ, v) = ψ̂₀(v − ξ/2)ψ̂₀(v + ξ/2).
fn angular_wigner(init: &RadialProfile, a: f64, exi: f64, v: f64, rule: &(Vec<f64>, Vec<f64>)) -> (Complex64, f64) {
    if let (Shape::Gaussian { amplitude, width }, None) = (init.shape, init.cutoff) {
        // the cross terms cancel for a centred Gaussian
        let w = amplitude * amplitude * (-(v * v + 0.25 * exi * exi) / (width * width)).exp();
        let sinc = if a.abs() < 1e-8 { 1.0 - a * a / 6.0 } else { a.sin() / a };
        return (Complex64::new(4.0 * PI * w * sinc, 0.0), 4.0 * PI * w.abs());
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for (c, wt) in rule.0.iter().zip(&rule.1) {
        let cross = v * exi * c;
        let base = v * v + 0.25 * exi * exi;
        let w = init.eval((base - cross).max(0.0).sqrt()) * init.eval((base + cross).max(0.0).sqrt());
        acc += Complex64::from_polar(1.0, a * c) * (2.0 * PI * w * wt);
        abs += 2.0 * PI * w.abs() * wt;
    }
    (acc, abs)
}

/// W(t, 0, Ô) = ∫dξ dv e^{itεv·ξ} e^{2tλ²Im Θ(e(v))} Ô(ξ, v) conj(Ŵ₀)(εξ, v).
pub fn free_term_w(t: f64, epsilon: f64, setup: &LadderSetup, obs: &Observable) -> Result<FreeTerm> {
    let rule = gauss_legendre(48);
    let (v_lo, v_hi) = obs.v_range();
    let v_hi = v_hi.min(setup.r_init + 2.0 * setup.r_pot);
    let xi_hi = obs.xi_reach();
    let opts = QuadOptions::tol(1e-14, 1e-10);
    let mut v_pts: Vec<f64> = (0..=8).map(|i| v_lo + (v_hi - v_lo) * i as f64 / 8.0).collect();
    v_pts.dedup();
    let xi_pts: Vec<f64> = (0..=8).map(|i| xi_hi * i as f64 / 8.0).collect();
    let value = integrate_breaks(
        |xi: f64| -> Complex64 {
            let inner = integrate_breaks(
                |v: f64| -> Complex64 {
                    let damp = if t == 0.0 { 1.0 } else { (2.0 * t * setup.omega(v).im).exp() };
                    let (ang, _) = angular_wigner(&setup.initial, t * epsilon * v * xi, epsilon * xi, v, &rule);
                    ang.conj() * (damp * obs.eval(xi, v) * v * v)
                },
                &v_pts,
                &opts,
            );
            inner.map_or(Complex64::new(f64::NAN, 0.0), |e| e.value * (4.0 * PI * xi * xi))
        },
        &xi_pts,
        &opts,
    )?;
    if !value.value.re.is_finite() {
        return Err(Error::QuadratureFailure { estimate: f64::NAN, error: f64::INFINITY });
    }
    let abs = integrate_breaks(
        |xi: f64| {
            integrate_breaks(
                |v: f64| {
                    let (_, a) = angular_wigner(&setup.initial, 0.0, epsilon * xi, v, &rule);
                    a * obs.eval(xi, v).abs() * v * v
                },
                &v_pts,
                &opts,
            )
            .map_or(f64::NAN, |e| e.value)
                * 4.0
                * PI
                * xi
                * xi
        },
        &xi_pts,
        &opts,
    )?;
    Ok(FreeTerm { t, epsilon, value: value.value, bound: abs.value, error: value.error })
}
