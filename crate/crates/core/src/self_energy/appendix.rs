use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::PropagatorParams;
use crate::error::Result;
use crate::quad::{integrate_breaks, QuadOptions};

/// |||q||| = η + min(|q|, 1)
pub fn triple_norm(q: &[f64], eta: f64) -> f64 {
    eta + q.iter().map(|x| x * x).sum::<f64>().sqrt().min(1.0)
}

fn tn(x: f64, eta: f64) -> f64 {
    eta + x.abs().min(1.0)
}

/// Moduli and energies for the unrenormalised two-propagator integrals; `r`
/// is taken parallel to `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixInput {
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for AppendixInput {
    fn default() -> Self {
        AppendixInput { q: 1.0, r: 0.0, alpha: 0.5, beta: 0.5 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixReport {
    pub input: AppendixInput,
    pub eta: f64,
    pub zeta: f64,
    pub i1: f64,
    pub i2: f64,
    pub j: f64,
    pub shape_i1: f64,
    pub shape_i2: f64,
    pub shape_j: f64,
    /// Largest relative change of I₁, I₂, J between a loose and a tight
    /// quadrature tolerance.
    pub refinement_change: f64,
}

impl AppendixReport {
    pub fn ratios(&self) -> [f64; 3] {
        [self.i1 / self.shape_i1, self.i2 / self.shape_i2, self.j / self.shape_j]
    }
}

/// ∫_{-1}^{1} dc / |x − bc + iη|
fn angular_abs(x: f64, b: f64, eta: f64) -> f64 {
    if b.abs() <= 1e-12 * (x.abs() + eta) {
        return 2.0 / x.hypot(eta);
    }
    (((x + b) / eta).asinh() - ((x - b) / eta).asinh()) / b
}

/// ∫_{-1}^{1} dc / |||p − r||| with |p| = u, |r| = rr, cos∠(p, r) = c.
fn angular_point(u: f64, rr: f64, eta: f64) -> f64 {
    let b = u * rr;
    if b <= 1e-10 {
        return 2.0 / tn(u.max(rr), eta);
    }
    let g = |s: f64| {
        if s <= 1.0 {
            s - eta * (eta + s).ln()
        } else {
            1.0 - eta * (eta + 1.0).ln() + (s * s - 1.0) / (2.0 * (1.0 + eta))
        }
    };
    (g(u + rr) - g((u - rr).abs())) / b
}

fn neighbours(centre: f64, width: f64, (lo, hi): (f64, f64), pts: &mut Vec<f64>) {
    if centre <= lo || centre >= hi {
        return;
    }
    pts.push(centre);
    let mut h = width.max(1e-15);
    while h < hi - lo {
        pts.extend([centre - h, centre + h].into_iter().filter(|&x| x > lo && x < hi));
        h *= 8.0;
    }
}

fn radial_breaks(inp: &AppendixInput, eta: f64, zeta: f64) -> Vec<f64> {
    let mut pts = vec![0.0, zeta];
    let ua = (2.0 * inp.alpha.max(0.0)).sqrt();
    neighbours(ua, eta / ua.max(1e-3), (0.0, zeta), &mut pts);
    let sb = (2.0 * inp.beta.max(0.0)).sqrt();
    for c in [sb - inp.q, inp.q - sb, inp.q + sb] {
        neighbours(c, eta / (c + inp.q).max(1e-3), (0.0, zeta), &mut pts);
    }
    if inp.r > 0.0 {
        neighbours(inp.r, eta, (0.0, zeta), &mut pts);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn integrals(inp: &AppendixInput, eta: f64, zeta: f64, opts: &QuadOptions) -> Result<[f64; 3]> {
    let pts = radial_breaks(inp, eta, zeta);
    let prop_a = |u: f64| 1.0 / (inp.alpha - 0.5 * u * u).hypot(eta);
    let beta_x = |u: f64| inp.beta - 0.5 * (u * u + inp.q * inp.q);
    let i1 = integrate_breaks(|u| u * u * prop_a(u) * angular_abs(beta_x(u), u * inp.q, eta), &pts, opts)?.value;
    let inner_opts = QuadOptions { max_intervals: 2000, ..*opts };
    let i2_angular = |u: f64| -> f64 {
        let (x, b) = (beta_x(u), u * inp.q);
        let f = |c: f64| {
            let pr = (u * u + inp.r * inp.r - 2.0 * u * inp.r * c).max(0.0).sqrt();
            1.0 / ((x - b * c).hypot(eta) * tn(pr, eta))
        };
        let mut cp = vec![-1.0, 1.0];
        if b > 0.0 {
            neighbours(x / b, eta / b, (-1.0, 1.0), &mut cp);
        }
        if u * inp.r > 0.0 {
            let near = 1.0 - (eta * eta) / (2.0 * u * inp.r);
            if near > -1.0 {
                cp.push(near);
            }
        }
        cp.sort_by(f64::total_cmp);
        cp.dedup();
        integrate_breaks(f, &cp, &inner_opts).map_or(f64::NAN, |e| e.value)
    };
    let i2 = integrate_breaks(|u| u * u * prop_a(u) * i2_angular(u), &pts, opts)?.value;
    let j = integrate_breaks(|u| u * u * prop_a(u) * angular_point(u, inp.r, eta), &pts, opts)?.value;
    let tau = 2.0 * PI;
    Ok([tau * i1, tau * i2, tau * j])
}

/// I₁, I₂, J in d = 3 over |p| ≤ ζ, with their bound shapes.
pub fn appendix_integrals(inp: &AppendixInput, params: &PropagatorParams) -> Result<AppendixReport> {
    let (eta, zeta) = (params.eta, params.zeta());
    let tight = integrals(inp, eta, zeta, &QuadOptions::tol(1e-14, 1e-9))?;
    let loose = integrals(inp, eta, zeta, &QuadOptions::tol(1e-10, 1e-6))?;
    let refinement_change = tight
        .iter()
        .zip(&loose)
        .map(|(a, b)| (a - b).abs() / a.abs())
        .fold(0.0, f64::max);
    let le = eta.ln().abs();
    let tq = tn(inp.q, eta);
    // ζ^{d−3} = 1 in d = 3
    let shape_i1 = le * le / tq;
    Ok(AppendixReport {
        input: *inp,
        eta,
        zeta,
        i1: tight[0],
        i2: tight[1],
        j: tight[2],
        shape_i1,
        shape_i2: eta.powf(-0.5) * shape_i1,
        shape_j: zeta * le,
        refinement_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    #[test]
    fn triple_norm_values() {
        assert_eq!(triple_norm(&[0.0, 0.0], 0.1), 0.1);
        assert_eq!(triple_norm(&[3.0, 4.0], 0.1), 1.1);
    }

    #[test]
    fn angular_closed_forms() {
        let (x, b, eta) = (0.3, 0.7, 0.05);
        let num = integrate(|c: f64| 1.0 / (x - b * c).hypot(eta), -1.0, 1.0, &QuadOptions::tol(1e-13, 1e-11)).unwrap();
        assert!((num.value - angular_abs(x, b, eta)).abs() < 1e-9);
        let (u, r) = (0.8, 0.5);
        let num = integrate(
            |c: f64| 1.0 / tn((u * u + r * r - 2.0 * u * r * c).sqrt(), eta),
            -1.0,
            1.0,
            &QuadOptions::tol(1e-13, 1e-11),
        )
        .unwrap();
        assert!((num.value - angular_point(u, r, eta)).abs() < 1e-9);
    }

    #[test]
    fn zero_q_finite() {
        let p = PropagatorParams::new(0.1, 0.05, 0.001);
        let inp = AppendixInput { q: 0.0, ..Default::default() };
        let rep = appendix_integrals(&inp, &p).unwrap();
        assert!(rep.ratios().iter().all(|r| r.is_finite() && *r > 0.0));
    }
}
