use serde::Serialize;

use super::schedule::{schedule, StepCase};
use crate::error::{Error, Result};
use crate::perm::{classify, Permutation};
use crate::self_energy::PropagatorParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IndexCounts {
    pub l: usize,
    pub v: usize,
    pub s: usize,
    pub us: usize,
    pub cs: usize,
    pub p: usize,
    pub t: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentReport {
    pub sigma: Permutation,
    pub counts: IndexCounts,
    pub degree: usize,
    pub kappa: f64,
    pub delta: f64,
    pub d: usize,
    /// Coefficient of δ·deg in the simplified bound.
    pub c_delta: f64,
    pub total_lambda_power: f64,
    /// Sum of the per-step powers; never below `total_lambda_power`.
    pub stepwise_lambda_power: f64,
    /// Per-degree exponent 1/3 − (1+3d/2)κ − Cδ.
    pub per_degree: f64,
    /// `per_degree · degree`
    pub simplified_bound: f64,
}

impl ExponentReport {
    pub fn holds(&self) -> bool {
        self.total_lambda_power >= self.simplified_bound - 1e-12
    }
}

/// 2/(6+9d)
pub fn kappa_limit(d: usize) -> f64 {
    2.0 / (6.0 + 9.0 * d as f64)
}

/// Default δ constant: 3d from ζ^d, times 3/2 from 2v+s+1 ≤ (3/2)(2v+s).
pub fn default_c_delta(d: usize) -> f64 {
    4.5 * d as f64
}

pub fn exponent_report(sigma: &Permutation, kappa: f64, d: usize, delta: f64) -> Result<ExponentReport> {
    exponent_report_with(sigma, kappa, d, delta, default_c_delta(d))
}

/// λ-power of one elimination step with η = λ^{2+κ} and ζ = λ^{−κ−3δ}.
pub fn step_power(case: StepCase, width: usize, k: usize, kappa: f64, d: usize, delta: f64) -> f64 {
    let z = kappa + 3.0 * delta;
    let d = d as f64;
    match case {
        StepCase::Peak => -(2.0 + kappa),
        StepCase::LadderBlock => -2.0 * width as f64,
        StepCase::UncoveredSlope => -(2.0 + kappa) - z * (d - 2.0),
        StepCase::CoveredSlope => -(1.0 + kappa / 2.0) - z * (d - 3.0),
        StepCase::Valley => -(1.0 + kappa / 2.0) - z * (2.0 * d - 5.0),
        StepCase::Last => 2.0 * k as f64 - z * d,
    }
}

pub fn exponent_report_with(
    sigma: &Permutation,
    kappa: f64,
    d: usize,
    delta: f64,
    c_delta: f64,
) -> Result<ExponentReport> {
    let limit = kappa_limit(d);
    if kappa >= limit {
        return Err(Error::KappaTooLarge { kappa, limit });
    }
    let c = classify(sigma);
    let counts = IndexCounts {
        l: c.l(),
        v: c.v(),
        s: c.s(),
        us: c.uncovered_slopes.len(),
        cs: c.covered_slopes.len(),
        p: c.p(),
        t: c.ladder_tops.len(),
    };
    let sched = schedule(sigma);
    let stepwise: f64 = sched
        .steps
        .iter()
        .map(|st| step_power(st.case, st.rows.len(), sigma.k(), kappa, d, delta))
        .sum();
    let per_degree = 1.0 / 3.0 - (1.0 + 1.5 * d as f64) * kappa - c_delta * delta;
    let (total, simplified) = if sigma.is_identity() {
        (0.0, 0.0)
    } else {
        let IndexCounts { v, s, us, .. } = counts;
        let (v, s, us) = (v as f64, s as f64, us as f64);
        let total = 2.0 * (2.0 * v + s)
            - (1.0 + kappa / 2.0) * (3.0 * v + s + us)
            - (kappa + 3.0 * delta) * d as f64 * (2.0 * v + s + 1.0);
        (total, per_degree * c.degree as f64)
    };
    Ok(ExponentReport {
        sigma: sigma.clone(),
        counts,
        degree: c.degree,
        kappa,
        delta,
        d,
        c_delta,
        total_lambda_power: total,
        stepwise_lambda_power: stepwise,
        per_degree,
        simplified_bound: simplified,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PointwiseBound {
    pub k: usize,
    pub lambda: f64,
    pub eta: f64,
    pub constant: f64,
    /// (C|log λ|)^{k+2}(λ²/η)^k
    pub method_i: f64,
    /// C(1 + Cλ^{1−12κ})^k |log λ|²
    pub method_ii: f64,
    pub ratio: f64,
    /// (λ²/η)^k
    pub eta_factor: f64,
}

pub fn pointwise_bound(k: usize, params: &PropagatorParams) -> PointwiseBound {
    pointwise_bound_with(k, params, 1.0)
}

pub fn pointwise_bound_with(k: usize, params: &PropagatorParams, constant: f64) -> PointwiseBound {
    let PropagatorParams { lambda, eta, kappa, .. } = *params;
    let log = lambda.ln().abs();
    let eta_factor = (lambda * lambda / eta).powi(k as i32);
    let method_i = (constant * log).powi(k as i32 + 2) * eta_factor;
    let method_ii = constant * (1.0 + constant * lambda.powf(1.0 - 12.0 * kappa)).powi(k as i32) * log * log;
    PointwiseBound {
        k,
        lambda,
        eta,
        constant,
        method_i,
        method_ii,
        ratio: method_i / method_ii,
        eta_factor,
    }
}
