use num_complex::Complex64;
use serde::Serialize;

use super::{omega, shell_average, PropagatorParams, ThetaTable};
use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::quad::{integrate_breaks, QuadOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "lowercase")]
pub enum LemmaCase {
    /// ∫ h(p−q) dp / |α − ω(p) + iη|
    LogEst,
    /// ∫ h(p−q) dp / |α − ω(p) + iη|^{2−a}
    TwoAInt { a: f64 },
    /// ∫ h(p−q) dp / |α − e(p) + iη|^{2−a}
    ThreeAInt { a: f64 },
    /// ∫ λ²h(p−q) dp / |α − ω̄(p) − iη|²
    LadderInt,
}

impl std::str::FromStr for LemmaCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logest" => Ok(LemmaCase::LogEst),
            "twoAint" | "twoaint" => Ok(LemmaCase::TwoAInt { a: 0.0 }),
            "threeAint" | "threeaint" => Ok(LemmaCase::ThreeAInt { a: 0.0 }),
            "ladderint" => Ok(LemmaCase::LadderInt),
            other => Err(Error::ConfigInvalid(format!("unknown lemma test case {other:?}"))),
        }
    }
}

/// ⟨x⟩ = (2 + x²)^{1/2}, kept ≥ √2 so that log⟨x⟩ stays positive.
fn bracket(x: f64) -> f64 {
    (2.0 + x * x).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaEntry {
    pub alpha: f64,
    pub q: f64,
    pub eta: f64,
    pub lhs: f64,
    pub shape: f64,
    /// lhs/shape, or (lhs − 1)/shape for the ladder case.
    pub ratio: f64,
    pub refined: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub case: LemmaCase,
    pub params: PropagatorParams,
    pub entries: Vec<LemmaEntry>,
    /// Largest ratio on the coarse grid.
    pub calibration: f64,
    /// Largest ratio on the refined grid.
    pub refined_max: f64,
    pub flagged: bool,
}

/// Everything the radial reductions need: parameters, h = |B̂|² and a θ table.
pub struct LemmaContext {
    pub params: PropagatorParams,
    pub profile: RadialProfile,
    pub d: usize,
    pub q_max: f64,
    reach: f64,
    table: ThetaTable,
}

impl LemmaContext {
    pub fn new(params: PropagatorParams, profile: RadialProfile, d: usize, q_max: f64) -> Result<Self> {
        let reach = profile
            .reach(1e-18)
            .ok_or_else(|| Error::HypothesisViolated("h must decay or be cut off".into()))?;
        let e_max = 0.5 * (q_max + reach).powi(2) + 1.0;
        let table = ThetaTable::build(&profile, d, e_max, ThetaTable::DEFAULT_POINTS)?;
        Ok(LemmaContext { params, profile, d, q_max, reach, table })
    }

    pub fn table(&self) -> &ThetaTable {
        &self.table
    }

    fn omega(&self, u: f64) -> Result<Complex64> {
        omega(u, &self.params, &self.table)
    }

    /// Energy where Re ω = α, by fixed-point iteration.
    fn resonance(&self, alpha: f64) -> Option<f64> {
        let l2 = self.params.lambda.powi(2);
        let mut e = alpha.max(0.0);
        for _ in 0..40 {
            let th = self.table.eval(e.min(self.table.e_max())).ok()?;
            e = (alpha - l2 * th.re).max(0.0);
        }
        (e > 0.0).then_some(e)
    }
}

/// Left-hand side of `case` at (α, |q|), reduced to a radial integral.
pub fn lemma_lhs(case: LemmaCase, alpha: f64, q: f64, ctx: &LemmaContext) -> Result<f64> {
    let p = ctx.params;
    let (eta, l2) = (p.eta, p.lambda * p.lambda);
    let u_max = q + ctx.reach;
    let weight = |u: f64| u.powi(ctx.d as i32 - 1) * shell_average(&ctx.profile, u, q, ctx.d).unwrap_or(f64::NAN);
    let kernel = |u: f64| -> f64 {
        let e = 0.5 * u * u;
        match case {
            LemmaCase::ThreeAInt { a } => Complex64::new(alpha - e, eta).norm().powf(a - 2.0),
            _ => {
                let w = ctx.omega(u).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                match case {
                    LemmaCase::LogEst => 1.0 / (alpha - w + Complex64::new(0.0, eta)).norm(),
                    LemmaCase::TwoAInt { a } => (alpha - w + Complex64::new(0.0, eta)).norm().powf(a - 2.0),
                    _ => l2 / ((alpha - w.re).powi(2) + (w.im.abs() + eta).powi(2)),
                }
            }
        }
    };
    let (e_res, gamma) = match case {
        LemmaCase::ThreeAInt { .. } => ((alpha > 0.0).then_some(alpha), eta),
        _ => {
            let e = ctx.resonance(alpha);
            let im = e.and_then(|e| ctx.table.eval(e).ok()).map_or(0.0, |t| l2 * t.im.abs());
            (e, im + eta)
        }
    };
    let mut pts = vec![0.0, u_max];
    if q < u_max {
        pts.push(q);
    }
    if let Some(e) = e_res {
        let us = (2.0 * e).sqrt();
        if us < u_max {
            pts.push(us);
            let mut h = gamma / us.max(1e-3);
            while h < u_max {
                pts.extend([us - h, us + h].into_iter().filter(|&x| x > 0.0 && x < u_max));
                h *= 8.0;
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let est = integrate_breaks(|u| weight(u) * kernel(u), &pts, &QuadOptions::tol(1e-14, 1e-9))?;
    Ok(est.value)
}

fn shape(case: LemmaCase, alpha: f64, q: f64, ctx: &LemmaContext) -> Result<f64> {
    let p = ctx.params;
    let off = bracket(q - (2.0 * alpha.abs()).sqrt());
    Ok(match case {
        LemmaCase::LogEst => p.lambda.ln().abs() * bracket(alpha).ln() / (bracket(alpha).sqrt() * off),
        LemmaCase::TwoAInt { a } => p.lambda.powf(-2.0 * (1.0 - a)) / (bracket(alpha).powf(a / 2.0) * off),
        LemmaCase::ThreeAInt { a } => p.eta.powf(-(1.0 - a)) / (bracket(alpha).powf(a / 2.0) * off),
        LemmaCase::LadderInt => {
            let w = ctx.omega(q)?;
            p.lambda.powf(-12.0 * p.kappa) * (p.lambda + (alpha - w).norm().sqrt())
        }
    })
}

fn entry(case: LemmaCase, alpha: f64, q: f64, refined: bool, ctx: &LemmaContext) -> Result<LemmaEntry> {
    let lhs = lemma_lhs(case, alpha, q, ctx)?;
    let shape = shape(case, alpha, q, ctx)?;
    let ratio = match case {
        LemmaCase::LadderInt => (lhs - 1.0) / shape,
        _ => lhs / shape,
    };
    Ok(LemmaEntry { alpha, q, eta: ctx.params.eta, lhs, shape, ratio, refined })
}

const COARSE_ALPHA: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
const COARSE_Q: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

fn refine(xs: &[f64], geometric: bool) -> Vec<f64> {
    let mut out = vec![xs[0]];
    for w in xs.windows(2) {
        out.push(if geometric { (w[0] * w[1]).sqrt() } else { 0.5 * (w[0] + w[1]) });
        out.push(w[1]);
    }
    out
}

impl LemmaContext {
    /// Calibrates LHS/shape on a coarse (α, |q|) grid and re-measures on the
    /// refined grid; flags growth beyond ×2.
    pub fn check(&self, case: LemmaCase) -> Result<LemmaReport> {
        self.params.check_hypothesis()?;
        let mut entries = Vec::new();
        for &alpha in &COARSE_ALPHA {
            for &q in COARSE_Q.iter().filter(|&&q| q <= self.q_max) {
                entries.push(entry(case, alpha, q, false, self)?);
            }
        }
        for alpha in refine(&COARSE_ALPHA, true) {
            for q in refine(&COARSE_Q, false).into_iter().filter(|&q| q <= self.q_max) {
                entries.push(entry(case, alpha, q, true, self)?);
            }
        }
        let max_of = |refined: bool| {
            entries
                .iter()
                .filter(|e| e.refined == refined)
                .map(|e| e.ratio)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let calibration = max_of(false);
        let refined_max = max_of(true);
        let flagged = refined_max > 0.0 && refined_max > 2.0 * calibration.max(0.0);
        Ok(LemmaReport { case, params: self.params, entries, calibration, refined_max, flagged })
    }
}

/// Runs `case` in d = 3 with |q| ≤ 2.
pub fn lemma33_check(params: &PropagatorParams, profile: &RadialProfile, case: LemmaCase) -> Result<LemmaReport> {
    params.check_hypothesis()?;
    LemmaContext::new(*params, *profile, 3, 2.0)?.check(case)
}
