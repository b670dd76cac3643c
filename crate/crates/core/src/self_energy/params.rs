use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ThetaTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorParams {
    pub lambda: f64,
    pub eta: f64,
    pub kappa: f64,
    pub delta: f64,
}

impl PropagatorParams {
    /// η = λ^{2+κ}
    pub fn new(lambda: f64, kappa: f64, delta: f64) -> Self {
        PropagatorParams { lambda, eta: lambda.powf(2.0 + kappa), kappa, delta }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        PropagatorParams { eta, ..self }
    }

    /// Momentum cutoff ζ = λ^{−κ−3δ}.
    pub fn zeta(&self) -> f64 {
        self.lambda.powf(-self.kappa - 3.0 * self.delta)
    }

    /// Expansion length K = [λ^{−δ} λ² t].
    pub fn expansion_cap(&self, t: f64) -> u64 {
        (self.lambda.powf(-self.delta) * self.lambda * self.lambda * t).floor().max(0.0) as u64
    }

    /// Contour cutoff Y = λ^{−100}; recorded only, quadrature runs on ℝ.
    pub fn contour_cutoff(&self) -> f64 {
        self.lambda.powf(-100.0)
    }

    /// λ^{2+4κ} ≤ η ≤ λ² and κ ≤ 1/12.
    pub fn check_hypothesis(&self) -> Result<()> {
        let lo = self.lambda.powf(2.0 + 4.0 * self.kappa);
        let hi = self.lambda * self.lambda;
        let slack = 1e-12 * hi;
        if self.kappa > 1.0 / 12.0 {
            return Err(Error::HypothesisViolated(format!("κ = {} exceeds 1/12", self.kappa)));
        }
        if self.eta < lo - slack || self.eta > hi + slack {
            return Err(Error::HypothesisViolated(format!("η = {} outside [{lo}, {hi}]", self.eta)));
        }
        Ok(())
    }
}

/// ω(p) = p²/2 + λ²Θ(p²/2)
pub fn omega(p: f64, params: &PropagatorParams, table: &ThetaTable) -> Result<Complex64> {
    let e = 0.5 * p * p;
    if params.lambda == 0.0 {
        return Ok(Complex64::new(e, 0.0));
    }
    Ok(e + params.lambda * params.lambda * table.eval(e)?)
}
