//! Spherically symmetric momentum-space profiles for B̂ and ψ̂₀.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Potential,
    Initial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    /// amplitude · exp(−r²/(2 width²))
    Gaussian { amplitude: f64, width: f64 },
    /// constant value inside the cutoff
    Constant { value: f64 },
}

/// A radial function r ↦ f(r) with an optional hard cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub shape: Shape,
    pub cutoff: Option<f64>,
    /// Declared polynomial decay order; `None` for faster than any power.
    pub decay_order: Option<u32>,
    pub flavor: Flavor,
}

impl RadialProfile {
    /// B̂(p) = exp(−p²/2)
    pub fn default_potential() -> Self {
        RadialProfile {
            shape: Shape::Gaussian { amplitude: 1.0, width: 1.0 },
            cutoff: None,
            decay_order: None,
            flavor: Flavor::Potential,
        }
    }

    /// ψ̂₀(p) = Z⁻¹ exp(−p²), normalised in L²(ℝ^d).
    pub fn default_initial(d: usize) -> Self {
        // ∫ exp(−2p²) dp = (π/2)^{d/2}
        let z = (PI / 2.0).powf(d as f64 / 4.0);
        RadialProfile {
            shape: Shape::Gaussian { amplitude: 1.0 / z, width: std::f64::consts::FRAC_1_SQRT_2 },
            cutoff: None,
            decay_order: None,
            flavor: Flavor::Initial,
        }
    }

    pub fn constant(value: f64, cutoff: Option<f64>) -> Self {
        RadialProfile {
            shape: Shape::Constant { value },
            cutoff,
            decay_order: if cutoff.is_some() { None } else { Some(0) },
            flavor: Flavor::Potential,
        }
    }

    pub fn gaussian(amplitude: f64, width: f64, flavor: Flavor) -> Self {
        RadialProfile {
            shape: Shape::Gaussian { amplitude, width },
            cutoff: None,
            decay_order: None,
            flavor,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.cutoff.is_some_and(|c| r > c) {
            return 0.0;
        }
        match self.shape {
            Shape::Gaussian { amplitude, width } => amplitude * (-0.5 * r * r / (width * width)).exp(),
            Shape::Constant { value } => value,
        }
    }

    /// |f(r)|²
    pub fn sq(&self, r: f64) -> f64 {
        let v = self.eval(r);
        v * v
    }

    /// Supremum of |f|, attained at the origin for the supported shapes.
    pub fn sup(&self) -> f64 {
        self.eval(0.0).abs()
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, Shape::Constant { .. })
    }

    /// Radius beyond which |f|² < tol·sup|f|²; `None` when |f| never decays.
    pub fn reach(&self, tol: f64) -> Option<f64> {
        let natural = match self.shape {
            Shape::Gaussian { width, .. } => Some(width * (-tol.ln()).sqrt()),
            Shape::Constant { .. } => None,
        };
        match (natural, self.cutoff) {
            (Some(a), Some(c)) => Some(a.min(c)),
            (a, c) => a.or(c),
        }
    }

    /// Named presets: "gaussian", "constant", "initial".
    pub fn preset(name: &str, d: usize) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::default_potential()),
            "constant" => Ok(Self::constant(1.0, None)),
            "initial" => Ok(Self::default_initial(d)),
            other => Err(Error::ConfigInvalid(format!("unknown profile preset {other:?}"))),
        }
    }

    /// Short stable fingerprint for artifact headers.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("profile serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// |S^{n}| = 2π^{(n+1)/2}/Γ((n+1)/2), the area of the unit n-sphere.
pub fn sphere_area(n: usize) -> f64 {
    let a = (n + 1) as f64 / 2.0;
    2.0 * PI.powf(a) / statrs::function::gamma::gamma(a)
}
