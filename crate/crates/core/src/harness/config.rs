use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bounds::kappa_limit;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::quad::QuadOptions;
use crate::self_energy::PropagatorParams;

/// Resolved parameters and PASS/FAIL thresholds for one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub d: usize,
    pub lambda: f64,
    pub kappa: f64,
    pub delta: f64,
    /// `None` means λ^{2+κ}.
    pub eta: Option<f64>,
    pub potential: String,
    pub initial: String,
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
    pub enum_k_max: usize,
    pub unimod_budget: u64,
    pub ntraj: usize,
    pub tol_kidentity: f64,
    pub tol_wigner: f64,
    pub tol_ladder_rel: f64,
    pub tol_ladder_norm: f64,
    pub tol_sigmas: f64,
    pub tol_heat_rel: f64,
    pub tol_autocorr: f64,
    pub ks_p_min: f64,
    pub tol_self_energy_rel: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d: 3,
            lambda: 0.3,
            kappa: 0.05,
            delta: 0.001,
            eta: None,
            potential: "gaussian".into(),
            initial: "initial".into(),
            seed: 7,
            workers: 1,
            out: PathBuf::from("runs"),
            quad_abs_tol: 1e-12,
            quad_rel_tol: 1e-10,
            enum_k_max: 7,
            unimod_budget: 10_000_000,
            ntraj: 20_000,
            tol_kidentity: 1e-6,
            tol_wigner: 1e-10,
            tol_ladder_rel: 0.10,
            tol_ladder_norm: 1e-8,
            tol_sigmas: 3.0,
            tol_heat_rel: 0.05,
            tol_autocorr: 0.05,
            ks_p_min: 0.01,
            tol_self_energy_rel: 1e-3,
        }
    }
}

const KEYS: &[&str] = &[
    "d",
    "lambda",
    "kappa",
    "delta",
    "eta",
    "potential",
    "initial",
    "seed",
    "workers",
    "out",
    "quad_abs_tol",
    "quad_rel_tol",
    "enum_k_max",
    "unimod_budget",
    "ntraj",
    "tol_kidentity",
    "tol_wigner",
    "tol_ladder_rel",
    "tol_ladder_norm",
    "tol_sigmas",
    "tol_heat_rel",
    "tol_autocorr",
    "ks_p_min",
    "tol_self_energy_rel",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::ConfigInvalid(format!("{key} = {value:?} does not parse")))
}

impl RunConfig {
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "d" => self.d = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "kappa" => self.kappa = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "eta" => self.eta = if value == "auto" { None } else { Some(parse(key, value)?) },
            "potential" => self.potential = value.to_string(),
            "initial" => self.initial = value.to_string(),
            "seed" => self.seed = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "quad_abs_tol" => self.quad_abs_tol = parse(key, value)?,
            "quad_rel_tol" => self.quad_rel_tol = parse(key, value)?,
            "enum_k_max" => self.enum_k_max = parse(key, value)?,
            "unimod_budget" => self.unimod_budget = parse(key, value)?,
            "ntraj" => self.ntraj = parse(key, value)?,
            "tol_kidentity" => self.tol_kidentity = parse(key, value)?,
            "tol_wigner" => self.tol_wigner = parse(key, value)?,
            "tol_ladder_rel" => self.tol_ladder_rel = parse(key, value)?,
            "tol_ladder_norm" => self.tol_ladder_norm = parse(key, value)?,
            "tol_sigmas" => self.tol_sigmas = parse(key, value)?,
            "tol_heat_rel" => self.tol_heat_rel = parse(key, value)?,
            "tol_autocorr" => self.tol_autocorr = parse(key, value)?,
            "ks_p_min" => self.ks_p_min = parse(key, value)?,
            "tol_self_energy_rel" => self.tol_self_energy_rel = parse(key, value)?,
            other => return Err(Error::ConfigInvalid(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::ConfigInvalid(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        let mut c = RunConfig::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or_else(|| self.lambda.powf(2.0 + self.kappa))
    }

    pub fn params(&self) -> PropagatorParams {
        PropagatorParams::new(self.lambda, self.kappa, self.delta).with_eta(self.eta())
    }

    pub fn quad(&self) -> QuadOptions {
        QuadOptions::tol(self.quad_abs_tol, self.quad_rel_tol)
    }

    pub fn potential_profile(&self) -> Result<RadialProfile> {
        RadialProfile::preset(&self.potential, self.d)
    }

    pub fn initial_profile(&self) -> Result<RadialProfile> {
        RadialProfile::preset(&self.initial, self.d)
    }

    /// Checks independent of the subcommand.
    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.d) {
            return Err(Error::ConfigInvalid(format!("1 ≤ d ≤ 8 violated: d = {}", self.d)));
        }
        if !(self.lambda >= 0.0 && self.lambda < 1.0) {
            return Err(Error::ConfigInvalid(format!("0 ≤ λ < 1 violated: λ = {}", self.lambda)));
        }
        if self.kappa < 0.0 || self.delta < 0.0 {
            return Err(Error::ConfigInvalid("κ ≥ 0 and δ ≥ 0 required".into()));
        }
        if self.workers == 0 {
            return Err(Error::ConfigInvalid("workers ≥ 1 violated".into()));
        }
        self.potential_profile()?;
        self.initial_profile()?;
        Ok(())
    }

    /// λ^{2+4κ} ≤ η ≤ λ², needed by the propagator estimates.
    pub fn validate_eta(&self) -> Result<()> {
        let (lo, hi, eta) = (self.lambda.powf(2.0 + 4.0 * self.kappa), self.lambda.powi(2), self.eta());
        let slack = 1e-12 * hi;
        if eta < lo - slack || eta > hi + slack {
            return Err(Error::ConfigInvalid(format!("λ^(2+4κ) ≤ η ≤ λ² violated: {lo:e} ≤ {eta:e} ≤ {hi:e}")));
        }
        Ok(())
    }

    /// κ < 2/(6+9d), needed by the exponent ledger.
    pub fn validate_kappa(&self) -> Result<()> {
        let limit = kappa_limit(self.d);
        if self.kappa >= limit {
            return Err(Error::ConfigInvalid(format!("κ < 2/(6+9d) violated: {} ≥ {limit}", self.kappa)));
        }
        Ok(())
    }

    pub fn as_map(&self) -> BTreeMap<&'static str, String> {
        let v = serde_json::to_value(self).expect("config serialises");
        KEYS.iter()
            .map(|&k| {
                let s = match &v[k] {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Null => "auto".into(),
                    other => other.to_string(),
                };
                (k, s)
            })
            .collect()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.as_map() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_roundtrip() {
        let mut c = RunConfig::default();
        c.set("lambda", "0.1").unwrap();
        c.set("eta", "0.005").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&c.to_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn named_inequalities() {
        let mut c = RunConfig::default();
        c.kappa = 0.2;
        let msg = c.validate_kappa().unwrap_err().to_string();
        assert!(msg.contains("2/(6+9d)"));
        c.eta = Some(1.0);
        assert!(c.validate_eta().unwrap_err().to_string().contains("η ≤ λ²"));
        assert!(c.set("nope", "1").is_err());
    }
}
