use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::shell::{coarea_bracket, sigma_moments, uniform_direction, DirectionSampler, EnergyShellState};
use super::task_rng;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;

/// Momentum jump process on one energy shell.
#[derive(Clone, Debug)]
pub struct JumpProcess {
    pub e: f64,
    pub d: usize,
    pub profile: RadialProfile,
    pub sigma0: f64,
    pub sigma1: f64,
    sampler: DirectionSampler,
    waiting: Exp<f64>,
}

impl JumpProcess {
    pub fn new(e: f64, profile: &RadialProfile, d: usize) -> Result<Self> {
        let (sigma0, sigma1) = sigma_moments(e, profile, d)?;
        let sampler = DirectionSampler::new(e, profile, d)?;
        let waiting = Exp::new(sigma0).map_err(|e| Error::HypothesisViolated(e.to_string()))?;
        Ok(JumpProcess { e, d, profile: *profile, sigma0, sigma1, sampler, waiting })
    }

    /// σ₀ − σ₁, the decay rate of the velocity autocorrelation.
    pub fn relaxation_rate(&self) -> f64 {
        self.sigma0 - self.sigma1
    }

    /// |p|² = 2e
    pub fn momentum_sq(&self) -> f64 {
        2.0 * self.e
    }

    /// 2e/((2π)²d(σ₀ − σ₁))
    pub fn closed_form_diffusion(&self) -> f64 {
        self.momentum_sq() / ((2.0 * PI).powi(2) * self.d as f64 * self.relaxation_rate())
    }

    pub fn sampler(&self) -> &DirectionSampler {
        &self.sampler
    }

    pub fn wait<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.waiting.sample(rng)
    }

    pub fn jump<R: Rng + ?Sized>(&self, from: &[f64], rng: &mut R) -> Vec<f64> {
        self.sampler.sample(from, rng)
    }

    /// One path on [0, t_max] started from a uniform direction.
    pub fn trajectory(&self, t_max: f64, seed: u64) -> Trajectory {
        let mut rng = task_rng(seed, 0);
        self.trajectory_with(t_max, seed, &mut rng)
    }

    fn trajectory_with(&self, t_max: f64, seed: u64, rng: &mut ChaCha8Rng) -> Trajectory {
        let mut dir = uniform_direction(rng, self.d);
        let mut jump_times = Vec::new();
        let mut directions = vec![dir.clone()];
        let mut t = self.wait(rng);
        while t < t_max {
            dir = self.jump(&dir, rng);
            jump_times.push(t);
            directions.push(dir.clone());
            t += self.wait(rng);
        }
        Trajectory { e: self.e, t_max, jump_times, directions, seed }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub e: f64,
    pub t_max: f64,
    pub jump_times: Vec<f64>,
    /// Direction on each segment; one more entry than `jump_times`.
    pub directions: Vec<Vec<f64>>,
    pub seed: u64,
}

impl Trajectory {
    pub fn state_at(&self, t: f64) -> EnergyShellState {
        let i = self.jump_times.partition_point(|&s| s <= t);
        EnergyShellState { e: self.e, direction: self.directions[i].clone() }
    }

    /// X(t) = (1/2π)∫₀ᵗ p(s) ds
    pub fn position(&self, t: f64) -> Vec<f64> {
        let speed = (2.0 * self.e).sqrt() / (2.0 * PI);
        let mut x = vec![0.0; self.directions[0].len()];
        let mut start = 0.0;
        for (i, dir) in self.directions.iter().enumerate() {
            let end = self.jump_times.get(i).copied().unwrap_or(f64::INFINITY).min(t);
            if end > start {
                x.iter_mut().zip(dir).for_each(|(xi, u)| *xi += speed * u * (end - start));
            }
            if end >= t {
                break;
            }
            start = end;
        }
        x
    }

    pub fn waiting_times(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.jump_times
            .iter()
            .map(|&t| {
                let w = t - prev;
                prev = t;
                w
            })
            .collect()
    }
}

pub fn sample_jump_chain(e: f64, t_max: f64, seed: u64, profile: &RadialProfile, d: usize) -> Result<Trajectory> {
    if t_max <= 0.0 {
        return Err(Error::ConfigInvalid(format!("tMax = {t_max} must be positive")));
    }
    Ok(JumpProcess::new(e, profile, d)?.trajectory(t_max, seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionMode {
    ClosedForm,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug)]
pub struct McOptions {
    pub n_traj: usize,
    pub seed: u64,
    /// Requested relative standard error; `None` accepts any.
    pub rel_tol: Option<f64>,
}

impl McOptions {
    pub fn new(n_traj: usize, seed: u64) -> Self {
        McOptions { n_traj, seed, rel_tol: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffusionEstimate {
    pub e: f64,
    pub d: usize,
    pub mode: DiffusionMode,
    pub value: f64,
    pub std_error: f64,
    pub closed_form: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub n_traj: usize,
    /// Integration horizon in units of 1/(σ₀ − σ₁).
    pub horizon: f64,
}

impl DiffusionEstimate {
    /// (value − closed form)/s.e.; zero for the closed form itself.
    pub fn z_score(&self) -> f64 {
        if self.std_error > 0.0 {
            (self.value - self.closed_form) / self.std_error
        } else {
            0.0
        }
    }
}

/// Autocorrelation is integrated to this many relaxation times.
pub const GREEN_KUBO_HORIZON: f64 = 20.0;

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

pub fn diffusion_constant(
    e: f64,
    profile: &RadialProfile,
    d: usize,
    mode: DiffusionMode,
    opts: &McOptions,
) -> Result<DiffusionEstimate> {
    let proc = JumpProcess::new(e, profile, d)?;
    diffusion_constant_of(&proc, mode, opts)
}

pub fn diffusion_constant_of(proc: &JumpProcess, mode: DiffusionMode, opts: &McOptions) -> Result<DiffusionEstimate> {
    let closed = proc.closed_form_diffusion();
    let mut est = DiffusionEstimate {
        e: proc.e,
        d: proc.d,
        mode,
        value: closed,
        std_error: 0.0,
        closed_form: closed,
        sigma0: proc.sigma0,
        sigma1: proc.sigma1,
        n_traj: 0,
        horizon: GREEN_KUBO_HORIZON,
    };
    if mode == DiffusionMode::ClosedForm {
        return Ok(est);
    }
    if opts.n_traj < 2 {
        return Err(Error::ConfigInvalid("monte carlo needs at least two trajectories".into()));
    }
    let horizon = GREEN_KUBO_HORIZON / proc.relaxation_rate();
    let scale = proc.momentum_sq() / ((2.0 * PI).powi(2) * proc.d as f64);
    // Green–Kubo: ∫₀^H u(t)·u(0) dt per path
    let samples: Vec<f64> = (0..opts.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(opts.seed, i as u64);
            let u0 = uniform_direction(&mut rng, proc.d);
            let mut u = u0.clone();
            let (mut t, mut acc) = (0.0, 0.0);
            loop {
                let tau = proc.wait(&mut rng);
                let seg = tau.min(horizon - t);
                acc += seg * dot(&u, &u0);
                t += tau;
                if t >= horizon {
                    break;
                }
                u = proc.jump(&u, &mut rng);
            }
            scale * acc
        })
        .collect();
    let (value, se) = mean_se(&samples);
    est.value = value;
    est.std_error = se;
    est.n_traj = opts.n_traj;
    if let Some(tol) = opts.rel_tol {
        if se / value.abs() > tol {
            return Err(Error::InsufficientSamples { achieved: se / value.abs(), requested: tol });
        }
    }
    Ok(est)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct AutocorrelationCurve {
    pub lags: Vec<f64>,
    /// 𝓔[p(t)·p(0)]
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// −(σ₀ − σ₁)
    pub predicted_slope: f64,
    /// Least-squares slope of log(values) on lags.
    pub fitted_slope: f64,
    /// Batch-means standard error of `fitted_slope`.
    pub slope_std_error: f64,
    /// max |values − 2e·exp(−(σ₀−σ₁)t)| / values(0)
    pub residual: f64,
    /// max |values − values(0)·exp(fitted_slope·t)| / values(0)
    pub fit_residual: f64,
    pub n_traj: usize,
}

const BATCHES: usize = 10;
/// Lags whose mean correlation has dropped below this fraction are left out of the log fit.
const FIT_FLOOR: f64 = 0.1;

fn log_slope(lags: &[f64], vals: &[f64]) -> f64 {
    let n = lags.len() as f64;
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let mx = lags.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = lags.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lags.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn autocorrelation(proc: &JumpProcess, lags: &[f64], opts: &McOptions) -> Result<AutocorrelationCurve> {
    if lags.iter().any(|&l| l < 0.0 || !l.is_finite()) {
        return Err(Error::ConfigInvalid("lags must be finite and non-negative".into()));
    }
    if opts.n_traj < 2 * BATCHES {
        return Err(Error::ConfigInvalid(format!("autocorrelation needs at least {} trajectories", 2 * BATCHES)));
    }
    let mut order: Vec<usize> = (0..lags.len()).collect();
    order.sort_by(|&a, &b| lags[a].total_cmp(&lags[b]));
    let p2 = proc.momentum_sq();
    let rows: Vec<Vec<f64>> = (0..opts.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(opts.seed, i as u64);
            let u0 = uniform_direction(&mut rng, proc.d);
            let mut u = u0.clone();
            let mut next = proc.wait(&mut rng);
            let mut row = vec![0.0; lags.len()];
            for &j in &order {
                while next <= lags[j] {
                    u = proc.jump(&u, &mut rng);
                    next += proc.wait(&mut rng);
                }
                row[j] = p2 * dot(&u, &u0);
            }
            row
        })
        .collect();
    let column = |j: usize, range: std::ops::Range<usize>| -> Vec<f64> { rows[range].iter().map(|r| r[j]).collect() };
    let n = opts.n_traj;
    let (values, std_errors): (Vec<f64>, Vec<f64>) = (0..lags.len()).map(|j| mean_se(&column(j, 0..n))).unzip();
    let c0 = p2;
    let fit_idx: Vec<usize> = (0..lags.len()).filter(|&j| values[j] > FIT_FLOOR * c0).collect();
    if fit_idx.len() < 2 {
        return Err(Error::InsufficientSamples { achieved: fit_idx.len() as f64, requested: 2.0 });
    }
    let fit_lags: Vec<f64> = fit_idx.iter().map(|&j| lags[j]).collect();
    let fit_vals: Vec<f64> = fit_idx.iter().map(|&j| values[j]).collect();
    let fitted_slope = log_slope(&fit_lags, &fit_vals);
    let per = n / BATCHES;
    let mut batch_slopes = Vec::with_capacity(BATCHES);
    for b in 0..BATCHES {
        let vals: Vec<f64> = fit_idx.iter().map(|&j| mean_se(&column(j, b * per..(b + 1) * per)).0).collect();
        if vals.iter().any(|&v| v <= 0.0) {
            return Err(Error::InsufficientSamples { achieved: 0.0, requested: FIT_FLOOR });
        }
        batch_slopes.push(log_slope(&fit_lags, &vals));
    }
    let slope_std_error = mean_se(&batch_slopes).1;
    let rate = proc.relaxation_rate();
    let residual = lags
        .iter()
        .zip(&values)
        .map(|(&t, &v)| (v - c0 * (-rate * t).exp()).abs() / c0)
        .fold(0.0, f64::max);
    let fit_residual = lags
        .iter()
        .zip(&values)
        .map(|(&t, &v)| (v - c0 * (fitted_slope * t).exp()).abs() / c0)
        .fold(0.0, f64::max);
    Ok(AutocorrelationCurve {
        lags: lags.to_vec(),
        values,
        std_errors,
        predicted_slope: -rate,
        fitted_slope,
        slope_std_error,
        residual,
        fit_residual,
        n_traj: n,
    })
}

/// Directions at time t from independent paths, for mixing checks.
pub fn directions_at(proc: &JumpProcess, start: &[f64], t: f64, opts: &McOptions) -> Vec<Vec<f64>> {
    (0..opts.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(opts.seed, i as u64);
            let mut u = start.to_vec();
            let mut s = proc.wait(&mut rng);
            while s <= t {
                u = proc.jump(&u, &mut rng);
                s += proc.wait(&mut rng);
            }
            u
        })
        .collect()
}

/// Post-jump directions from a fixed incoming direction.
pub fn jump_directions(proc: &JumpProcess, from: &[f64], opts: &McOptions) -> Vec<Vec<f64>> {
    let mut rng = task_rng(opts.seed, 0);
    (0..opts.n_traj).map(|_| proc.jump(from, &mut rng)).collect()
}

/// Kolmogorov distribution tail P(K > x).
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // the alternating series converges too slowly here and the tail is 1 to round-off
        return 1.0;
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let sign = if k as i64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * k * k * x * x).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample Kolmogorov–Smirnov test, asymptotic p-value with the
/// Stephens small-sample correction.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    let p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * statistic);
    KsResult { statistic, p_value, n: xs.len() }
}

/// weight·(4πD_eT)^{−d/2} exp(−|X|²/(4D_eT))
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HeatSolution {
    pub d_e: f64,
    pub weight: f64,
    pub d: usize,
}

impl HeatSolution {
    pub fn new(e: f64, proc_d_e: f64, initial: &RadialProfile, d: usize) -> Self {
        HeatSolution { d_e: proc_d_e, weight: coarea_bracket(|r| initial.sq(r), e, d), d }
    }

    pub fn density(&self, t: f64, x: &[f64]) -> f64 {
        let four = 4.0 * self.d_e * t;
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.weight * (PI * four).powf(-(self.d as f64) / 2.0) * (-r2 / four).exp()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatRow {
    pub t: f64,
    /// Per-coordinate variance of X(T).
    pub variance: Vec<f64>,
    pub msd: f64,
    /// 2D_eT
    pub target: f64,
    /// 2D_e(T − (1 − e^{−rT})/r), the exact finite-T variance.
    pub exact_target: f64,
    pub rel_error: f64,
    /// Smallest per-coordinate KS p-value against N(0, 2D_eT).
    pub ks_p_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatReport {
    pub e: f64,
    pub d_e: f64,
    pub rows: Vec<HeatRow>,
    /// Slope of mean per-coordinate variance against T.
    pub variance_slope: f64,
    /// variance_slope/(2D_e) − 1
    pub slope_rel_error: f64,
    pub n_traj: usize,
}

pub fn heat_compare(proc: &JumpProcess, times: &[f64], opts: &McOptions) -> Result<HeatReport> {
    if times.is_empty() || times.iter().any(|&t| t <= 0.0) {
        return Err(Error::ConfigInvalid("heat_compare needs positive times".into()));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let d = proc.d;
    let speed = proc.momentum_sq().sqrt() / (2.0 * PI);
    let t_end = *sorted.last().unwrap();
    let paths: Vec<Vec<Vec<f64>>> = (0..opts.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(opts.seed, i as u64);
            let mut u = uniform_direction(&mut rng, d);
            let mut x = vec![0.0; d];
            let mut out = Vec::with_capacity(sorted.len());
            let (mut t, mut k) = (0.0, 0);
            loop {
                let next = t + proc.wait(&mut rng);
                while k < sorted.len() && sorted[k] <= next {
                    out.push(x.iter().zip(&u).map(|(xi, ui)| xi + speed * ui * (sorted[k] - t)).collect());
                    k += 1;
                }
                if next > t_end {
                    break;
                }
                x.iter_mut().zip(&u).for_each(|(xi, ui)| *xi += speed * ui * (next - t));
                t = next;
                u = proc.jump(&u, &mut rng);
            }
            out
        })
        .collect();
    let d_e = proc.closed_form_diffusion();
    let r = proc.relaxation_rate();
    let rows: Vec<HeatRow> = sorted
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let target = 2.0 * d_e * t;
            let normal = Normal::new(0.0, target.sqrt()).expect("positive variance");
            let mut variance = Vec::with_capacity(d);
            let mut ks_p_min = 1.0f64;
            for c in 0..d {
                let xs: Vec<f64> = paths.iter().map(|p| p[k][c]).collect();
                let n = xs.len() as f64;
                let mean = xs.iter().sum::<f64>() / n;
                variance.push(xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0));
                ks_p_min = ks_p_min.min(ks_test(&xs, |x| normal.cdf(x)).p_value);
            }
            let mean_var = variance.iter().sum::<f64>() / d as f64;
            HeatRow {
                t,
                msd: variance.iter().sum(),
                variance,
                target,
                exact_target: 2.0 * d_e * (t - (1.0 - (-r * t).exp()) / r),
                rel_error: mean_var / target - 1.0,
                ks_p_min,
            }
        })
        .collect();
    let n = rows.len() as f64;
    let (mx, my) = (
        rows.iter().map(|r| r.t).sum::<f64>() / n,
        rows.iter().map(|r| r.msd / d as f64).sum::<f64>() / n,
    );
    let variance_slope = if rows.len() > 1 {
        rows.iter().map(|r| (r.t - mx) * (r.msd / d as f64 - my)).sum::<f64>()
            / rows.iter().map(|r| (r.t - mx).powi(2)).sum::<f64>()
    } else {
        my / mx
    };
    Ok(HeatReport {
        e: proc.e,
        d_e,
        slope_rel_error: variance_slope / (2.0 * d_e) - 1.0,
        variance_slope,
        rows,
        n_traj: opts.n_traj,
    })
}

/// Exact MSD of the jump process: 2dD_e(T − (1 − e^{−rT})/r).
pub fn exact_msd(proc: &JumpProcess, t: f64) -> f64 {
    let r = proc.relaxation_rate();
    2.0 * proc.d as f64 * proc.closed_form_diffusion() * (t - (1.0 - (-r * t).exp()) / r)
}
