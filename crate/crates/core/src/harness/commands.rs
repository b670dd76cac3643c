use std::collections::HashSet;
use std::f64::consts::PI;

use clap::{Args, Subcommand};
use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use super::artifact::{num, Outcome};
use super::config::RunConfig;
use crate::bounds::{
    exponent_report, k_identity_check, ladder_value, markov_no_collision, markov_one_collision, schedule,
    KIdentityOptions, LadderSetup,
};
use crate::error::{Error, Result};
use crate::kinetic::{
    autocorrelation, diffusion_constant_of, ensemble_msd, gaussian_sum_wigner, heat_compare, ks_test, task_rng,
    wigner, wigner_identities, DiffusionMode, JumpProcess, McOptions, WaveFunction,
};
use crate::partitions::{
    bell, count_by_ladder, degree_sum, enumerate_partitions, greedy_flip, internal_ladder_indices, ursell,
    ursell_closed_form, EvenPartition, UrsellMode,
};
use crate::perm::{classify, inverse_identity_holds, tower_matrix, unimodularity_check, Permutation, UnimodularityOptions};
use crate::profile::RadialProfile;
use crate::self_energy::{
    appendix_integrals, lemma33_check, shell_density, theta_with, AppendixInput, LemmaCase, SelfEnergyValue,
};

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Index classes, degree and ladder runs of σ
    Classify(PermArgs),
    /// Tower matrix M(σ), inverse identity and unimodularity
    Matrix(PermArgs),
    /// Elimination schedule of σ
    Schedule(PermArgs),
    /// λ-power ledger for σ, or for all of 𝔖_k
    Exponent(ExponentArgs),
    /// Ursell coefficients c(1..=n)
    Ursell(UrsellArgs),
    /// Enumerate partitions of {1..k}
    Partitions(KArgs),
    /// Greedy flip on every even partition of order k
    Flip(KArgs),
    /// Permutation counts by number of ladder indices
    Counts(CountsArgs),
    /// Time-simplex integral against its contour form
    Kidentity(KIdentityArgs),
    /// Θ(α) on the real axis and its ε → 0 limit
    Selfenergy(SelfEnergyArgs),
    /// Propagator integral estimates with fitted constants
    Lemma33(LemmaArgs),
    /// Two-propagator integrals against their bound shapes
    Appendix(AppendixArgs),
    /// Low-order ladder values against the jump process
    Ladder(LadderArgs),
    /// One jump-process trajectory and its waiting times
    Kinetic(KineticArgs),
    /// Diffusion constant, closed form against Monte Carlo
    Diffusion(DiffusionArgs),
    /// Position spread against the heat kernel
    Heatfit(HeatArgs),
    /// Wigner transform of a test state
    Wigner(WignerArgs),
    /// Split-step evolution in a Poisson potential
    Evolve(EvolveArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Matrix(_) => "matrix",
            Command::Schedule(_) => "schedule",
            Command::Exponent(_) => "exponent",
            Command::Ursell(_) => "ursell",
            Command::Partitions(_) => "partitions",
            Command::Flip(_) => "flip",
            Command::Counts(_) => "counts",
            Command::Kidentity(_) => "kidentity",
            Command::Selfenergy(_) => "selfenergy",
            Command::Lemma33(_) => "lemma33",
            Command::Appendix(_) => "appendix",
            Command::Ladder(_) => "ladder",
            Command::Kinetic(_) => "kinetic",
            Command::Diffusion(_) => "diffusion",
            Command::Heatfit(_) => "heatfit",
            Command::Wigner(_) => "wigner",
            Command::Evolve(_) => "evolve",
        }
    }

    pub fn run(&self, cfg: &RunConfig) -> Result<Outcome> {
        match self {
            Command::Classify(a) => run_classify(cfg, a),
            Command::Matrix(a) => run_matrix(cfg, a),
            Command::Schedule(a) => run_schedule(cfg, a),
            Command::Exponent(a) => run_exponent(cfg, a),
            Command::Ursell(a) => run_ursell(cfg, a),
            Command::Partitions(a) => run_partitions(cfg, a),
            Command::Flip(a) => run_flip(cfg, a),
            Command::Counts(a) => run_counts(cfg, a),
            Command::Kidentity(a) => run_kidentity(cfg, a),
            Command::Selfenergy(a) => run_selfenergy(cfg, a),
            Command::Lemma33(a) => run_lemma33(cfg, a),
            Command::Appendix(a) => run_appendix(cfg, a),
            Command::Ladder(a) => run_ladder(cfg, a),
            Command::Kinetic(a) => run_kinetic(cfg, a),
            Command::Diffusion(a) => run_diffusion(cfg, a),
            Command::Heatfit(a) => run_heatfit(cfg, a),
            Command::Wigner(a) => run_wigner(cfg, a),
            Command::Evolve(a) => run_evolve(cfg, a),
        }
    }
}

fn list<T: std::fmt::Display>(xs: &[T]) -> String {
    let inner: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn to_json<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("serialisable")
}

fn enum_budget(cfg: &RunConfig, k: usize) -> Result<()> {
    if k > cfg.enum_k_max {
        return Err(Error::BudgetExceeded { what: "enumeration order", requested: k as u64, cap: cfg.enum_k_max as u64 });
    }
    Ok(())
}

// ---------------------------------------------------------------- permutations

#[derive(Clone, Debug, Args)]
pub struct PermArgs {
    /// e.g. "1 2 7 6 5 3 4 8"
    #[arg(long)]
    pub perm: String,
}

pub fn run_classify(_cfg: &RunConfig, a: &PermArgs) -> Result<Outcome> {
    let sigma: Permutation = a.perm.parse()?;
    let c = classify(&sigma);
    let mut out = Outcome::new(&["set", "members"]);
    let sets: [(&str, &[usize]); 9] = [
        ("peaks", &c.peaks),
        ("valleys", &c.valleys),
        ("slopes", &c.slopes),
        ("ladders", &c.ladders),
        ("ladder_tops", &c.ladder_tops),
        ("ladder_bottoms", &c.ladder_bottoms),
        ("covered_slopes", &c.covered_slopes),
        ("uncovered_slopes", &c.uncovered_slopes),
        ("last", std::slice::from_ref(&c.last)),
    ];
    for (name, xs) in sets {
        out.row(vec![name.into(), list(xs)]);
    }
    out.row(vec!["degree".into(), c.degree.to_string()]);
    out.row(vec!["signature".into(), c.signature()]);

    let k = sigma.k();
    let mut rows: Vec<usize> = [&c.peaks, &c.valleys, &c.ladders, &c.slopes].into_iter().flatten().copied().collect();
    rows.push(c.last);
    rows.sort_unstable();
    out.check("rows_partitioned", rows == (1..=k + 1).collect::<Vec<_>>(), format!("{} rows", rows.len()));
    out.check("peaks_equal_valleys", c.p() == c.v(), format!("p = {}, v = {}", c.p(), c.v()));
    out.check("degree_is_k_minus_l", c.degree == k - c.l(), format!("deg = {}", c.degree));
    let deg_ok = if sigma.is_identity() { c.degree == 0 } else { c.degree >= 2 };
    out.check("degree_range", deg_ok, format!("deg = {}", c.degree));
    out.check(
        "uncovered_slopes_at_most_valleys",
        c.uncovered_slopes.len() <= c.v(),
        format!("{} ≤ {}", c.uncovered_slopes.len(), c.v()),
    );
    out.result = json!({ "sigma": sigma.to_string(), "signature": c.signature(), "classification": c });
    Ok(out)
}

pub fn run_matrix(cfg: &RunConfig, a: &PermArgs) -> Result<Outcome> {
    let sigma: Permutation = a.perm.parse()?;
    let t = tower_matrix(&sigma);
    let n = t.matrix.n();
    let mut header = vec!["row".to_string()];
    header.extend((1..=n).map(|j| format!("c{j}")));
    let mut out = Outcome { header, ..Outcome::new(&[]) };
    for (i, r) in t.matrix.rows().iter().enumerate() {
        let mut cells = vec![(i + 1).to_string()];
        cells.extend(r.iter().map(|x| x.to_string()));
        out.row(cells);
    }
    out.check("tower_structure", t.is_tower_matrix(), "");
    out.check("inverse_identity", inverse_identity_holds(&sigma), "M(σ)M(σ⁻¹) = I");
    let opts = UnimodularityOptions { budget: cfg.unimod_budget, seed: cfg.seed, ..Default::default() };
    let rep = unimodularity_check(&t.matrix, &opts)?;
    let detail = format!(
        "{} minors{}; {} violations",
        rep.checked,
        if rep.sampled { " (sampled)" } else { "" },
        rep.violations.len()
    );
    out.check("totally_unimodular", rep.totally_unimodular(), detail);
    out.result = json!({
        "sigma": sigma.to_string(),
        "matrix": t.matrix.rows(),
        "towers": t.towers,
        "unimodularity": rep,
    });
    Ok(out)
}

pub fn run_schedule(_cfg: &RunConfig, a: &PermArgs) -> Result<Outcome> {
    let sigma: Permutation = a.perm.parse()?;
    let s = schedule(&sigma);
    let mut out = Outcome::new(&["step", "case", "rows", "columns", "carried_in", "carried_out"]);
    for (i, st) in s.steps.iter().enumerate() {
        out.row(vec![
            (i + 1).to_string(),
            to_json(&st.case).trim_matches('"').to_string(),
            to_json(&st.rows),
            to_json(&st.columns),
            to_json(&st.carried_in),
            to_json(&st.carried_out),
        ]);
    }
    let used: usize = s.steps.iter().map(|st| st.columns.len()).sum();
    match s.verify() {
        Ok(()) => out.check("schedule_valid", true, ""),
        Err(v) => out.check("schedule_valid", false, v.0),
    }
    out.check("columns_used_once", used == sigma.k() + 1, format!("{used} columns"));
    out.result = json!(s);
    Ok(out)
}

#[derive(Clone, Debug, Args)]
pub struct ExponentArgs {
    #[arg(long, conflicts_with = "k")]
    pub perm: Option<String>,
    /// Every σ ∈ 𝔖_k
    #[arg(long)]
    pub k: Option<usize>,
}

pub fn run_exponent(cfg: &RunConfig, a: &ExponentArgs) -> Result<Outcome> {
    cfg.validate_kappa()?;
    let perms: Vec<Permutation> = match (&a.perm, a.k) {
        (Some(p), _) => vec![p.parse()?],
        (None, Some(k)) => {
            enum_budget(cfg, k)?;
            Permutation::all(k).collect()
        }
        (None, None) => return Err(Error::ConfigInvalid("exponent needs --perm or --k".into())),
    };
    let mut out = Outcome::new(&[
        "sigma",
        "degree",
        "total_lambda_power",
        "stepwise_lambda_power",
        "simplified_bound",
        "per_degree",
        "holds",
    ]);
    let mut failures = 0;
    let mut worst_margin = f64::INFINITY;
    let mut reports = Vec::new();
    for sigma in &perms {
        let r = exponent_report(sigma, cfg.kappa, cfg.d, cfg.delta)?;
        if !r.holds() {
            failures += 1;
        }
        worst_margin = worst_margin.min(r.total_lambda_power - r.simplified_bound);
        out.row(vec![
            sigma.to_string(),
            r.degree.to_string(),
            num(r.total_lambda_power),
            num(r.stepwise_lambda_power),
            num(r.simplified_bound),
            num(r.per_degree),
            r.holds().to_string(),
        ]);
        if perms.len() == 1 {
            reports.push(r);
        }
    }
    out.check(
        "total_power_at_least_simplified_bound",
        failures == 0,
        format!("{failures} of {} fail; smallest margin {worst_margin:e}", perms.len()),
    );
    out.result = json!({ "count": perms.len(), "failures": failures, "smallest_margin": worst_margin, "reports": reports });
    Ok(out)
}

// ---------------------------------------------------------------- partitions

#[derive(Clone, Debug, Args)]
pub struct UrsellArgs {
    #[arg(long)]
    pub n: usize,
    /// continuum or lattice
    #[arg(long, default_value = "lattice")]
    pub mode: String,
}

pub fn run_ursell(_cfg: &RunConfig, a: &UrsellArgs) -> Result<Outcome> {
    let mode: UrsellMode = a.mode.parse()?;
    if a.n == 0 {
        return Err(Error::ConfigInvalid("ursell needs n ≥ 1".into()));
    }
    let mut out = Outcome::new(&["n", "value", "oracle", "bound"]);
    let mut last = json!(null);
    for n in 1..=a.n {
        let c = ursell(n, mode)?;
        let oracle = match mode {
            UrsellMode::Lattice => ursell_closed_form(n),
            UrsellMode::Continuum => i64::from(n == 1),
        };
        let bound = if n >= 2 { (n as u64).pow(n as u32 - 2) } else { 1 };
        out.row(vec![n.to_string(), c.to_string(), oracle.to_string(), bound.to_string()]);
        out.check(format!("oracle_n{n}"), c == oracle, format!("{c} vs {oracle}"));
        out.check(format!("bound_n{n}"), c.unsigned_abs() <= bound, format!("|{c}| ≤ {bound}"));
        last = json!({ "n": n, "mode": mode, "value": c, "bound": bound });
    }
    out.result = last;
    Ok(out)
}

#[derive(Clone, Debug, Args)]
pub struct KArgs {
    #[arg(long)]
    pub k: usize,
}

pub fn run_partitions(cfg: &RunConfig, a: &KArgs) -> Result<Outcome> {
    let mut out = Outcome::new(&["index", "partition", "lumps", "s"]);
    let mut n = 0u64;
    for (i, p) in enumerate_partitions(a.k, cfg.enum_k_max)?.enumerate() {
        out.row(vec![i.to_string(), p.to_string(), p.num_lumps().to_string(), p.s().to_string()]);
        n += 1;
    }
    out.check("bell_count", n == bell(a.k), format!("{n} vs B_{} = {}", a.k, bell(a.k)));
    out.result = json!({ "k": a.k, "count": n });
    Ok(out)
}

/// Every distinct even partition obtained by pairing A with σ.
pub fn even_partitions(k: usize, cap: usize) -> Result<Vec<EvenPartition>> {
    let mut seen = HashSet::new();
    let mut all = Vec::new();
    for a in enumerate_partitions(k, cap)? {
        if a.is_trivial() {
            continue;
        }
        for sigma in Permutation::all(k) {
            let p = EvenPartition::from_pairing(&a, &sigma);
            if seen.insert(p.to_string()) {
                all.push(p);
            }
        }
    }
    Ok(all)
}

pub fn run_flip(cfg: &RunConfig, a: &KArgs) -> Result<Outcome> {
    let mut out = Outcome::new(&["partition", "start", "sigma", "flips", "degree", "s"]);
    let (mut incompatible, mut low_degree, mut protected, mut nonmonotone) = (0, 0, 0, 0);
    let parts = even_partitions(a.k, cfg.enum_k_max)?;
    for p in &parts {
        let proj = p.projection();
        let f = greedy_flip(p);
        let sigma = &f.sigma;
        let deg = classify(sigma).degree;
        incompatible += usize::from(!p.is_compatible(sigma));
        low_degree += usize::from((deg as f64) < proj.s() as f64 / 2.0);
        nonmonotone += usize::from(!f.strictly_decreasing());
        let support: HashSet<usize> = proj.nontrivial_support().into_iter().map(|i| sigma.at(i)).collect();
        protected += usize::from(internal_ladder_indices(sigma).iter().any(|i| support.contains(i)));
        out.row(vec![
            p.to_string(),
            f.start.to_string(),
            sigma.to_string(),
            f.flips.to_string(),
            deg.to_string(),
            proj.s().to_string(),
        ]);
    }
    let n = parts.len();
    out.check("compatible", incompatible == 0, format!("{incompatible} of {n}"));
    out.check("degree_at_least_half_support", low_degree == 0, format!("{low_degree} of {n}"));
    out.check("no_internal_ladder_in_support", protected == 0, format!("{protected} of {n}"));
    out.check("strictly_decreasing", nonmonotone == 0, format!("{nonmonotone} of {n}"));
    out.result = json!({ "k": a.k, "partitions": n });
    Ok(out)
}

#[derive(Clone, Debug, Args)]
pub struct CountsArgs {
    #[arg(long)]
    pub k: usize,
    /// Exponent γ in the degree sum Σ λ^{γ deg σ}
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2)]
    pub min_degree: usize,
}

pub fn run_counts(cfg: &RunConfig, a: &CountsArgs) -> Result<Outcome> {
    enum_budget(cfg, a.k)?;
    let counts = count_by_ladder(a.k)?;
    let mut out = Outcome::new(&["l", "count", "bound", "within"]);
    for c in &counts {
        out.row(vec![c.l.to_string(), c.count.to_string(), num(c.bound), c.within_bound().to_string()]);
    }
    let total: u64 = counts.iter().map(|c| c.count).sum();
    let fact: u64 = (1..=a.k as u64).product();
    out.check("sum_is_factorial", total == fact, format!("{total} vs {fact}"));
    let bad = counts.iter().filter(|c| !c.within_bound()).count();
    out.check("ladder_count_bound", bad == 0, format!("{bad} levels above 2(2k)^(k−ℓ)"));
    let sum = match degree_sum(a.k, a.gamma, cfg.lambda, a.min_degree) {
        Ok(s) => {
            out.check("degree_sum_bound", s.exact <= s.bound, format!("{:e} ≤ {:e}", s.exact, s.bound));
            Some(s)
        }
        Err(Error::DivergentBound { .. }) => None,
        Err(e) => return Err(e),
    };
    out.result = json!({ "k": a.k, "counts": counts, "degree_sum": sum });
    Ok(out)
}

// ---------------------------------------------------------------- K-identity

#[derive(Clone, Debug, Args)]
pub struct KIdentityArgs {
    /// Largest k; each set has between 1 and k + 1 frequencies
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 5.0, 20.0])]
    pub t: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-2, 1e-3])]
    pub eta: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub sets: usize,
}

pub fn run_kidentity(cfg: &RunConfig, a: &KIdentityArgs) -> Result<Outcome> {
    if a.t.is_empty() || a.eta.is_empty() {
        return Err(Error::ConfigInvalid("kidentity needs at least one t and one η".into()));
    }
    let mut rng = task_rng(cfg.seed, 0);
    let mut out =
        Outcome::new(&["set", "k", "t", "eta", "lhs_re", "lhs_im", "residual", "modulus_residual", "confluent"]);
    let mut worst: f64 = 0.0;
    for i in 0..a.sets {
        let k = rng.gen_range(0..=a.k);
        let t = a.t[rng.gen_range(0..a.t.len())];
        let eta = a.eta[rng.gen_range(0..a.eta.len())];
        let w: Vec<Complex64> =
            (0..=k).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), -rng.gen_range(0.0..1.0))).collect();
        let r = k_identity_check(&w, t, eta, &KIdentityOptions::default())?;
        worst = worst.max(r.residual);
        out.row(vec![
            i.to_string(),
            k.to_string(),
            num(t),
            num(eta),
            num(r.lhs.re),
            num(r.lhs.im),
            num(r.residual),
            num(r.modulus_residual),
            r.confluent.to_string(),
        ]);
    }
    out.check("residual", worst < cfg.tol_kidentity, format!("max {worst:e} < {:e}", cfg.tol_kidentity));
    out.result = json!({ "sets": a.sets, "max_residual": worst });
    out.provenance = json!({ "seed": cfg.seed });
    Ok(out)
}

// ---------------------------------------------------------------- self-energy

#[derive(Clone, Debug, Args)]
pub struct SelfEnergyArgs {
    /// Number of sampled energies in (0, α_max]
    #[arg(long, default_value_t = 10)]
    pub alphas: usize,
    #[arg(long, default_value_t = 3.0)]
    pub alpha_max: f64,
    /// Regulariser for the ε → 0 comparison
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Grid for the Hölder quotient; compared with twice as many points
    #[arg(long, default_value_t = 24)]
    pub holder_grid: usize,
}

fn holder_quotient(vals: &[SelfEnergyValue]) -> f64 {
    let mut q: f64 = 0.0;
    for (i, a) in vals.iter().enumerate() {
        for b in &vals[i + 1..] {
            q = q.max((a.value - b.value).norm() / (b.alpha - a.alpha).abs().sqrt());
        }
    }
    q
}

pub fn run_selfenergy(cfg: &RunConfig, a: &SelfEnergyArgs) -> Result<Outcome> {
    let profile = cfg.potential_profile()?;
    let opts = cfg.quad();
    let mut out = Outcome::new(&["alpha", "re", "im", "im_target", "re_eps", "im_eps", "rel_diff"]);
    let (mut worst_im, mut worst_lim): (f64, f64) = (0.0, 0.0);
    for i in 1..=a.alphas {
        let alpha = a.alpha_max * i as f64 / a.alphas as f64;
        let v = theta_with(alpha, 0.0, &profile, cfg.d, &opts)?;
        let e = theta_with(alpha, a.epsilon, &profile, cfg.d, &opts)?;
        let target = -PI * shell_density(alpha, &profile, cfg.d)?;
        let im_err = (v.value.im - target).abs() / target.abs().max(f64::MIN_POSITIVE);
        let rel = (e.value - v.value).norm() / v.value.norm();
        worst_im = worst_im.max(im_err);
        worst_lim = worst_lim.max(rel);
        out.row(vec![
            num(alpha),
            num(v.value.re),
            num(v.value.im),
            num(target),
            num(e.value.re),
            num(e.value.im),
            num(rel),
        ]);
    }
    out.check("imaginary_part", worst_im <= 1e-12, format!("max rel {worst_im:e}"));
    out.check(
        "epsilon_limit",
        worst_lim < cfg.tol_self_energy_rel,
        format!("max rel {worst_lim:e} < {:e}", cfg.tol_self_energy_rel),
    );
    let grid = |n: usize| -> Result<Vec<SelfEnergyValue>> {
        (0..=n).map(|i| theta_with(a.alpha_max * i as f64 / n as f64, 0.0, &profile, cfg.d, &opts)).collect()
    };
    let coarse = holder_quotient(&grid(a.holder_grid)?);
    let fine = holder_quotient(&grid(2 * a.holder_grid)?);
    out.check(
        "holder_quotient_stable",
        coarse.is_finite() && fine <= 2.0 * coarse && fine >= 0.5 * coarse,
        format!("{coarse:e} → {fine:e}"),
    );
    out.result = json!({ "holder_coarse": coarse, "holder_fine": fine, "max_limit_rel": worst_lim });
    out.provenance = json!({ "profile": profile.hash() });
    Ok(out)
}

#[derive(Clone, Debug, Args)]
pub struct LemmaArgs {
    /// logest, twoAint, threeAint or ladderint
    #[arg(long, default_value = "logest")]
    pub case: String,
    /// Exponent a for the twoAint and threeAint cases
    #[arg(long)]
    pub a: Option<f64>,
}

pub fn run_lemma33(cfg: &RunConfig, a: &LemmaArgs) -> Result<Outcome> {
    cfg.validate_eta()?;
    let mut case: LemmaCase = a.case.parse()?;
    if let (LemmaCase::TwoAInt { a: x } | LemmaCase::ThreeAInt { a: x }, Some(v)) = (&mut case, a.a) {
        *x = v;
    }
    let profile = RadialProfile::preset(&cfg.potential, 3)?;
    let rep = lemma33_check(&cfg.params(), &profile, case)?;
    let mut out = Outcome::new(&["alpha", "q", "eta", "lhs", "shape", "ratio", "refined"]);
    for e in &rep.entries {
        out.row(vec![num(e.alpha), num(e.q), num(e.eta), num(e.lhs), num(e.shape), num(e.ratio), e.refined.to_string()]);
    }
    out.check(
        "constant_stable_under_refinement",
        !rep.flagged,
        format!("calibration {:e}, refined {:e}", rep.calibration, rep.refined_max),
    );
    out.result = json!(rep);
    Ok(out)
}

#[derive(Clone, Debug, Args)]
pub struct AppendixArgs {
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
}

pub fn run_appendix(cfg: &RunConfig, a: &AppendixArgs) -> Result<Outcome> {
    let inp = AppendixInput { q: a.q, r: a.r, alpha: a.alpha, beta: a.beta };
    let rep = appendix_integrals(&inp, &cfg.params())?;
    let mut out = Outcome::new(&["integral", "value", "shape", "ratio"]);
    let ratios = rep.ratios();
    for (name, v, s, r) in [
        ("I1", rep.i1, rep.shape_i1, ratios[0]),
        ("I2", rep.i2, rep.shape_i2, ratios[1]),
        ("J", rep.j, rep.shape_j, ratios[2]),
    ] {
        out.row(vec![name.into(), num(v), num(s), num(r)]);
    }
    out.check("ratios_finite", ratios.iter().all(|r| r.is_finite() && *r >= 0.0), format!("{ratios:?}"));
    out.check("quadrature_converged", rep.refinement_change < 1e-3, format!("{:e}", rep.refinement_change));
    out.result = json!(rep);
    Ok(out)
}

// ---------------------------------------------------------------- ladder

#[derive(Clone, Debug, Args)]
pub struct LadderArgs {
    /// Time; defaults to λ⁻²
    #[arg(long)]
    pub t: Option<f64>,
    /// Highest order, at most 2
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

pub fn run_ladder(cfg: &RunConfig, a: &LadderArgs) -> Result<Outcome> {
    let setup = LadderSetup::new(
        cfg.params(),
        RadialProfile::preset(&cfg.potential, 3)?,
        RadialProfile::preset(&cfg.initial, 3)?,
    )?;
    let t = a.t.unwrap_or(1.0 / (cfg.lambda * cfg.lambda));
    let mut out = Outcome::new(&["t", "k", "value", "error", "markov", "ratio"]);
    let norm = ladder_value(0.0, 0, &setup)?.value.re;
    out.row(vec![num(0.0), "0".into(), num(norm), "".into(), num(1.0), num(norm)]);
    out.check(
        "normalisation",
        (norm - 1.0).abs() < cfg.tol_ladder_norm,
        format!("|{norm} − 1| < {:e}", cfg.tol_ladder_norm),
    );
    let mut values = Vec::new();
    for k in 0..=a.k {
        let v = ladder_value(t, k, &setup)?;
        let markov = match k {
            0 => Some(markov_no_collision(t, &setup)?),
            1 => Some(markov_one_collision(t, &setup)?),
            _ => None,
        };
        let ratio = markov.map(|m| v.value.re / m);
        out.row(vec![
            num(t),
            k.to_string(),
            num(v.value.re),
            num(v.error),
            markov.map_or(String::new(), num),
            ratio.map_or(String::new(), num),
        ]);
        if k == 1 {
            let r = ratio.unwrap_or(f64::NAN);
            out.check(
                "one_collision_weight",
                (r - 1.0).abs() < cfg.tol_ladder_rel,
                format!("ladder/markov = {r:.4} at λ = {}", cfg.lambda),
            );
        }
        values.push(json!({ "k": k, "value": v.value.re, "error": v.error, "markov": markov }));
    }
    out.result = json!({ "t": t, "normalisation": norm, "values": values });
    Ok(out)
}

// ---------------------------------------------------------------- kinetic

fn stochastic(cfg: &RunConfig, profile: &RadialProfile, ntraj: usize) -> serde_json::Value {
    json!({ "seed": cfg.seed, "ntraj": ntraj, "profile": profile.hash() })
}

#[derive(Clone, Debug, Args)]
pub struct KineticArgs {
    #[arg(long, default_value_t = 1.0)]
    pub e: f64,
    /// Length of the trajectory; defaults to 2000 mean waiting times
    #[arg(long)]
    pub tmax: Option<f64>,
}

pub fn run_kinetic(cfg: &RunConfig, a: &KineticArgs) -> Result<Outcome> {
    let profile = cfg.potential_profile()?;
    let p = JumpProcess::new(a.e, &profile, cfg.d)?;
    let t_max = a.tmax.unwrap_or(2000.0 / p.sigma0);
    let traj = p.trajectory(t_max, cfg.seed);
    let mut header = vec!["jump".to_string(), "time".to_string()];
    header.extend((1..=cfg.d).map(|i| format!("u{i}")));
    let mut out = Outcome { header, ..Outcome::new(&[]) };
    for (i, (t, u)) in traj.jump_times.iter().zip(&traj.directions).enumerate() {
        let mut cells = vec![i.to_string(), num(*t)];
        cells.extend(u.iter().map(|x| num(*x)));
        out.row(cells);
    }
    let waits = traj.waiting_times();
    if waits.len() < 20 {
        return Err(Error::InsufficientSamples { achieved: waits.len() as f64, requested: 20.0 });
    }
    let rate = p.sigma0;
    let ks = ks_test(&waits, |x| 1.0 - (-rate * x).exp());
    out.check("waiting_times_exponential", ks.p_value > cfg.ks_p_min, format!("KS p = {:.4}, n = {}", ks.p_value, ks.n));
    let norm_err = traj.directions.iter().map(|u| (u.iter().map(|x| x * x).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    out.check("directions_on_sphere", norm_err < 1e-12, format!("{norm_err:e}"));
    out.result = json!({
        "e": a.e,
        "sigma0": p.sigma0,
        "sigma1": p.sigma1,
        "jumps": waits.len(),
        "t_max": t_max,
        "ks": ks,
        "table_sampler": p.sampler().uses_table(),
    });
    out.provenance = stochastic(cfg, &profile, 1);
    Ok(out)
}

#[derive(Clone, Debug, Args)]
pub struct DiffusionArgs {
    #[arg(long, default_value_t = 1.0)]
    pub e: f64,
    /// Defaults to the config value
    #[arg(long)]
    pub ntraj: Option<usize>,
}

pub fn run_diffusion(cfg: &RunConfig, a: &DiffusionArgs) -> Result<Outcome> {
    let profile = cfg.potential_profile()?;
    let ntraj = a.ntraj.unwrap_or(cfg.ntraj);
    let p = JumpProcess::new(a.e, &profile, cfg.d)?;
    let est = diffusion_constant_of(&p, DiffusionMode::MonteCarlo, &McOptions::new(ntraj, cfg.seed))?;
    let rate = p.relaxation_rate();
    let lags: Vec<f64> = (0..=30).map(|i| 0.1 * i as f64 / rate).collect();
    let ac = autocorrelation(&p, &lags, &McOptions::new(ntraj, cfg.seed.wrapping_add(1)))?;
    let mut out = Outcome::new(&["lag", "autocorrelation", "std_error", "predicted"]);
    for ((l, v), s) in ac.lags.iter().zip(&ac.values).zip(&ac.std_errors) {
        out.row(vec![num(*l), num(*v), num(*s), num(2.0 * a.e * (-rate * l).exp())]);
    }
    let z = est.z_score();
    out.check(
        "monte_carlo_matches_closed_form",
        z.abs() < cfg.tol_sigmas,
        format!("{:e} ± {:e} vs {:e} (z = {z:.2})", est.value, est.std_error, est.closed_form),
    );
    out.check(
        "autocorrelation_exponential",
        ac.fit_residual < cfg.tol_autocorr && ac.residual < cfg.tol_autocorr,
        format!("fit residual {:.4}, model residual {:.4}", ac.fit_residual, ac.residual),
    );
    out.check(
        "relaxation_rate",
        (ac.fitted_slope - ac.predicted_slope).abs() < cfg.tol_sigmas * ac.slope_std_error,
        format!("{:e} ± {:e} vs {:e}", ac.fitted_slope, ac.slope_std_error, ac.predicted_slope),
    );
    out.result = json!({ "estimate": est, "z": z, "autocorrelation": {
        "fitted_slope": ac.fitted_slope,
        "slope_std_error": ac.slope_std_error,
        "predicted_slope": ac.predicted_slope,
        "residual": ac.residual,
        "fit_residual": ac.fit_residual,
    }});
    out.provenance = stochastic(cfg, &profile, ntraj);
    Ok(out)
}

#[derive(Clone, Debug, Args)]
pub struct HeatArgs {
    #[arg(long, default_value_t = 0.25)]
    pub e: f64,
    #[arg(long)]
    pub ntraj: Option<usize>,
    /// Observation times in units of the relaxation time
    #[arg(long, value_delimiter = ',', default_values_t = vec![100.0, 125.0, 150.0, 175.0, 200.0])]
    pub times: Vec<f64>,
}

pub fn run_heatfit(cfg: &RunConfig, a: &HeatArgs) -> Result<Outcome> {
    let profile = cfg.potential_profile()?;
    let ntraj = a.ntraj.unwrap_or(cfg.ntraj);
    let p = JumpProcess::new(a.e, &profile, cfg.d)?;
    let r = p.relaxation_rate();
    let times: Vec<f64> = a.times.iter().map(|x| x / r).collect();
    let rep = heat_compare(&p, &times, &McOptions::new(ntraj, cfg.seed))?;
    let mut out = Outcome::new(&["t", "mean_variance", "target", "exact_target", "rel_error", "ks_p_min"]);
    let mut worst_rel: f64 = 0.0;
    for row in &rep.rows {
        let mean = row.variance.iter().sum::<f64>() / row.variance.len() as f64;
        worst_rel = worst_rel.max(row.rel_error.abs());
        out.row(vec![num(row.t), num(mean), num(row.target), num(row.exact_target), num(row.rel_error), num(row.ks_p_min)]);
    }
    out.check("variance_is_2DT", worst_rel < cfg.tol_heat_rel, format!("max rel {worst_rel:.4}"));
    let final_p = rep.rows.last().map_or(0.0, |r| r.ks_p_min);
    out.check("gaussian_coordinates", final_p > cfg.ks_p_min, format!("KS p {final_p:.4} at the largest time"));
    out.check(
        "variance_slope",
        rep.slope_rel_error.abs() < cfg.tol_heat_rel,
        format!("slope/(2D_e) − 1 = {:.4}", rep.slope_rel_error),
    );
    out.result = json!(rep);
    out.provenance = stochastic(cfg, &profile, ntraj);
    Ok(out)
}

// ---------------------------------------------------------------- wave functions

#[derive(Clone, Debug, Args)]
pub struct WignerArgs {
    /// coherent, cat or chirp
    #[arg(long, default_value = "cat")]
    pub state: String,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 48.0)]
    pub length: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
}

const CAT: [(Complex64, f64); 2] = [(Complex64::new(0.6, 0.0), -3.0), (Complex64::new(0.0, 0.8), 3.0)];

pub fn test_state(name: &str, n: usize, length: f64) -> Result<WaveFunction> {
    let psi = match name {
        "coherent" => WaveFunction::from_fn(n, 1, length, |x| {
            Complex64::from_polar((-(x[0] - 0.5).powi(2) / 2.0).exp(), 2.0 * PI * 0.2 * x[0])
        })?,
        "cat" => WaveFunction::from_fn(n, 1, length, |x| {
            CAT.iter().map(|&(c, xk)| c * (-(x[0] - xk).powi(2) / 2.0).exp()).sum()
        })?,
        "chirp" => WaveFunction::from_fn(n, 1, length, |x| {
            Complex64::from_polar((-x[0] * x[0] / 4.5).exp(), 0.3 * x[0] * x[0])
        })?,
        other => return Err(Error::ConfigInvalid(format!("unknown test state {other:?}"))),
    };
    Ok(psi.normalised())
}

pub fn run_wigner(cfg: &RunConfig, a: &WignerArgs) -> Result<Outcome> {
    let psi = test_state(&a.state, a.n, a.length)?;
    let w = wigner(&psi, a.epsilon)?;
    let id = wigner_identities(&psi, &w);
    let mut out = Outcome::new(&["x", "v", "w"]);
    for (i, &x) in w.x.iter().enumerate() {
        for (mu, &v) in w.v.iter().enumerate() {
            out.row(vec![num(x), num(v), num(w.at(i, mu))]);
        }
    }
    let tol = cfg.tol_wigner;
    out.check("normalisation", id.normalisation < tol, format!("{:e}", id.normalisation));
    out.check("position_marginal", id.position_marginal < tol, format!("{:e}", id.position_marginal));
    out.check("velocity_marginal", id.velocity_marginal < tol, format!("{:e}", id.velocity_marginal));
    out.check("real_valued", id.max_imag < tol / a.epsilon, format!("{:e}", id.max_imag));
    let mut closed = None;
    if a.state == "cat" && a.epsilon == 1.0 {
        let scale = 1.0 / psi_raw_norm(a.n, a.length)?.sqrt();
        let coeffs: Vec<(Complex64, f64)> = CAT.iter().map(|&(c, xk)| (c * scale, xk)).collect();
        let mut err: f64 = 0.0;
        for (i, &x) in w.x.iter().enumerate() {
            for (mu, &v) in w.v.iter().enumerate() {
                err = err.max((w.at(i, mu) - gaussian_sum_wigner(&coeffs, 1.0, x, v)).abs());
            }
        }
        out.check("closed_form", err < tol, format!("{err:e}"));
        closed = Some(err);
    }
    out.result = json!({ "state": a.state, "identities": id, "min": w.min(), "closed_form_error": closed });
    Ok(out)
}

fn psi_raw_norm(n: usize, length: f64) -> Result<f64> {
    let raw = WaveFunction::from_fn(n, 1, length, |x| {
        CAT.iter().map(|&(c, xk)| c * (-(x[0] - xk).powi(2) / 2.0).exp()).sum()
    })?;
    Ok(raw.norm_sq())
}

#[derive(Clone, Debug, Args)]
pub struct EvolveArgs {
    /// Spatial dimension of the grid, independent of --d
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 32.0)]
    pub length: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Observation times
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0])]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub realisations: usize,
    /// Carrier frequency of the initial packet along the first axis
    #[arg(long, default_value_t = 0.4)]
    pub p0: f64,
}

pub fn run_evolve(cfg: &RunConfig, a: &EvolveArgs) -> Result<Outcome> {
    let profile = RadialProfile::preset(&cfg.potential, a.dim)?;
    let p0 = a.p0;
    let psi = WaveFunction::from_fn(a.n, a.dim, a.length, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::from_polar((-r2 / 8.0).exp(), 2.0 * PI * p0 * x[0])
    })?
    .normalised();
    let ens = ensemble_msd(&psi, &profile, cfg.lambda, &a.times, a.dt, a.realisations, cfg.seed)?;
    let mut out = Outcome::new(&["t", "msd"]);
    for (t, m) in ens.times.iter().zip(&ens.msd) {
        out.row(vec![num(*t), num(*m)]);
    }
    out.check("unitary", ens.norm_drift < 1e-10, format!("norm drift {:e}", ens.norm_drift));
    let slope = ens.max_slope();
    out.check("msd_growth_at_most_t4", slope <= 4.0, format!("max local slope {slope:.3}"));
    out.result = json!({ "series": ens, "local_slopes": ens.local_slopes() });
    out.provenance = stochastic(cfg, &profile, a.realisations);
    Ok(out)
}
