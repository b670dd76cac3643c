use std::f64::consts::PI;

use proptest::prelude::*;
use qdiff::profile::RadialProfile;
use qdiff::self_energy::{
    angular_s, angular_s_cubature, angular_s_polar, appendix_integrals, lemma_lhs, omega, shell_density, theta,
    triple_norm, AppendixInput, LemmaCase, LemmaContext, PropagatorParams, ThetaTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauss() -> RadialProfile {
    RadialProfile::default_potential()
}

#[test]
fn imaginary_part_sign() {
    for i in 0..40 {
        let alpha = -1.0 + 0.15 * i as f64;
        let v = theta(alpha, 0.0, &gauss(), 3).unwrap();
        if alpha <= 0.0 {
            assert_eq!(v.value.im, 0.0);
        } else {
            assert!(v.value.im < 0.0);
            let want = -PI * shell_density(alpha, &gauss(), 3).unwrap();
            assert_eq!(v.value.im, want);
        }
    }
}

#[test]
fn epsilon_limit_and_difference_shape() {
    let eps = [1e-2, 1e-3, 1e-4];
    let vals: Vec<_> = eps.iter().map(|&e| theta(1.0, e, &gauss(), 3).unwrap().value).collect();
    let lim = theta(1.0, 0.0, &gauss(), 3).unwrap().value;
    let errs: Vec<f64> = vals.iter().map(|v| (v - lim).norm()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    let mut consts = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if eps[i] > eps[j] {
                consts.push((vals[i] - vals[j]).norm() * eps[i].sqrt() / (eps[i] - eps[j]));
            }
        }
    }
    let c = consts.iter().cloned().fold(0.0, f64::max);
    assert!(c.is_finite() && c < 100.0, "{consts:?}");
}

fn holder_quotient(n: usize) -> f64 {
    let alphas: Vec<f64> = (0..=n).map(|i| 3.0 * i as f64 / n as f64).collect();
    let vals: Vec<_> = alphas.iter().map(|&a| theta(a, 0.0, &gauss(), 3).unwrap().value).collect();
    let mut q: f64 = 0.0;
    for i in 0..alphas.len() {
        for j in i + 1..alphas.len() {
            q = q.max((vals[i] - vals[j]).norm() / (alphas[j] - alphas[i]).sqrt());
        }
    }
    q
}

#[test]
fn holder_quotient_stable() {
    let coarse = holder_quotient(24);
    let fine = holder_quotient(48);
    assert!(coarse.is_finite() && fine <= 2.0 * coarse && fine >= 0.5 * coarse, "{coarse} {fine}");
}

#[test]
fn large_energy_decay() {
    let es: Vec<f64> = (0..10).map(|i| 10.0 * 10f64.powf(i as f64 / 9.0)).collect();
    let xs: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = es.iter().map(|&e| angular_s(e, &gauss(), 3).unwrap().ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn angular_dual_method() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let e: f64 = rng.gen_range(0.0..10.0);
        let a = angular_s_polar(e, &gauss(), 3).unwrap();
        let b = angular_s_cubature(e, &gauss(), 256).unwrap();
        assert!((a - b).abs() < 1e-6 * a, "e={e}: {a} vs {b}");
    }
}

#[test]
fn table_against_direct() {
    let table = ThetaTable::build(&gauss(), 3, 12.0, ThetaTable::DEFAULT_POINTS).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let p: f64 = rng.gen_range(0.05..4.5);
        let e = 0.5 * p * p;
        let a = table.eval(e).unwrap();
        let b = theta(e, 0.0, &gauss(), 3).unwrap().value;
        assert!((a - b).norm() < 1e-4 * b.norm(), "p={p}");
    }
}

#[test]
fn omega_shell() {
    let table = ThetaTable::build(&gauss(), 3, 12.0, ThetaTable::DEFAULT_POINTS).unwrap();
    let free = PropagatorParams::new(0.0, 0.05, 0.0);
    assert_eq!(omega(1.3, &free, &table).unwrap().re, 0.5 * 1.3 * 1.3);
    let p = PropagatorParams::new(0.3, 0.05, 0.0);
    let mut c1 = f64::INFINITY;
    for i in 1..=40 {
        let pm = 0.1 * i as f64;
        let w = omega(pm, &p, &table).unwrap();
        assert!(w.im <= 0.0);
        c1 = c1.min(-w.im / (p.lambda.powi(2) * pm.powi(1).min(1.0 / pm)));
    }
    assert!(c1 > 0.5, "c1 = {c1}");
    let at_shell = omega(2f64.sqrt(), &p, &table).unwrap();
    assert!(at_shell.im <= -c1 * p.lambda.powi(2) * 2f64.sqrt().recip());
}

#[test]
fn ladder_integral_on_shell() {
    // On shell the integrand is a Lorentzian of width λ²|Im Θ| + η; once that
    // width is small the integral tends to πf/(πf + λ^κ).
    let mut last = 0.0;
    for lambda in [0.3, 0.1, 0.01] {
        let p = PropagatorParams::new(lambda, 0.05, 0.0);
        let ctx = LemmaContext::new(p, gauss(), 3, 2.0).unwrap();
        let q = 1.0;
        let alpha = omega(q, &p, ctx.table()).unwrap().re;
        let lhs = lemma_lhs(LemmaCase::LadderInt, alpha, q, &ctx).unwrap();
        assert!(lhs <= 1.0 && lhs > last, "λ={lambda}: {lhs}");
        last = lhs;
        if lambda == 0.01 {
            let pf = PI * shell_density(0.5, &gauss(), 3).unwrap();
            let narrow = pf / (pf + lambda.powf(p.kappa));
            assert!((lhs - narrow).abs() < 0.02 && (lhs - 1.0).abs() < 0.5, "{lhs} vs {narrow}");
        }
        let report = ctx.check(LemmaCase::LadderInt).unwrap();
        assert!(!report.flagged, "{:?}", (report.calibration, report.refined_max));
    }
}

#[test]
fn lemma_reports_stable() {
    let p = PropagatorParams::new(0.3, 0.05, 0.0);
    let ctx = LemmaContext::new(p, gauss(), 3, 2.0).unwrap();
    for case in [LemmaCase::LogEst, LemmaCase::TwoAInt { a: 0.5 }, LemmaCase::ThreeAInt { a: 0.0 }] {
        let r = ctx.check(case).unwrap();
        assert!(!r.flagged, "{case:?}: {} {}", r.calibration, r.refined_max);
    }
}

#[test]
fn logest_grows_like_log_lambda() {
    let mut pts = Vec::new();
    for lambda in [0.3, 0.1, 0.03] {
        let p = PropagatorParams::new(lambda, 0.05, 0.0);
        let ctx = LemmaContext::new(p, gauss(), 3, 1.0).unwrap();
        let lhs = lemma_lhs(LemmaCase::LogEst, 0.5, 1.0, &ctx).unwrap();
        pts.push((f64::ln(lambda).abs(), lhs));
    }
    let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    assert!(slopes.iter().all(|s| s.is_finite() && *s >= 0.0), "{pts:?}");
    assert!(slopes[1] <= 2.0 * slopes[0].max(1e-3), "{slopes:?}");
}

#[test]
fn appendix_shapes() {
    let p = PropagatorParams::new(0.1, 0.05, 0.001);
    let zero = appendix_integrals(&AppendixInput { q: 0.0, ..Default::default() }, &p).unwrap();
    assert!(zero.ratios().iter().all(|r| r.is_finite()));

    let one = appendix_integrals(&AppendixInput::default(), &p.with_eta(1e-4)).unwrap();
    assert!(one.ratios()[0].is_finite() && one.refinement_change < 1e-3);

    for alpha in [0.25, 0.5, 1.0] {
        let pts: Vec<(f64, f64)> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&eta| {
                let inp = AppendixInput { alpha, ..Default::default() };
                let r = appendix_integrals(&inp, &p.with_eta(eta)).unwrap();
                (f64::ln(eta).abs(), r.j)
            })
            .collect();
        let (x0, y0) = pts[0];
        let (x2, y2) = pts[2];
        let slope = (y2 - y0) / (x2 - x0);
        let mid = y0 + slope * (pts[1].0 - x0);
        assert!((mid - pts[1].1).abs() < 0.1 * pts[1].1, "α={alpha}: {pts:?}");
    }
}

proptest! {
    #[test]
    fn triple_norm_triangle(
        a in prop::collection::vec(-3.0..3.0f64, 3),
        b in prop::collection::vec(-3.0..3.0f64, 3),
        eta in 1e-6..1.0f64,
    ) {
        let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert!(triple_norm(&s, eta) <= triple_norm(&a, eta) + triple_norm(&b, eta) + 1e-12);
    }
}
