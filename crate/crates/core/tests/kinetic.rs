use std::f64::consts::PI;

use num_complex::Complex64;
use qdiff::kinetic::*;
use qdiff::profile::{sphere_area, Flavor, RadialProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauss() -> RadialProfile {
    RadialProfile::default_potential()
}

fn flat() -> RadialProfile {
    RadialProfile::constant(1.0, None)
}

#[test]
fn coarea_reproduces_volume_integrals() {
    let init = RadialProfile::default_initial(3);
    let wide = RadialProfile::gaussian(2.0, 1.7, Flavor::Potential);
    let profiles: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
        ("potential", Box::new(|r| gauss().sq(r))),
        ("initial", Box::new(move |r| init.sq(r))),
        ("shell", Box::new(move |r| r * r * wide.eval(r))),
    ];
    for d in [2, 3] {
        for (name, h) in &profiles {
            let a = coarea_total(h, d).unwrap();
            let b = radial_total(h, d).unwrap();
            assert!((a / b - 1.0).abs() < 1e-6, "{name} d={d}: {a} {b}");
        }
    }
}

#[test]
fn unit_bracket_formula() {
    for d in [2, 3, 4] {
        for e in [0.1f64, 1.0, 7.0] {
            let want = sphere_area(d - 1) * (2.0 * e).powf(d as f64 / 2.0 - 1.0);
            assert!((coarea_bracket(|_| 1.0, e, d) / want - 1.0).abs() < 1e-14);
        }
    }
    let init = RadialProfile::default_initial(3);
    assert!([1e-3, 0.5, 3.0].iter().all(|&e| coarea_bracket(|r| init.sq(r), e, 3) > 0.0));
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

#[test]
fn cross_section_trends() {
    // small e: σ₀ ≈ 2π|B̂(0)|²[1](e)
    for e in [1e-4, 1e-3] {
        let (s0, s1) = sigma_moments(e, &gauss(), 3).unwrap();
        let one = coarea_bracket(|_| 1.0, e, 3);
        assert!((s0 / (2.0 * PI * one) - 1.0).abs() < 1e-2, "{e}");
        assert!(s1.abs() < s0);
    }
    let es: Vec<f64> = (0..6).map(|i| 10.0 * 10f64.powf(i as f64 / 5.0)).collect();
    let s0: Vec<f64> = es.iter().map(|&e| sigma_moments(e, &gauss(), 3).unwrap().0).collect();
    assert!((log_slope(&es, &s0) + 0.5).abs() < 0.02);
}

#[test]
fn diffusion_constant_trends() {
    let de_s0 = |e: f64| {
        let p = JumpProcess::new(e, &gauss(), 3).unwrap();
        p.closed_form_diffusion() * p.sigma0
    };
    // D_e ~ e/σ₀ at small e and e²/σ₀ at large e
    let small = [1e-4, 3e-4, 1e-3];
    let large: Vec<f64> = (0..6).map(|i| 10.0 * 10f64.powf(i as f64 / 5.0)).collect();
    let ys: Vec<f64> = small.iter().map(|&e| de_s0(e)).collect();
    assert!((log_slope(&small, &ys) - 1.0).abs() < 0.01);
    let ys: Vec<f64> = large.iter().map(|&e| de_s0(e)).collect();
    assert!((log_slope(&large, &ys) - 2.0).abs() < 0.05);
}

#[test]
fn waiting_times_are_exponential() {
    let p = JumpProcess::new(1.0, &gauss(), 3).unwrap();
    let tr = p.trajectory(1e5 / p.sigma0, 11);
    let w = tr.waiting_times();
    assert!(w.len() > 90_000);
    let (mean, se) = mean_se(&w);
    assert!((mean - 1.0 / p.sigma0).abs() < 3.0 * se, "{mean} {se}");
    assert!(tr.jump_times.windows(2).all(|s| s[1] > s[0]));
    let r2 = 2.0 * tr.e;
    for t in [0.0, 10.0, 1000.0] {
        let m: f64 = tr.state_at(t).momentum().iter().map(|x| x * x).sum();
        assert!((m - r2).abs() < 1e-12);
    }
}

fn uniform_cos_cdf(c: f64) -> f64 {
    (0.5 * (c + 1.0)).clamp(0.0, 1.0)
}

#[test]
fn flat_kernel_scatters_uniformly() {
    let p = JumpProcess::new(0.7, &flat(), 3).unwrap();
    assert!(!p.sampler().uses_table());
    let from = [0.0, 0.0, 1.0];
    let cos: Vec<f64> = jump_directions(&p, &from, &McOptions::new(20_000, 3)).iter().map(|u| u[2]).collect();
    let ks = ks_test(&cos, uniform_cos_cdf);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn direction_chain_mixes() {
    let p = JumpProcess::new(1.0, &gauss(), 3).unwrap();
    let t = 10.0 / p.relaxation_rate();
    let dirs = directions_at(&p, &[0.0, 0.0, 1.0], t, &McOptions::new(10_000, 21));
    for axis in 0..3 {
        let c: Vec<f64> = dirs.iter().map(|u| u[axis]).collect();
        let ks = ks_test(&c, uniform_cos_cdf);
        assert!(ks.p_value > 0.01, "axis {axis}: {ks:?}");
    }
    // before mixing the start direction is still visible
    let early = directions_at(&p, &[0.0, 0.0, 1.0], 0.2 / p.relaxation_rate(), &McOptions::new(2_000, 21));
    let c: Vec<f64> = early.iter().map(|u| u[2]).collect();
    assert!(ks_test(&c, uniform_cos_cdf).p_value < 1e-6);
}

#[test]
fn diffusion_constant_monte_carlo() {
    for (i, e) in [0.25, 1.0, 4.0].into_iter().enumerate() {
        let est = diffusion_constant(e, &gauss(), 3, DiffusionMode::MonteCarlo, &McOptions::new(20_000, 100 + i as u64)).unwrap();
        assert!(est.z_score().abs() < 3.0, "{est:?}");
    }
    let flat_est = diffusion_constant(0.5, &flat(), 3, DiffusionMode::MonteCarlo, &McOptions::new(20_000, 5)).unwrap();
    assert!(flat_est.sigma1.abs() < 1e-10 * flat_est.sigma0);
    let want = 1.0 / (3.0 * (2.0 * PI).powi(2) * flat_est.sigma0);
    assert!((flat_est.closed_form / want - 1.0).abs() < 1e-12);
    assert!(flat_est.z_score().abs() < 3.0, "{flat_est:?}");
}

#[test]
fn requested_precision_is_enforced() {
    let mut opts = McOptions::new(200, 1);
    opts.rel_tol = Some(1e-4);
    let err = diffusion_constant(1.0, &gauss(), 3, DiffusionMode::MonteCarlo, &opts).unwrap_err();
    assert!(matches!(err, qdiff::Error::InsufficientSamples { .. }));
}

#[test]
fn monte_carlo_is_reproducible_across_pools() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| diffusion_constant(1.0, &gauss(), 3, DiffusionMode::MonteCarlo, &McOptions::new(500, 9)).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

fn lag_grid(rate: f64) -> Vec<f64> {
    (0..=30).map(|i| 0.1 * i as f64 / rate).collect()
}

#[test]
fn velocity_autocorrelation_decays_exponentially() {
    let p = JumpProcess::new(1.0, &gauss(), 3).unwrap();
    let c = autocorrelation(&p, &lag_grid(p.relaxation_rate()), &McOptions::new(20_000, 31)).unwrap();
    assert_eq!(c.values[0], 2.0);
    assert!(c.residual < 0.05 && c.fit_residual < 0.05, "{} {}", c.residual, c.fit_residual);
    assert!((c.fitted_slope - c.predicted_slope).abs() < 3.0 * c.slope_std_error, "{c:?}");

    let f = JumpProcess::new(1.0, &flat(), 3).unwrap();
    let c = autocorrelation(&f, &lag_grid(f.sigma0), &McOptions::new(20_000, 32)).unwrap();
    assert!((c.predicted_slope + f.sigma0).abs() < 1e-9 * f.sigma0);
    assert!((c.fitted_slope - c.predicted_slope).abs() < 3.0 * c.slope_std_error, "{c:?}");
}

#[test]
fn spread_matches_heat_equation() {
    let p = JumpProcess::new(0.25, &gauss(), 3).unwrap();
    let r = p.relaxation_rate();
    let times: Vec<f64> = [100.0, 125.0, 150.0, 175.0, 200.0].iter().map(|x| x / r).collect();
    let rep = heat_compare(&p, &times, &McOptions::new(20_000, 41)).unwrap();
    for row in &rep.rows {
        assert!(row.rel_error.abs() < 0.05, "{row:?}");
        // d = 3: MSD = 6D_eT
        assert!((row.msd / (6.0 * rep.d_e * row.t) - 1.0).abs() < 0.05);
    }
    assert!(rep.rows.last().unwrap().ks_p_min > 0.01);
    assert!(rep.slope_rel_error.abs() < 0.05, "{}", rep.slope_rel_error);
}

#[test]
fn free_flight_is_ballistic() {
    let p = JumpProcess::new(1.0, &gauss(), 3).unwrap();
    let t = 0.01 / p.sigma0;
    let rep = heat_compare(&p, &[t], &McOptions::new(2_000, 43)).unwrap();
    let v2 = 2.0 / (4.0 * PI * PI);
    assert!((rep.rows[0].msd / (v2 * t * t) - 1.0).abs() < 0.05);
    assert!((exact_msd(&p, t) / (v2 * t * t) - 1.0).abs() < 0.01);
}

#[test]
fn heat_kernel_carries_initial_weight() {
    let init = RadialProfile::default_initial(3);
    let p = JumpProcess::new(1.0, &gauss(), 3).unwrap();
    let h = HeatSolution::new(1.0, p.closed_form_diffusion(), &init, 3);
    let rule = qdiff::quad::gauss_legendre(200);
    let spread = (4.0 * h.d_e * 2.0).sqrt();
    let mass = qdiff::quad::gauss_legendre_on(|r| 4.0 * PI * r * r * h.density(2.0, &[r, 0.0, 0.0]), 0.0, 12.0 * spread, &rule);
    assert!((mass / h.weight - 1.0).abs() < 1e-10);
}

fn packet(n: usize, l: f64, s: f64, x0: f64, p0: f64) -> WaveFunction {
    WaveFunction::from_fn(n, 1, l, |x| Complex64::from_polar((-(x[0] - x0).powi(2) / (2.0 * s * s)).exp(), 2.0 * PI * p0 * x[0]))
        .unwrap()
}

fn two_bump(n: usize, l: f64, s: f64, bumps: &[(Complex64, f64)]) -> WaveFunction {
    WaveFunction::from_fn(n, 1, l, |x| bumps.iter().map(|&(c, xk)| c * (-(x[0] - xk).powi(2) / (2.0 * s * s)).exp()).sum())
        .unwrap()
}

#[test]
fn wigner_identities_on_test_states() {
    let coherent = packet(256, 48.0, 1.0, 0.5, 0.2).normalised();
    let bumps = [(Complex64::new(0.6, 0.0), -3.0), (Complex64::new(0.0, 0.8), 3.0)];
    let cat = two_bump(256, 48.0, 1.0, &bumps).normalised();
    let chirp = WaveFunction::from_fn(256, 1, 48.0, |x| {
        Complex64::from_polar((-x[0] * x[0] / 4.5).exp(), 0.3 * x[0] * x[0])
    })
    .unwrap()
    .normalised();
    for (name, psi) in [("coherent", &coherent), ("cat", &cat), ("chirp", &chirp)] {
        for eps in [1.0, 0.05] {
            let w = wigner(psi, eps).unwrap();
            let id = wigner_identities(psi, &w);
            assert!(id.worst() < 1e-10, "{name} ε={eps}: {id:?}");
            assert!(id.max_imag < 1e-10 / eps);
            assert!((w.total() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn two_bump_wigner_matches_closed_form() {
    let s = 1.0;
    let bumps = [(Complex64::new(0.6, 0.0), -3.0), (Complex64::new(0.0, 0.8), 3.0)];
    let psi = two_bump(256, 48.0, s, &bumps);
    let w = wigner(&psi, 1.0).unwrap();
    let mut err = 0.0f64;
    for (i, &x) in w.x.iter().enumerate() {
        for (mu, &v) in w.v.iter().enumerate() {
            err = err.max((w.at(i, mu) - gaussian_sum_wigner(&bumps, s, x, v)).abs());
        }
    }
    assert!(err < 1e-10, "{err}");
    // interference fringes at the midpoint take negative values
    let mid = w.x.iter().position(|&x| x.abs() < 1e-12).unwrap();
    assert!((0..w.v.len()).any(|mu| w.at(mid, mu) < -0.1));
    assert!(w.min() < -0.1);
    let coherent = wigner(&packet(256, 48.0, 1.0, 0.0, 0.1), 1.0).unwrap();
    assert!(coherent.min() > -1e-12);
}

#[test]
fn unresolved_state_is_refused() {
    let fast = packet(64, 48.0, 1.0, 0.0, 0.3);
    assert!(matches!(wigner(&fast, 1.0), Err(qdiff::Error::GridTooCoarse(_))));
}

fn observable(xi: f64, v: f64) -> Complex64 {
    Complex64::new((-xi * xi / 0.02).exp() * (-(v - 0.1f64).powi(2) / 0.01).exp(), 0.0)
}

#[test]
fn wigner_continuity_bound() {
    let psi1 = packet(128, 32.0, 1.0, 0.0, 0.1).normalised();
    let zero = psi1.scale(0.0);
    let r = wigner_continuity_check(&psi1, &zero, &observable).unwrap();
    assert_eq!(r.lhs, 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let h = psi1.spacing();
    for _ in 0..100 {
        let phi = packet(128, 32.0, rng.gen_range(0.7..1.5), rng.gen_range(-3.0..3.0), rng.gen_range(-0.2..0.2));
        // orthogonalise against ψ₁ and scale to norm 0.1
        let overlap: Complex64 = psi1.values.iter().zip(&phi.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * h;
        let mut perp = phi.clone();
        perp.values.iter_mut().zip(&psi1.values).for_each(|(b, a)| *b -= overlap * a);
        let perp = perp.normalised().scale(0.1);
        let r = wigner_continuity_check(&psi1, &perp, &observable).unwrap();
        assert!(r.ratio <= 1.0, "{r:?}");
    }
}

#[test]
fn wigner_continuity_is_linear_in_perturbation() {
    let psi1 = packet(128, 32.0, 1.0, 0.0, 0.1).normalised();
    let dir = packet(128, 32.0, 1.3, 1.0, -0.1).normalised();
    let q: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&s| wigner_continuity_check(&psi1, &dir.scale(s), &observable).unwrap().lhs / s)
        .collect();
    assert!(q.windows(2).all(|w| (w[1] / w[0] - 1.0).abs() < 0.02), "{q:?}");
}

#[test]
fn poisson_box_statistics() {
    let (l, d) = (2.0, 2);
    let draws: Vec<PoissonPotential> =
        (0..10_000).map(|i| sample_poisson_potential(l, d, &gauss(), i).unwrap()).collect();
    let counts: Vec<f64> = draws.iter().map(|p| p.count() as f64).collect();
    let (mean, se) = mean_se(&counts);
    assert!((mean - 4.0).abs() < 3.0 * se, "{mean} {se}");
    let w: Vec<f64> = draws.iter().flat_map(|p| p.weights.clone()).collect();
    let m = |k: i32| w.iter().map(|x| x.powi(k)).sum::<f64>() / w.len() as f64;
    let tol = 3.0 / (w.len() as f64).sqrt();
    assert!(m(1).abs() < tol && m(3).abs() < tol && m(2) == 1.0);
    assert!(draws.iter().flat_map(|p| p.centers.iter().flatten()).all(|&c| c.abs() <= 1.0));
}

#[test]
fn free_splitstep_is_exact() {
    let s = 1.0;
    let psi = packet(512, 80.0, s, 0.0, 0.0).normalised();
    let t = 40.0;
    let stepped = evolve_splitstep(&psi, None, 0.0, t, 0.5).unwrap();
    let exact = free_propagator(&psi, t);
    assert!(stepped.distance(&exact) < 1e-10);
    // ⟨x²⟩_t = s²/2 + t²⟨p²⟩/(2π)² with ⟨p²⟩ = 1/(8π²s²)
    let want = s * s / 2.0 + t * t / (32.0 * PI.powi(4) * s * s);
    assert!((stepped.second_moment() - want).abs() < 1e-8, "{} {want}", stepped.second_moment());
}

#[test]
fn splitstep_second_order() {
    let psi = packet(256, 40.0, 1.5, 0.0, 0.3).normalised();
    let pot = sample_poisson_potential(40.0, 1, &gauss(), 8).unwrap();
    let v = pot.on_grid(&psi).unwrap();
    let (lambda, t) = (0.5, 2.0);
    let reference = evolve_on_grid(&psi, &v, lambda, t, 0.1 / 64.0).unwrap();
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| evolve_on_grid(&psi, &v, lambda, t, dt).unwrap().distance(&reference))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{errs:?}");
    }
    let out = evolve_on_grid(&psi, &v, lambda, t, 0.1).unwrap();
    assert!((out.norm_sq() - 1.0).abs() < 1e-10);
}

#[test]
fn potential_grid_matches_direct_sum() {
    let psi = packet(64, 16.0, 1.0, 0.0, 0.0);
    let pot = sample_poisson_potential(16.0, 1, &gauss(), 4).unwrap();
    let v = pot.on_grid(&psi).unwrap();
    // B(x) = ∫ exp(−p²/2) e^{2πipx} dp = √(2π) exp(−2π²x²), summed over periodic images
    for j in [0, 17, 40] {
        let x = psi.coord(j);
        let direct: f64 = pot
            .centers
            .iter()
            .zip(&pot.weights)
            .map(|(y, w)| {
                (-3..=3)
                    .map(|m| {
                        let r = x - y[0] + 16.0 * m as f64;
                        w * (2.0 * PI).sqrt() * (-2.0 * PI * PI * r * r).exp()
                    })
                    .sum::<f64>()
            })
            .sum();
        // the grid keeps frequencies below N/(2L) = 2, where B̂ is below e^{−2}
        assert!((v[j] - direct).abs() < 0.2, "{j}: {} {direct}", v[j]);
    }
}

#[test]
fn disordered_spreading_slows_down() {
    let psi = WaveFunction::from_fn(64, 2, 32.0, |x| {
        Complex64::from_polar((-(x[0] * x[0] + x[1] * x[1]) / 8.0).exp(), 2.0 * PI * 0.4 * x[0])
    })
    .unwrap()
    .normalised();
    let times = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0];
    let free = msd_series(&psi, &vec![0.0; psi.len()], 0.0, &times, 0.1).unwrap();
    assert!(free.local_slopes().iter().all(|&s| s < 2.0 + 1e-6));
    let ens = ensemble_msd(&psi, &gauss(), 0.5, &times, 0.1, 8, 3).unwrap();
    assert!(ens.norm_drift < 1e-10);
    assert!(ens.max_slope() <= 4.0);
    let slopes = ens.local_slopes();
    assert!(slopes.first().unwrap() > slopes.last().unwrap(), "{slopes:?}");
    assert!(ens.msd.last().unwrap() < free.msd.last().unwrap());
}
