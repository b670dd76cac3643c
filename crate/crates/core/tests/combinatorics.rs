use std::collections::HashSet;

use proptest::prelude::*;
use qdiff::partitions::{
    bell, break_lump, compatible_permutations, count_by_ladder, degree_sum, enumerate_partitions, greedy_flip,
    internal_ladder_indices, ursell, ursell_closed_form, AuxMomentaLedger, EvenPartition, Partition, UrsellMode,
};
use qdiff::perm::{
    classify, constraint_residual, inverse_identity_holds, resolve_tilde, tower_matrix, unimodularity_check,
    IndexClass, MomentumAssignment, Momenta, Permutation,
};

#[test]
fn classification_partitions_rows_through_k7() {
    for k in 0..=7 {
        for sigma in Permutation::all(k) {
            let c = classify(&sigma);
            let mut all: Vec<usize> = [&c.peaks, &c.valleys, &c.ladders, &c.slopes]
                .into_iter()
                .flatten()
                .copied()
                .chain([c.last])
                .collect();
            all.sort_unstable();
            assert_eq!(all, (1..=k + 1).collect::<Vec<_>>(), "{sigma}");
            assert_eq!(c.p(), c.v(), "{sigma}");
            assert_eq!(c.degree, k - c.l());
            if sigma.is_identity() {
                assert_eq!(c.degree, 0);
            } else {
                assert!(c.degree >= 2, "{sigma}");
            }
            assert!(c.uncovered_slopes.len() <= c.v(), "{sigma}");
            let mut slopes: Vec<usize> = c.covered_slopes.iter().chain(&c.uncovered_slopes).copied().collect();
            slopes.sort_unstable();
            assert_eq!(slopes, c.slopes);
            for i in 1..=k + 1 {
                assert_eq!(c.pivot(i).is_none(), c.class(i) == IndexClass::Peak);
            }
            for &i in c.slopes.iter().chain(&c.valleys) {
                assert!(c.tower.tower(c.pivot(i).unwrap()).height() >= 2, "{sigma} row {i}");
            }
            for run in &c.ladder_runs {
                let bottom_class = c.class(run.bottom);
                assert!(matches!(bottom_class, IndexClass::Ladder | IndexClass::Valley | IndexClass::Last));
            }
        }
    }
}

#[test]
fn both_bottom_branches_occur() {
    let mut plain = 0;
    let mut extended = 0;
    for sigma in Permutation::all(5) {
        for run in classify(&sigma).ladder_runs {
            if run.extended_bottom() {
                extended += 1;
            } else {
                plain += 1;
            }
        }
    }
    assert!(plain > 0 && extended > 0);
}

#[test]
fn tower_matrices_unimodular_and_invertible_through_k5() {
    for k in 0..=5 {
        for sigma in Permutation::all(k) {
            let t = tower_matrix(&sigma);
            assert!(t.is_tower_matrix());
            assert!(inverse_identity_holds(&sigma), "{sigma}");
            let rep = unimodularity_check(&t.matrix, &Default::default()).unwrap();
            assert!(!rep.sampled);
            assert!(rep.totally_unimodular(), "{sigma}: {:?}", rep.violations.first());
        }
    }
}

#[test]
fn internal_ladder_inequality_through_k7() {
    for k in 1..=7 {
        for sigma in Permutation::all(k).filter(|s| !s.is_identity()) {
            let istar = internal_ladder_indices(&sigma);
            let c = classify(&sigma);
            assert!(istar.iter().all(|i| c.ladders.contains(i)));
            assert!(k - istar.len() <= 2 * c.degree, "{sigma}");
        }
    }
}

#[test]
fn ladder_counts_through_k7() {
    for k in 1..=7 {
        let counts = count_by_ladder(k).unwrap();
        assert_eq!(counts.iter().map(|c| c.count).sum::<u64>(), (1..=k as u64).product::<u64>());
        assert!(counts.iter().all(|c| c.within_bound()), "k={k}");
        assert_eq!(counts[k].count, 1);
        assert_eq!(counts[k - 1].count, 0);
    }
}

#[test]
fn degree_sum_limit() {
    let k = 4;
    let d = 2;
    let exact_count = Permutation::all(k).filter(|s| classify(s).degree == d).count() as f64;
    let mut last_err = f64::INFINITY;
    for lambda in [1e-2, 1e-3, 1e-4] {
        let s = degree_sum(k, 1.0, lambda, d).unwrap();
        assert!(s.exact <= s.bound);
        let err = (s.exact / lambda.powi(d as i32) - exact_count).abs();
        assert!(err < last_err);
        last_err = err;
    }
    assert!(last_err / exact_count < 1e-2);
}

#[test]
fn ursell_oracle_through_6() {
    for n in 1..=6 {
        let c = ursell(n, UrsellMode::Lattice).unwrap();
        assert_eq!(c, ursell_closed_form(n));
        if n >= 2 {
            assert!(c.unsigned_abs() <= (n as u64).pow(n as u32 - 2));
        }
    }
}

fn even_partitions(k: usize) -> Vec<EvenPartition> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in enumerate_partitions(k, 10).unwrap() {
        for sigma in Permutation::all(k) {
            let p = EvenPartition::from_pairing(&a, &sigma);
            if seen.insert(p.to_string()) {
                out.push(p);
            }
        }
    }
    out
}

#[test]
fn compatible_counts_through_k5() {
    for k in 0..=5 {
        for p in even_partitions(k) {
            let (perms, count) = compatible_permutations(&p);
            assert_eq!(perms.len() as u64, count);
            assert!(perms.iter().all(|s| p.is_compatible(s)));
            let distinct: HashSet<_> = perms.iter().collect();
            assert_eq!(distinct.len(), perms.len());
        }
    }
}

#[test]
fn greedy_flip_through_k6() {
    for k in 1..=6 {
        for p in even_partitions(k) {
            let a = p.projection();
            if a.is_trivial() {
                continue;
            }
            let out = greedy_flip(&p);
            let sigma = &out.sigma;
            assert!(p.is_compatible(sigma), "{p}");
            assert!(out.strictly_decreasing(), "{p}: {:?}", out.protected_counts);
            let deg = classify(sigma).degree as f64;
            assert!(deg >= a.s() as f64 / 2.0, "{p} -> {sigma}");
            let support: HashSet<usize> = a.nontrivial_support().into_iter().map(|i| sigma.at(i)).collect();
            assert!(internal_ladder_indices(sigma).iter().all(|i| !support.contains(i)), "{p}");
        }
    }
}

#[test]
fn partition_counts_are_bell() {
    for k in 0..=7 {
        assert_eq!(enumerate_partitions(k, 10).unwrap().count() as u64, bell(k));
    }
}

fn arb_perm(max_k: usize) -> impl Strategy<Value = Permutation> {
    (0..=max_k)
        .prop_flat_map(|k| Just((1..=k).collect::<Vec<usize>>()).prop_shuffle())
        .prop_map(|v| Permutation::new(v).unwrap())
}

fn arb_vecs(len: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0..5.0f64, d), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn resolve_tilde_satisfies_deltas(
        (sigma, p, u, xi) in arb_perm(6).prop_flat_map(|s| {
            let k = s.k();
            (Just(s), arb_vecs(k + 1, 3), arb_vecs(k, 3), prop::collection::vec(-5.0..5.0f64, 3))
        })
    ) {
        let k = sigma.k();
        let mut u = u;
        if k > 0 {
            // force Σu = 0 by adjusting the last entry
            let mut s = vec![0.0; 3];
            for v in &u[..k - 1] { for c in 0..3 { s[c] += v[c]; } }
            for c in 0..3 { u[k - 1][c] = -s[c]; }
        }
        let assign = MomentumAssignment { p: Momenta::from_vecs(3, &p), u: Momenta::from_vecs(3, &u), xi };
        let tilde = resolve_tilde(&sigma, &assign, 1e-9).unwrap();
        prop_assert!(constraint_residual(&sigma, &assign, &tilde) < 1e-12);
    }

    #[test]
    fn classes_are_exclusive(sigma in arb_perm(9)) {
        let c = classify(&sigma);
        let total = c.p() + c.v() + c.l() + c.s() + 1;
        prop_assert_eq!(total, sigma.k() + 1);
    }

    #[test]
    fn break_sequences_preserve_sum(
        seed_lumps in prop::collection::vec(0usize..3, 1..=8),
        moves in prop::collection::vec((0usize..8, prop::collection::vec(-2.0..2.0f64, 2)), 0..10)
    ) {
        let k = seed_lumps.len();
        let mut lumps = vec![Vec::new(); 3];
        for (i, &b) in seed_lumps.iter().enumerate() { lumps[b].push(i + 1); }
        lumps.retain(|l| !l.is_empty());
        let mut p = Partition::new(k, lumps).unwrap();
        let mut ledger = AuxMomentaLedger::zeros(&p, 2);
        for (pick, r) in moves {
            let Some(idx) = p.lumps().iter().enumerate().filter(|(_, l)| l.len() > 1).map(|(i, _)| i).nth(pick % 3) else { break };
            let l = p.lumps()[idx].clone();
            let cut = 1 + pick % (l.len() - 1);
            let (np, nl, _) = break_lump(&p, idx, (&l[..cut], &l[cut..]), &r, &ledger).unwrap();
            prop_assert_eq!(np.num_lumps(), p.num_lumps() + 1);
            p = np;
            ledger = nl;
            prop_assert!(ledger.sum().iter().all(|x| x.abs() < 1e-12));
        }
    }
}
