//! Monte Carlo checks of the continuum side.

use rand::Rng;
use rayon::prelude::*;

use cuttree::icrt::{
    build_pn, gamma_walk, genealogy_matrix, line_break, one_cut_distance_matrix, restricted_cut_measure,
    simulate_cuts, survival_eta1, timed_cut_one, ThetaParam,
};
use cuttree::metric::{four_point_holds, is_symmetric};
use cuttree::ptree::sample_ptree;
use cuttree::rng::{self, SimRng};
use cuttree::stats::{ks_test, rayleigh_cdf};
use cuttree::ProbWeights;

fn replicate<T: Send>(seed: u64, count: usize, f: impl Fn(&mut SimRng) -> T + Sync) -> Vec<T> {
    (0..count as u64).into_par_iter().map(|i| f(&mut rng::replica(seed, i))).collect()
}

fn half() -> ThetaParam {
    let h = 0.5f64.sqrt();
    ThetaParam::new(h, vec![h]).unwrap()
}

#[test]
fn survival_at_root_two() {
    let n = 100_000;
    let r2 = 2f64.sqrt();
    let hits = replicate(201, n, |r| usize::from(line_break(&half(), 1, r).unwrap().total_length() > r2));
    let p = hits.iter().sum::<usize>() as f64 / n as f64;
    let want = 2.0 * (-1.5f64).exp();
    assert!((want - survival_eta1(&half(), r2)).abs() < 1e-12);
    assert!((p - want).abs() < 4.0 * (want * (1.0 - want) / n as f64).sqrt(), "{p}");
}

#[test]
fn no_cut_probability_on_short_horizons() {
    let n = 100_000;
    let horizon = 0.3;
    let rt = line_break(&half(), 3, &mut rng::master(202)).unwrap();
    let mass = restricted_cut_measure(&rt).total_mass();
    let empty = replicate(203, n, |r| usize::from(simulate_cuts(&rt, horizon, r).unwrap().atoms.is_empty()));
    let p = empty.iter().sum::<usize>() as f64 / n as f64;
    let want = (-horizon * mass).exp();
    assert!((p - want).abs() < 4.0 * (want * (1.0 - want) / n as f64).sqrt(), "{p} vs {want}");
}

#[test]
fn atom_only_cuts_arrive_at_the_atom_rate() {
    // a tree made only of atom mass: exponential gaps with rate theta_1
    let theta = ThetaParam::new(0.05, vec![(1.0 - 0.0025f64).sqrt()]).unwrap();
    let mut r = rng::master(204);
    let mut gaps = Vec::new();
    while gaps.len() < 2_000 {
        let rt = line_break(&theta, 2, &mut r).unwrap();
        if rt.branch_points.is_empty() {
            continue;
        }
        let cuts = simulate_cuts(&rt, 200.0, &mut r).unwrap();
        let atom_times: Vec<f64> = cuts.atoms.iter().filter(|a| a.location.offset == 0.0).map(|a| a.time).collect();
        if let Some(&t) = atom_times.first() {
            gaps.push(t);
        }
    }
    let rate = theta.thetas()[0];
    let ks = ks_test(&gaps, |x| 1.0 - (-rate * x).exp()).unwrap();
    assert!(ks.p_value > 1e-3, "{ks:?}");
}

#[test]
fn reduced_tree_is_exchangeable_in_its_leaves() {
    let n = 40_000;
    let d = replicate(205, n, |r| {
        let m = line_break(&half(), 3, r).unwrap().leaf_distance_matrix();
        [m[1][2], m[1][3], m[2][3]]
    });
    let mean = |i: usize| d.iter().map(|x| x[i]).sum::<f64>() / n as f64;
    let var = |i: usize| {
        let m = mean(i);
        d.iter().map(|x| (x[i] - m).powi(2)).sum::<f64>() / n as f64
    };
    let (m0, m1, m2) = (mean(0), mean(1), mean(2));
    let se = (var(0) / n as f64).sqrt();
    assert!((m0 - m1).abs() < 6.0 * se && (m1 - m2).abs() < 6.0 * se, "{m0} {m1} {m2}");
    let (v0, v2) = (var(0), var(2));
    assert!((v0 - v2).abs() / v0 < 0.05, "{v0} {v2}");
}

#[test]
fn single_target_genealogy_is_rayleigh() {
    let theta = ThetaParam::brownian();
    let runs = replicate(206, 1_000, |r| genealogy_matrix(&theta, 1, 200, None, r).unwrap());
    for g in &runs {
        assert!(is_symmetric(&g.matrix, 1e-12) && four_point_holds(&g.matrix, 1e-9));
    }
    let xs: Vec<f64> = runs.iter().map(|g| g.l_infinity[0]).collect();
    let ks = ks_test(&xs, rayleigh_cdf).unwrap();
    assert!(ks.statistic < 0.05, "{ks:?}");
}

#[test]
fn discrete_distance_bundle_on_many_trees() {
    let failures: usize = replicate(207, 10_000, |r| {
        let n = r.random_range(1..=30);
        let w = ProbWeights::random(n, 0.05, r);
        let t = sample_ptree(&w, r).unwrap();
        let v = w.sample(r);
        let cut = timed_cut_one(&t, v, &w, r).unwrap();
        let xi: Vec<usize> = (1..=n).collect();
        let d = one_cut_distance_matrix(&t, &cut, &xi).unwrap();
        let h = &cut.record.cut_tree;
        let ok = d
            .points
            .iter()
            .enumerate()
            .all(|(a, &x)| d.points.iter().enumerate().all(|(b, &y)| d.matrix[a][b] == h.distance(x, y)));
        usize::from(!ok)
    })
    .into_iter()
    .sum();
    assert_eq!(failures, 0);
}

#[test]
fn merging_times_are_bounded_by_the_poisson_mean() {
    // E[mg(i, j)] against d_H(xi_i, xi_j) / d_H(U, xi_i ^ xi_j)
    let n = 500;
    let w = ProbWeights::uniform(n);
    let stats = replicate(208, 2_000, |r| {
        let h = sample_ptree(&w, r).unwrap();
        let u = w.sample(r);
        let (a, b) = (r.random_range(1..=n), r.random_range(1..=n));
        let meet = {
            let pa = h.path_to_root(a);
            let pb: std::collections::HashSet<usize> = h.path_to_root(b).into_iter().collect();
            *pa.iter().find(|x| pb.contains(x)).unwrap()
        };
        let denom = h.distance(u, meet);
        let g = gamma_walk(&h, u, &[a, b], &w, r).unwrap();
        (g.mg[0][1] as f64, h.distance(a, b) as f64, denom as f64)
    });
    let kept: Vec<&(f64, f64, f64)> = stats.iter().filter(|s| s.2 > 0.0).collect();
    let mean_mg = kept.iter().map(|s| s.0).sum::<f64>() / kept.len() as f64;
    let mean_bound = kept.iter().map(|s| s.1 / s.2).sum::<f64>() / kept.len() as f64;
    assert!(mean_mg <= mean_bound, "{mean_mg} > {mean_bound}");
}

#[test]
fn discretized_weights_follow_the_icrt_law_at_moderate_n() {
    let w = build_pn(&half(), 2_000).unwrap();
    let sigma = w.sigma();
    let xs = replicate(209, 4_000, |r| {
        let t = sample_ptree(&w, r).unwrap();
        sigma * (t.depth(w.sample(r)) + 1) as f64
    });
    let ks = ks_test(&xs, |x| 1.0 - survival_eta1(&half(), x)).unwrap();
    assert!(ks.statistic < 0.06, "{ks:?}");
}
