//! Named verification suites. Each one runs a seeded Monte Carlo experiment
//! or an exhaustive check and returns pass/fail verdicts with pinned
//! thresholds.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::cutting::{coupled_cut_family, cut_complete, cut_one};
use crate::error::{Error, Result};
use crate::icrt::{build_pn, eta1_cdf, gamma_walk, genealogy_matrix, line_break, ThetaParam};
use crate::metric::{four_point_holds, is_symmetric};
use crate::ptree::{enumerate_rooted_trees, ptree_pmf, repeat_times, sample_ptree, ProbWeights, RootedTree};
use crate::rng::{self, SimRng};
use crate::shuffle::{reverse_one, rewire_tau, sample_u_vector, shuff_one, shuff_with};
use crate::stats::{
    chi_square_gof, counts_of, exact_span_law, exact_tree_law, exact_tree_vertex_law, ks_test, ks_two_sample,
    rayleigh_cdf, tv_to_pmf, Verdict,
};

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_140_311;

pub const CAYLEY_TOL: f64 = 1e-9;
pub const P_VALUE_FLOOR: f64 = 1e-3;
pub const SPAN_LAW_TV: f64 = 0.01;
pub const RAYLEIGH_KS: f64 = 0.02;
pub const LINE_BREAK_KS: f64 = 0.01;
pub const FINITE_N_KS: f64 = 0.05;
pub const BIRTHDAY_KS: f64 = 0.015;
pub const GENEALOGY_KS: f64 = 0.03;

/// `(name, description)` of every suite, in criterion order.
pub const SUITES: &[(&str, &str)] = &[
    ("cayley", "sum of pi over all rooted trees is 1, n = 1..7"),
    ("sampler-law", "Aldous-Broder output vs exact p-tree law, n = 4"),
    ("span-law", "number of 1-cuts vs #Span(T, V), n = 5"),
    ("cut-tree-law", "complete cut tree vs exact p-tree law, n = 4"),
    ("one-cut-duality", "(shuff(T, V), V) vs pi x p, and exact reversal"),
    ("k-cut-coupling", "coupled backbones are nested spans, n = 30, K = 4"),
    ("rewire-tree", "rewiring with admissible marks gives a tree"),
    ("rayleigh", "scaled cut count of uniform trees vs Rayleigh, n = 10^4"),
    ("line-break-law", "length of R_1 vs the analytic survival function"),
    ("finite-n-idl", "scaled cut count under (H)-weights vs the ICRT law, n = 5000"),
    ("birthday", "first repeat time minus 1 vs root-to-node distance, n = 50"),
    ("gamma-walk", "walk distances equal shuffled-tree distances, n = 500"),
    ("genealogy", "estimated cut-tree genealogy: Rayleigh marginal and tree metric"),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

/// Runs one suite at full size. `"all"` runs every suite in order.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<Verdict>> {
    run_suite_scaled(name, seed, 1.0)
}

/// Like [`run_suite`] with every sample count multiplied by `fraction`.
/// Thresholds stay pinned, so reduced runs are smoke tests only.
pub fn run_suite_scaled(name: &str, seed: u64, fraction: f64) -> Result<Vec<Verdict>> {
    let s = Sizer(fraction);
    match name {
        "all" => {
            let mut out = Vec::new();
            for (n, _) in SUITES {
                out.extend(run_suite_scaled(n, seed, fraction)?);
            }
            Ok(out)
        }
        "cayley" => cayley(seed),
        "sampler-law" => sampler_law(seed, s),
        "span-law" => span_law(seed, s),
        "cut-tree-law" => cut_tree_law(seed, s),
        "one-cut-duality" => one_cut_duality(seed, s),
        "k-cut-coupling" => k_cut_coupling(seed, s),
        "rewire-tree" => rewire_tree(seed, s),
        "rayleigh" => rayleigh(seed, s),
        "line-break-law" => line_break_law(seed, s),
        "finite-n-idl" => finite_n_idl(seed, s),
        "birthday" => birthday(seed, s),
        "gamma-walk" => gamma_walk_oracle(seed, s),
        "genealogy" => genealogy(seed, s),
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}

#[derive(Clone, Copy)]
struct Sizer(f64);

impl Sizer {
    fn n(self, full: usize) -> usize {
        ((full as f64 * self.0).round() as usize).max(40)
    }
}

/// Replica `i` gets its own stream, so results do not depend on scheduling.
fn replicate<T, F>(seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SimRng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| f(&mut rng::replica(seed, i as u64)))
        .collect()
}

fn at_most(name: &str, statistic: f64, threshold: f64, seed: u64, n: usize) -> Verdict {
    Verdict {
        pass: statistic <= threshold,
        ..Verdict::below(name, statistic, threshold, seed, n as u64)
    }
}

/// A fixed skewed weight vector on `1..=n`.
fn skewed(n: usize) -> ProbWeights {
    let masses: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
    ProbWeights::from_masses(&masses).expect("positive masses")
}

fn cayley(seed: u64) -> Result<Vec<Verdict>> {
    let mut r = rng::master(seed);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=7 {
        for _ in 0..5 {
            let w = ProbWeights::random(n, 0.01, &mut r);
            let mut total = 0.0;
            for t in enumerate_rooted_trees(n)? {
                total += ptree_pmf(&w, &t)?;
            }
            worst = worst.max((total - 1.0).abs());
            count += 1;
        }
    }
    Ok(vec![Verdict::below("cayley", worst, CAYLEY_TOL, seed, count)])
}

fn sampler_law(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let w = ProbWeights::uniform(4);
    let n = s.n(200_000);
    let trees = replicate(seed, n, |r| sample_ptree(&w, r).expect("valid weights"));
    let c = chi_square_gof(&counts_of(trees), &exact_tree_law(&w)?)?;
    Ok(vec![Verdict::above("sampler-law", c.p_value, P_VALUE_FLOOR, seed, n as u64)])
}

fn span_law(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let w = skewed(5);
    let n = s.n(100_000);
    let ls = replicate(seed, n, |r| {
        let t = sample_ptree(&w, r).expect("valid weights");
        let v = w.sample(r);
        cut_one(&t, v, &w, r).expect("valid input").len()
    });
    let tv = tv_to_pmf(&counts_of(ls), &exact_span_law(&w)?)?;
    Ok(vec![Verdict::below("span-law", tv, SPAN_LAW_TV, seed, n as u64)])
}

fn cut_tree_law(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let w = skewed(4);
    let n = s.n(200_000);
    let cuts = replicate(seed, n, |r| {
        let t = sample_ptree(&w, r).expect("valid weights");
        cut_complete(&t, &w, r).expect("valid input").cut_tree
    });
    let c = chi_square_gof(&counts_of(cuts), &exact_tree_law(&w)?)?;
    Ok(vec![Verdict::above("cut-tree-law", c.p_value, P_VALUE_FLOOR, seed, n as u64)])
}

fn one_cut_duality(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let w = skewed(4);
    let n = s.n(200_000);
    let pairs = replicate(seed, n, |r| {
        let t = sample_ptree(&w, r).expect("valid weights");
        let v = w.sample(r);
        (shuff_one(&t, v, &w, r).expect("valid input"), v)
    });
    let c = chi_square_gof(&counts_of(pairs), &exact_tree_vertex_law(&w)?)?;
    let law = Verdict::above("one-cut-duality/law", c.p_value, P_VALUE_FLOOR, seed, n as u64);

    let m = s.n(10_000);
    let failures = replicate(seed.wrapping_add(1), m, |r| {
        let size = r.random_range(1..=40);
        let w = ProbWeights::random(size, 0.05, r);
        let t = sample_ptree(&w, r).expect("valid weights");
        let v = w.sample(r);
        let rec = cut_one(&t, v, &w, r).expect("valid input");
        usize::from(reverse_one(&rec).ok().as_ref() != Some(&t))
    })
    .into_iter()
    .sum::<usize>();
    let rev = at_most("one-cut-duality/reversal", failures as f64, 0.0, seed.wrapping_add(1), m);
    Ok(vec![law, rev])
}

fn k_cut_coupling(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let w = skewed(30);
    let n = s.n(10_000);
    let failures: usize = replicate(seed, n, |r| {
        let t = sample_ptree(&w, r).expect("valid weights");
        let targets: Vec<usize> = (0..4).map(|_| w.sample(r)).collect();
        let fam = coupled_cut_family(&t, &targets, &w, r).expect("valid input");
        (0..3)
            .filter(|&k| fam[k].backbone != fam[k + 1].backbone.span(&targets[..=k]))
            .count()
    })
    .into_iter()
    .sum();
    Ok(vec![at_most("k-cut-coupling", failures as f64, 0.0, seed, n)])
}

fn rewire_tree(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let n = s.n(100_000);
    let failures: usize = replicate(seed, n, |r| {
        let size = r.random_range(1..=40);
        let w = ProbWeights::random(size, 0.05, r);
        let h = sample_ptree(&w, r).expect("valid weights");
        let k = r.random_range(1..=5);
        let targets: Vec<usize> = (0..k).map(|_| r.random_range(1..=size)).collect();
        let marks = sample_u_vector(&h, &targets, &w, r).expect("valid input");
        match rewire_tau(&h, &targets, &marks) {
            Ok(t) => usize::from(t.n() != size || RootedTree::new(t.root(), t.parents().to_vec()).is_err()),
            Err(_) => 1,
        }
    })
    .into_iter()
    .sum();
    Ok(vec![at_most("rewire-tree", failures as f64, 0.0, seed, n)])
}

/// `sigma * L` for `T ~ pi` and `V ~ p`.
fn scaled_cut_counts(seed: u64, w: &ProbWeights, count: usize) -> Vec<f64> {
    let sigma = w.sigma();
    replicate(seed, count, |r| {
        let t = sample_ptree(w, r).expect("valid weights");
        let v = w.sample(r);
        sigma * cut_one(&t, v, w, r).expect("valid input").len() as f64
    })
}

fn rayleigh(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let n = s.n(20_000);
    let xs = scaled_cut_counts(seed, &ProbWeights::uniform(10_000), n);
    let ks = ks_test(&xs, rayleigh_cdf)?;
    Ok(vec![Verdict::below("rayleigh", ks.statistic, RAYLEIGH_KS, seed, n as u64)])
}

fn line_break_law(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let h = 0.5f64.sqrt();
    let n = s.n(100_000);
    let mut out = Vec::new();
    for (name, theta) in [
        ("line-break-law/brownian", ThetaParam::brownian()),
        ("line-break-law/one-atom", ThetaParam::new(h, vec![h])?),
    ] {
        let xs = replicate(seed, n, |r| line_break(&theta, 1, r).expect("k >= 1").total_length());
        let ks = ks_test(&xs, |x| eta1_cdf(&theta, x))?;
        out.push(Verdict::below(name, ks.statistic, LINE_BREAK_KS, seed, n as u64));
    }
    Ok(out)
}

fn finite_n_idl(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let h = 0.5f64.sqrt();
    let theta = ThetaParam::new(h, vec![h])?;
    let w = build_pn(&theta, 5_000)?;
    let n = s.n(10_000);
    let xs = scaled_cut_counts(seed, &w, n);
    let ks = ks_test(&xs, |x| eta1_cdf(&theta, x))?;
    Ok(vec![Verdict::below("finite-n-idl", ks.statistic, FINITE_N_KS, seed, n as u64)])
}

/// Fixed random weights on 50 vertices.
fn birthday_weights(seed: u64) -> ProbWeights {
    ProbWeights::random(50, 0.05, &mut rng::master(seed))
}

fn birthday(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let w = birthday_weights(seed);
    let n = s.n(100_000);
    let repeats = replicate(seed, n, |r| (repeat_times(&w, 1, r).times[0] - 1) as f64);
    let depths = replicate(seed.wrapping_add(1), n, |r| {
        let t = sample_ptree(&w, r).expect("valid weights");
        t.depth(w.sample(r)) as f64
    });
    let ks = ks_two_sample(&repeats, &depths)?;
    Ok(vec![Verdict::below("birthday", ks.statistic, BIRTHDAY_KS, seed, n as u64)])
}

/// Walk points per run of the gamma-walk suite.
pub const GAMMA_WALK_POINTS: usize = 24;

fn gamma_walk_oracle(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let size = 500;
    let n = s.n(1_000);
    let results = replicate(seed, n, |r| {
        let w = ProbWeights::random(size, 0.05, r);
        let h = sample_ptree(&w, r).expect("valid weights");
        let u = w.sample(r);
        let xi: Vec<usize> = (0..GAMMA_WALK_POINTS).map(|_| r.random_range(1..=size)).collect();
        let g = gamma_walk(&h, u, &xi, &w, r).expect("valid input");
        let root = w.sample(r);
        let t = shuff_with(&h, &[u], &g.marks, root).expect("valid marks");
        let equal = xi
            .iter()
            .enumerate()
            .all(|(a, &x)| xi.iter().enumerate().all(|(b, &y)| g.gamma[a][b] == t.distance(x, y)));
        (usize::from(!equal), usize::from(!g.tree_metric))
    });
    let mismatches: usize = results.iter().map(|x| x.0).sum();
    let non_metric: usize = results.iter().map(|x| x.1).sum();
    Ok(vec![
        at_most("gamma-walk/equality", mismatches as f64, 0.0, seed, n),
        at_most("gamma-walk/four-point", non_metric as f64, 0.0, seed, n),
    ])
}

fn genealogy(seed: u64, s: Sizer) -> Result<Vec<Verdict>> {
    let n = s.n(1_000);
    let theta = ThetaParam::brownian();
    let runs = replicate(seed, n, |r| genealogy_matrix(&theta, 2, 200, None, r).expect("valid input"));
    let xs: Vec<f64> = runs.iter().map(|g| g.matrix[0][1]).collect();
    let ks = ks_test(&xs, rayleigh_cdf)?;
    let bad = runs
        .iter()
        .filter(|g| !(is_symmetric(&g.matrix, 1e-12) && four_point_holds(&g.matrix, 1e-9)))
        .count();
    Ok(vec![
        Verdict::below("genealogy/rayleigh", ks.statistic, GENEALOGY_KS, seed, n as u64),
        at_most("genealogy/tree-metric", bad as f64, 0.0, seed, n),
    ])
}

/// Verdicts grouped by suite, for reporting.
pub fn by_suite(verdicts: &[Verdict]) -> BTreeMap<String, Vec<&Verdict>> {
    let mut m: BTreeMap<String, Vec<&Verdict>> = BTreeMap::new();
    for v in verdicts {
        let suite = v.name.split('/').next().unwrap_or(&v.name).to_string();
        m.entry(suite).or_default().push(v);
    }
    m
}
