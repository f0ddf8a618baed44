//! Distributional identities at small n, checked against enumeration.

use std::collections::BTreeMap;

use rayon::prelude::*;

use cuttree::cutting::{cut_complete, cut_k, cut_one};
use cuttree::ptree::{enumerate_rooted_trees, ptree_pmf, sample_ptree};
use cuttree::rng::{self, SimRng};
use cuttree::shuffle::{shuff_complete, shuff_k};
use cuttree::stats::{chi_square_gof, counts_of, empirical_tv, exact_tree_law, tv_to_pmf};
use cuttree::{ProbWeights, RootedTree};

const P_FLOOR: f64 = 1e-3;

fn replicate<T: Send>(seed: u64, count: usize, f: impl Fn(&mut SimRng) -> T + Sync) -> Vec<T> {
    (0..count as u64).into_par_iter().map(|i| f(&mut rng::replica(seed, i))).collect()
}

fn weights4() -> ProbWeights {
    ProbWeights::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap()
}

/// pi (x) p (x) p, built straight from the product formula.
fn tree_pair_law(w: &ProbWeights) -> BTreeMap<(RootedTree, usize, usize), f64> {
    let n = w.n();
    let mut law = BTreeMap::new();
    for t in enumerate_rooted_trees(n).unwrap() {
        let pt = ptree_pmf(w, &t).unwrap();
        for a in 1..=n {
            for b in 1..=n {
                law.insert((t.clone(), a, b), pt * w.p(a) * w.p(b));
            }
        }
    }
    law
}

#[test]
fn k_cut_tree_with_targets_follows_product_law() {
    let w = weights4();
    let samples = replicate(101, 100_000, |r| {
        let t = sample_ptree(&w, r).unwrap();
        let (a, b) = (w.sample(r), w.sample(r));
        (cut_k(&t, &[a, b], &w, r).unwrap().cut_tree, a, b)
    });
    let c = chi_square_gof(&counts_of(samples), &tree_pair_law(&w)).unwrap();
    assert!(c.p_value > P_FLOOR, "{c:?}");
}

#[test]
fn k_shuffle_follows_product_law() {
    let w = weights4();
    let samples = replicate(102, 100_000, |r| {
        let t = sample_ptree(&w, r).unwrap();
        let (a, b) = (w.sample(r), w.sample(r));
        (shuff_k(&t, &[a, b], &w, r).unwrap(), a, b)
    });
    let c = chi_square_gof(&counts_of(samples), &tree_pair_law(&w)).unwrap();
    assert!(c.p_value > P_FLOOR, "{c:?}");
}

#[test]
fn complete_shuffle_preserves_pi() {
    let w = weights4();
    let samples = replicate(103, 100_000, |r| {
        let g = sample_ptree(&w, r).unwrap();
        shuff_complete(&g, &w, r).unwrap()
    });
    let c = chi_square_gof(&counts_of(samples), &exact_tree_law(&w).unwrap()).unwrap();
    assert!(c.p_value > P_FLOOR, "{c:?}");

    // n = 2: the edge is kept and the root is a fresh p-node
    let w2 = ProbWeights::new(vec![0.7, 0.3]).unwrap();
    let g = RootedTree::path(&[2, 1]).unwrap();
    let roots_at_1 = replicate(104, 20_000, |r| usize::from(shuff_complete(&g, &w2, r).unwrap().root() == 1));
    let share = roots_at_1.iter().sum::<usize>() as f64 / 20_000.0;
    assert!((share - 0.7).abs() < 4.0 * (0.21f64 / 20_000.0).sqrt(), "{share}");
}

/// Exact law of `#Span(T; V_1, V_2)`.
fn span_pair_law(w: &ProbWeights) -> BTreeMap<usize, f64> {
    let n = w.n();
    let mut law = BTreeMap::new();
    for t in enumerate_rooted_trees(n).unwrap() {
        let pt = ptree_pmf(w, &t).unwrap();
        for a in 1..=n {
            for b in 1..=n {
                // union of the two root paths
                let mut seen = vec![false; n + 1];
                for v in t.path_to_root(a).into_iter().chain(t.path_to_root(b)) {
                    seen[v] = true;
                }
                let size = seen.iter().filter(|&&s| s).count();
                *law.entry(size).or_insert(0.0) += pt * w.p(a) * w.p(b);
            }
        }
    }
    law
}

#[test]
fn cuts_to_isolate_two_targets_match_span_size() {
    let w = ProbWeights::new(vec![0.35, 0.25, 0.2, 0.12, 0.08]).unwrap();
    let ls = replicate(105, 100_000, |r| {
        let t = sample_ptree(&w, r).unwrap();
        let (a, b) = (w.sample(r), w.sample(r));
        cut_k(&t, &[a, b], &w, r).unwrap().cut_sequence.len()
    });
    let tv = tv_to_pmf(&counts_of(ls), &span_pair_law(&w)).unwrap();
    assert!(tv < 0.015, "{tv}");
}

#[test]
fn one_cut_duality_marginals_and_span_pairs() {
    let w = weights4();
    let n = 200_000;
    // (T, cut(T, V)) with the paired span sizes
    let forward = replicate(106, n, |r| {
        let t = sample_ptree(&w, r).unwrap();
        let v = w.sample(r);
        let h = cut_one(&t, v, &w, r).unwrap().cut_tree;
        let pair = (t.depth(v), h.depth(v));
        (t, h, pair)
    });
    // (shuff(H, U), H)
    let backward = replicate(107, n, |r| {
        let h = sample_ptree(&w, r).unwrap();
        let u = w.sample(r);
        let t = cuttree::shuffle::shuff_one(&h, u, &w, r).unwrap();
        let pair = (t.depth(u), h.depth(u));
        (t, h, pair)
    });
    let first = |s: &[(RootedTree, RootedTree, (usize, usize))]| counts_of(s.iter().map(|x| x.0.clone()));
    let second = |s: &[(RootedTree, RootedTree, (usize, usize))]| counts_of(s.iter().map(|x| x.1.clone()));
    let pairs = |s: &[(RootedTree, RootedTree, (usize, usize))]| counts_of(s.iter().map(|x| x.2));
    for (name, tv) in [
        ("T", empirical_tv(&first(&forward), &first(&backward)).unwrap()),
        ("H", empirical_tv(&second(&forward), &second(&backward)).unwrap()),
        ("span pairs", empirical_tv(&pairs(&forward), &pairs(&backward)).unwrap()),
    ] {
        assert!(tv < 0.02, "{name}: {tv}");
    }
}

#[test]
fn k_shuffle_approaches_complete_shuffle() {
    let w = weights4();
    let g = RootedTree::path(&[1, 2, 3, 4]).unwrap();
    let n = 200_000;
    let complete = counts_of(replicate(108, n, |r| shuff_complete(&g, &w, r).unwrap()));
    let mut tvs = Vec::new();
    for k in [1usize, 2, 4, 8] {
        let law = counts_of(replicate(109 + k as u64, n, |r| {
            let targets: Vec<usize> = (0..k).map(|_| w.sample(r)).collect();
            shuff_k(&g, &targets, &w, r).unwrap()
        }));
        tvs.push(empirical_tv(&law, &complete).unwrap());
    }
    // the last step sits near the Monte Carlo floor, hence the slack
    assert!(tvs[0] > tvs[1] && tvs[1] > tvs[2], "{tvs:?}");
    assert!(tvs[3] <= tvs[2] + 0.01, "{tvs:?}");
}

#[test]
fn two_vertex_first_cut_is_a_coin_flip() {
    let w = ProbWeights::uniform(2);
    let t = RootedTree::path(&[1, 2]).unwrap();
    let ones = replicate(120, 40_000, |r| usize::from(cut_one(&t, 2, &w, r).unwrap().len() == 1));
    let share = ones.iter().sum::<usize>() as f64 / 40_000.0;
    assert!((share - 0.5).abs() < 0.01, "{share}");
}

#[test]
fn complete_cut_of_two_vertices_is_rooted_at_first_pick() {
    let w = ProbWeights::new(vec![0.8, 0.2]).unwrap();
    let t = RootedTree::path(&[1, 2]).unwrap();
    let mut r = rng::master(121);
    for _ in 0..200 {
        let rec = cut_complete(&t, &w, &mut r).unwrap();
        assert_eq!(rec.cut_tree.root(), rec.permutation[0]);
        assert_eq!(rec.cut_tree.undirected_edges(), vec![(1, 2)]);
    }
}
