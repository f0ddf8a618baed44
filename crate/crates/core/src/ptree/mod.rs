//! Discrete p-trees: weights, trees, the weighted Aldous–Broder sampler,
//! the exact law, enumeration and basic surgery.

mod enumerate;
mod tree;
mod weights;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{enumerate_rooted_trees, RootedTrees, MAX_ENUMERATION_N};
pub use tree::{Preorder, RootedTree, SpanTree, NO_PARENT};
pub use weights::{ProbWeights, RestrictedPicker, PROB_TOL};

/// Hard cap on the number of walk steps in [`sample_ptree`].
pub const WALK_STEP_CAP: u64 = 1_000_000_000;

/// Weighted Aldous–Broder: run an i.i.d. p-walk `Y_0, Y_1, ...` and keep the
/// edge `Y_{j-1} -> Y_j` whenever `Y_j` is new. The result is rooted at `Y_0`.
pub fn sample_ptree<R: Rng + ?Sized>(weights: &ProbWeights, rng: &mut R) -> Result<RootedTree> {
    let n = weights.n();
    let mut parent = vec![NO_PARENT; n + 1];
    let mut seen = vec![false; n + 1];
    let root = weights.sample(rng);
    seen[root] = true;
    let mut covered = 1;
    let mut prev = root;
    let mut steps = 0u64;
    while covered < n {
        let y = weights.sample(rng);
        steps += 1;
        if steps > WALK_STEP_CAP {
            return Err(Error::WalkDidNotCover(steps));
        }
        if !seen[y] {
            seen[y] = true;
            parent[y] = prev;
            covered += 1;
        }
        prev = y;
    }
    Ok(RootedTree::from_parts_unchecked(root, parent))
}

/// `pi(t) = prod_u p_u^{C_u(t)}`.
pub fn ptree_pmf(weights: &ProbWeights, tree: &RootedTree) -> Result<f64> {
    if weights.n() != tree.n() {
        return Err(Error::IncompatibleDimensions {
            weights: weights.n(),
            tree: tree.n(),
        });
    }
    let counts = tree.child_counts();
    if tree.n() > 64 {
        let log: f64 = (1..=tree.n())
            .filter(|&u| counts[u] > 0)
            .map(|u| counts[u] as f64 * weights.p(u).ln())
            .sum();
        return Ok(log.exp());
    }
    Ok((1..=tree.n())
        .filter(|&u| counts[u] > 0)
        .map(|u| weights.p(u).powi(counts[u] as i32))
        .product())
}

/// Repeat times of an i.i.d. p-sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatTimes {
    /// `R_1 < R_2 < ...`: indices `j` where `X_j` already occurred in the prefix.
    pub times: Vec<usize>,
    /// `X_0, ..., X_{R_m}`.
    pub walk: Vec<usize>,
}

/// Draws `X_0, X_1, ...` until `m` repeats have occurred. `X_j` counts as a
/// repeat when it equals one of `X_0, ..., X_{j-1}`; with this convention
/// `R_1 - 1` has the law of the root-to-p-node distance in a p-tree.
pub fn repeat_times<R: Rng + ?Sized>(weights: &ProbWeights, m: usize, rng: &mut R) -> RepeatTimes {
    let mut seen = vec![false; weights.n() + 1];
    let mut walk = Vec::new();
    let mut times = Vec::with_capacity(m);
    while times.len() < m {
        let x = weights.sample(rng);
        if seen[x] {
            times.push(walk.len());
        }
        seen[x] = true;
        walk.push(x);
    }
    RepeatTimes { times, walk }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use std::collections::HashMap;

    fn w(v: &[f64]) -> ProbWeights {
        ProbWeights::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pmf_examples() {
        let t = RootedTree::path(&[1, 2]).unwrap();
        assert_eq!(ptree_pmf(&w(&[0.5, 0.5]), &t).unwrap(), 0.5);
        let p3 = RootedTree::path(&[1, 2, 3]).unwrap();
        let third = 1.0 / 3.0;
        let got = ptree_pmf(&w(&[third, third, third]), &p3).unwrap();
        assert!((got - 1.0 / 9.0).abs() < 1e-15);
        let star = RootedTree::new(1, vec![0, 0, 1, 1]).unwrap();
        let got = ptree_pmf(&w(&[0.5, 0.3, 0.2]), &star).unwrap();
        assert!((got - 0.25).abs() < 1e-15);
        assert!(matches!(
            ptree_pmf(&w(&[0.5, 0.5]), &star),
            Err(Error::IncompatibleDimensions { .. })
        ));
    }

    #[test]
    fn pmf_log_space_agrees_for_large_n() {
        let mut r = rng::master(3);
        let weights = ProbWeights::random(80, 0.2, &mut r);
        let t = sample_ptree(&weights, &mut r).unwrap();
        let counts = t.child_counts();
        let direct: f64 = (1..=80).map(|u| weights.p(u).powi(counts[u] as i32)).product();
        let got = ptree_pmf(&weights, &t).unwrap();
        assert!(((got - direct) / direct).abs() < 1e-9);
    }

    #[test]
    fn cayley_identity_small_n() {
        let mut r = rng::master(11);
        for n in 1..=6 {
            let weights = ProbWeights::random(n, 0.05, &mut r);
            let total: f64 = enumerate_rooted_trees(n)
                .unwrap()
                .map(|t| ptree_pmf(&weights, &t).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "n = {n}: {total}");
        }
    }

    #[test]
    fn single_vertex_sample() {
        let t = sample_ptree(&w(&[1.0]), &mut rng::master(0)).unwrap();
        assert_eq!(t, RootedTree::single());
    }

    #[test]
    fn two_vertex_root_frequency() {
        let weights = w(&[0.5, 0.5]);
        let mut r = rng::master(5);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| sample_ptree(&weights, &mut r).unwrap().root() == 1)
            .count();
        // binomial(1e5, 1/2): sd = 158
        assert!((ones as f64 - 50_000.0).abs() < 3.0 * 158.2, "{ones}");
    }

    #[test]
    fn reroot_at_p_node_preserves_law_exactly() {
        // sum_{t, v} pi(t) p_v 1{t^v = s} = pi(s) for every s
        let weights = w(&[0.1, 0.2, 0.3, 0.4]);
        let mut mass: HashMap<RootedTree, f64> = HashMap::new();
        for t in enumerate_rooted_trees(4).unwrap() {
            let pt = ptree_pmf(&weights, &t).unwrap();
            for v in 1..=4 {
                *mass.entry(t.reroot(v)).or_default() += pt * weights.p(v);
            }
        }
        assert_eq!(mass.len(), 64);
        for (s, m) in mass {
            assert!((m - ptree_pmf(&weights, &s).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn repeat_time_examples() {
        let one = repeat_times(&w(&[1.0]), 1, &mut rng::master(0));
        assert_eq!(one.times, vec![1]);
        assert_eq!(one.walk, vec![1, 1]);
        let weights = w(&[0.5, 0.5]);
        let mut r = rng::master(9);
        let trials = 100_000;
        let mut first = 0;
        for _ in 0..trials {
            let rt = repeat_times(&weights, 1, &mut r);
            assert!(rt.times[0] == 1 || rt.times[0] == 2);
            first += usize::from(rt.times[0] == 1);
        }
        // P(R_1 - 1 = 0) = 1/2
        assert!((first as f64 - 50_000.0).abs() < 3.0 * 158.2);
        let rt = repeat_times(&w(&[0.2; 5]), 4, &mut r);
        assert!(rt.times.windows(2).all(|p| p[0] < p[1]));
        for &j in &rt.times {
            assert!(rt.walk[..j].contains(&rt.walk[j]));
        }
    }

    #[test]
    fn repeat_identity_exact_n3() {
        // exact law of R_1 - 1 by direct summation vs exact law of d(root, V)
        let weights = w(&[0.5, 0.3, 0.2]);
        let mut birthday = [0.0f64; 4];
        // P(R_1 - 1 >= k) = P(X_0..X_k distinct)
        fn distinct_mass(weights: &ProbWeights, used: &mut Vec<usize>, k: usize) -> f64 {
            if used.len() == k + 1 {
                return 1.0;
            }
            let mut total = 0.0;
            for u in 1..=weights.n() {
                if !used.contains(&u) {
                    used.push(u);
                    total += weights.p(u) * distinct_mass(weights, used, k);
                    used.pop();
                }
            }
            total
        }
        let tail: Vec<f64> = (0..4).map(|k| distinct_mass(&weights, &mut vec![], k)).collect();
        for k in 0..3 {
            birthday[k] = tail[k] - tail[k + 1];
        }
        let mut depth_law = [0.0f64; 4];
        for t in enumerate_rooted_trees(3).unwrap() {
            let pt = ptree_pmf(&weights, &t).unwrap();
            for v in 1..=3 {
                depth_law[t.depth(v)] += pt * weights.p(v);
            }
        }
        for k in 0..4 {
            assert!((birthday[k] - depth_law[k]).abs() < 1e-12, "{k}");
        }
    }
}
