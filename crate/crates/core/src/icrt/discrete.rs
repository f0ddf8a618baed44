use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::cutting::engine;
use crate::cutting::{check_dims, OneCutRecord};
use crate::error::{Error, Result};
use crate::ptree::{Preorder, ProbWeights, RootedTree};

/// A 1-cut driven by the discrete Poisson process with intensity
/// `dt x p / sigma`: every atom is kept, effective or not.
#[derive(Clone, Debug, PartialEq)]
pub struct TimedOneCut {
    pub times: Vec<f64>,
    pub atoms: Vec<usize>,
    /// The atom fell in the component of the target.
    pub effective: Vec<bool>,
    pub record: OneCutRecord,
}

impl TimedOneCut {
    /// `L_t`: effective atoms up to time `t`.
    pub fn l_at(&self, t: f64) -> usize {
        self.times
            .iter()
            .zip(&self.effective)
            .take_while(|(s, _)| **s <= t)
            .filter(|(_, e)| **e)
            .count()
    }

    /// `L_infinity`, the number of cuts.
    pub fn l_infinity(&self) -> usize {
        self.record.len()
    }
}

pub fn timed_cut_one<R: Rng + ?Sized>(
    tree: &RootedTree,
    v: usize,
    weights: &ProbWeights,
    rng: &mut R,
) -> Result<TimedOneCut> {
    tree.check_vertex(v)?;
    check_dims(tree, weights)?;
    let sigma = weights.sigma();
    let (mut times, mut atoms, mut effective) = (Vec::new(), Vec::new(), Vec::new());
    let mut t = 0.0;
    let trace = engine::run(tree, &[v], false, |alive: &[bool]| loop {
        t += sigma * rng.sample::<f64, _>(Exp1);
        let y = weights.sample(rng);
        times.push(t);
        atoms.push(y);
        effective.push(alive[y]);
        if alive[y] {
            return y;
        }
    });
    let record = OneCutRecord {
        original_root: tree.root(),
        target: v,
        cut_tree: trace.cut_tree,
        cut_sequence: trace.cuts,
        marks: trace.marks.iter().map(|m| m.1).collect(),
    };
    Ok(TimedOneCut {
        times,
        atoms,
        effective,
        record,
    })
}

/// Distances in `H = cut(T, V)` between `xi_0` (the root of `H`), `xi_1 =
/// V` and the given points, computed from the cut trace alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutDistances {
    /// `[root of H, V, xi...]`.
    pub points: Vec<usize>,
    pub l_infinity: usize,
    /// `tau(xi_j)` for the given points.
    pub tau: Vec<f64>,
    /// `varsigma(xi_j)`: the atom that first hits the path to `V`.
    pub varsigma: Vec<usize>,
    /// `L_{tau(xi_j)}`.
    pub l_tau: Vec<usize>,
    pub matrix: Vec<Vec<usize>>,
}

pub fn one_cut_distance_matrix(tree: &RootedTree, cut: &TimedOneCut, xi: &[usize]) -> Result<CutDistances> {
    let v = cut.record.target;
    tree.check_vertex(v)?;
    for &x in xi {
        tree.check_vertex(x)?;
    }
    let pre = Preorder::new(&tree.reroot(v));
    let q = xi.len();
    let (mut tau, mut varsigma, mut l_tau, mut first) = (vec![0.0; q], vec![0; q], vec![0; q], vec![0; q]);
    for (j, &x) in xi.iter().enumerate() {
        let a = cut
            .atoms
            .iter()
            .position(|&y| pre.is_ancestor(y, x))
            .ok_or_else(|| Error::Degenerate("trace never reaches the target".into()))?;
        first[j] = a;
        tau[j] = cut.times[a];
        varsigma[j] = cut.atoms[a];
        l_tau[j] = cut.effective[..=a].iter().filter(|&&e| e).count();
    }
    let big_l = cut.l_infinity();
    let rest: Vec<usize> = (0..q).map(|j| tree.distance(xi[j], varsigma[j])).collect();
    let mut m = vec![vec![0; q + 2]; q + 2];
    m[0][1] = big_l - 1;
    for j in 0..q {
        m[0][j + 2] = l_tau[j] - 1 + rest[j];
        m[1][j + 2] = big_l - l_tau[j] + rest[j];
        for i in 0..j {
            m[i + 2][j + 2] = if first[i] == first[j] {
                tree.distance(xi[i], xi[j])
            } else {
                l_tau[i].abs_diff(l_tau[j]) + rest[i] + rest[j]
            };
        }
    }
    for i in 0..q + 2 {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    Ok(CutDistances {
        points: [cut.record.cut_sequence[0], v].into_iter().chain(xi.iter().copied()).collect(),
        l_infinity: big_l,
        tau,
        varsigma,
        l_tau,
        matrix: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptree::sample_ptree;
    use crate::rng;

    fn graph_distances(h: &RootedTree, pts: &[usize]) -> Vec<Vec<usize>> {
        pts.iter().map(|&a| pts.iter().map(|&b| h.distance(a, b)).collect()).collect()
    }

    #[test]
    fn two_cut_hand_trace() {
        // T: 1 - 2 - 3, V = 3; atoms 1 then 3
        let t = RootedTree::path(&[1, 2, 3]).unwrap();
        let rec = OneCutRecord {
            original_root: 1,
            target: 3,
            cut_tree: RootedTree::new(2, vec![0, 2, 0, 2]).unwrap(),
            cut_sequence: vec![2, 3],
            marks: vec![3],
        };
        let cut = TimedOneCut {
            times: vec![0.5, 1.0, 2.0],
            atoms: vec![2, 1, 3],
            effective: vec![true, false, true],
            record: rec,
        };
        let d = one_cut_distance_matrix(&t, &cut, &[1, 2]).unwrap();
        assert_eq!(d.l_infinity, 2);
        // xi = 2 is hit first: zero from the root of H
        assert_eq!(d.matrix[0][3], 0);
        assert_eq!(d.matrix[0][2], 1);
        assert_eq!(d.matrix[2][3], 1);
        assert_eq!(d.matrix, graph_distances(&cut.record.cut_tree, &d.points));
        assert_eq!(cut.l_at(1.5), 1);
    }

    #[test]
    fn matches_cut_tree_distances() {
        let mut r = rng::master(71);
        for trial in 0..2_000 {
            let n = 1 + trial % 25;
            let w = ProbWeights::random(n, 0.05, &mut r);
            let t = sample_ptree(&w, &mut r).unwrap();
            let v = w.sample(&mut r);
            let cut = timed_cut_one(&t, v, &w, &mut r).unwrap();
            cut.record.check_invariants().unwrap();
            assert!(cut.times.windows(2).all(|s| s[0] < s[1]));
            let xi: Vec<usize> = (1..=n).collect();
            let d = one_cut_distance_matrix(&t, &cut, &xi).unwrap();
            assert_eq!(d.matrix, graph_distances(&cut.record.cut_tree, &d.points));
        }
    }
}
