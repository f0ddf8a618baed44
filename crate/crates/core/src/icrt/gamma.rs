use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cutting::MarkVector;
use crate::error::{Error, Result};
use crate::metric::four_point_holds;
use crate::ptree::{ProbWeights, RootedTree};
use crate::shuffle::sample_u_vector;

/// Attachment walks of a 1-shuffle and the distances they predict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaWalk {
    pub marks: MarkVector,
    /// `a_i(0), a_i(1), ...` up to the first step with `x_i = U`.
    pub a: Vec<Vec<usize>>,
    /// `x_i(j) = a_i(j) ^ U`.
    pub x: Vec<Vec<usize>>,
    /// `I(i, j)`: steps of walk `i` before it meets walk `j`.
    pub merge_index: Vec<Vec<usize>>,
    /// `mg(i, j) = I(i, j) + I(j, i)`.
    pub mg: Vec<Vec<usize>>,
    pub gamma: Vec<Vec<usize>>,
    pub tree_metric: bool,
}

/// Samples the marks of a 1-shuffle towards `u` and runs the walks from
/// every `xi_i`.
pub fn gamma_walk<R: Rng + ?Sized>(
    h: &RootedTree,
    u: usize,
    xi: &[usize],
    weights: &ProbWeights,
    rng: &mut R,
) -> Result<GammaWalk> {
    let marks = sample_u_vector(h, &[u], weights, rng)?;
    gamma_walk_with(h, u, xi, marks)
}

pub fn gamma_walk_with(h: &RootedTree, u: usize, xi: &[usize], marks: MarkVector) -> Result<GammaWalk> {
    h.check_vertex(u)?;
    for &x in xi {
        h.check_vertex(x)?;
    }
    // backbone root -> U, with successors
    let backbone: Vec<usize> = {
        let mut p = h.path_to_root(u);
        p.reverse();
        p
    };
    let mut succ = vec![0usize; h.n() + 1];
    let mut on_backbone = vec![false; h.n() + 1];
    for w in backbone.windows(2) {
        succ[w[0]] = w[1];
    }
    for &b in &backbone {
        on_backbone[b] = true;
    }
    // a ^ U and Ht(a)
    let meet = |mut a: usize| -> (usize, usize) {
        let mut ht = 0;
        while !on_backbone[a] {
            a = h.parent(a).expect("root lies on the backbone");
            ht += 1;
        }
        (a, ht)
    };
    let q = xi.len();
    let mut a_seq = Vec::with_capacity(q);
    let mut x_seq = Vec::with_capacity(q);
    let mut ht_seq = Vec::with_capacity(q);
    for &start in xi {
        let (mut a, mut xs, mut hts) = (vec![start], Vec::new(), Vec::new());
        loop {
            let (x, ht) = meet(*a.last().unwrap());
            xs.push(x);
            hts.push(ht);
            if x == u {
                break;
            }
            let w = succ[x];
            let next = *marks.get(&w).ok_or(Error::MissingMark(w))?;
            a.push(next);
        }
        a_seq.push(a);
        x_seq.push(xs);
        ht_seq.push(hts);
    }
    let mut merge_index = vec![vec![0; q]; q];
    for i in 0..q {
        for j in 0..q {
            // both walks climb the backbone strictly, so the first common
            // element is the shallowest shared one
            let y = *x_seq[i]
                .iter()
                .find(|x| x_seq[j].contains(x))
                .expect("both walks end at U");
            merge_index[i][j] = x_seq[i].iter().position(|&x| x == y).unwrap();
        }
    }
    let mut mg = vec![vec![0; q]; q];
    let mut gamma = vec![vec![0; q]; q];
    for i in 0..q {
        for j in 0..q {
            let (ii, ij) = (merge_index[i][j], merge_index[j][i]);
            mg[i][j] = ii + ij;
            let climb = |s: usize, k: usize| -> usize { ht_seq[s][..k].iter().map(|h| h + 1).sum() };
            gamma[i][j] = climb(i, ii) + climb(j, ij) + h.distance(a_seq[i][ii], a_seq[j][ij]);
        }
    }
    let as_f64: Vec<Vec<f64>> = gamma.iter().map(|r| r.iter().map(|&d| d as f64).collect()).collect();
    Ok(GammaWalk {
        marks,
        a: a_seq,
        x: x_seq,
        merge_index,
        mg,
        tree_metric: four_point_holds(&as_f64, 1e-9),
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptree::sample_ptree;
    use crate::rng;
    use crate::shuffle::shuff_with;

    #[test]
    fn equal_points_have_zero_gamma() {
        let h = RootedTree::path(&[1, 2, 3, 4]).unwrap();
        let marks: MarkVector = [(2, 3), (3, 4), (4, 4)].into_iter().collect();
        let g = gamma_walk_with(&h, 4, &[2, 2], marks).unwrap();
        assert_eq!(g.gamma[0][1], 0);
        assert_eq!(g.mg[0][1], 0);
    }

    #[test]
    fn gamma_matches_shuffled_distances() {
        let mut r = rng::master(81);
        for trial in 0..1_000 {
            let n = 1 + trial % 40;
            let w = ProbWeights::random(n, 0.05, &mut r);
            let h = sample_ptree(&w, &mut r).unwrap();
            let u = w.sample(&mut r);
            let xi: Vec<usize> = (1..=n).collect();
            let g = gamma_walk(&h, u, &xi, &w, &mut r).unwrap();
            assert!(g.tree_metric);
            let root = w.sample(&mut r);
            let t = shuff_with(&h, &[u], &g.marks, root).unwrap();
            for a in 1..=n {
                for b in 1..=n {
                    assert_eq!(g.gamma[a - 1][b - 1], t.distance(a, b), "trial {trial}");
                }
            }
        }
    }
}
