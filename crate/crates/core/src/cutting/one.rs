use rand::Rng;

use crate::error::Result;
use crate::ptree::{Preorder, ProbWeights, RestrictedPicker, RootedTree, NO_PARENT};

use super::OneCutRecord;

/// Range-add / point-query Fenwick tree over preorder positions.
struct Fenwick(Vec<i32>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick(vec![0; n + 1])
    }

    fn add(&mut self, mut i: usize, delta: i32) {
        i += 1;
        while i < self.0.len() {
            self.0[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Adds one on positions `lo..hi`.
    fn cover(&mut self, lo: usize, hi: usize) {
        self.add(lo, 1);
        if hi < self.0.len() - 1 {
            self.add(hi, -1);
        }
    }

    fn point(&self, mut i: usize) -> i32 {
        i += 1;
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Isolates `v` by cutting p-nodes of its current component until `v` itself
/// is picked.
///
/// Seen from `v`, each cut `X` discards the subtree hanging above `X`, so the
/// live component is "everything with no cut ancestor" in the tree rerooted
/// at `v`; membership is one Fenwick query. The cut tree reuses the
/// `v`-rooted parent of every non-cut vertex and chains the cuts.
pub fn cut_one<R: Rng + ?Sized>(
    tree: &RootedTree,
    v: usize,
    weights: &ProbWeights,
    rng: &mut R,
) -> Result<OneCutRecord> {
    tree.check_vertex(v)?;
    check_dims(tree, weights)?;
    let n = tree.n();
    let toward_v = tree.reroot(v);
    let children = toward_v.children();
    let pre = Preorder::from_children(v, &children, n);
    let mut removed = Fenwick::new(n);
    let mut is_cut = vec![false; n + 1];
    let mut picker = RestrictedPicker::adaptive(weights);
    let mut cuts = Vec::new();
    loop {
        let x = picker.pick(
            rng,
            |y| removed.point(pre.tin[y]) == 0,
            || live_component(v, &children, &is_cut),
        );
        cuts.push(x);
        if x == v {
            break;
        }
        is_cut[x] = true;
        removed.cover(pre.tin[x], pre.tout[x]);
    }

    let mut parent = toward_v.parents().to_vec();
    parent[cuts[0]] = NO_PARENT;
    for w in cuts.windows(2) {
        parent[w[1]] = w[0];
    }
    let marks = cuts[..cuts.len() - 1]
        .iter()
        .map(|&x| toward_v.parent(x).expect("a cut other than v has a v-ward neighbour"))
        .collect();
    Ok(OneCutRecord {
        original_root: tree.root(),
        target: v,
        cut_tree: RootedTree::from_parts_unchecked(cuts[0], parent),
        cut_sequence: cuts,
        marks,
    })
}

/// Sorted vertices reachable from `v` without crossing a cut vertex.
fn live_component(v: usize, children: &[Vec<usize>], is_cut: &[bool]) -> Vec<usize> {
    let mut out = vec![v];
    let mut i = 0;
    while i < out.len() {
        let u = out[i];
        out.extend(children[u].iter().copied().filter(|&c| !is_cut[c]));
        i += 1;
    }
    out.sort_unstable();
    out
}

pub(crate) fn check_dims(tree: &RootedTree, weights: &ProbWeights) -> Result<()> {
    if tree.n() != weights.n() {
        return Err(crate::Error::IncompatibleDimensions {
            weights: weights.n(),
            tree: tree.n(),
        });
    }
    Ok(())
}
