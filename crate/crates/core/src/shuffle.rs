//! Reverse transformations: rewire every backbone edge `<x, w>` to an edge
//! `{x, u_w}` with `u_w` drawn inside `Sub(h, w)`, then reroot.

use rand::Rng;

use crate::cutting::{
    canonical_order, check_dims, CompleteCutRecord, CutRecordJson, KCutRecord, MarkVector, OneCutRecord,
};
use crate::error::{Error, Result};
use crate::ptree::{Preorder, ProbWeights, RootedTree};

/// `tau(h, targets; u)`: drop the edges of `Span(h; targets)` and connect
/// each backbone parent `x` to the mark `u_w` of its backbone child `w`.
/// The result keeps the root of `h`.
pub fn rewire_tau(h: &RootedTree, targets: &[usize], marks: &MarkVector) -> Result<RootedTree> {
    let span = h.span(targets)?;
    let pre = Preorder::new(h);
    if let Some(&w) = marks.keys().find(|&&w| !span.parent.contains_key(&w)) {
        return Err(Error::MarkOutsideSubtree {
            successor: w,
            mark: marks[&w],
        });
    }
    let mut edges = Vec::with_capacity(h.n().saturating_sub(1));
    for (p, u) in h.edges() {
        match span.parent.get(&u) {
            None => edges.push((p, u)),
            Some(_) => {
                let mark = *marks.get(&u).ok_or(Error::MissingMark(u))?;
                h.check_vertex(mark)?;
                if !pre.is_ancestor(u, mark) {
                    return Err(Error::MarkOutsideSubtree { successor: u, mark });
                }
                edges.push((p, mark));
            }
        }
    }
    RootedTree::from_edges(h.n(), h.root(), &edges)
}

/// Draws `U_w ~ p|Sub(h, w)` independently for every `w` in `Span*(h;
/// targets)`, visiting backbone vertices in canonical order. Leaves of `h`
/// get their forced mark without consuming randomness.
pub fn sample_u_vector<R: Rng + ?Sized>(
    h: &RootedTree,
    targets: &[usize],
    weights: &ProbWeights,
    rng: &mut R,
) -> Result<MarkVector> {
    check_dims(h, weights)?;
    let span = h.span(targets)?;
    let pre = Preorder::new(h);
    let mut prefix = Vec::with_capacity(h.n() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &u in &pre.order {
        acc += weights.p(u);
        prefix.push(acc);
    }
    let mut marks = MarkVector::new();
    for w in canonical_order(&span, targets) {
        if w == span.root {
            continue;
        }
        let (lo, hi) = (pre.tin[w], pre.tout[w]);
        let mark = if hi - lo == 1 {
            w
        } else {
            let x = prefix[lo] + rng.random::<f64>() * (prefix[hi] - prefix[lo]);
            // first position whose cumulative mass exceeds x
            let i = prefix[lo + 1..=hi].partition_point(|&c| c <= x);
            pre.order[lo + i.min(hi - lo - 1)]
        };
        marks.insert(w, mark);
    }
    Ok(marks)
}

/// `tau(h, targets; U)` rerooted at a p-node. The new root is drawn first,
/// then the marks.
pub fn shuff_k<R: Rng + ?Sized>(
    h: &RootedTree,
    targets: &[usize],
    weights: &ProbWeights,
    rng: &mut R,
) -> Result<RootedTree> {
    check_dims(h, weights)?;
    let root = weights.sample(rng);
    let marks = sample_u_vector(h, targets, weights, rng)?;
    shuff_with(h, targets, &marks, root)
}

/// The deterministic part of a shuffle: rewire with given marks, then
/// reroot at `root`.
pub fn shuff_with(h: &RootedTree, targets: &[usize], marks: &MarkVector, root: usize) -> Result<RootedTree> {
    h.check_vertex(root)?;
    Ok(rewire_tau(h, targets, marks)?.reroot(root))
}

pub fn shuff_one<R: Rng + ?Sized>(h: &RootedTree, v: usize, weights: &ProbWeights, rng: &mut R) -> Result<RootedTree> {
    shuff_k(h, &[v], weights, rng)
}

/// `shuff(g)`: every edge of `g` is a backbone edge.
pub fn shuff_complete<R: Rng + ?Sized>(g: &RootedTree, weights: &ProbWeights, rng: &mut R) -> Result<RootedTree> {
    let all: Vec<usize> = (1..=g.n()).collect();
    shuff_k(g, &all, weights, rng)
}

/// Rebuilds `T` exactly from the recorded marks and root.
pub fn reverse_one(rec: &OneCutRecord) -> Result<RootedTree> {
    shuff_with(&rec.cut_tree, &[rec.target], &rec.mark_vector(), rec.original_root)
}

pub fn reverse_k(rec: &KCutRecord) -> Result<RootedTree> {
    shuff_with(&rec.cut_tree, &rec.targets, &rec.marks, rec.original_root)
}

pub fn reverse_complete(rec: &CompleteCutRecord) -> Result<RootedTree> {
    let all: Vec<usize> = (1..=rec.cut_tree.n()).collect();
    shuff_with(&rec.cut_tree, &all, &rec.marks, rec.original_root)
}

/// Exact reversal from the portable record form.
pub fn reverse_record(rec: &CutRecordJson) -> Result<RootedTree> {
    shuff_with(&rec.cut_tree, &rec.targets, &rec.marks, rec.original_root)
}
