//! Forward cutting procedures: isolate one vertex, isolate `k` vertices, or
//! cut everything. Every record keeps enough of the trace to undo the cut.

pub(crate) mod engine;
mod one;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ptree::{Preorder, ProbWeights, RootedTree, SpanTree};

pub use one::cut_one;
pub(crate) use one::check_dims;

/// Marks keyed by the backbone vertex they hang below.
pub type MarkVector = BTreeMap<usize, usize>;

/// Trace of [`cut_one`].
#[derive(Clone, Debug, PartialEq)]
pub struct OneCutRecord {
    pub original_root: usize,
    pub target: usize,
    /// `H = cut(T, V)`, rooted at `X_1`.
    pub cut_tree: RootedTree,
    /// `X_1, ..., X_L = V`.
    pub cut_sequence: Vec<usize>,
    /// `U_1, ..., U_{L-1}`: the neighbour of `X_i` on the way to `V`.
    pub marks: Vec<usize>,
}

impl OneCutRecord {
    /// Number of cuts `L`.
    pub fn len(&self) -> usize {
        self.cut_sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cut_sequence.is_empty()
    }

    /// `U_i` keyed by `X_{i+1}`.
    pub fn mark_vector(&self) -> MarkVector {
        self.cut_sequence[1..]
            .iter()
            .copied()
            .zip(self.marks.iter().copied())
            .collect()
    }

    pub fn check_invariants(&self) -> Result<()> {
        let h = &self.cut_tree;
        if self.cut_sequence.last() != Some(&self.target) {
            return Err(Error::Degenerate("last cut is not the target".into()));
        }
        let path = h.span(&[self.target])?.path_from_root(self.target);
        if path != self.cut_sequence {
            return Err(Error::Degenerate(format!(
                "backbone {path:?} differs from cuts {:?}",
                self.cut_sequence
            )));
        }
        if self.marks.len() + 1 != self.len() {
            return Err(Error::Degenerate("wrong number of marks".into()));
        }
        check_marks(h, &self.mark_vector())
    }
}

/// Trace of [`cut_k`].
#[derive(Clone, Debug, PartialEq)]
pub struct KCutRecord {
    pub original_root: usize,
    pub targets: Vec<usize>,
    /// `H_k`, rooted at `X_1`.
    pub cut_tree: RootedTree,
    /// `S_k = Span(H_k; V_1..V_k)`.
    pub backbone: SpanTree,
    pub cut_sequence: Vec<usize>,
    /// `U_i` sets, one per cut.
    pub mark_sets: Vec<Vec<usize>>,
    pub marks: MarkVector,
    /// `E_l` per target, in cut order.
    pub effective_sets: Vec<Vec<usize>>,
    /// Backbone vertices, smallest first.
    pub canonical_order: Vec<usize>,
}

impl KCutRecord {
    pub fn check_invariants(&self) -> Result<()> {
        let h = &self.cut_tree;
        let span = h.span(&self.targets)?;
        if span != self.backbone {
            return Err(Error::Degenerate("backbone is not the span of the targets".into()));
        }
        let position: BTreeMap<usize, usize> =
            self.cut_sequence.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut union = BTreeSet::new();
        for (l, &v) in self.targets.iter().enumerate() {
            let path = self.backbone.path_from_root(v);
            if path != self.effective_sets[l] {
                return Err(Error::Degenerate(format!(
                    "path to target {v} is {path:?}, effective set {:?}",
                    self.effective_sets[l]
                )));
            }
            if path.windows(2).any(|w| position[&w[0]] >= position[&w[1]]) {
                return Err(Error::Degenerate("effective set out of cut order".into()));
            }
            union.extend(path);
        }
        if union != self.cut_sequence.iter().copied().collect() {
            return Err(Error::Degenerate("effective sets do not cover the cuts".into()));
        }
        if self.marks.keys().copied().collect::<Vec<_>>() != self.backbone.span_star() {
            return Err(Error::Degenerate("marks are not keyed by the backbone".into()));
        }
        for (i, &x) in self.cut_sequence.iter().enumerate() {
            let mut expected: Vec<usize> = self
                .backbone
                .edges()
                .filter(|&(p, _)| p == x)
                .map(|(_, w)| self.marks[&w])
                .collect();
            let mut got = self.mark_sets[i].clone();
            expected.sort_unstable();
            got.sort_unstable();
            if expected != got {
                return Err(Error::Degenerate(format!("mark set of cut {x}")));
            }
        }
        if self.canonical_order != canonical_order(&self.backbone, &self.targets) {
            return Err(Error::Degenerate("canonical order".into()));
        }
        check_marks(h, &self.marks)
    }
}

/// Trace of [`cut_complete`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompleteCutRecord {
    pub original_root: usize,
    /// `G = cut(T)`, rooted at `X_1`.
    pub cut_tree: RootedTree,
    /// `X_1, ..., X_n`.
    pub permutation: Vec<usize>,
    pub mark_sets: Vec<Vec<usize>>,
    /// One mark per non-root vertex of `G`.
    pub marks: MarkVector,
}

impl CompleteCutRecord {
    pub fn check_invariants(&self) -> Result<()> {
        let g = &self.cut_tree;
        let n = g.n();
        let mut position = vec![usize::MAX; n + 1];
        for (i, &x) in self.permutation.iter().enumerate() {
            position[x] = i;
        }
        if self.permutation.len() != n || position[1..].contains(&usize::MAX) {
            return Err(Error::Degenerate("cut sequence is not a permutation".into()));
        }
        if g.root() != self.permutation[0] {
            return Err(Error::Degenerate("root of G is not X_1".into()));
        }
        for (p, u) in g.edges() {
            if position[p] >= position[u] {
                return Err(Error::Degenerate(format!("edge {p}->{u} goes back in time")));
            }
        }
        if self.marks.len() + 1 != n {
            return Err(Error::Degenerate("one mark per edge expected".into()));
        }
        check_marks(g, &self.marks)
    }
}

fn check_marks(h: &RootedTree, marks: &MarkVector) -> Result<()> {
    let pre = Preorder::new(h);
    for (&w, &u) in marks {
        if !pre.is_ancestor(w, u) {
            return Err(Error::MarkOutsideSubtree { successor: w, mark: u });
        }
    }
    Ok(())
}

/// Isolates all of `targets` (repeats allowed).
pub fn cut_k<R: Rng + ?Sized>(
    tree: &RootedTree,
    targets: &[usize],
    weights: &ProbWeights,
    rng: &mut R,
) -> Result<KCutRecord> {
    check_targets(tree, targets, weights)?;
    let trace = engine::run(tree, targets, true, engine::adaptive_picker(weights, rng));
    Ok(k_record(tree, targets, trace))
}

/// `cut(T; V_1..V_k)` for `k = 1..=K` from one shared p-sequence, so the
/// backbones are nested.
pub fn coupled_cut_family<R: Rng + ?Sized>(
    tree: &RootedTree,
    targets: &[usize],
    weights: &ProbWeights,
    rng: &mut R,
) -> Result<Vec<KCutRecord>> {
    check_targets(tree, targets, weights)?;
    let mut stream = engine::SharedStream::new(weights, rng);
    Ok((1..=targets.len())
        .map(|k| {
            let mut j = 0;
            let cursor = |alive: &[bool]| loop {
                let y = stream.get(j);
                j += 1;
                if alive[y] {
                    return y;
                }
            };
            let trace = engine::run(tree, &targets[..k], true, cursor);
            k_record(tree, &targets[..k], trace)
        })
        .collect())
}

/// Cuts every component until no vertex is left.
pub fn cut_complete<R: Rng + ?Sized>(
    tree: &RootedTree,
    weights: &ProbWeights,
    rng: &mut R,
) -> Result<CompleteCutRecord> {
    check_dims(tree, weights)?;
    let all: Vec<usize> = (1..=tree.n()).collect();
    let trace = engine::run(tree, &all, false, engine::adaptive_picker(weights, rng));
    Ok(CompleteCutRecord {
        original_root: tree.root(),
        cut_tree: trace.cut_tree,
        permutation: trace.cuts,
        mark_sets: trace.mark_sets,
        marks: trace.marks.into_iter().collect(),
    })
}

fn check_targets(tree: &RootedTree, targets: &[usize], weights: &ProbWeights) -> Result<()> {
    check_dims(tree, weights)?;
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    targets.iter().try_for_each(|&v| tree.check_vertex(v))
}

fn k_record(tree: &RootedTree, targets: &[usize], trace: engine::Trace) -> KCutRecord {
    let backbone = trace
        .cut_tree
        .span(targets)
        .expect("targets were validated");
    let canonical_order = canonical_order(&backbone, targets);
    KCutRecord {
        original_root: tree.root(),
        targets: targets.to_vec(),
        cut_tree: trace.cut_tree,
        backbone,
        cut_sequence: trace.cuts,
        mark_sets: trace.mark_sets,
        marks: trace.marks.into_iter().collect(),
        effective_sets: trace.effective,
        canonical_order,
    }
}

/// Backbone vertices sorted by the canonical order: first by the smallest
/// `l` such that the vertex lies in `Span(backbone; V_1..V_l)`, then by depth.
pub fn canonical_order(backbone: &SpanTree, targets: &[usize]) -> Vec<usize> {
    let mut level: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (l, &v) in targets.iter().enumerate() {
        let path = backbone.path_from_root(v);
        for (depth, &u) in path.iter().enumerate().rev() {
            if level.contains_key(&u) {
                break;
            }
            level.insert(u, (l, depth));
        }
    }
    let mut order: Vec<usize> = level.keys().copied().collect();
    order.sort_by_key(|u| level[u]);
    order
}

/// Kind tag of [`CutRecordJson`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutKind {
    One,
    K,
    Complete,
}

/// Portable form of any cut record: the cut tree in the shared tree format
/// plus `cuts`, `marks` (successor -> mark) and `targets`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutRecordJson {
    pub kind: CutKind,
    #[serde(flatten)]
    pub cut_tree: RootedTree,
    pub cuts: Vec<usize>,
    pub marks: MarkVector,
    pub targets: Vec<usize>,
    pub original_root: usize,
}

impl From<&OneCutRecord> for CutRecordJson {
    fn from(r: &OneCutRecord) -> Self {
        CutRecordJson {
            kind: CutKind::One,
            cut_tree: r.cut_tree.clone(),
            cuts: r.cut_sequence.clone(),
            marks: r.mark_vector(),
            targets: vec![r.target],
            original_root: r.original_root,
        }
    }
}

impl From<&KCutRecord> for CutRecordJson {
    fn from(r: &KCutRecord) -> Self {
        CutRecordJson {
            kind: CutKind::K,
            cut_tree: r.cut_tree.clone(),
            cuts: r.cut_sequence.clone(),
            marks: r.marks.clone(),
            targets: r.targets.clone(),
            original_root: r.original_root,
        }
    }
}

impl From<&CompleteCutRecord> for CutRecordJson {
    fn from(r: &CompleteCutRecord) -> Self {
        CutRecordJson {
            kind: CutKind::Complete,
            cut_tree: r.cut_tree.clone(),
            cuts: r.permutation.clone(),
            marks: r.marks.clone(),
            targets: (1..=r.cut_tree.n()).collect(),
            original_root: r.original_root,
        }
    }
}
