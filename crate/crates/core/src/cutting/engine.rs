use rand::Rng;

use crate::ptree::{ProbWeights, RestrictedPicker, RootedTree, NO_PARENT};

/// Raw output of one cutting run.
pub(crate) struct Trace {
    pub cut_tree: RootedTree,
    pub cuts: Vec<usize>,
    /// Per cut: the neighbours of `X_i` that root a kept piece.
    pub mark_sets: Vec<Vec<usize>>,
    /// `succ -> mark`, in cut order of `succ`.
    pub marks: Vec<(usize, usize)>,
    /// Per target, the cuts that hit its component (cut order). Empty when
    /// not tracked.
    pub effective: Vec<Vec<usize>>,
}

#[derive(Clone, Copy)]
struct Piece {
    creator: usize,
    attach: usize,
}

/// Cuts p-nodes until every target is cut, keeping only components that
/// still hold a target. `pick` receives the live-vertex mask.
pub(crate) fn run<P>(tree: &RootedTree, targets: &[usize], track_effective: bool, mut pick: P) -> Trace
where
    P: FnMut(&[bool]) -> usize,
{
    let n = tree.n();
    let adj = tree.adjacency();
    let mut is_target = vec![false; n + 1];
    let mut remaining = 0;
    for &v in targets {
        if !is_target[v] {
            is_target[v] = true;
            remaining += 1;
        }
    }
    let mut alive = vec![true; n + 1];
    alive[0] = false;
    let mut comp = vec![0usize; n + 1];
    let mut pieces = vec![Piece {
        creator: NO_PARENT,
        attach: NO_PARENT,
    }];
    let mut parent = vec![NO_PARENT; n + 1];
    let mut cuts = Vec::new();
    let mut mark_sets = Vec::new();
    let mut marks = Vec::new();
    let mut effective = vec![Vec::new(); if track_effective { targets.len() } else { 0 }];
    let mut queue = Vec::new();
    let mut bfs_parent = vec![NO_PARENT; n + 1];

    while remaining > 0 {
        let x = pick(&alive);
        debug_assert!(alive[x]);
        let c = comp[x];
        if track_effective {
            for (l, &v) in targets.iter().enumerate() {
                if alive[v] && comp[v] == c {
                    effective[l].push(x);
                }
            }
        }
        let piece = pieces[c];
        parent[x] = piece.creator;
        if piece.creator != NO_PARENT {
            marks.push((x, piece.attach));
        }
        cuts.push(x);
        alive[x] = false;
        if is_target[x] {
            remaining -= 1;
        }
        let mut kept = Vec::new();
        for &w in &adj[x] {
            if !alive[w] {
                continue;
            }
            queue.clear();
            queue.push(w);
            bfs_parent[w] = x;
            alive[w] = false;
            let mut has_target = is_target[w];
            let mut i = 0;
            while i < queue.len() {
                let u = queue[i];
                i += 1;
                for &y in &adj[u] {
                    if alive[y] {
                        alive[y] = false;
                        bfs_parent[y] = u;
                        has_target |= is_target[y];
                        queue.push(y);
                    }
                }
            }
            if has_target {
                let id = pieces.len();
                pieces.push(Piece { creator: x, attach: w });
                for &u in &queue {
                    alive[u] = true;
                    comp[u] = id;
                }
                kept.push(w);
            } else {
                for &u in &queue {
                    parent[u] = bfs_parent[u];
                }
            }
        }
        mark_sets.push(kept);
    }
    Trace {
        cut_tree: RootedTree::from_parts_unchecked(cuts[0], parent),
        cuts,
        mark_sets,
        marks,
        effective,
    }
}

/// Adaptive restricted picks from the live set.
pub(crate) fn adaptive_picker<'w, R: Rng + ?Sized>(
    weights: &'w ProbWeights,
    rng: &'w mut R,
) -> impl FnMut(&[bool]) -> usize + 'w {
    let mut picker = RestrictedPicker::adaptive(weights);
    move |alive: &[bool]| {
        picker.pick(
            rng,
            |y| alive[y],
            || (1..alive.len()).filter(|&u| alive[u]).collect(),
        )
    }
}

/// A lazily extended i.i.d. p-sequence `Y_1, Y_2, ...` shared by several runs.
pub(crate) struct SharedStream<'a, R: Rng + ?Sized> {
    ys: Vec<usize>,
    weights: &'a ProbWeights,
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> SharedStream<'a, R> {
    pub fn new(weights: &'a ProbWeights, rng: &'a mut R) -> Self {
        SharedStream {
            ys: Vec::new(),
            weights,
            rng,
        }
    }

    /// `Y_{j+1}`.
    pub fn get(&mut self, j: usize) -> usize {
        while self.ys.len() <= j {
            self.ys.push(self.weights.sample(self.rng));
        }
        self.ys[j]
    }
}
