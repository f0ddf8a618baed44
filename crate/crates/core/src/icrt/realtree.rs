use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::theta::ThetaParam;

/// What a vertex of a reduced tree stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VertexKind {
    Root,
    /// The leaf `xi_index` (1-based), sitting at the cutpoint `eta_index`.
    Leaf { index: usize },
    /// A joinpoint of the octant process.
    Graft,
    /// The branch point `beta_index` (1-based).
    Atom { index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RtVertex {
    pub parent: Option<usize>,
    /// Length of the edge to the parent.
    pub length: f64,
    /// Coordinate on the half line before gluing.
    pub position: f64,
    pub kind: VertexKind,
}

/// Where a cutpoint came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutSource {
    Octant,
    Atom(usize),
}

/// The line-breaking trace behind a reduced tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineBreakTrace {
    /// `eta_1 < eta_2 < ...`
    pub cutpoints: Vec<f64>,
    /// `eta_j^*`, one per cutpoint.
    pub joinpoints: Vec<f64>,
    pub sources: Vec<CutSource>,
    /// `xi_{i,1}` for every `i`, whether or not it made it into the tree.
    pub first_atom_points: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    /// `i` in `beta_i`, 1-based.
    pub index: usize,
    pub vertex: usize,
    pub local_time: f64,
}

/// A reduced ICRT `R_k`: a finite rooted tree with edge lengths.
///
/// Vertex 0 is the root and every parent has a smaller id than its
/// children.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealTree {
    pub theta: ThetaParam,
    pub vertices: Vec<RtVertex>,
    /// Vertex of `xi_i` at index `i - 1`.
    pub leaves: Vec<usize>,
    pub branch_points: Vec<BranchPoint>,
    pub trace: LineBreakTrace,
    heights: Vec<f64>,
}

/// Runs the Poisson line-breaking construction until `k` cutpoints and
/// glues the first `k` intervals into `R_k`.
pub fn line_break<R: Rng + ?Sized>(theta: &ThetaParam, k: usize, rng: &mut R) -> Result<RealTree> {
    if k == 0 {
        return Err(Error::Degenerate("line_break needs k >= 1".into()));
    }
    let th0sq = theta.theta0() * theta.theta0();
    let exp = |rng: &mut R| -> f64 { rng.sample(Exp1) };
    // octant points projected on x have intensity theta0^2 x dx
    let mut next_octant = (2.0 * exp(rng) / th0sq).sqrt();
    let first: Vec<f64> = theta.thetas().iter().map(|&t| exp(rng) / t).collect();
    let mut next_atom: Vec<f64> = first
        .iter()
        .zip(theta.thetas())
        .map(|(&f, &t)| f + exp(rng) / t)
        .collect();
    let mut trace = LineBreakTrace {
        cutpoints: Vec::with_capacity(k),
        joinpoints: Vec::with_capacity(k),
        sources: Vec::with_capacity(k),
        first_atom_points: first.clone(),
    };
    while trace.cutpoints.len() < k {
        let atom = next_atom
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &x)| (i, x));
        match atom {
            Some((i, x)) if x < next_octant => {
                trace.cutpoints.push(x);
                trace.joinpoints.push(first[i]);
                trace.sources.push(CutSource::Atom(i + 1));
                next_atom[i] += exp(rng) / theta.thetas()[i];
            }
            _ => {
                let u = next_octant;
                trace.cutpoints.push(u);
                trace.joinpoints.push(u * rng.random::<f64>());
                trace.sources.push(CutSource::Octant);
                next_octant = (u * u + 2.0 * exp(rng) / th0sq).sqrt();
            }
        }
    }
    RealTree::assemble(theta.clone(), trace)
}

impl RealTree {
    /// Glues `[0, eta_1]` and `[eta_q, eta_{q+1}]` at `eta_q^*` for every
    /// cutpoint in `trace`.
    pub fn assemble(theta: ThetaParam, trace: LineBreakTrace) -> Result<RealTree> {
        let cut = &trace.cutpoints;
        let k = cut.len();
        if k == 0 || trace.joinpoints.len() != k {
            return Err(Error::Degenerate("trace needs one joinpoint per cutpoint".into()));
        }
        if cut[0] <= 0.0 || cut.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Degenerate("cutpoints must increase from 0".into()));
        }
        if let Some(j) = (0..k).find(|&j| !(trace.joinpoints[j] < cut[j] && trace.joinpoints[j] >= 0.0)) {
            return Err(Error::Degenerate(format!("joinpoint {j} is not below its cutpoint")));
        }
        let last = cut[k - 1];
        // (position, kind) of every special point other than the root
        let mut points: Vec<(f64, VertexKind)> = Vec::new();
        for (q, &c) in cut.iter().enumerate() {
            points.push((c, VertexKind::Leaf { index: q + 1 }));
        }
        let mut atom_at: BTreeMap<u64, usize> = BTreeMap::new();
        for (i, &x) in trace.first_atom_points.iter().enumerate() {
            if x < last {
                points.push((x, VertexKind::Atom { index: i + 1 }));
                atom_at.insert(x.to_bits(), i + 1);
            }
        }
        for &x in &trace.joinpoints[..k - 1] {
            if !atom_at.contains_key(&x.to_bits()) && x > 0.0 {
                points.push((x, VertexKind::Graft));
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);

        let mut vertices = vec![RtVertex {
            parent: None,
            length: 0.0,
            position: 0.0,
            kind: VertexKind::Root,
        }];
        let mut at: BTreeMap<u64, usize> = BTreeMap::new();
        at.insert(0f64.to_bits(), 0);
        let mut start = 0;
        for q in 0..k {
            let end = points.partition_point(|p| p.0 <= cut[q]);
            let (mut prev, mut prev_pos) = if q == 0 {
                (0, 0.0)
            } else {
                let base = trace.joinpoints[q - 1];
                (at[&base.to_bits()], cut[q - 1])
            };
            for &(pos, kind) in &points[start..end] {
                let id = vertices.len();
                vertices.push(RtVertex {
                    parent: Some(prev),
                    length: pos - prev_pos,
                    position: pos,
                    kind,
                });
                at.insert(pos.to_bits(), id);
                prev = id;
                prev_pos = pos;
            }
            start = end;
        }
        let mut leaves = vec![0; k];
        let mut branch_points = Vec::new();
        for (id, v) in vertices.iter().enumerate() {
            match v.kind {
                VertexKind::Leaf { index } => leaves[index - 1] = id,
                VertexKind::Atom { index } => branch_points.push(BranchPoint {
                    index,
                    vertex: id,
                    local_time: theta.thetas()[index - 1],
                }),
                _ => {}
            }
        }
        let mut heights = vec![0.0; vertices.len()];
        for id in 1..vertices.len() {
            let v = &vertices[id];
            heights[id] = heights[v.parent.expect("non-root")] + v.length;
        }
        Ok(RealTree {
            theta,
            vertices,
            leaves,
            branch_points,
            trace,
            heights,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of marked leaves `k`.
    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Vertex of the leaf `xi_i`, `i` 1-based.
    pub fn leaf(&self, i: usize) -> Result<usize> {
        if i == 0 || i > self.leaves.len() {
            return Err(Error::UnmarkedLeaf(i));
        }
        Ok(self.leaves[i - 1])
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.vertices[v].parent
    }

    pub fn edge_length(&self, v: usize) -> f64 {
        self.vertices[v].length
    }

    /// Distance from the root.
    pub fn height(&self, v: usize) -> f64 {
        self.heights[v]
    }

    /// Total length `l(R_k)`.
    pub fn total_length(&self) -> f64 {
        self.vertices.iter().map(|v| v.length).sum()
    }

    /// Children lists.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.vertices.len()];
        for (id, v) in self.vertices.iter().enumerate() {
            if let Some(p) = v.parent {
                ch[p].push(id);
            }
        }
        ch
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while a != b {
            if a > b {
                a = self.vertices[a].parent.expect("non-root");
            } else {
                b = self.vertices[b].parent.expect("non-root");
            }
        }
        a
    }

    /// `a` is `b` or lies above it.
    pub fn is_ancestor(&self, a: usize, mut b: usize) -> bool {
        while b > a {
            b = self.vertices[b].parent.expect("non-root");
        }
        a == b
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let c = self.lca(a, b);
        self.heights[a] + self.heights[b] - 2.0 * self.heights[c]
    }

    /// Distances between the root (index 0) and the leaves `xi_1..xi_k`.
    pub fn leaf_distance_matrix(&self) -> Vec<Vec<f64>> {
        let pts: Vec<usize> = std::iter::once(0).chain(self.leaves.iter().copied()).collect();
        pts.iter()
            .map(|&a| pts.iter().map(|&b| self.distance(a, b)).collect())
            .collect()
    }

    /// Number of vertices of degree at least 3.
    pub fn branch_vertex_count(&self) -> usize {
        let ch = self.children();
        (0..self.vertices.len())
            .filter(|&v| ch[v].len() + usize::from(v != 0) >= 3)
            .count()
    }
}
