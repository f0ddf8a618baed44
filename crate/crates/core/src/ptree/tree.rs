use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Sentinel parent of the root.
pub const NO_PARENT: usize = 0;

/// A rooted tree on the labels `1..=n`, stored as a parent map.
///
/// `parent[u]` is the parent of `u`, `parent[root] == NO_PARENT`, and slot 0
/// is unused. The parent vector is a canonical key: two trees are equal iff
/// they have the same root and the same oriented edges.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootedTree {
    root: usize,
    parent: Vec<usize>,
}

impl RootedTree {
    /// Validates `parent` (length `n + 1`, slot 0 ignored).
    pub fn new(root: usize, mut parent: Vec<usize>) -> Result<Self> {
        let n = parent.len().saturating_sub(1);
        if n == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        if root == 0 || root > n {
            return Err(Error::VertexOutOfRange { vertex: root, n });
        }
        parent[0] = NO_PARENT;
        if parent[root] != NO_PARENT {
            return Err(Error::InvalidTree(format!("root {root} has a parent")));
        }
        for u in 1..=n {
            let p = parent[u];
            if u != root && (p == 0 || p > n) {
                return Err(Error::InvalidTree(format!(
                    "vertex {u} has invalid parent {p}"
                )));
            }
        }
        let tree = RootedTree { root, parent };
        // every vertex must reach the root
        let mut state = vec![0u8; n + 1]; // 0 unknown, 1 on stack, 2 reaches root
        state[root] = 2;
        let mut stack = Vec::new();
        for start in 1..=n {
            let mut u = start;
            while state[u] == 0 {
                state[u] = 1;
                stack.push(u);
                u = tree.parent[u];
            }
            if state[u] == 1 {
                return Err(Error::InvalidTree(format!("cycle through vertex {u}")));
            }
            for v in stack.drain(..) {
                state[v] = 2;
            }
        }
        Ok(tree)
    }

    pub(crate) fn from_parts_unchecked(root: usize, parent: Vec<usize>) -> Self {
        debug_assert!(RootedTree::new(root, parent.clone()).is_ok());
        RootedTree { root, parent }
    }

    pub fn single() -> Self {
        RootedTree {
            root: 1,
            parent: vec![NO_PARENT, NO_PARENT],
        }
    }

    /// Path `path[0] -> path[1] -> ...` rooted at `path[0]`.
    pub fn path(path: &[usize]) -> Result<Self> {
        let n = path.len();
        let mut parent = vec![NO_PARENT; n + 1];
        for w in path.windows(2) {
            if w[1] == 0 || w[1] > n {
                return Err(Error::VertexOutOfRange { vertex: w[1], n });
            }
            parent[w[1]] = w[0];
        }
        RootedTree::new(*path.first().ok_or(Error::EmptyTargets)?, parent)
    }

    /// Builds a tree from an undirected edge list, oriented away from `root`.
    pub fn from_edges(n: usize, root: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if edges.len() + 1 != n {
            return Err(Error::InvalidTree(format!(
                "{} edges for {n} vertices",
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n + 1];
        for &(a, b) in edges {
            for v in [a, b] {
                if v == 0 || v > n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        if root == 0 || root > n {
            return Err(Error::VertexOutOfRange { vertex: root, n });
        }
        let mut parent = vec![NO_PARENT; n + 1];
        let mut seen = vec![false; n + 1];
        seen[root] = true;
        let mut stack = vec![root];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if count != n {
            return Err(Error::InvalidTree("edge set is not connected".into()));
        }
        Ok(RootedTree { root, parent })
    }

    pub fn n(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn root(&self) -> usize {
        self.root
    }

    #[inline]
    pub fn parent(&self, u: usize) -> Option<usize> {
        match self.parent[u] {
            NO_PARENT => None,
            p => Some(p),
        }
    }

    /// Raw parent slice (slot 0 unused, root maps to [`NO_PARENT`]).
    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.n() {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n() })
        } else {
            Ok(())
        }
    }

    /// Oriented edges `(parent, child)` in child order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.n()).filter_map(move |u| self.parent(u).map(|p| (p, u)))
    }

    /// Undirected edges as sorted pairs, sorted.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
        e.sort_unstable();
        e
    }

    /// Children lists, each sorted ascending.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.n() + 1];
        for (p, u) in self.edges() {
            ch[p].push(u);
        }
        ch
    }

    /// In-degree `C_u(t)` (number of children) per vertex.
    pub fn child_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n() + 1];
        for (p, _) in self.edges() {
            c[p] += 1;
        }
        c
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n() + 1];
        for (p, u) in self.edges() {
            adj[p].push(u);
            adj[u].push(p);
        }
        adj
    }

    /// Vertices from `v` up to the root, inclusive.
    pub fn path_to_root(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut u = v;
        while let Some(p) = self.parent(u) {
            path.push(p);
            u = p;
        }
        path
    }

    pub fn depth(&self, v: usize) -> usize {
        self.path_to_root(v).len() - 1
    }

    /// Depth of every vertex (slot 0 unused).
    pub fn depths(&self) -> Vec<usize> {
        let pre = Preorder::new(self);
        let mut d = vec![0; self.n() + 1];
        for &u in &pre.order {
            if let Some(p) = self.parent(u) {
                d[u] = d[p] + 1;
            }
        }
        d
    }

    /// The same adjacencies rooted at `v`.
    pub fn reroot(&self, v: usize) -> RootedTree {
        let mut parent = self.parent.clone();
        let path = self.path_to_root(v);
        for w in path.windows(2) {
            parent[w[1]] = w[0];
        }
        parent[v] = NO_PARENT;
        RootedTree { root: v, parent }
    }

    /// `Sub(t, u)`: `u` and all its descendants, sorted.
    pub fn subtree_above(&self, u: usize) -> Vec<usize> {
        let children = self.children();
        let mut out = vec![u];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&children[out[i]]);
            i += 1;
        }
        out.sort_unstable();
        out
    }

    /// `Span(t; targets)`: union of the root-to-target paths.
    pub fn span(&self, targets: &[usize]) -> Result<SpanTree> {
        if targets.is_empty() {
            return Err(Error::EmptyTargets);
        }
        let mut parent = BTreeMap::new();
        for &v in targets {
            self.check_vertex(v)?;
            let mut u = v;
            while let Some(p) = self.parent(u) {
                if parent.insert(u, p).is_some() {
                    break;
                }
                u = p;
            }
        }
        Ok(SpanTree {
            root: self.root,
            parent,
        })
    }

    /// Graph distance between `a` and `b`.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let pa = self.path_to_root(a);
        let pb = self.path_to_root(b);
        let mut i = pa.len();
        let mut j = pb.len();
        while i > 0 && j > 0 && pa[i - 1] == pb[j - 1] {
            i -= 1;
            j -= 1;
        }
        i + j
    }
}

impl fmt::Debug for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedTree(root={}, edges=[", self.root)?;
        for (i, (p, u)) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}->{u}")?;
        }
        write!(f, "])")
    }
}

impl Serialize for RootedTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Parents<'a>(&'a RootedTree);
        impl Serialize for Parents<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.n() - 1))?;
                for (p, u) in self.0.edges() {
                    m.serialize_entry(&u.to_string(), &p)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("n", &self.n())?;
        m.serialize_entry("root", &self.root)?;
        m.serialize_entry("parent", &Parents(self))?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for RootedTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            n: usize,
            root: usize,
            parent: BTreeMap<String, usize>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.parent.len() + 1 != raw.n {
            return Err(D::Error::custom(format!(
                "expected {} parent entries, found {}",
                raw.n.saturating_sub(1),
                raw.parent.len()
            )));
        }
        let mut parent = vec![NO_PARENT; raw.n + 1];
        for (k, p) in raw.parent {
            let u: usize = k
                .parse()
                .map_err(|_| D::Error::custom(format!("bad vertex key `{k}`")))?;
            if u == 0 || u > raw.n {
                return Err(D::Error::custom(format!("vertex {u} outside 1..={}", raw.n)));
            }
            parent[u] = p;
        }
        RootedTree::new(raw.root, parent).map_err(D::Error::custom)
    }
}

/// A rooted tree on a subset of labels, e.g. `Span(t; V)` or a k-cut backbone.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpanTree {
    pub root: usize,
    /// Parent of every non-root vertex.
    pub parent: BTreeMap<usize, usize>,
}

impl SpanTree {
    pub fn single(root: usize) -> Self {
        SpanTree {
            root,
            parent: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: usize) -> bool {
        v == self.root || self.parent.contains_key(&v)
    }

    /// All vertices, sorted.
    pub fn vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = std::iter::once(self.root)
            .chain(self.parent.keys().copied())
            .collect();
        v.sort_unstable();
        v
    }

    /// `Span*`: the vertices other than the root, sorted.
    pub fn span_star(&self) -> Vec<usize> {
        self.parent.keys().copied().collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().map(|(&u, &p)| (p, u))
    }

    /// Root-to-`v` path, root first.
    pub fn path_from_root(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut u = v;
        while let Some(&p) = self.parent.get(&u) {
            path.push(p);
            u = p;
        }
        path.reverse();
        path
    }

    pub fn depth(&self, v: usize) -> usize {
        self.path_from_root(v).len() - 1
    }

    /// `Span(self; targets)`.
    pub fn span(&self, targets: &[usize]) -> SpanTree {
        let mut parent = BTreeMap::new();
        for &v in targets {
            let mut u = v;
            while let Some(&p) = self.parent.get(&u) {
                if parent.insert(u, p).is_some() {
                    break;
                }
                u = p;
            }
        }
        SpanTree {
            root: self.root,
            parent,
        }
    }

    pub fn vertex_set(&self) -> BTreeSet<usize> {
        self.vertices().into_iter().collect()
    }
}

/// Preorder traversal with subtree intervals: `Sub(t, u)` is
/// `order[tin[u]..tout[u]]`.
#[derive(Clone, Debug)]
pub struct Preorder {
    pub order: Vec<usize>,
    pub tin: Vec<usize>,
    pub tout: Vec<usize>,
}

impl Preorder {
    pub fn new(tree: &RootedTree) -> Self {
        Self::from_children(tree.root(), &tree.children(), tree.n())
    }

    pub fn from_children(root: usize, children: &[Vec<usize>], n: usize) -> Self {
        let mut order = Vec::with_capacity(n);
        let mut tin = vec![0; n + 1];
        let mut tout = vec![0; n + 1];
        // (vertex, next child index)
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        tin[root] = 0;
        order.push(root);
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(&c) = children[u].get(*next) {
                *next += 1;
                tin[c] = order.len();
                order.push(c);
                stack.push((c, 0));
            } else {
                tout[u] = order.len();
                stack.pop();
            }
        }
        Preorder { order, tin, tout }
    }

    /// `a` is an ancestor of (or equal to) `b`.
    #[inline]
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.tin[a] <= self.tin[b] && self.tin[b] < self.tout[a]
    }

    pub fn subtree(&self, u: usize) -> &[usize] {
        &self.order[self.tin[u]..self.tout[u]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> RootedTree {
        // 1 -> {2, 3}, 3 -> 4
        RootedTree::new(1, vec![0, 0, 1, 1, 3]).unwrap()
    }

    #[test]
    fn validation_catches_cycles_and_bad_parents() {
        assert!(RootedTree::new(1, vec![0, 0, 3, 2]).is_err());
        assert!(RootedTree::new(1, vec![0, 0, 7]).is_err());
        assert!(RootedTree::new(1, vec![0, 2, 1]).is_err());
        assert!(RootedTree::new(3, vec![0, 0, 1]).is_err());
        assert!(star().child_counts()[1..].iter().sum::<usize>() == 3);
    }

    #[test]
    fn reroot_examples() {
        let t = star();
        assert_eq!(t.reroot(t.root()), t);
        let two = RootedTree::path(&[1, 2]).unwrap();
        let r = two.reroot(2);
        assert_eq!(r.root(), 2);
        assert_eq!(r.parent(1), Some(2));
        let r4 = t.reroot(4);
        assert_eq!(r4.undirected_edges(), t.undirected_edges());
        assert_eq!(r4.reroot(1), t);
    }

    #[test]
    fn span_and_subtree_examples() {
        let t = star();
        assert_eq!(t.span(&[1]).unwrap().vertices(), vec![1]);
        assert!(t.span(&[]).is_err());
        let p = RootedTree::path(&[2, 4, 1, 3]).unwrap();
        assert_eq!(p.span(&[3]).unwrap().vertices(), vec![1, 2, 3, 4]);
        assert_eq!(t.span(&[4]).unwrap().span_star(), vec![3, 4]);
        assert_eq!(t.subtree_above(1), vec![1, 2, 3, 4]);
        assert_eq!(t.subtree_above(2), vec![2]);
        assert_eq!(t.subtree_above(3), vec![3, 4]);
        assert_eq!(t.distance(2, 4), 3);
    }

    #[test]
    fn json_round_trip_and_format() {
        let t = star();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"n":4,"root":1,"parent":{"2":1,"3":1,"4":3}}"#);
        let back: RootedTree = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<RootedTree>(r#"{"n":3,"root":1,"parent":{"2":1}}"#).is_err());
        assert!(serde_json::from_str::<RootedTree>(r#"{"n":2,"root":1,"parent":{"x":1}}"#).is_err());
    }

    #[test]
    fn preorder_intervals_match_subtrees() {
        let t = star();
        let pre = Preorder::new(&t);
        for u in 1..=4 {
            let mut s = pre.subtree(u).to_vec();
            s.sort_unstable();
            assert_eq!(s, t.subtree_above(u));
        }
        assert!(pre.is_ancestor(1, 4));
        assert!(!pre.is_ancestor(2, 4));
    }
}
