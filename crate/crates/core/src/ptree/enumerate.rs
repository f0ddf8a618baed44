use crate::error::{Error, Result};

use super::tree::{RootedTree, NO_PARENT};

/// Largest `n` accepted by [`enumerate_rooted_trees`] (`8^7` trees).
pub const MAX_ENUMERATION_N: usize = 8;

/// Every rooted labelled tree on `1..=n`, each exactly once.
///
/// Trees are produced as (Prüfer code, root) pairs: `n^(n-2)` unrooted trees
/// times `n` roots.
pub fn enumerate_rooted_trees(n: usize) -> Result<RootedTrees> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::EnumerationBoundExceeded {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    if n == 0 {
        return Err(Error::InvalidTree("no vertices".into()));
    }
    Ok(RootedTrees {
        n,
        code: vec![1; n.saturating_sub(2)],
        root: 1,
        done: false,
        current_edges: None,
    })
}

pub struct RootedTrees {
    n: usize,
    code: Vec<usize>,
    root: usize,
    done: bool,
    current_edges: Option<Vec<(usize, usize)>>,
}

impl RootedTrees {
    fn advance_code(&mut self) -> bool {
        for digit in self.code.iter_mut().rev() {
            if *digit < self.n {
                *digit += 1;
                return true;
            }
            *digit = 1;
        }
        false
    }
}

impl Iterator for RootedTrees {
    type Item = RootedTree;

    fn next(&mut self) -> Option<RootedTree> {
        if self.done {
            return None;
        }
        if self.n == 1 {
            self.done = true;
            return Some(RootedTree::single());
        }
        let edges = self
            .current_edges
            .get_or_insert_with(|| prufer_decode(&self.code, self.n))
            .clone();
        let tree = orient(self.n, self.root, &edges);
        if self.root < self.n {
            self.root += 1;
        } else {
            self.root = 1;
            self.current_edges = None;
            if !self.advance_code() {
                self.done = true;
            }
        }
        Some(tree)
    }
}

fn prufer_decode(code: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n + 1];
    for &c in code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let leaf = (1..=n).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf, c));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let last: Vec<usize> = (1..=n).filter(|&v| degree[v] == 1).collect();
    edges.push((last[0], last[1]));
    edges
}

fn orient(n: usize, root: usize, edges: &[(usize, usize)]) -> RootedTree {
    let mut adj = vec![Vec::new(); n + 1];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![NO_PARENT; n + 1];
    let mut stack = vec![root];
    let mut seen = vec![false; n + 1];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    RootedTree::from_parts_unchecked(root, parent)
}
