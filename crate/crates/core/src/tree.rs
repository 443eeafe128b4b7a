//! Rooted labelled trees stored as a flat parent array.
//!
//! Vertices are labelled `1..=n`. Edges point from child to parent, so the
//! in-degree of a vertex is its number of children. Trees built by
//! [`build_rrt`] are increasing (every parent has a smaller label than its
//! child); the final tree of a coalescent run is not increasing until it is
//! relabelled.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Vertex label, `1..=n`.
pub type Vertex = u32;

/// Rooted labelled tree on `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeTopology {
    /// `parent[v]` for `v in 1..=n`; the root stores 0 and slot 0 is unused.
    parent: Vec<Vertex>,
    root: Vertex,
}

/// In-degree, depth and label of one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexStats {
    pub degree: u32,
    pub depth: u32,
    pub label: Vertex,
}

impl TreeTopology {
    /// Builds a tree from `parents[v - 1]` for `v in 1..=n`, with 0 marking
    /// the root.
    pub fn from_parents(parents: &[Vertex]) -> Result<Self> {
        let n = parents.len();
        if n == 0 {
            return invalid("a tree needs at least one vertex");
        }
        if n > u32::MAX as usize - 1 {
            return invalid("too many vertices");
        }
        let mut parent = Vec::with_capacity(n + 1);
        parent.push(0);
        parent.extend_from_slice(parents);
        let mut root = None;
        for (v, &p) in parent.iter().enumerate().skip(1) {
            let p = p as usize;
            if p == 0 {
                if root.replace(v as Vertex).is_some() {
                    return invalid("more than one root");
                }
            } else if p > n {
                return invalid(format!("parent {p} of vertex {v} is out of range"));
            } else if p == v {
                return invalid(format!("vertex {v} is its own parent"));
            }
        }
        let root = root.ok_or_else(|| Error::InvalidArgument("no root".into()))?;
        let tree = Self { parent, root };
        tree.depths_checked()?;
        Ok(tree)
    }

    pub(crate) fn from_parts_unchecked(parent: Vec<Vertex>, root: Vertex) -> Self {
        debug_assert_eq!(parent[root as usize], 0);
        Self { parent, root }
    }

    /// Star on `n` vertices centred at 1.
    pub fn star(n: usize) -> Result<Self> {
        let parents: Vec<Vertex> = (1..=n).map(|v| if v == 1 { 0 } else { 1 }).collect();
        Self::from_parents(&parents)
    }

    /// Path `n -> n-1 -> ... -> 1`.
    pub fn path(n: usize) -> Result<Self> {
        let parents: Vec<Vertex> = (1..=n).map(|v| (v - 1) as Vertex).collect();
        Self::from_parents(&parents)
    }

    pub fn n(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    /// Parent of `v`, `None` for the root.
    pub fn parent(&self, v: Vertex) -> Result<Option<Vertex>> {
        self.check(v)?;
        Ok(match self.parent[v as usize] {
            0 => None,
            p => Some(p),
        })
    }

    /// Parent array indexed by label; slot 0 and the root hold 0.
    pub fn parent_array(&self) -> &[Vertex] {
        &self.parent
    }

    /// `parent[v] < v` for every non-root vertex (root must be 1).
    pub fn is_increasing(&self) -> bool {
        self.root == 1 && (2..self.parent.len()).all(|v| (self.parent[v] as usize) < v)
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if v == 0 || v as usize > self.n() {
            return invalid(format!("vertex {v} not in [1, {}]", self.n()));
        }
        Ok(())
    }

    /// Number of children of `v`.
    pub fn in_degree(&self, v: Vertex) -> Result<u32> {
        self.check(v)?;
        Ok(self.parent[1..].iter().filter(|&&p| p == v).count() as u32)
    }

    /// In-degrees of all vertices, indexed by label (slot 0 unused).
    pub fn in_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.parent.len()];
        for &p in &self.parent[1..] {
            if p != 0 {
                deg[p as usize] += 1;
            }
        }
        deg
    }

    /// Edge count from `v` to the root.
    pub fn depth(&self, v: Vertex) -> Result<u32> {
        self.check(v)?;
        let mut depth = 0;
        let mut u = v;
        while self.parent[u as usize] != 0 {
            u = self.parent[u as usize];
            depth += 1;
        }
        Ok(depth)
    }

    /// Depths of all vertices, indexed by label (slot 0 unused).
    pub fn depths(&self) -> Vec<u32> {
        self.depths_checked().expect("validated at construction")
    }

    fn depths_checked(&self) -> Result<Vec<u32>> {
        const UNKNOWN: u32 = u32::MAX;
        let n = self.n();
        let mut depth = vec![UNKNOWN; n + 1];
        depth[0] = 0;
        depth[self.root as usize] = 0;
        let mut stack = Vec::new();
        for v in 1..=n {
            let mut u = v;
            while depth[u] == UNKNOWN {
                stack.push(u);
                if stack.len() > n {
                    return invalid("parent map contains a cycle");
                }
                u = self.parent[u] as usize;
            }
            let mut d = depth[u];
            while let Some(w) = stack.pop() {
                d += 1;
                depth[w] = d;
            }
        }
        Ok(depth)
    }

    /// Deepest common ancestor of `u` and `v`.
    pub fn lca(&self, u: Vertex, v: Vertex) -> Result<Vertex> {
        let (du, dv) = (self.depth(u)?, self.depth(v)?);
        Ok(self.lca_with_depths(u, du, v, dv))
    }

    fn lca_with_depths(&self, mut u: Vertex, mut du: u32, mut v: Vertex, mut dv: u32) -> Vertex {
        while du > dv {
            u = self.parent[u as usize];
            du -= 1;
        }
        while dv > du {
            v = self.parent[v as usize];
            dv -= 1;
        }
        while u != v {
            u = self.parent[u as usize];
            v = self.parent[v as usize];
        }
        u
    }

    /// Graph distance between `u` and `v`.
    pub fn distance(&self, u: Vertex, v: Vertex) -> Result<u32> {
        let (du, dv) = (self.depth(u)?, self.depth(v)?);
        let w = self.lca_with_depths(u, du, v, dv);
        let dw = self.depth(w)?;
        Ok(du + dv - 2 * dw)
    }

    /// Distance using a precomputed depth array from [`Self::depths`].
    pub fn distance_with_depths(&self, depths: &[u32], u: Vertex, v: Vertex) -> Result<u32> {
        self.check(u)?;
        self.check(v)?;
        let (du, dv) = (depths[u as usize], depths[v as usize]);
        let w = self.lca_with_depths(u, du, v, dv);
        Ok(du + dv - 2 * depths[w as usize])
    }

    /// Relabels vertex `v` as `labels[v]`. `labels` must be a bijection on
    /// `[n]` (slot 0 ignored).
    pub fn relabel(&self, labels: &[Vertex]) -> Result<TreeTopology> {
        let n = self.n();
        if labels.len() != n + 1 {
            return invalid("label map has the wrong length");
        }
        let mut seen = vec![false; n + 1];
        for &l in &labels[1..] {
            if l == 0 || l as usize > n || std::mem::replace(&mut seen[l as usize], true) {
                return invalid("label map is not a bijection on [n]");
            }
        }
        let mut parent = vec![0; n + 1];
        for v in 1..=n {
            let p = self.parent[v];
            if p != 0 {
                parent[labels[v] as usize] = labels[p as usize];
            }
        }
        Ok(TreeTopology::from_parts_unchecked(
            parent,
            labels[self.root as usize],
        ))
    }

    /// Writes the tree as a `child,parent` CSV edge list with a header row.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "child,parent")?;
        for v in 1..=self.n() {
            let p = self.parent[v];
            if p != 0 {
                writeln!(out, "{v},{p}")?;
            }
        }
        Ok(())
    }

    /// Reads a `child,parent` edge list. Lines starting with `#` are skipped.
    /// The vertex count is the largest label seen.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<TreeTopology> {
        let mut edges = Vec::new();
        let mut header_seen = false;
        for line in input.lines() {
            let line = line.map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line != "child,parent" {
                    return invalid(format!("expected header `child,parent`, got `{line}`"));
                }
                header_seen = true;
                continue;
            }
            let (c, p) = line
                .split_once(',')
                .ok_or_else(|| Error::InvalidArgument(format!("malformed row `{line}`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<Vertex>()
                    .map_err(|e| Error::InvalidArgument(format!("bad vertex `{s}`: {e}")))
            };
            edges.push((parse(c)?, parse(p)?));
        }
        let n = edges.iter().map(|&(c, p)| c.max(p)).max().unwrap_or(1) as usize;
        let mut parents = vec![0; n];
        for (c, p) in edges {
            if c == 0 || p == 0 {
                return invalid("vertex labels start at 1");
            }
            if parents[c as usize - 1] != 0 {
                return invalid(format!("vertex {c} has two parents"));
            }
            parents[c as usize - 1] = p;
        }
        TreeTopology::from_parents(&parents)
    }
}

/// Grows a random recursive tree: vertex `m + 1` attaches to a uniform
/// vertex of `[m]`.
pub fn build_rrt<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TreeTopology> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if n > u32::MAX as usize - 1 {
        return invalid("n too large");
    }
    let mut parent = Vec::with_capacity(n + 1);
    parent.push(0);
    parent.push(0);
    for m in 1..n as u32 {
        parent.push(rng.random_range(1..=m));
    }
    Ok(TreeTopology::from_parts_unchecked(parent, 1))
}

/// All vertices in decreasing order of in-degree, ties split uniformly at
/// random, reported as `(degree, depth, label)`.
pub fn top_degree_order<R: Rng + ?Sized>(tree: &TreeTopology, rng: &mut R) -> Vec<VertexStats> {
    let degrees = tree.in_degrees();
    let depths = tree.depths();
    let mut order: Vec<Vertex> = (1..=tree.n() as Vertex).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| degrees[b as usize].cmp(&degrees[a as usize]));
    order
        .into_iter()
        .map(|v| VertexStats {
            degree: degrees[v as usize],
            depth: depths[v as usize],
            label: v,
        })
        .collect()
}
