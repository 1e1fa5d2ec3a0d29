//! Immutable undirected graphs with optional node features and label.
//!
//! Edges are stored canonically as `(u, v)` with `u < v`, sorted
//! lexicographically, so an edge's position in [`Graph::edges`] is a stable
//! identifier that explanation masks can refer to.

use rand::Rng;

use crate::error::{Error, Result};

/// Largest cyclomatic number accepted by [`count_simple_cycles`].
pub const CYCLE_GUARD: usize = 20;

/// Index into a graph's canonical edge list.
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    features: Option<Vec<Vec<f64>>>,
    label: Option<u32>,
}

impl Graph {
    /// Validates and canonicalises a raw graph description.
    ///
    /// Each edge is rewritten as `(min, max)`; the list is then sorted. Errors
    /// name the offending edge position (in input order) or feature row.
    pub fn new(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        features: Option<Vec<Vec<f64>>>,
        label: Option<u32>,
    ) -> Result<Self> {
        let mut canonical: Vec<(usize, usize, usize)> = Vec::new();
        for (position, (a, b)) in edges.into_iter().enumerate() {
            if a == b {
                return Err(Error::SelfLoop { node: a, position });
            }
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::IndexOutOfRange {
                    u: a,
                    v: b,
                    position,
                    num_nodes,
                });
            }
            canonical.push((a.min(b), a.max(b), position));
        }
        canonical.sort_unstable();
        for w in canonical.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                let later = w[0].2.max(w[1].2);
                return Err(Error::DuplicateEdge {
                    u: w[0].0,
                    v: w[0].1,
                    position: later,
                });
            }
        }
        if let Some(rows) = &features {
            check_features(num_nodes, rows)?;
        }
        Ok(Self {
            num_nodes,
            edges: canonical.into_iter().map(|(u, v, _)| (u, v)).collect(),
            features,
            label,
        })
    }

    /// A graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            num_nodes: n,
            edges: Vec::new(),
            features: None,
            label: None,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> Option<&[Vec<f64>]> {
        self.features.as_deref()
    }

    /// Width of the feature rows, if any (0 for a featured graph with no nodes).
    pub fn feature_dim(&self) -> Option<usize> {
        self.features
            .as_ref()
            .map(|rows| rows.first().map_or(0, Vec::len))
    }

    pub fn label(&self) -> Option<u32> {
        self.label
    }

    pub fn with_label(mut self, label: Option<u32>) -> Self {
        self.label = label;
        self
    }

    /// Replaces the feature matrix, re-checking its shape.
    pub fn with_features(mut self, features: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if let Some(rows) = &features {
            check_features(self.num_nodes, rows)?;
        }
        self.features = features;
        Ok(self)
    }

    /// Position of edge `{u, v}` in the canonical list.
    pub fn edge_id(&self, u: usize, v: usize) -> Option<EdgeId> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    /// Neighbour lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn connected_components(&self) -> usize {
        let mut uf = UnionFind::new(self.num_nodes);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        (0..self.num_nodes).filter(|&x| uf.find(x) == x).count()
    }

    /// `|E| - |V| + #components`: the number of independent cycles.
    pub fn cyclomatic_number(&self) -> usize {
        self.edges.len() + self.connected_components() - self.num_nodes
    }

    /// Ids of edges whose endpoints both lie in `lo..hi`.
    pub fn edge_ids_within(&self, lo: usize, hi: usize) -> Vec<EdgeId> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| (lo..hi).contains(&u) && (lo..hi).contains(&v))
            .map(|(i, _)| i)
            .collect()
    }
}

fn check_features(num_nodes: usize, rows: &[Vec<f64>]) -> Result<()> {
    if rows.len() != num_nodes {
        return Err(Error::FeatureShapeMismatch {
            row: rows.len().min(num_nodes),
            reason: format!("{} feature rows for {} nodes", rows.len(), num_nodes),
        });
    }
    if let Some(first) = rows.first() {
        let width = first.len();
        if let Some(row) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::FeatureShapeMismatch {
                row,
                reason: format!("width {} differs from {}", rows[row].len(), width),
            });
        }
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Number of simple cycles (length >= 3, counted once regardless of start
/// vertex and direction).
///
/// Vertices outside the 2-core are pruned first; the remaining core is
/// searched with one DFS per start vertex restricted to larger vertex ids,
/// so each cycle is found exactly twice (once per direction).
pub fn count_simple_cycles(g: &Graph) -> Result<u64> {
    let cyclomatic = g.cyclomatic_number();
    if cyclomatic > CYCLE_GUARD {
        return Err(Error::TooManyCycles {
            cyclomatic,
            limit: CYCLE_GUARD,
        });
    }
    if cyclomatic == 0 {
        return Ok(0);
    }

    let mut adj = g.adjacency();
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive = vec![true; g.num_nodes()];
    let mut stack: Vec<usize> = (0..g.num_nodes()).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &w in &adj[v] {
            if alive[w] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    stack.push(w);
                }
            }
        }
    }
    for (v, list) in adj.iter_mut().enumerate() {
        if alive[v] {
            list.retain(|&w| alive[w]);
        } else {
            list.clear();
        }
    }

    let n = g.num_nodes();
    let mut on_path = vec![false; n];
    let mut twice: u64 = 0;
    for start in 0..n {
        if !alive[start] {
            continue;
        }
        on_path[start] = true;
        // (vertex, next neighbour index, depth in edges)
        let mut frames: Vec<(usize, usize, usize)> = vec![(start, 0, 0)];
        while let Some(frame) = frames.last_mut() {
            let (v, idx, depth) = *frame;
            if idx == adj[v].len() {
                on_path[v] = false;
                frames.pop();
                continue;
            }
            frame.1 += 1;
            let w = adj[v][idx];
            if w == start {
                if depth >= 2 {
                    twice += 1;
                }
            } else if w > start && !on_path[w] {
                on_path[w] = true;
                frames.push((w, 0, depth + 1));
            }
        }
    }
    Ok(twice / 2)
}

/// `|cycles(g) - cycles(h)|`.
pub fn cycle_distance(g: &Graph, h: &Graph) -> Result<u64> {
    Ok(count_simple_cycles(g)?.abs_diff(count_simple_cycles(h)?))
}

/// Disjoint union of `base` and `motif` (motif ids shifted by
/// `base.num_nodes()`), joined by one bridge between a uniformly random base
/// node and a uniformly random motif node.
///
/// Features are concatenated when both operands carry rows of equal width and
/// dropped when neither does; the result carries no label.
pub fn union_attach<R: Rng + ?Sized>(base: &Graph, motif: &Graph, rng: &mut R) -> Result<Graph> {
    if base.num_nodes() == 0 || motif.num_nodes() == 0 {
        return Err(Error::EmptyGraph);
    }
    let offset = base.num_nodes();
    let features = match (base.features(), motif.features()) {
        (None, None) => None,
        (Some(a), Some(b)) => {
            let (da, db) = (base.feature_dim().unwrap_or(0), motif.feature_dim().unwrap_or(0));
            if da != db {
                return Err(Error::FeatureDimMismatch { left: da, right: db });
            }
            Some(a.iter().chain(b.iter()).cloned().collect())
        }
        (Some(_), None) | (None, Some(_)) => {
            return Err(Error::FeatureShapeMismatch {
                row: 0,
                reason: "only one operand carries features".into(),
            })
        }
    };
    let from = rng.gen_range(0..base.num_nodes());
    let to = offset + rng.gen_range(0..motif.num_nodes());
    let edges = base
        .edges()
        .iter()
        .copied()
        .chain(motif.edges().iter().map(|&(u, v)| (u + offset, v + offset)))
        .chain(std::iter::once((from, to)));
    Graph::new(offset + motif.num_nodes(), edges, features, None)
}
