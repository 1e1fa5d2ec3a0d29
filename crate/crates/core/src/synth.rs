//! Synthetic BA-2motifs style datasets.
//!
//! Every generated graph is a Barabási–Albert base (a tree when `m = 1`)
//! optionally joined to a five-node motif by a single bridge edge. The
//! ground-truth explanation of a motif graph is exactly its motif edges.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::ExplanationMask;
use crate::graph::{union_attach, Graph};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotifKind {
    House,
    Cycle,
}

/// The fixed motif layouts.
///
/// House: square 0-1-2-3 with roof 3-4-0, so edge (0,3) is shared by the
/// square and the triangle. Cycle: 0-1-2-3-4-0.
pub fn motif(kind: MotifKind) -> Graph {
    let edges: &[(usize, usize)] = match kind {
        MotifKind::House => &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 0)],
        MotifKind::Cycle => &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)],
    };
    Graph::new(5, edges.iter().copied(), None, None).expect("motif layout is valid")
}

/// Preferential-attachment graph on `n` nodes where each new node brings `m`
/// edges. Growth starts from a star on `m + 1` nodes; targets are drawn with
/// probability proportional to degree, without repetition per step.
pub fn ba_graph<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameters(format!(
            "BA graph needs n >= 1 and m >= 1 (got n={n}, m={m})"
        )));
    }
    if n == 1 {
        return Ok(Graph::empty(1));
    }
    if m >= n {
        return Err(Error::InvalidParameters(format!(
            "BA graph needs n > m (got n={n}, m={m})"
        )));
    }
    let mut edges: Vec<(usize, usize)> = (1..=m).map(|v| (0, v)).collect();
    // one entry per edge endpoint, so uniform sampling is degree-proportional
    let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut targets = Vec::with_capacity(m);
    for source in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = *endpoints.choose(rng).expect("non-empty after the seed star");
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, source));
            endpoints.push(t);
            endpoints.push(source);
        }
    }
    Graph::new(n, edges, None, None)
}

/// Which BA-2motifs construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Label 1 carries a cycle motif only with probability `q`.
    Modified,
    /// Label 1 always carries a cycle motif.
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub n_graphs: usize,
    pub q: f64,
    pub base_nodes: usize,
    pub seed: u64,
    pub variant: Variant,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            n_graphs: 1000,
            q: 0.5,
            base_nodes: 20,
            seed: 0,
            variant: Variant::Modified,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_graphs == 0 {
            return Err(Error::InvalidParameters("n_graphs must be positive".into()));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "q must lie in (0, 1), got {}",
                self.q
            )));
        }
        if self.base_nodes < 5 {
            return Err(Error::InvalidParameters(format!(
                "base_nodes must be >= 5, got {}",
                self.base_nodes
            )));
        }
        Ok(())
    }
}

/// A graph with its class label and ground-truth explanation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub graph: Graph,
    pub label: u32,
    pub explanation: ExplanationMask,
}

/// Tree base plus the optional motif; the mask covers exactly the motif edges.
fn build_example<R: Rng + ?Sized>(
    base_nodes: usize,
    label: u32,
    kind: Option<MotifKind>,
    rng: &mut R,
) -> Result<LabeledExample> {
    let base = ba_graph(base_nodes, 1, rng)?;
    let (graph, explanation) = match kind {
        Some(kind) => {
            let g = union_attach(&base, &motif(kind), rng)?;
            let ids = g.edge_ids_within(base_nodes, base_nodes + 5);
            let mask = ExplanationMask::new(ids, &g)?;
            (g, mask)
        }
        None => (base, ExplanationMask::empty()),
    };
    let n = graph.num_nodes();
    let graph = graph
        .with_features(Some(vec![vec![1.0]; n]))?
        .with_label(Some(label));
    Ok(LabeledExample {
        graph,
        label,
        explanation,
    })
}

/// Modified BA-2motifs: label 0 is tree + house; label 1 is tree + cycle
/// with probability `q`, otherwise the bare tree.
pub fn gen_modified_ba2motifs<R: Rng + ?Sized>(
    spec: &DatasetSpec,
    rng: &mut R,
) -> Result<Vec<LabeledExample>> {
    spec.validate()?;
    (0..spec.n_graphs)
        .map(|_| {
            let label = u32::from(rng.gen_bool(0.5));
            let kind = if label == 0 {
                Some(MotifKind::House)
            } else if rng.gen_bool(spec.q) {
                Some(MotifKind::Cycle)
            } else {
                None
            };
            build_example(spec.base_nodes, label, kind, rng)
        })
        .collect()
}

/// Original BA-2motifs: label 0 is tree + house, label 1 is tree + cycle.
pub fn gen_ba2motifs<R: Rng + ?Sized>(
    spec: &DatasetSpec,
    rng: &mut R,
) -> Result<Vec<LabeledExample>> {
    spec.validate()?;
    (0..spec.n_graphs)
        .map(|_| {
            let label = u32::from(rng.gen_bool(0.5));
            let kind = if label == 0 {
                MotifKind::House
            } else {
                MotifKind::Cycle
            };
            build_example(spec.base_nodes, label, Some(kind), rng)
        })
        .collect()
}

/// Generates the dataset described by `spec` from its own seed.
pub fn generate(spec: &DatasetSpec) -> Result<Vec<LabeledExample>> {
    let mut rng = seeded(spec.seed);
    match spec.variant {
        Variant::Modified => gen_modified_ba2motifs(spec, &mut rng),
        Variant::Original => gen_ba2motifs(spec, &mut rng),
    }
}
