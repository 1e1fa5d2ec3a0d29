//! Explanation masks and the split of a graph into its explanation subgraph
//! and marginal subgraph.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::synth::LabeledExample;

/// A set of edge ids marking a graph's explanation subgraph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ExplanationMask {
    edges: BTreeSet<EdgeId>,
}

impl ExplanationMask {
    pub fn new(ids: impl IntoIterator<Item = EdgeId>, g: &Graph) -> Result<Self> {
        let mask = Self {
            edges: ids.into_iter().collect(),
        };
        mask.check(g)?;
        Ok(mask)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Every edge of `g`.
    pub fn all(g: &Graph) -> Self {
        Self {
            edges: (0..g.num_edges()).collect(),
        }
    }

    /// Fails with [`Error::InvalidMask`] if any id is out of range for `g`.
    pub fn check(&self, g: &Graph) -> Result<()> {
        match self.edges.last() {
            Some(&edge) if edge >= g.num_edges() => Err(Error::InvalidMask {
                edge,
                num_edges: g.num_edges(),
            }),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.edges.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().copied()
    }

    /// Per-edge membership flags for `g`.
    pub fn flags(&self, g: &Graph) -> Vec<bool> {
        let mut flags = vec![false; g.num_edges()];
        for id in self.iter() {
            flags[id] = true;
        }
        flags
    }
}

/// Edge and node partition of a graph induced by an explanation mask.
///
/// `exp_nodes` are the endpoints of masked edges. Every unmasked edge,
/// including edges that cross between an explanation node and a marginal
/// node, belongs to `marginal_edges`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub exp_nodes: BTreeSet<usize>,
    pub exp_edges: BTreeSet<EdgeId>,
    pub marginal_nodes: BTreeSet<usize>,
    pub marginal_edges: BTreeSet<EdgeId>,
}

impl Decomposition {
    pub fn node_is_exp(&self, v: usize) -> bool {
        self.exp_nodes.contains(&v)
    }
}

pub fn split_by_mask(g: &Graph, mask: &ExplanationMask) -> Result<Decomposition> {
    mask.check(g)?;
    let mut exp_nodes = BTreeSet::new();
    let mut marginal_edges = BTreeSet::new();
    for (id, &(u, v)) in g.edges().iter().enumerate() {
        if mask.contains(id) {
            exp_nodes.insert(u);
            exp_nodes.insert(v);
        } else {
            marginal_edges.insert(id);
        }
    }
    let marginal_nodes = (0..g.num_nodes()).filter(|v| !exp_nodes.contains(v)).collect();
    Ok(Decomposition {
        exp_nodes,
        exp_edges: mask.edges.clone(),
        marginal_nodes,
        marginal_edges,
    })
}

/// A random edge subset of `size` edges grown outward from a random seed
/// edge: each step adds a uniformly chosen unselected edge adjacent to the
/// current selection, or any unselected edge once the component is used up.
pub fn random_explainer<R: Rng + ?Sized>(
    g: &Graph,
    size: usize,
    rng: &mut R,
) -> Result<ExplanationMask> {
    if size > g.num_edges() {
        return Err(Error::SizeTooLarge {
            requested: size,
            available: g.num_edges(),
        });
    }
    let mut chosen = BTreeSet::new();
    let mut touched = vec![false; g.num_nodes()];
    while chosen.len() < size {
        let frontier: Vec<EdgeId> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|&(id, &(u, v))| !chosen.contains(&id) && (touched[u] || touched[v]))
            .map(|(id, _)| id)
            .collect();
        let pick = match frontier.choose(rng) {
            Some(&id) => id,
            None => {
                let rest: Vec<EdgeId> =
                    (0..g.num_edges()).filter(|id| !chosen.contains(id)).collect();
                *rest.choose(rng).expect("size <= num_edges")
            }
        };
        let (u, v) = g.edges()[pick];
        touched[u] = true;
        touched[v] = true;
        chosen.insert(pick);
    }
    Ok(ExplanationMask { edges: chosen })
}

/// Maps a dataset item to its explanation subgraph.
///
/// The random source is passed in so implementations stay shareable across
/// threads.
pub trait Explainer: Send + Sync {
    fn explain(&self, item: &LabeledExample, rng: &mut dyn RngCore) -> Result<ExplanationMask>;
}

/// Returns the mask stored with the dataset item.
#[derive(Debug, Clone, Copy, Default)]
pub struct GroundTruthExplainer;

impl Explainer for GroundTruthExplainer {
    fn explain(&self, item: &LabeledExample, _rng: &mut dyn RngCore) -> Result<ExplanationMask> {
        item.explanation.check(&item.graph)?;
        Ok(item.explanation.clone())
    }
}

/// Ablation baseline: a random connected-when-possible edge subset.
/// The size is clamped to the graph's edge count.
#[derive(Debug, Clone, Copy)]
pub struct RandomExplainer {
    pub size: usize,
}

impl Explainer for RandomExplainer {
    fn explain(&self, item: &LabeledExample, rng: &mut dyn RngCore) -> Result<ExplanationMask> {
        random_explainer(&item.graph, self.size.min(item.graph.num_edges()), rng)
    }
}

/// Always the empty mask, which turns every EPA operator into its vanilla form.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoExplainer;

impl Explainer for NoExplainer {
    fn explain(&self, _item: &LabeledExample, _rng: &mut dyn RngCore) -> Result<ExplanationMask> {
        Ok(ExplanationMask::empty())
    }
}
