//! Explanation-preserving augmentation operators.
//!
//! Each EPA operator perturbs only the marginal part of a graph: masked edges
//! and their endpoints (with their feature rows) always survive unchanged.
//! Passing an empty mask yields the vanilla version of the operator.
//!
//! Operators that remove nodes renumber the survivors by ascending original
//! index; [`Augmented::kept_nodes`] records the map and [`Augmented::mask`]
//! carries the explanation mask re-expressed in the new edge ids.

use std::collections::BTreeSet;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::{split_by_mask, Decomposition, ExplanationMask};
use crate::graph::Graph;
use crate::synth::LabeledExample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NodeDrop,
    EdgeDrop,
    AttrMask,
    Subgraph,
    Mixup,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::NodeDrop,
        Method::EdgeDrop,
        Method::AttrMask,
        Method::Subgraph,
        Method::Mixup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::NodeDrop => "node_drop",
            Method::EdgeDrop => "edge_drop",
            Method::AttrMask => "attr_mask",
            Method::Subgraph => "subgraph",
            Method::Mixup => "mixup",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::InvalidParameters(format!("unknown augmentation method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub ratio: f64,
    pub method: Method,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            ratio: 0.1,
            method: Method::EdgeDrop,
        }
    }
}

/// Output of an EPA operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    pub graph: Graph,
    /// `kept_nodes[new] = old`.
    pub kept_nodes: Vec<usize>,
    pub mask: ExplanationMask,
}

/// Two augmented views of training item `source_id`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub first: Graph,
    pub second: Graph,
    pub source_id: usize,
}

fn check_ratio(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("ratio must lie in [0, 1], got {p}")))
    }
}

/// Builds the subgraph of `g` on the flagged nodes and edges. Every kept edge
/// must have both endpoints kept.
fn restrict(
    g: &Graph,
    mask: &ExplanationMask,
    keep_node: &[bool],
    keep_edge: &[bool],
) -> Result<Augmented> {
    let kept_nodes: Vec<usize> = (0..g.num_nodes()).filter(|&v| keep_node[v]).collect();
    let mut new_id = vec![usize::MAX; g.num_nodes()];
    for (i, &v) in kept_nodes.iter().enumerate() {
        new_id[v] = i;
    }
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .zip(keep_edge)
        .filter(|(_, &k)| k)
        .map(|(&(u, v), _)| (new_id[u], new_id[v]))
        .collect();
    let features = g
        .features()
        .map(|rows| kept_nodes.iter().map(|&v| rows[v].clone()).collect());
    let graph = Graph::new(kept_nodes.len(), edges, features, g.label())?;
    let mask_ids = mask.iter().map(|id| {
        let (u, v) = g.edges()[id];
        graph
            .edge_id(new_id[u], new_id[v])
            .expect("masked edges are always kept")
    });
    let mask = ExplanationMask::new(mask_ids, &graph)?;
    Ok(Augmented {
        graph,
        kept_nodes,
        mask,
    })
}

fn exp_flags(g: &Graph, d: &Decomposition) -> Vec<bool> {
    (0..g.num_nodes()).map(|v| d.node_is_exp(v)).collect()
}

/// Node dropping: every marginal node survives independently with
/// probability `1 - p`. A marginal edge survives when both endpoints are
/// present, where explanation nodes are always present.
pub fn epa_node_drop<R: Rng + ?Sized>(
    g: &Graph,
    mask: &ExplanationMask,
    p: f64,
    rng: &mut R,
) -> Result<Augmented> {
    check_ratio(p)?;
    let d = split_by_mask(g, mask)?;
    let mut keep_node = exp_flags(g, &d);
    for &v in &d.marginal_nodes {
        keep_node[v] = rng.gen_bool(1.0 - p);
    }
    let keep_edge: Vec<bool> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(id, &(u, v))| mask.contains(id) || (keep_node[u] && keep_node[v]))
        .collect();
    restrict(g, mask, &keep_node, &keep_edge)
}

/// Edge dropping: every marginal edge survives independently with
/// probability `1 - p`; marginal nodes survive only if a kept marginal edge
/// touches them.
pub fn epa_edge_drop<R: Rng + ?Sized>(
    g: &Graph,
    mask: &ExplanationMask,
    p: f64,
    rng: &mut R,
) -> Result<Augmented> {
    check_ratio(p)?;
    let d = split_by_mask(g, mask)?;
    let mut keep_node = exp_flags(g, &d);
    let mut keep_edge = mask.flags(g);
    for &id in &d.marginal_edges {
        if rng.gen_bool(1.0 - p) {
            keep_edge[id] = true;
            let (u, v) = g.edges()[id];
            keep_node[u] = true;
            keep_node[v] = true;
        }
    }
    restrict(g, mask, &keep_node, &keep_edge)
}

/// Attribute masking: each feature entry of each marginal node is zeroed
/// independently with probability `p`. Topology is untouched.
pub fn epa_attr_mask<R: Rng + ?Sized>(
    g: &Graph,
    mask: &ExplanationMask,
    p: f64,
    rng: &mut R,
) -> Result<Augmented> {
    check_ratio(p)?;
    let d = split_by_mask(g, mask)?;
    let mut rows = g.features().ok_or(Error::NoFeatures)?.to_vec();
    for &v in &d.marginal_nodes {
        for x in rows[v].iter_mut() {
            if rng.gen_bool(p) {
                *x = 0.0;
            }
        }
    }
    let graph = g.clone().with_features(Some(rows))?;
    Ok(Augmented {
        graph,
        kept_nodes: (0..g.num_nodes()).collect(),
        mask: mask.clone(),
    })
}

/// Number of marginal nodes the subgraph sampler collects: `ceil(p * n)`,
/// with a small tolerance so e.g. `0.3 * 10` stays 3.
pub fn subgraph_target(p: f64, marginal_nodes: usize) -> usize {
    let raw = p * marginal_nodes as f64;
    ((raw - 1e-9).ceil().max(0.0) as usize).min(marginal_nodes)
}

/// Subgraph sampling: random neighbourhood expansion inside the marginal
/// subgraph until `ceil(p * |ΔV|)` marginal nodes are collected. When the
/// frontier runs dry the walk restarts from a random unvisited marginal node.
/// Kept marginal edges have at least one sampled endpoint and the other
/// endpoint present (sampled or explanation).
pub fn epa_subgraph<R: Rng + ?Sized>(
    g: &Graph,
    mask: &ExplanationMask,
    p: f64,
    rng: &mut R,
) -> Result<Augmented> {
    check_ratio(p)?;
    let d = split_by_mask(g, mask)?;
    let target = subgraph_target(p, d.marginal_nodes.len());

    let mut marginal_adj: Vec<Vec<usize>> = vec![Vec::new(); g.num_nodes()];
    for &id in &d.marginal_edges {
        let (u, v) = g.edges()[id];
        if !d.node_is_exp(u) && !d.node_is_exp(v) {
            marginal_adj[u].push(v);
            marginal_adj[v].push(u);
        }
    }

    let mut sampled: BTreeSet<usize> = BTreeSet::new();
    let mut frontier: BTreeSet<usize> = BTreeSet::new();
    while sampled.len() < target {
        let next = frontier
            .iter()
            .copied()
            .choose(rng)
            .or_else(|| {
                d.marginal_nodes
                    .iter()
                    .copied()
                    .filter(|v| !sampled.contains(v))
                    .choose(rng)
            })
            .expect("target <= |marginal nodes|");
        sampled.insert(next);
        frontier.remove(&next);
        for &w in &marginal_adj[next] {
            if !sampled.contains(&w) {
                frontier.insert(w);
            }
        }
    }

    let mut keep_node = exp_flags(g, &d);
    for &v in &sampled {
        keep_node[v] = true;
    }
    let keep_edge: Vec<bool> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(id, &(u, v))| {
            mask.contains(id)
                || ((sampled.contains(&u) || sampled.contains(&v)) && keep_node[u] && keep_node[v])
        })
        .collect();
    restrict(g, mask, &keep_node, &keep_edge)
}

/// Mixup with a donor graph.
///
/// If `|ΔV_g| <= |ΔV_donor|`, `|ΔV_g|` donor marginal nodes are sampled and
/// mapped one-to-one onto the marginal slots of `g` (ascending); the donor's
/// marginal edges among sampled nodes are carried over. Otherwise a random
/// `|ΔV_donor|`-subset of `g`'s marginal nodes is mapped onto all donor
/// marginal nodes and the unmapped remainder keeps its own internal marginal
/// edges. The explanation subgraph of `g` is kept as is. Mapped slots take
/// the donor's feature rows; mismatched feature widths are an error.
pub fn epa_mixup<R: Rng + ?Sized>(
    g: &Graph,
    mask: &ExplanationMask,
    donor: &Graph,
    donor_mask: &ExplanationMask,
    rng: &mut R,
) -> Result<Augmented> {
    let d = split_by_mask(g, mask)?;
    let dd = split_by_mask(donor, donor_mask)?;
    let feature_width = match (g.feature_dim(), donor.feature_dim()) {
        (None, None) => None,
        (Some(a), Some(b)) if a == b => Some(a),
        (a, b) => {
            return Err(Error::FeatureDimMismatch {
                left: a.unwrap_or(0),
                right: b.unwrap_or(0),
            })
        }
    };

    let own: Vec<usize> = d.marginal_nodes.iter().copied().collect();
    let theirs: Vec<usize> = dd.marginal_nodes.iter().copied().collect();

    // slot_of[donor node] = node of g receiving it
    let mut slot_of = vec![usize::MAX; donor.num_nodes()];
    let mut unmixed: BTreeSet<usize> = BTreeSet::new();
    if own.len() <= theirs.len() {
        let picked: Vec<usize> = theirs.choose_multiple(rng, own.len()).copied().collect();
        for (&slot, &src) in own.iter().zip(&picked) {
            slot_of[src] = slot;
        }
    } else {
        let mixed: Vec<usize> = own.choose_multiple(rng, theirs.len()).copied().collect();
        for (&slot, &src) in mixed.iter().zip(&theirs) {
            slot_of[src] = slot;
        }
        let mixed: BTreeSet<usize> = mixed.into_iter().collect();
        unmixed = own.iter().copied().filter(|v| !mixed.contains(v)).collect();
    }

    let mut edges: Vec<(usize, usize)> = mask.iter().map(|id| g.edges()[id]).collect();
    for &id in &dd.marginal_edges {
        let (a, b) = donor.edges()[id];
        if slot_of[a] != usize::MAX && slot_of[b] != usize::MAX {
            edges.push((slot_of[a], slot_of[b]));
        }
    }
    for &id in &d.marginal_edges {
        let (u, v) = g.edges()[id];
        if unmixed.contains(&u) && unmixed.contains(&v) {
            edges.push((u, v));
        }
    }

    let features = match (feature_width, g.features(), donor.features()) {
        (Some(_), Some(rows), Some(donor_rows)) => {
            let mut rows = rows.to_vec();
            for (src, &slot) in slot_of.iter().enumerate() {
                if slot != usize::MAX {
                    rows[slot] = donor_rows[src].clone();
                }
            }
            Some(rows)
        }
        _ => None,
    };
    let graph = Graph::new(g.num_nodes(), edges, features, g.label())?;
    let mask_ids = mask.iter().map(|id| {
        let (u, v) = g.edges()[id];
        graph.edge_id(u, v).expect("explanation edges are carried over")
    });
    let mask = ExplanationMask::new(mask_ids, &graph)?;
    Ok(Augmented {
        graph,
        kept_nodes: (0..g.num_nodes()).collect(),
        mask,
    })
}

/// The theorem's edge-drop channel: every non-exempt edge is removed
/// independently with probability `p`; the node set is unchanged.
pub fn iid_edge_drop<R: Rng + ?Sized>(
    g: &Graph,
    exempt: &ExplanationMask,
    p: f64,
    rng: &mut R,
) -> Result<Graph> {
    check_ratio(p)?;
    exempt.check(g)?;
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|&(id, _)| exempt.contains(id) || !rng.gen_bool(p))
        .map(|(_, &e)| e)
        .collect();
    Graph::new(g.num_nodes(), edges, g.features().map(<[_]>::to_vec), g.label())
}

/// Applies one EPA operator. `donors` is the pool mixup draws its partner
/// from (uniformly); other methods ignore it.
pub fn apply_epa<R: Rng + ?Sized>(
    method: Method,
    g: &Graph,
    mask: &ExplanationMask,
    p: f64,
    donors: &[LabeledExample],
    rng: &mut R,
) -> Result<Augmented> {
    match method {
        Method::NodeDrop => epa_node_drop(g, mask, p, rng),
        Method::EdgeDrop => epa_edge_drop(g, mask, p, rng),
        Method::AttrMask => epa_attr_mask(g, mask, p, rng),
        Method::Subgraph => epa_subgraph(g, mask, p, rng),
        Method::Mixup => {
            let donor = donors.choose(rng).ok_or(Error::NoMixupDonor)?;
            epa_mixup(g, mask, &donor.graph, &donor.explanation, rng)
        }
    }
}

/// Draws two methods independently and uniformly from `methods` and applies
/// each with its own randomness.
pub fn sample_epa_pair<R: Rng + ?Sized>(
    g: &Graph,
    mask: &ExplanationMask,
    methods: &[Method],
    p: f64,
    donors: &[LabeledExample],
    source_id: usize,
    rng: &mut R,
) -> Result<AugmentedPair> {
    let (first, second) = sample_methods(methods, rng)?;
    let first = apply_epa(first, g, mask, p, donors, rng)?.graph;
    let second = apply_epa(second, g, mask, p, donors, rng)?.graph;
    Ok(AugmentedPair {
        first,
        second,
        source_id,
    })
}

/// The ordered method pair used by [`sample_epa_pair`].
pub fn sample_methods<R: Rng + ?Sized>(methods: &[Method], rng: &mut R) -> Result<(Method, Method)> {
    if methods.is_empty() {
        return Err(Error::InvalidParameters("method set is empty".into()));
    }
    let a = *methods.choose(rng).expect("non-empty");
    let b = *methods.choose(rng).expect("non-empty");
    Ok((a, b))
}
