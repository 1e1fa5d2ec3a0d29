//! Pair-table theory for the modified BA-2motifs task.
//!
//! After edge dropping, every graph of the task has 0, 1 or 3 simple cycles
//! (the tree base and the bridge never close a cycle). The learner's
//! behaviour is then governed by `ω[k][ℓ]`, the fraction of augmented pairs
//! whose views have `k` and `ℓ` cycles, and by the class-level symmetric
//! scores derived from it.
//!
//! `expected_omega` evaluates the closed forms; `brute_force_omega`
//! enumerates every motif drop pattern and is treated as authoritative.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{iid_edge_drop, AugmentedPair};
use crate::contrastive::Embedding;
use crate::ecl::{erm_fit_and_error, maximally_distinct_vectors, Partition};
use crate::error::{Error, Result};
use crate::explain::ExplanationMask;
use crate::graph::{count_simple_cycles, Graph};
use crate::rng::child;
use crate::synth::{gen_modified_ba2motifs, motif, DatasetSpec, LabeledExample, MotifKind, Variant};

/// Cycle counts an augmented graph of the task can have.
pub const CYCLE_CLASSES: [u64; 3] = [0, 1, 3];

/// Position of a cycle count in [`CYCLE_CLASSES`].
pub fn class_index(cycles: u64) -> Result<usize> {
    CYCLE_CLASSES
        .iter()
        .position(|&c| c == cycles)
        .ok_or(Error::UnexpectedCycleCount(cycles))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// Every edge is dropped independently with probability `p`.
    #[serde(rename = "semantic_agnostic")]
    SemanticAgnostic,
    /// As above, except the house motif's edges are never dropped.
    #[serde(rename = "semantic_preserving")]
    SemanticPreserving,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::SemanticAgnostic, Channel::SemanticPreserving];

    pub fn name(self) -> &'static str {
        match self {
            Channel::SemanticAgnostic => "semantic_agnostic",
            Channel::SemanticPreserving => "semantic_preserving",
        }
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sa" | "semantic_agnostic" | "semantic-agnostic" => Ok(Channel::SemanticAgnostic),
            "sp" | "semantic_preserving" | "semantic-preserving" => Ok(Channel::SemanticPreserving),
            _ => Err(Error::InvalidParameters(format!("unknown channel `{s}`"))),
        }
    }
}

/// Symmetrised pair fractions indexed by cycle class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaTable {
    values: [[f64; 3]; 3],
}

impl OmegaTable {
    /// Folds an ordered table: off-diagonal entries become the mean of the
    /// two orders.
    pub fn from_ordered(ordered: [[f64; 3]; 3]) -> Self {
        let mut values = ordered;
        for k in 0..3 {
            for l in 0..3 {
                values[k][l] = 0.5 * (ordered[k][l] + ordered[l][k]);
            }
        }
        Self { values }
    }

    /// Entry for cycle counts `k`, `l` (each in {0, 1, 3}).
    pub fn get(&self, k: u64, l: u64) -> f64 {
        let (i, j) = (
            class_index(k).expect("cycle class"),
            class_index(l).expect("cycle class"),
        );
        self.values[i][j]
    }

    pub fn values(&self) -> &[[f64; 3]; 3] {
        &self.values
    }

    /// Sum of all nine entries; 1 for a probability table.
    pub fn total(&self) -> f64 {
        self.values.iter().flatten().sum()
    }

    pub fn max_abs_diff(&self, other: &OmegaTable) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_unit(name: &str, x: f64, open: bool) -> Result<()> {
    let ok = if open { x > 0.0 && x < 1.0 } else { (0.0..=1.0).contains(&x) };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} = {x} is outside the allowed range")))
    }
}

/// Closed-form expected pair fractions.
///
/// With `a = 1 - p`, a dropped house keeps 3 cycles with probability `a^6`,
/// exactly 1 with `p·a^5 + a^4(1-a^2) + a^3(1-a^3)` and none with
/// `p(1-a^5) + a(1-a^2)(1-a^3)`; a dropped cycle motif survives with `a^5`.
/// Under the preserving channel the house always keeps its 3 cycles.
pub fn expected_omega(p: f64, q: f64, channel: Channel) -> OmegaTable {
    let a = 1.0 - p;
    let (h3, h1, h0) = match channel {
        Channel::SemanticAgnostic => (
            a.powi(6),
            p * a.powi(5) + a.powi(4) * (1.0 - a.powi(2)) + a.powi(3) * (1.0 - a.powi(3)),
            p * (1.0 - a.powi(5)) + a * (1.0 - a.powi(2)) * (1.0 - a.powi(3)),
        ),
        Channel::SemanticPreserving => (1.0, 0.0, 0.0),
    };
    let c1 = a.powi(5);
    let c0 = 1.0 - c1;

    let w00 = (1.0 - q) / 2.0 + q / 2.0 * c0 * c0 + 0.5 * h0 * h0;
    let w01 = q / 2.0 * c0 * c1 + 0.5 * h1 * h0;
    let w11 = q / 2.0 * c1 * c1 + 0.5 * h1 * h1;
    let w13 = 0.5 * h1 * h3;
    let w03 = 0.5 * h3 * h0;
    let w33 = 0.5 * h3 * h3;
    OmegaTable {
        values: [[w00, w01, w03], [w01, w11, w13], [w03, w13, w33]],
    }
}

/// Distribution of the cycle class of `g` after dropping each non-exempt
/// edge with probability `p`, by enumeration of all drop patterns.
pub fn drop_pattern_marginal(g: &Graph, exempt: &ExplanationMask, p: f64) -> Result<[f64; 3]> {
    let free: Vec<usize> = (0..g.num_edges()).filter(|&id| !exempt.contains(id)).collect();
    if free.len() > 20 {
        return Err(Error::InvalidParameters(format!(
            "{} droppable edges is too many to enumerate",
            free.len()
        )));
    }
    let mut marginal = [0.0; 3];
    for bits in 0u32..(1 << free.len()) {
        let dropped = bits.count_ones() as i32;
        let weight = p.powi(dropped) * (1.0 - p).powi(free.len() as i32 - dropped);
        let kept = g.edges().iter().enumerate().filter(|&(id, _)| {
            match free.iter().position(|&f| f == id) {
                Some(bit) => bits >> bit & 1 == 0,
                None => true,
            }
        });
        let h = Graph::new(g.num_nodes(), kept.map(|(_, &e)| e), None, None)?;
        marginal[class_index(count_simple_cycles(&h)?)?] += weight;
    }
    Ok(marginal)
}

/// Exact pair table from enumerating the 2^6 house and 2^5 cycle-motif
/// drop patterns, mixed over the source classes with weights ½ (house),
/// q/2 (cycle motif) and (1-q)/2 (bare tree).
pub fn brute_force_omega(p: f64, q: f64, channel: Channel) -> Result<OmegaTable> {
    check_unit("p", p, false)?;
    check_unit("q", q, false)?;
    let house = motif(MotifKind::House);
    let cycle = motif(MotifKind::Cycle);
    let house_exempt = match channel {
        Channel::SemanticAgnostic => ExplanationMask::empty(),
        Channel::SemanticPreserving => ExplanationMask::all(&house),
    };
    let sources = [
        (0.5, drop_pattern_marginal(&house, &house_exempt, p)?),
        (q / 2.0, drop_pattern_marginal(&cycle, &ExplanationMask::empty(), p)?),
        ((1.0 - q) / 2.0, [1.0, 0.0, 0.0]),
    ];
    let mut ordered = [[0.0; 3]; 3];
    for (weight, m) in sources {
        for k in 0..3 {
            for l in 0..3 {
                ordered[k][l] += weight * m[k] * m[l];
            }
        }
    }
    Ok(OmegaTable::from_ordered(ordered))
}

/// Ordered counts of `(cycles(first), cycles(second))` folded into a table.
pub fn empirical_omega_from_counts(counts: &[(u64, u64)]) -> Result<OmegaTable> {
    if counts.is_empty() {
        return Err(Error::EmptyPairSet);
    }
    let mut ordered = [[0.0; 3]; 3];
    for &(a, b) in counts {
        ordered[class_index(a)?][class_index(b)?] += 1.0;
    }
    let n = counts.len() as f64;
    for row in &mut ordered {
        for x in row.iter_mut() {
            *x /= n;
        }
    }
    Ok(OmegaTable::from_ordered(ordered))
}

pub fn empirical_omega(pairs: &[AugmentedPair]) -> Result<OmegaTable> {
    let counts = pairs
        .iter()
        .map(|pair| Ok((count_simple_cycles(&pair.first)?, count_simple_cycles(&pair.second)?)))
        .collect::<Result<Vec<_>>>()?;
    empirical_omega_from_counts(&counts)
}

/// Class-level symmetric scores per training item (`s̄ / n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    values: [[f64; 3]; 3],
}

impl ScoreTable {
    pub fn get(&self, k: u64, l: u64) -> f64 {
        self.values[class_index(k).expect("cycle class")][class_index(l).expect("cycle class")]
    }

    pub fn values(&self) -> &[[f64; 3]; 3] {
        &self.values
    }
}

/// Scores from a pair table: same-class entries are
/// `2(ω_kk - Σ_{j≠k} ω_kj)`, cross-class entries are
/// `2ω_kl - Σ_{j≠l} ω_kj - Σ_{j≠k} ω_lj`.
pub fn expected_scores(omega: &OmegaTable) -> ScoreTable {
    let w = &omega.values;
    let mut values = [[0.0; 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            values[k][l] = if k == l {
                let others: f64 = (0..3).filter(|&j| j != k).map(|j| w[k][j]).sum();
                2.0 * (w[k][k] - others)
            } else {
                let from_k: f64 = (0..3).filter(|&j| j != l).map(|j| w[k][j]).sum();
                let from_l: f64 = (0..3).filter(|&j| j != k).map(|j| w[l][j]).sum();
                2.0 * w[k][l] - from_k - from_l
            };
        }
    }
    ScoreTable { values }
}

/// The four ways to group the cycle classes {0, 1, 3} into at most two blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassPartition {
    /// {0, 1, 3}
    P1,
    /// {0, 1}, {3}
    P2,
    /// {0}, {1, 3}
    P3,
    /// {1}, {0, 3}
    P4,
}

impl ClassPartition {
    pub const ALL: [ClassPartition; 4] = [
        ClassPartition::P1,
        ClassPartition::P2,
        ClassPartition::P3,
        ClassPartition::P4,
    ];

    /// Blocks of cycle counts.
    pub fn blocks(self) -> &'static [&'static [u64]] {
        match self {
            ClassPartition::P1 => &[&[0, 1, 3]],
            ClassPartition::P2 => &[&[0, 1], &[3]],
            ClassPartition::P3 => &[&[0], &[1, 3]],
            ClassPartition::P4 => &[&[1], &[0, 3]],
        }
    }

    /// Block containing cycle count `k`.
    pub fn block_of(self, k: u64) -> Option<usize> {
        self.blocks().iter().position(|b| b.contains(&k))
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassPartition::P1 => "P1",
            ClassPartition::P2 => "P2",
            ClassPartition::P3 => "P3",
            ClassPartition::P4 => "P4",
        }
    }

    /// Item partition grouping items by the block of their cycle count.
    /// Blocks without items are left out.
    pub fn lift(self, item_cycles: &[u64]) -> Result<Partition> {
        let mut blocks = vec![Vec::new(); self.blocks().len()];
        for (i, &c) in item_cycles.iter().enumerate() {
            let b = self.block_of(c).ok_or(Error::UnexpectedCycleCount(c))?;
            blocks[b].push(i);
        }
        blocks.retain(|b| !b.is_empty());
        Partition::new(blocks, item_cycles.len())
    }
}

impl std::fmt::Display for ClassPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ClassPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassPartition::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameters(format!("unknown class partition `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassLevelScores {
    /// Scores of P1..P4 in order.
    pub scores: [f64; 4],
    pub best: ClassPartition,
}

/// Class-level partition scores: twice the sum of the score-table entries
/// over the unordered class pairs that share a block. Ties go to the lowest
/// partition index.
pub fn class_level_partition_scores(s: &ScoreTable) -> ClassLevelScores {
    let shared = s.get(0, 0) + s.get(1, 1) + s.get(3, 3);
    let scores = [
        2.0 * (shared + s.get(0, 1) + s.get(0, 3) + s.get(1, 3)),
        2.0 * (shared + s.get(0, 1)),
        2.0 * (shared + s.get(1, 3)),
        2.0 * (shared + s.get(0, 3)),
    ];
    let mut best = 0;
    for i in 1..4 {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    ClassLevelScores {
        scores,
        best: ClassPartition::ALL[best],
    }
}

/// Block a graph with `k` cycles is embedded into: the block with the
/// highest mean score against its members, where `mass[c]` is the share of
/// training items in class `c`. Blocks without members are skipped; ties go
/// to the lowest block index.
pub fn assign_class(partition: ClassPartition, s: &ScoreTable, mass: &[f64; 3], k: u64) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (b, block) in partition.blocks().iter().enumerate() {
        let members: f64 = block.iter().map(|&c| mass[class_index(c).expect("class")]).sum();
        if members <= 0.0 {
            continue;
        }
        let mean = block
            .iter()
            .map(|&c| mass[class_index(c).expect("class")] * s.get(k, c))
            .sum::<f64>()
            / members;
        if best.map_or(true, |(_, m)| mean > m) {
            best = Some((b, mean));
        }
    }
    best.map_or_else(|| partition.block_of(k).unwrap_or(0), |(b, _)| b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub p: f64,
    pub s01: f64,
    pub s03: f64,
    pub s13: f64,
    /// `0 > S̄13 > max(S̄01, S̄03)`
    pub agnostic_ordering: bool,
    /// `0 > S̄01 > max(S̄03, S̄13)`
    pub preserving_ordering: bool,
    pub best: ClassPartition,
    /// Whether `p > 0.3`, the range the orderings are expected to hold on.
    pub in_hypothesis: bool,
}

/// Evaluates the score orderings and the class-level argmax at every grid
/// point, using the closed-form pair table.
pub fn check_inequalities(p_grid: &[f64], q: f64, channel: Channel) -> Vec<InequalityReport> {
    p_grid
        .iter()
        .map(|&p| {
            let s = expected_scores(&expected_omega(p, q, channel));
            let (s01, s03, s13) = (s.get(0, 1), s.get(0, 3), s.get(1, 3));
            InequalityReport {
                p,
                s01,
                s03,
                s13,
                agnostic_ordering: 0.0 > s13 && s13 > s01.max(s03),
                preserving_ordering: 0.0 > s01 && s01 > s03.max(s13),
                best: class_level_partition_scores(&s).best,
                in_hypothesis: p > 0.3,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremConfig {
    pub p: f64,
    pub q: f64,
    pub n_unlabeled: usize,
    pub n_labeled: usize,
    pub n_test: usize,
    pub trials: usize,
    pub channel: Channel,
    pub seed: u64,
    pub base_nodes: usize,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        Self {
            p: 0.4,
            q: 0.5,
            n_unlabeled: 2000,
            n_labeled: 50,
            n_test: 2000,
            trials: 20,
            channel: Channel::SemanticAgnostic,
            seed: 0,
            base_nodes: 20,
        }
    }
}

impl TheoremConfig {
    pub fn validate(&self) -> Result<()> {
        check_unit("p", self.p, true)?;
        check_unit("q", self.q, true)?;
        if self.n_unlabeled == 0 || self.n_labeled == 0 || self.n_test == 0 || self.trials == 0 {
            return Err(Error::InvalidParameters(
                "set sizes and trial count must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub omega: OmegaTable,
    pub selected: ClassPartition,
    pub error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremResult {
    pub config: TheoremConfig,
    pub trials: Vec<TrialOutcome>,
    pub mean_error: f64,
    pub std_error: f64,
}

/// Augments every graph twice through `channel` and returns the cycle counts
/// of the two views.
pub fn augment_counts<R: Rng + ?Sized>(
    data: &[LabeledExample],
    p: f64,
    channel: Channel,
    rng: &mut R,
) -> Result<Vec<(u64, u64)>> {
    let empty = ExplanationMask::empty();
    data.iter()
        .map(|ex| {
            // only the house carries label 0; its mask is what the preserving channel exempts
            let exempt = match channel {
                Channel::SemanticPreserving if ex.label == 0 => &ex.explanation,
                _ => &empty,
            };
            let first = iid_edge_drop(&ex.graph, exempt, p, rng)?;
            let second = iid_edge_drop(&ex.graph, exempt, p, rng)?;
            Ok((count_simple_cycles(&first)?, count_simple_cycles(&second)?))
        })
        .collect()
}

fn dataset(cfg: &TheoremConfig, n: usize, seed: u64) -> Result<Vec<LabeledExample>> {
    let spec = DatasetSpec {
        n_graphs: n,
        q: cfg.q,
        base_nodes: cfg.base_nodes,
        seed,
        variant: Variant::Modified,
    };
    gen_modified_ba2motifs(&spec, &mut crate::rng::seeded(seed))
}

/// One Monte Carlo trial of the error-rate experiment.
pub fn run_trial(cfg: &TheoremConfig, trial: usize) -> Result<TrialOutcome> {
    let seed = crate::rng::derive_seed(cfg.seed, trial as u64);
    let unlabeled = dataset(cfg, cfg.n_unlabeled, crate::rng::derive_seed(seed, 0))?;
    let counts = augment_counts(&unlabeled, cfg.p, cfg.channel, &mut child(seed, 1))?;
    let omega = empirical_omega_from_counts(&counts)?;
    let scores = expected_scores(&omega);
    let selected = class_level_partition_scores(&scores).best;

    let mut mass = [0.0; 3];
    for ex in &unlabeled {
        mass[class_index(count_simple_cycles(&ex.graph)?)?] += 1.0;
    }
    let embeddings = maximally_distinct_vectors(selected.blocks().len(), 8)?;
    let embed = |data: &[LabeledExample]| -> Result<Vec<(Embedding, u32)>> {
        data.iter()
            .map(|ex| {
                let k = count_simple_cycles(&ex.graph)?;
                class_index(k)?;
                let b = assign_class(selected, &scores, &mass, k);
                Ok((embeddings[b].clone(), ex.label))
            })
            .collect()
    };
    let labeled = dataset(cfg, cfg.n_labeled, crate::rng::derive_seed(seed, 2))?;
    let test = dataset(cfg, cfg.n_test, crate::rng::derive_seed(seed, 3))?;
    let error_rate = erm_fit_and_error(&embed(&labeled)?, &embed(&test)?)?;
    Ok(TrialOutcome {
        trial,
        seed,
        omega,
        selected,
        error_rate,
    })
}

/// Runs every trial (in parallel, each from its own derived seed) and
/// summarises the held-out error rates.
pub fn run_theorem1_mc(cfg: &TheoremConfig) -> Result<TheoremResult> {
    cfg.validate()?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let n = trials.len() as f64;
    let mean_error = trials.iter().map(|t| t.error_rate).sum::<f64>() / n;
    let var = if trials.len() > 1 {
        trials
            .iter()
            .map(|t| (t.error_rate - mean_error).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    Ok(TheoremResult {
        config: cfg.clone(),
        trials,
        mean_error,
        std_error: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agnostic_house_term() {
        for p in [0.1, 0.4, 0.77] {
            let w = expected_omega(p, 0.5, Channel::SemanticAgnostic);
            assert!((w.get(3, 3) - 0.5 * (1.0 - p).powi(12)).abs() < 1e-15);
        }
    }

    #[test]
    fn no_drop_limit() {
        let q = 0.3;
        let w = expected_omega(0.0, q, Channel::SemanticAgnostic);
        assert!((w.get(3, 3) - 0.5).abs() < 1e-15);
        assert!((w.get(1, 1) - q / 2.0).abs() < 1e-15);
        assert!((w.get(0, 0) - (1.0 - q) / 2.0).abs() < 1e-15);
        for (k, l) in [(0, 1), (0, 3), (1, 3)] {
            assert_eq!(w.get(k, l), 0.0);
        }
    }

    #[test]
    fn preserving_has_no_cross_house_terms() {
        for p in [0.05, 0.5, 0.95] {
            for q in [0.2, 0.8] {
                let w = expected_omega(p, q, Channel::SemanticPreserving);
                assert_eq!(w.get(0, 3), 0.0);
                assert_eq!(w.get(1, 3), 0.0);
                let b = brute_force_omega(p, q, Channel::SemanticPreserving).unwrap();
                assert_eq!(b.get(0, 3), 0.0);
                assert_eq!(b.get(1, 3), 0.0);
            }
        }
    }

    #[test]
    fn brute_force_marginals() {
        let house = motif(MotifKind::House);
        let m = drop_pattern_marginal(&house, &ExplanationMask::empty(), 0.5).unwrap();
        assert_eq!(m[2], 1.0 / 64.0);
        let m = drop_pattern_marginal(&house, &ExplanationMask::all(&house), 0.5).unwrap();
        assert_eq!(m, [0.0, 0.0, 1.0]);
        let cycle = motif(MotifKind::Cycle);
        for p in [0.2, 0.6] {
            let m = drop_pattern_marginal(&cycle, &ExplanationMask::empty(), p).unwrap();
            assert!((m[1] - (1.0 - p).powi(5)).abs() < 1e-15);
            assert!((m[0] - (1.0 - (1.0 - p).powi(5))).abs() < 1e-15);
            assert_eq!(m[2], 0.0);
        }
    }

    #[test]
    fn empirical_table() {
        let w = empirical_omega_from_counts(&[(3, 3), (3, 3)]).unwrap();
        assert_eq!(w.get(3, 3), 1.0);
        assert_eq!(w.total(), 1.0);
        let w = empirical_omega_from_counts(&[(0, 1), (0, 0)]).unwrap();
        assert_eq!(w.get(0, 1), 0.25);
        assert_eq!(w.get(1, 0), 0.25);
        assert!(matches!(empirical_omega_from_counts(&[]), Err(Error::EmptyPairSet)));
        assert!(matches!(
            empirical_omega_from_counts(&[(2, 0)]),
            Err(Error::UnexpectedCycleCount(2))
        ));
        assert!(matches!(empirical_omega(&[]), Err(Error::EmptyPairSet)));
    }

    #[test]
    fn scores_of_point_mass() {
        let w = empirical_omega_from_counts(&[(3, 3)]).unwrap();
        let s = expected_scores(&w);
        assert_eq!(s.get(3, 3), 2.0);
        for (k, l) in [(0, 0), (1, 1), (0, 1), (0, 3), (1, 3)] {
            assert!(s.get(k, l) <= 0.0);
        }
    }

    #[test]
    fn score_table_matches_written_forms() {
        let w = expected_omega(0.37, 0.6, Channel::SemanticAgnostic);
        let s = expected_scores(&w);
        let o = |k, l| w.get(k, l);
        let tol = 1e-15;
        assert!((s.get(0, 0) - 2.0 * (o(0, 0) - o(0, 1) - o(0, 3))).abs() < tol);
        assert!((s.get(1, 1) - 2.0 * (o(1, 1) - o(0, 1) - o(1, 3))).abs() < tol);
        assert!((s.get(3, 3) - 2.0 * (o(3, 3) - o(0, 3) - o(1, 3))).abs() < tol);
        assert!((s.get(0, 1) - (2.0 * o(0, 1) - o(0, 0) - o(0, 3) - o(1, 1) - o(1, 3))).abs() < tol);
        assert!((s.get(0, 3) - (2.0 * o(0, 3) - o(0, 0) - o(0, 1) - o(1, 3) - o(3, 3))).abs() < tol);
        assert!((s.get(1, 3) - (2.0 * o(1, 3) - o(0, 1) - o(1, 1) - o(0, 3) - o(3, 3))).abs() < tol);
        for k in CYCLE_CLASSES {
            for l in CYCLE_CLASSES {
                assert_eq!(s.get(k, l), s.get(l, k));
            }
        }
    }

    #[test]
    fn class_level_argmax() {
        let sa = expected_scores(&expected_omega(0.4, 0.5, Channel::SemanticAgnostic));
        assert_eq!(class_level_partition_scores(&sa).best, ClassPartition::P3);
        let sp = expected_scores(&expected_omega(0.4, 0.5, Channel::SemanticPreserving));
        assert_eq!(class_level_partition_scores(&sp).best, ClassPartition::P2);
        let zero = ScoreTable { values: [[0.0; 3]; 3] };
        assert_eq!(class_level_partition_scores(&zero).best, ClassPartition::P1);
    }

    #[test]
    fn lifting() {
        let p = ClassPartition::P3.lift(&[0, 3, 1, 0]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 3], vec![1, 2]]);
        let p = ClassPartition::P2.lift(&[3, 3]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1]]);
        assert!(ClassPartition::P1.lift(&[2]).is_err());
    }

    #[test]
    fn channel_names() {
        assert_eq!("sa".parse::<Channel>().unwrap(), Channel::SemanticAgnostic);
        assert_eq!("semantic_preserving".parse::<Channel>().unwrap(), Channel::SemanticPreserving);
        assert!("xx".parse::<Channel>().is_err());
    }

    #[test]
    fn tiny_q_agnostic_error_vanishes() {
        let cfg = TheoremConfig {
            q: 1e-9,
            n_unlabeled: 400,
            n_test: 400,
            trials: 3,
            ..TheoremConfig::default()
        };
        let out = run_theorem1_mc(&cfg).unwrap();
        assert!(out.mean_error < 0.02, "{}", out.mean_error);
    }
}
