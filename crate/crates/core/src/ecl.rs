//! The empirical contrastive learner.
//!
//! Two graphs are "paired positively" by augmentation pair `i` when the
//! first view of `i` is within `ε` of one graph and the second view is within
//! `ε` of the other; they are paired negatively when the first view matches
//! but the second is farther than `ε`. The learner searches every partition
//! of the training items with at most `κ` blocks for the one that maximises
//! the within-block sum of symmetric scores, then gives each block one of a
//! set of maximally separated unit vectors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::augment::AugmentedPair;
use crate::contrastive::Embedding;
use crate::error::{Error, Result};
use crate::graph::{count_simple_cycles, Graph};

/// Largest training set the exhaustive partition search accepts.
pub const MAX_EXHAUSTIVE_ITEMS: usize = 13;

/// The distance used by the scores. Distances are evaluated through a
/// per-graph signature so each graph is analysed once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMeasure {
    /// Absolute difference in simple-cycle counts.
    #[default]
    Cycle,
}

impl DistanceMeasure {
    pub fn signature(self, g: &Graph) -> Result<f64> {
        match self {
            DistanceMeasure::Cycle => Ok(count_simple_cycles(g)? as f64),
        }
    }

    pub fn between(self, a: f64, b: f64) -> f64 {
        match self {
            DistanceMeasure::Cycle => (a - b).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EclConfig {
    pub kappa: usize,
    pub epsilon: f64,
    pub distance: DistanceMeasure,
    pub embedding_dim: usize,
}

impl Default for EclConfig {
    fn default() -> Self {
        Self {
            kappa: 2,
            epsilon: 0.5,
            distance: DistanceMeasure::Cycle,
            embedding_dim: 8,
        }
    }
}

impl EclConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kappa == 0 {
            return Err(Error::InvalidParameters("kappa must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        // integer distances would hit the unscored d == ε case
        if self.distance == DistanceMeasure::Cycle && self.epsilon.fract() == 0.0 {
            return Err(Error::InvalidParameters(format!(
                "epsilon must be non-integer for the cycle distance, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Original training graphs together with their augmented view pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AugmentedTrainingSet {
    pub originals: Vec<Graph>,
    pub pairs: Vec<AugmentedPair>,
}

/// Signatures of both views of every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSignatures {
    first: Vec<f64>,
    second: Vec<f64>,
}

impl PairSignatures {
    pub fn compute(pairs: &[AugmentedPair], measure: DistanceMeasure) -> Result<Self> {
        let mut first = Vec::with_capacity(pairs.len());
        let mut second = Vec::with_capacity(pairs.len());
        for pair in pairs {
            first.push(measure.signature(&pair.first)?);
            second.push(measure.signature(&pair.second)?);
        }
        Ok(Self { first, second })
    }

    pub fn from_parts(first: Vec<f64>, second: Vec<f64>) -> Self {
        assert_eq!(first.len(), second.len());
        Self { first, second }
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// Ordered score between two graph signatures.
    pub fn pairwise(&self, a: f64, b: f64, cfg: &EclConfig) -> i64 {
        let mut score = 0i64;
        for (&f, &s) in self.first.iter().zip(&self.second) {
            if cfg.distance.between(a, f) < cfg.epsilon {
                let d = cfg.distance.between(b, s);
                if d < cfg.epsilon {
                    score += 1;
                } else if d > cfg.epsilon {
                    score -= 1;
                }
            }
        }
        score
    }

    pub fn symmetric(&self, a: f64, b: f64, cfg: &EclConfig) -> i64 {
        self.pairwise(a, b, cfg) + self.pairwise(b, a, cfg)
    }
}

/// `s_ε(G, G')`: positive minus negative pairings.
pub fn pairwise_score(g: &Graph, h: &Graph, pairs: &[AugmentedPair], cfg: &EclConfig) -> Result<i64> {
    let sigs = PairSignatures::compute(pairs, cfg.distance)?;
    Ok(sigs.pairwise(cfg.distance.signature(g)?, cfg.distance.signature(h)?, cfg))
}

/// `s̄_ε(G, G') = s_ε(G, G') + s_ε(G', G)`.
pub fn symmetric_score(g: &Graph, h: &Graph, pairs: &[AugmentedPair], cfg: &EclConfig) -> Result<i64> {
    let sigs = PairSignatures::compute(pairs, cfg.distance)?;
    Ok(sigs.symmetric(cfg.distance.signature(g)?, cfg.distance.signature(h)?, cfg))
}

/// Disjoint non-empty blocks of item indices covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, n_items: usize) -> Result<Self> {
        let mut seen = vec![false; n_items];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidParameters("partition block is empty".into()));
            }
            for &i in block {
                if i >= n_items || seen[i] {
                    return Err(Error::InvalidParameters(format!(
                        "item {i} is out of range or appears twice"
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameters(format!("item {missing} is not covered")));
        }
        Ok(Self { blocks })
    }

    /// Builds the partition of a restricted growth string.
    pub fn from_assignment(assignment: &[usize]) -> Self {
        let k = assignment.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); k];
        for (i, &b) in assignment.iter().enumerate() {
            blocks[b].push(i);
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn n_items(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// `block_of[item]`.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_items()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = b;
            }
        }
        out
    }
}

/// Symmetric scores between all training items.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    values: Vec<Vec<i64>>,
}

impl ScoreMatrix {
    pub fn from_signatures(items: &[f64], pairs: &PairSignatures, cfg: &EclConfig) -> Self {
        let values = items
            .iter()
            .map(|&a| items.iter().map(|&b| pairs.symmetric(a, b, cfg)).collect())
            .collect();
        Self { values }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.values[i][j]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum over ordered item pairs (diagonal included) sharing a block.
    pub fn partition_score(&self, partition: &Partition) -> i64 {
        partition
            .blocks()
            .iter()
            .map(|block| {
                block
                    .iter()
                    .flat_map(|&i| block.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| self.values[i][j])
                    .sum::<i64>()
            })
            .sum()
    }

    fn assignment_score(&self, assignment: &[usize]) -> i64 {
        let n = assignment.len();
        let mut total = 0;
        for i in 0..n {
            for j in 0..n {
                if assignment[i] == assignment[j] {
                    total += self.values[i][j];
                }
            }
        }
        total
    }
}

/// `π_ε(P)` for a partition of `items`.
pub fn partition_score(
    partition: &Partition,
    items: &[Graph],
    pairs: &[AugmentedPair],
    cfg: &EclConfig,
) -> Result<i64> {
    if partition.n_items() != items.len() {
        return Err(Error::InvalidParameters(format!(
            "partition covers {} items but {} were given",
            partition.n_items(),
            items.len()
        )));
    }
    let sigs = PairSignatures::compute(pairs, cfg.distance)?;
    let item_sigs = items
        .iter()
        .map(|g| cfg.distance.signature(g))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreMatrix::from_signatures(&item_sigs, &sigs, cfg).partition_score(partition))
}

/// Streams restricted growth strings with values below `kappa`, in
/// lexicographic order. Each string is one set partition.
#[derive(Debug, Clone)]
pub struct PartitionIter {
    current: Vec<usize>,
    kappa: usize,
    started: bool,
    done: bool,
}

impl PartitionIter {
    /// Advances to the next assignment; returns it, or `None` when exhausted.
    pub fn next_assignment(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        let n = self.current.len();
        // prefix maxima: the largest value allowed at i is max(a[..i]) + 1
        let mut prefix_max = vec![0usize; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(self.current[i - 1]);
        }
        for i in (1..n).rev() {
            let limit = (prefix_max[i] + 1).min(self.kappa - 1);
            if self.current[i] < limit {
                self.current[i] += 1;
                for x in &mut self.current[i + 1..] {
                    *x = 0;
                }
                return Some(&self.current);
            }
        }
        self.done = true;
        None
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        self.next_assignment().map(Partition::from_assignment)
    }
}

/// Every partition of `n_items` items into at most `kappa` blocks, once each.
pub fn enumerate_partitions(n_items: usize, kappa: usize) -> Result<PartitionIter> {
    if n_items > MAX_EXHAUSTIVE_ITEMS {
        return Err(Error::TooManyItems {
            items: n_items,
            limit: MAX_EXHAUSTIVE_ITEMS,
        });
    }
    if kappa == 0 {
        return Err(Error::InvalidParameters("kappa must be at least 1".into()));
    }
    Ok(PartitionIter {
        current: vec![0; n_items],
        kappa,
        started: false,
        // the empty set has exactly one (empty) partition
        done: false,
    })
}

/// `k` unit vectors in `dim` dimensions forming a centred regular simplex,
/// so all pairwise distances are equal and as large as possible.
pub fn maximally_distinct_vectors(k: usize, dim: usize) -> Result<Vec<Embedding>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    if k > dim + 1 {
        return Err(Error::DimensionTooSmall { count: k, dim });
    }
    if k == 1 {
        let mut v = vec![0.0; dim.max(1)];
        v[0] = 1.0;
        return Ok(vec![Embedding(v)]);
    }
    // Coordinates of e_i - centroid in the Helmert basis of the sum-zero subspace.
    let scale = (k as f64 / (k as f64 - 1.0)).sqrt();
    let vectors = (0..k)
        .map(|i| {
            let mut v = vec![0.0; dim];
            for j in 1..k {
                let norm = ((j * (j + 1)) as f64).sqrt();
                let coord = if i < j {
                    1.0 / norm
                } else if i == j {
                    -(j as f64) / norm
                } else {
                    0.0
                };
                v[j - 1] = coord * scale;
            }
            Embedding(v)
        })
        .collect();
    Ok(vectors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EclModel {
    pub partition: Partition,
    pub embeddings: Vec<Embedding>,
    pub training: AugmentedTrainingSet,
    pub score: i64,
    config: EclConfig,
    item_signatures: Vec<f64>,
    pair_signatures: PairSignatures,
}

impl EclModel {
    pub fn config(&self) -> &EclConfig {
        &self.config
    }

    /// Block index the learner assigns to `g`: the block with the highest
    /// mean symmetric score against its members, lowest index on ties.
    pub fn assign(&self, g: &Graph) -> Result<usize> {
        let sig = self.config.distance.signature(g)?;
        Ok(self.assign_signature(sig))
    }

    pub fn assign_signature(&self, sig: f64) -> usize {
        let mut best = 0;
        // compare mean scores as exact fractions: a/m > b/n  <=>  a*n > b*m
        let mut best_sum = i128::MIN;
        let mut best_len = 1i128;
        for (b, block) in self.partition.blocks().iter().enumerate() {
            let sum: i128 = block
                .iter()
                .map(|&i| {
                    i128::from(
                        self.pair_signatures
                            .symmetric(sig, self.item_signatures[i], &self.config),
                    )
                })
                .sum();
            let len = block.len() as i128;
            if best_sum == i128::MIN || sum * best_len > best_sum * len {
                best = b;
                best_sum = sum;
                best_len = len;
            }
        }
        best
    }
}

/// Exhaustive search for the highest-scoring partition with at most `κ`
/// blocks; ties go to the earliest partition in enumeration order.
pub fn fit_ecl(items: &[Graph], pairs: &[AugmentedPair], cfg: &EclConfig) -> Result<EclModel> {
    cfg.validate()?;
    let pair_signatures = PairSignatures::compute(pairs, cfg.distance)?;
    let item_signatures = items
        .iter()
        .map(|g| cfg.distance.signature(g))
        .collect::<Result<Vec<_>>>()?;
    let (partition, score) = fit_signatures(&item_signatures, &pair_signatures, cfg)?;
    let embeddings = maximally_distinct_vectors(partition.len(), cfg.embedding_dim)?;
    Ok(EclModel {
        partition,
        embeddings,
        training: AugmentedTrainingSet {
            originals: items.to_vec(),
            pairs: pairs.to_vec(),
        },
        score,
        config: *cfg,
        item_signatures,
        pair_signatures,
    })
}

/// The search behind [`fit_ecl`] on precomputed signatures.
pub fn fit_signatures(
    items: &[f64],
    pairs: &PairSignatures,
    cfg: &EclConfig,
) -> Result<(Partition, i64)> {
    let matrix = ScoreMatrix::from_signatures(items, pairs, cfg);
    let mut iter = enumerate_partitions(items.len(), cfg.kappa)?;
    let mut best: Option<(Vec<usize>, i64)> = None;
    while let Some(a) = iter.next_assignment() {
        let score = matrix.assignment_score(a);
        if best.as_ref().map_or(true, |(_, s)| score > *s) {
            best = Some((a.to_vec(), score));
        }
    }
    let (assignment, score) = best.expect("at least one partition exists");
    Ok((Partition::from_assignment(&assignment), score))
}

/// The learner's embedding for `g`.
pub fn embed(model: &EclModel, g: &Graph) -> Result<Embedding> {
    Ok(model.embeddings[model.assign(g)?].clone())
}

fn embedding_key(e: &Embedding) -> Vec<u64> {
    e.0.iter().map(|x| x.to_bits()).collect()
}

/// Majority-label readout over the distinct embedding values.
///
/// Each distinct training embedding predicts its most frequent label (the
/// smallest label on ties). A test embedding never seen in training uses
/// the nearest training value. Returns the test error rate.
pub fn erm_fit_and_error(train: &[(Embedding, u32)], test: &[(Embedding, u32)]) -> Result<f64> {
    let classifier = ErmClassifier::fit(train)?;
    if test.is_empty() {
        return Ok(0.0);
    }
    let wrong = test
        .iter()
        .filter(|(e, y)| classifier.predict(e) != *y)
        .count();
    Ok(wrong as f64 / test.len() as f64)
}

/// The fitted readout of [`erm_fit_and_error`].
#[derive(Debug, Clone, PartialEq)]
pub struct ErmClassifier {
    values: Vec<(Embedding, u32)>,
}

impl ErmClassifier {
    pub fn fit(train: &[(Embedding, u32)]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let mut order: Vec<Vec<u64>> = Vec::new();
        let mut groups: BTreeMap<Vec<u64>, (Embedding, BTreeMap<u32, usize>)> = BTreeMap::new();
        for (e, y) in train {
            let key = embedding_key(e);
            let entry = groups.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                (e.clone(), BTreeMap::new())
            });
            *entry.1.entry(*y).or_insert(0) += 1;
        }
        let values = order
            .into_iter()
            .map(|key| {
                let (e, counts) = &groups[&key];
                // labels iterate ascending and only a strictly larger count replaces the leader
                let label = counts
                    .iter()
                    .fold((0u32, 0usize), |best, (&y, &c)| if c > best.1 { (y, c) } else { best })
                    .0;
                (e.clone(), label)
            })
            .collect();
        Ok(Self { values })
    }

    pub fn predict(&self, e: &Embedding) -> u32 {
        let key = embedding_key(e);
        if let Some((_, y)) = self.values.iter().find(|(v, _)| embedding_key(v) == key) {
            return *y;
        }
        let dist = |v: &Embedding| -> f64 {
            v.0.iter()
                .zip(&e.0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        };
        let mut best = &self.values[0];
        for cand in &self.values[1..] {
            if dist(&cand.0) < dist(&best.0) {
                best = cand;
            }
        }
        best.1
    }
}
