//! Loss values for the two contrastive objectives.
//!
//! Only values are computed here. `stopgrad` in the SimSiam objective marks
//! which side is a constant during backpropagation; it has no effect on the
//! value of the loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A graph-level representation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEmbedding);
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Embedding {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub temperature: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { temperature: 0.2 }
    }
}

/// Cosine similarity; `index` is reported if either side has zero norm.
fn cosine(a: &Embedding, b: &Embedding, index: usize) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 || !na.is_finite() || !nb.is_finite() {
        return Err(Error::ZeroNormEmbedding { index });
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// `-log softmax(logits)[target]` with max subtraction.
fn neg_log_softmax(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&l| (l - max).exp()).sum();
    (max + sum.ln()) - logits[target]
}

#[derive(Debug, Clone, PartialEq)]
pub struct NtXentLoss {
    pub per_sample: Vec<f64>,
    pub mean: f64,
}

/// NT-Xent over a batch of paired views.
///
/// For sample `i` the loss averages two cross-entropies: view 1 of `i`
/// against all view-2 embeddings, and view 2 of `i` against all view-1
/// embeddings, each with the positive at position `i`.
pub fn nt_xent_loss(z1: &[Embedding], z2: &[Embedding], cfg: &LossConfig) -> Result<NtXentLoss> {
    if z1.len() != z2.len() {
        return Err(Error::LengthMismatch {
            left: z1.len(),
            right: z2.len(),
        });
    }
    if z1.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(cfg.temperature > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "temperature must be positive, got {}",
            cfg.temperature
        )));
    }
    let n = z1.len();
    // zero-norm errors index the concatenation z1 ++ z2
    if let Some(index) = z1.iter().chain(z2).position(|z| z.norm() == 0.0) {
        return Err(Error::ZeroNormEmbedding { index });
    }
    let mut sim = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            sim[i][j] = cosine(&z1[i], &z2[j], i)? / cfg.temperature;
        }
    }
    let per_sample: Vec<f64> = (0..n)
        .map(|i| {
            let column: Vec<f64> = (0..n).map(|j| sim[j][i]).collect();
            0.5 * neg_log_softmax(&sim[i], i) + 0.5 * neg_log_softmax(&column, i)
        })
        .collect();
    let mean = per_sample.iter().sum::<f64>() / n as f64;
    Ok(NtXentLoss { per_sample, mean })
}

/// `-cos(p, z)`.
pub fn negative_cosine(p: &Embedding, z: &Embedding) -> Result<f64> {
    let index = usize::from(p.norm() != 0.0);
    Ok(-cosine(p, z, index)?)
}

/// `½·D(p1, z2) + ½·D(p2, z1)` with `D` the negative cosine.
pub fn simsiam_loss(p1: &Embedding, p2: &Embedding, z1: &Embedding, z2: &Embedding) -> Result<f64> {
    Ok(0.5 * negative_cosine(p1, z2)? + 0.5 * negative_cosine(p2, z1)?)
}
