//! Linear classification heads (logistic and 3-way softmax) trained by
//! full-batch gradient descent.

use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BackendError;

/// Hex SHA-256 over the newline-joined feature names; stored in model files
/// and checked on load.
pub fn fingerprint<S: AsRef<str>>(names: &[S]) -> String {
    let joined = names.iter().map(AsRef::as_ref).collect::<Vec<_>>().join("\n");
    Sha256::digest(joined.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    /// One logit row; the positive-class probability is its sigmoid.
    Binary,
    /// One logit row per class.
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Shuffle sample order (seeded) before accumulating gradients.
    pub shuffle: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self { learning_rate: 0.1, epochs: 500, l2: 1e-4, shuffle: false }
    }
}

/// Per-column standardisation fitted on the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    fn fit(rows: &[&[f64]], dim: usize) -> Self {
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *v += (x - m).powi(2) / n;
            }
        }
        let scale = var.into_iter().map(|v| if v > 1e-12 { v.sqrt() } else { 1.0 }).collect();
        Self { mean, scale }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadModel {
    pub kind: HeadKind,
    pub fingerprint: String,
    /// `weights[row][feature]`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaler: Option<Scaler>,
    #[serde(default)]
    pub seed: u64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl HeadModel {
    /// A head whose every logit is zero.
    pub fn zeros(kind: HeadKind, dim: usize, fingerprint: String) -> Self {
        let rows = match kind {
            HeadKind::Binary => 1,
            HeadKind::Softmax => 3,
        };
        Self {
            kind,
            fingerprint,
            weights: vec![vec![0.0; dim]; rows],
            biases: vec![0.0; rows],
            scaler: None,
            seed: 0,
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self, BackendError> {
        let model: Self = super::baseline::read_model(path)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        super::baseline::write_model(path, self)
    }

    pub fn input_dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn check_fingerprint(&self, expected: &str) -> Result<(), BackendError> {
        if self.fingerprint != expected {
            return Err(BackendError::FingerprintMismatch {
                expected: expected.to_owned(),
                found: self.fingerprint.clone(),
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let rows = match self.kind {
            HeadKind::Binary => 1,
            HeadKind::Softmax => 3,
        };
        let dim = self.input_dim();
        if self.weights.len() != rows || self.biases.len() != rows || self.weights.iter().any(|r| r.len() != dim) {
            return Err(BackendError::ModelFormat(format!("{:?} head needs {rows} rows of equal width", self.kind)));
        }
        if let Some(s) = &self.scaler
            && (s.mean.len() != dim || s.scale.len() != dim)
        {
            return Err(BackendError::ModelFormat("scaler width differs from weights".into()));
        }
        Ok(())
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>, BackendError> {
        if x.len() != self.input_dim() {
            return Err(BackendError::DimensionMismatch { expected: self.input_dim(), found: x.len() });
        }
        let scaled;
        let x = match &self.scaler {
            Some(s) => {
                scaled = s.apply(x);
                &scaled[..]
            }
            None => x,
        };
        Ok(self.weights.iter().zip(&self.biases).map(|(w, b)| dot(w, x) + b).collect())
    }

    /// Positive-class probability of a binary head.
    pub fn positive_probability(&self, x: &[f64]) -> Result<f64, BackendError> {
        Ok(sigmoid(self.logits(x)?[0]))
    }

    /// Class probabilities of a softmax head.
    pub fn class_probabilities(&self, x: &[f64]) -> Result<Vec<f64>, BackendError> {
        Ok(softmax(&self.logits(x)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    /// Binary: 0 or 1. Softmax: class index 0..3.
    pub label: usize,
}

#[derive(Debug, Clone)]
pub struct TrainedHead {
    pub model: HeadModel,
    /// Regularised training cross-entropy before each epoch's update, plus
    /// the final value.
    pub losses: Vec<f64>,
}

/// Fits a head on `samples`. Features are standardised per column and the
/// fitted scaler is stored with the model.
pub fn train_head(
    samples: &[Sample],
    kind: HeadKind,
    params: TrainParams,
    seed: u64,
    fingerprint: String,
) -> Result<TrainedHead, BackendError> {
    let classes = match kind {
        HeadKind::Binary => 2,
        HeadKind::Softmax => 3,
    };
    let dim = samples.first().map_or(0, |s| s.features.len());
    if samples.iter().any(|s| s.features.len() != dim) {
        return Err(BackendError::DegenerateData("samples have differing widths".into()));
    }
    if let Some(bad) = samples.iter().find(|s| s.label >= classes) {
        return Err(BackendError::DegenerateData(format!("label {} outside 0..{classes}", bad.label)));
    }
    let mut present = vec![0usize; classes];
    for s in samples {
        present[s.label] += 1;
    }
    match kind {
        HeadKind::Binary if samples.len() < 2 || present.contains(&0) => {
            return Err(BackendError::DegenerateData("binary head needs both classes".into()));
        }
        HeadKind::Softmax if present.contains(&0) => {
            return Err(BackendError::DegenerateData("softmax head needs every class".into()));
        }
        _ => {}
    }

    let mut order: Vec<usize> = (0..samples.len()).collect();
    if params.shuffle {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let raw: Vec<&[f64]> = order.iter().map(|&i| samples[i].features.as_slice()).collect();
    let labels: Vec<usize> = order.iter().map(|&i| samples[i].label).collect();
    let scaler = Scaler::fit(&raw, dim);
    let xs: Vec<Vec<f64>> = raw.iter().map(|r| scaler.apply(r)).collect();

    let mut model = HeadModel::zeros(kind, dim, fingerprint);
    model.seed = seed;
    let rows = model.weights.len();
    let n = xs.len() as f64;
    let mut losses = Vec::with_capacity(params.epochs + 1);

    for _ in 0..=params.epochs {
        let mut grad_w = vec![vec![0.0; dim]; rows];
        let mut grad_b = vec![0.0; rows];
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(&labels) {
            let logits: Vec<f64> = model.weights.iter().zip(&model.biases).map(|(w, b)| dot(w, x) + b).collect();
            let residuals: Vec<f64> = match kind {
                HeadKind::Binary => {
                    let p = sigmoid(logits[0]);
                    let t = y as f64;
                    loss -= t * p.max(1e-300).ln() + (1.0 - t) * (1.0 - p).max(1e-300).ln();
                    vec![p - t]
                }
                HeadKind::Softmax => {
                    let p = softmax(&logits);
                    loss -= p[y].max(1e-300).ln();
                    p.iter().enumerate().map(|(c, pc)| pc - if c == y { 1.0 } else { 0.0 }).collect()
                }
            };
            for (row, r) in residuals.iter().enumerate() {
                grad_b[row] += r / n;
                for (g, xi) in grad_w[row].iter_mut().zip(x) {
                    *g += r * xi / n;
                }
            }
        }
        let penalty: f64 = model.weights.iter().flatten().map(|w| w * w).sum::<f64>() * params.l2 / 2.0;
        losses.push(loss / n + penalty);
        if losses.len() > params.epochs {
            break;
        }
        for row in 0..rows {
            for (w, g) in model.weights[row].iter_mut().zip(&grad_w[row]) {
                *w -= params.learning_rate * (g + params.l2 * *w);
            }
            model.biases[row] -= params.learning_rate * grad_b[row];
        }
    }

    model.scaler = Some(scaler);
    Ok(TrainedHead { model, losses })
}
