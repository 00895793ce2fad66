//! Linear classifier over fixed 32x32 luma features, trained with logistic
//! loss. Deep feature extractors can replace it through `ClassifierModel`.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ClassifierModel;
use crate::error::{Error, Result};
use crate::imgproc::Frame;
use crate::samplegen::{SampleLabel, SampleSet};

pub const FEATURE_SIDE: usize = 32;
pub const FEATURE_DIM: usize = FEATURE_SIDE * FEATURE_SIDE;
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// For each output cell along one axis, the source indices it overlaps and
/// the overlap length in units of `1 / FEATURE_SIDE` source pixels. The
/// weights of one cell sum to the source length.
fn area_weights(src_len: usize) -> Vec<Vec<(usize, u64)>> {
    let n = FEATURE_SIDE as u64;
    let len = src_len as u64;
    (0..n)
        .map(|j| {
            let (lo, hi) = (j * len, (j + 1) * len);
            let first = (lo / n) as usize;
            let last = ((hi - 1) / n) as usize;
            (first..=last)
                .map(|c| {
                    let (c_lo, c_hi) = (c as u64 * n, (c as u64 + 1) * n);
                    (c, hi.min(c_hi) - lo.max(c_lo))
                })
                .collect()
        })
        .collect()
}

/// Area-average resize to 32x32, converted to luma and scaled to `[0, 1]`.
///
/// Luma is taken per source pixel before averaging; both steps are linear so
/// the order does not matter. Sums are kept in integers so uniform crops map
/// to exact values.
pub fn extract_features(crop: &Frame) -> Vec<f64> {
    let (w, h) = crop.dims();
    // luma scaled by 1000
    let luma: Vec<u64> = crop
        .data()
        .chunks_exact(3)
        .map(|p| 299 * u64::from(p[0]) + 587 * u64::from(p[1]) + 114 * u64::from(p[2]))
        .collect();
    let cols = area_weights(w);
    let rows = area_weights(h);
    let denom = (w as u64 * h as u64) as f64 * 255_000.0;

    let mut out = Vec::with_capacity(FEATURE_DIM);
    for row in &rows {
        for col in &cols {
            let mut acc: u64 = 0;
            for &(y, wy) in row {
                let line = &luma[y * w..(y + 1) * w];
                let mut row_acc: u64 = 0;
                for &(x, wx) in col {
                    row_acc += wx * line[x];
                }
                acc += wy * row_acc;
            }
            out.push(acc as f64 / denom);
        }
    }
    out
}

/// `score = 2 * sigmoid(w . features + bias) - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    bias: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    input_dim: usize,
    weights: Vec<f64>,
    bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.iter().chain(std::iter::once(&bias)).any(|v| !v.is_finite()) {
            return Err(Error::Model("weights and bias must be finite".into()));
        }
        Ok(LinearModel { weights, bias })
    }

    pub fn zeros(input_dim: usize) -> Self {
        LinearModel {
            weights: vec![0.0; input_dim],
            bias: 0.0,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn decision(&self, features: &[f64]) -> f64 {
        self.weights.iter().zip(features).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    pub fn predict_features(&self, features: &[f64]) -> f64 {
        2.0 * sigmoid(self.decision(features)) - 1.0
    }

    /// JSON document `{format_version, input_dim, weights, bias}`.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            input_dim: self.weights.len(),
            weights: self.weights.clone(),
            bias: self.bias,
        };
        let mut s = serde_json::to_string(&file).expect("model serialises");
        s.push('\n');
        s
    }

    /// Parses a model document and checks it against `expected_dim`.
    pub fn from_json(text: &str, expected_dim: usize) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Model(format!("malformed model file: {e}")))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported model format_version {} (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.input_dim != file.weights.len() {
            return Err(Error::Model(format!(
                "input_dim {} does not match {} weights",
                file.input_dim,
                file.weights.len()
            )));
        }
        if file.input_dim != expected_dim {
            return Err(Error::Model(format!(
                "model input_dim {} does not match the feature extractor ({expected_dim})",
                file.input_dim
            )));
        }
        LinearModel::new(file.weights, file.bias)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LinearModel::from_json(&text, FEATURE_DIM)
    }
}

impl ClassifierModel for LinearModel {
    fn predict(&self, crop: &Frame) -> f64 {
        self.predict_features(&extract_features(crop))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainParams {
    pub epochs: usize,
    pub learning_rate: f64,
    /// L2 penalty applied per update.
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            epochs: 50,
            learning_rate: 0.05,
            l2: 1e-4,
            seed: 0,
        }
    }
}

pub fn train_linear(samples: &SampleSet, params: &TrainParams) -> Result<LinearModel> {
    train_linear_with_history(samples, params).map(|(m, _)| m)
}

/// Stochastic gradient descent on the logistic loss, one shuffled pass per
/// epoch. Also returns the mean training loss after each epoch.
///
/// Features are centred on their training mean while optimising; the offset
/// is folded back into the bias, so the returned model takes raw features.
pub fn train_linear_with_history(samples: &SampleSet, params: &TrainParams) -> Result<(LinearModel, Vec<f64>)> {
    if samples.samples.is_empty() {
        return Err(Error::invalid("cannot train on an empty sample set"));
    }
    let positives = samples.samples.iter().filter(|s| s.label == SampleLabel::Positive).count();
    if positives == 0 || positives == samples.samples.len() {
        return Err(Error::invalid("training needs both positive and negative samples"));
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(Error::invalid("learning rate must be positive"));
    }

    let features: Vec<Vec<f64>> = samples.samples.iter().map(|s| extract_features(&s.image)).collect();
    let targets: Vec<f64> = samples
        .samples
        .iter()
        .map(|s| if s.label == SampleLabel::Positive { 1.0 } else { 0.0 })
        .collect();
    let n = features.len();
    let mut mean = vec![0.0; FEATURE_DIM];
    for f in &features {
        for (m, x) in mean.iter_mut().zip(f) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centred: Vec<Vec<f64>> = features
        .iter()
        .map(|f| f.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut w = vec![0.0; FEATURE_DIM];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut history = Vec::with_capacity(params.epochs);
    let decay = 1.0 - params.learning_rate * params.l2;

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &centred[i];
            let z: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            let g = sigmoid(z) - targets[i];
            for (wi, xi) in w.iter_mut().zip(x) {
                *wi = decay * *wi - params.learning_rate * g * xi;
            }
            b -= params.learning_rate * g;
        }
        let loss = centred
            .iter()
            .zip(&targets)
            .map(|(x, &t)| {
                let z: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
                // numerically stable log(1 + e^z) - t z
                z.max(0.0) + (-z.abs()).exp().ln_1p() - t * z
            })
            .sum::<f64>()
            / n as f64;
        history.push(loss);
    }

    let bias = b - w.iter().zip(&mean).map(|(wi, m)| wi * m).sum::<f64>();
    Ok((LinearModel::new(w, bias)?, history))
}
