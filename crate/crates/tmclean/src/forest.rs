//! From-scratch CART decision trees and a Random Forest over them, the two
//! shared-task baselines, and versioned model (de)serialization.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{FeatureSchema, FeatureVector, TaskKind};
use crate::seeding::derive_seed;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("feature vector length {got} does not match schema length {expected}")]
    SchemaMismatch { got: usize, expected: usize },
    #[error("training data is empty")]
    EmptyData,
}

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported model format version {0}")]
    VersionMismatch(u32),
    #[error("corrupt model file: {0}")]
    Corrupt(String),
}

/// Binary decision tree node. Values <= threshold go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Training-sample counts per class, indexed like `class_ids`.
        class_counts: Vec<u32>,
    },
}

impl TreeNode {
    fn leaf_counts<'a>(&'a self, values: &[f64]) -> &'a [u32] {
        match self {
            TreeNode::Leaf { class_counts } => class_counts,
            TreeNode::Split { feature_index, threshold, left, right } => {
                if values[*feature_index] <= *threshold {
                    left.leaf_counts(values)
                } else {
                    right.leaf_counts(values)
                }
            }
        }
    }

    /// Majority class index; ties go to the smaller index.
    fn vote(&self, values: &[f64]) -> usize {
        let counts = self.leaf_counts(values);
        counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split { feature_index, left, right, .. } => Some(
                (*feature_index)
                    .max(left.max_feature_index().unwrap_or(0))
                    .max(right.max_feature_index().unwrap_or(0)),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestHyperparameters {
    pub n_trees: usize,
    /// None means unlimited depth.
    pub max_depth: Option<usize>,
    pub min_leaf_size: usize,
    /// None selects ceil(sqrt(d)) at train time.
    pub features_per_split: Option<usize>,
    pub rng_seed: u64,
    /// Debug switch: train every tree on the full sample instead of a
    /// bootstrap.
    pub bootstrap: bool,
}

impl ForestHyperparameters {
    pub fn default_with_seed(rng_seed: u64) -> ForestHyperparameters {
        ForestHyperparameters {
            n_trees: 100,
            max_depth: None,
            min_leaf_size: 1,
            features_per_split: None,
            rng_seed,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub task: TaskKind,
    pub schema: FeatureSchema,
    pub hyperparameters: ForestHyperparameters,
    pub class_ids: Vec<u32>,
    pub trees: Vec<TreeNode>,
}

struct TreeBuilder<'a> {
    data: &'a [(&'a [f64], usize)],
    n_classes: usize,
    n_features: usize,
    mtry: usize,
    max_depth: Option<usize>,
    min_leaf_size: usize,
}

fn gini(counts: &[u32], total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / total).powi(2)).sum::<f64>()
}

impl<'a> TreeBuilder<'a> {
    fn class_counts(&self, indices: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &i in indices {
            counts[self.data[i].1] += 1;
        }
        counts
    }

    fn build(&self, indices: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> TreeNode {
        let counts = self.class_counts(indices);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_reached = self.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || indices.len() < 2 * self.min_leaf_size {
            return TreeNode::Leaf { class_counts: counts };
        }
        match self.best_split(indices, &counts, rng) {
            Some((feature_index, threshold)) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                    .iter()
                    .partition(|&&i| self.data[i].0[feature_index] <= threshold);
                let left = Box::new(self.build(&left_idx, depth + 1, rng));
                let right = Box::new(self.build(&right_idx, depth + 1, rng));
                TreeNode::Split { feature_index, threshold, left, right }
            }
            None => TreeNode::Leaf { class_counts: counts },
        }
    }

    /// Best Gini split over a random feature subset. Thresholds are
    /// midpoints of adjacent distinct values; ties break toward the lower
    /// feature index, then the lower threshold.
    fn best_split(
        &self,
        indices: &[usize],
        parent_counts: &[u32],
        rng: &mut ChaCha8Rng,
    ) -> Option<(usize, f64)> {
        let total = indices.len() as f64;
        let parent_impurity = gini(parent_counts, total);

        let mut features: Vec<usize> = (0..self.n_features).collect();
        features.shuffle(rng);
        features.truncate(self.mtry);
        features.sort_unstable();

        let mut best: Option<(f64, usize, f64)> = None; // (decrease, feature, threshold)
        for &f in &features {
            let mut sorted: Vec<usize> = indices.to_vec();
            sorted.sort_by(|&a, &b| {
                self.data[a].0[f].partial_cmp(&self.data[b].0[f]).unwrap()
            });
            let mut left_counts = vec![0u32; self.n_classes];
            let mut right_counts = parent_counts.to_vec();
            for w in 0..sorted.len() - 1 {
                let i = sorted[w];
                left_counts[self.data[i].1] += 1;
                right_counts[self.data[i].1] -= 1;
                let v = self.data[i].0[f];
                let next = self.data[sorted[w + 1]].0[f];
                if v == next {
                    continue;
                }
                let n_left = w + 1;
                let n_right = sorted.len() - n_left;
                if n_left < self.min_leaf_size || n_right < self.min_leaf_size {
                    continue;
                }
                let threshold = v + (next - v) / 2.0;
                // midpoint can collapse onto v for adjacent floats; keep
                // the partition consistent with <= threshold
                if threshold >= next {
                    continue;
                }
                let weighted = (n_left as f64 * gini(&left_counts, n_left as f64)
                    + n_right as f64 * gini(&right_counts, n_right as f64))
                    / total;
                // zero-gain splits are kept: they still shrink both
                // children, so impure nodes keep splitting until pure
                let decrease = parent_impurity - weighted;
                let better = match best {
                    None => true,
                    Some((bd, bf, bt)) => {
                        decrease > bd + 1e-12
                            || ((decrease - bd).abs() <= 1e-12
                                && (f < bf || (f == bf && threshold < bt)))
                    }
                };
                if better {
                    best = Some((decrease, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Trains a Random Forest: n_trees CART trees grown on bootstrap samples
/// with Gini impurity and a random feature subset per split. Deterministic
/// given the seed.
pub fn train_forest(
    vectors: &[(FeatureVector, u32)],
    schema: &FeatureSchema,
    task: TaskKind,
    hyperparameters: ForestHyperparameters,
) -> Result<ForestModel, TrainError> {
    if vectors.is_empty() {
        return Err(TrainError::EmptyData);
    }
    for (v, _) in vectors {
        if v.values.len() != schema.len() {
            return Err(TrainError::SchemaMismatch { got: v.values.len(), expected: schema.len() });
        }
    }
    let mut class_ids: Vec<u32> = vectors.iter().map(|&(_, c)| c).collect();
    class_ids.sort_unstable();
    class_ids.dedup();
    if class_ids.len() < 2 {
        return Err(TrainError::SingleClass);
    }

    let class_index: BTreeMap<u32, usize> =
        class_ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let data: Vec<(&[f64], usize)> = vectors
        .iter()
        .map(|(v, c)| (v.values.as_slice(), class_index[c]))
        .collect();

    let n = data.len();
    let d = schema.len();
    let mtry = hyperparameters
        .features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);

    let builder = TreeBuilder {
        data: &data,
        n_classes: class_ids.len(),
        n_features: d,
        mtry,
        max_depth: hyperparameters.max_depth,
        min_leaf_size: hyperparameters.min_leaf_size.max(1),
    };

    let trees: Vec<TreeNode> = (0..hyperparameters.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(hyperparameters.rng_seed, t as u64));
            let indices: Vec<usize> = if hyperparameters.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            builder.build(&indices, 0, &mut rng)
        })
        .collect();

    Ok(ForestModel { task, schema: schema.clone(), hyperparameters, class_ids, trees })
}

/// Majority vote over the trees. Returns the predicted class id and the
/// vote-share probability per class; ties break toward the smaller id.
pub fn predict(model: &ForestModel, vector: &FeatureVector) -> Result<(u32, Vec<(u32, f64)>), TrainError> {
    if vector.values.len() != model.schema.len() {
        return Err(TrainError::SchemaMismatch {
            got: vector.values.len(),
            expected: model.schema.len(),
        });
    }
    let mut votes = vec![0u32; model.class_ids.len()];
    for tree in &model.trees {
        votes[tree.vote(&vector.values)] += 1;
    }
    let n_trees = model.trees.len() as f64;
    let probabilities: Vec<(u32, f64)> = model
        .class_ids
        .iter()
        .zip(&votes)
        .map(|(&c, &v)| (c, v as f64 / n_trees))
        .collect();
    let winner = votes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| model.class_ids[i])
        .unwrap();
    Ok((winner, probabilities))
}

/// Probability assigned to one class (0.0 when the model does not know the
/// class).
pub fn class_probability(probabilities: &[(u32, f64)], class: u32) -> f64 {
    probabilities.iter().find(|&&(c, _)| c == class).map(|&(_, p)| p).unwrap_or(0.0)
}

/// Baseline 1: predicts classes at random according to the training
/// distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DummyModel {
    pub distribution: Vec<(u32, f64)>,
    pub rng_seed: u64,
}

pub fn train_dummy(labels: &[u32], rng_seed: u64) -> Result<DummyModel, TrainError> {
    if labels.is_empty() {
        return Err(TrainError::EmptyData);
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    let n = labels.len() as f64;
    let distribution = counts.into_iter().map(|(c, k)| (c, k as f64 / n)).collect();
    Ok(DummyModel { distribution, rng_seed })
}

impl DummyModel {
    /// Samples predictions i.i.d. from the stored distribution.
    pub fn predict_batch(&self, count: usize) -> Vec<u32> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        (0..count)
            .map(|_| {
                let x: f64 = rng.gen();
                let mut acc = 0.0;
                for &(c, p) in &self.distribution {
                    acc += p;
                    if x < acc {
                        return c;
                    }
                }
                self.distribution.last().unwrap().0
            })
            .collect()
    }
}

/// Baseline 2: thresholds the Gale-Church length z-score. Units whose
/// cg_score exceeds tau are predicted invalid (class 1 of Binary II).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChurchGaleModel {
    pub tau: f64,
}

impl ChurchGaleModel {
    pub fn predict(&self, cg_score: f64) -> u32 {
        if cg_score > self.tau {
            1
        } else {
            0
        }
    }
}

/// Picks tau maximizing weighted F1 on the training data, scanned over
/// midpoints of the sorted distinct cg_scores (plus the maximum itself).
pub fn train_church_gale(scores: &[f64], labels: &[u32]) -> Result<ChurchGaleModel, TrainError> {
    assert_eq!(scores.len(), labels.len());
    if scores.is_empty() {
        return Err(TrainError::EmptyData);
    }
    let classes: std::collections::BTreeSet<u32> = labels.iter().copied().collect();
    if classes.len() < 2 {
        return Err(TrainError::SingleClass);
    }
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let mut candidates: Vec<f64> =
        distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect();
    candidates.push(*distinct.last().unwrap());

    let mut best = (f64::NEG_INFINITY, 0.0);
    for &tau in &candidates {
        let model = ChurchGaleModel { tau };
        let predicted: Vec<u32> = scores.iter().map(|&s| model.predict(s)).collect();
        let f1 = crate::eval::score(labels, &predicted, &[0, 1])
            .map(|r| r.weighted_f1)
            .unwrap_or(0.0);
        if f1 > best.0 + 1e-12 || (f1 > best.0 - 1e-12 && tau < best.1) {
            best = (f1, tau);
        }
    }
    Ok(ChurchGaleModel { tau: best.1 })
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    checksum: String,
    model: ForestModel,
}

fn model_checksum(model: &ForestModel) -> Result<String, ModelIoError> {
    let body = serde_json::to_vec(model).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    Ok(format!("{:x}", Sha256::digest(&body)))
}

/// Serialized form of a model, as written by save_model.
pub fn model_to_bytes(model: &ForestModel) -> Result<Vec<u8>, ModelIoError> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        checksum: model_checksum(model)?,
        model: model.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&file).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn save_model(model: &ForestModel, path: impl AsRef<Path>) -> Result<(), ModelIoError> {
    std::fs::write(path, model_to_bytes(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ForestModel, ModelIoError> {
    let bytes = std::fs::read(path)?;
    // peek at the version before strict decoding so a newer format is
    // reported as a version mismatch, not corruption
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| ModelIoError::Corrupt("missing format_version".to_string()))?;
    if version != MODEL_FORMAT_VERSION as u64 {
        return Err(ModelIoError::VersionMismatch(version as u32));
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    let expected = model_checksum(&file.model)?;
    if file.checksum != expected {
        return Err(ModelIoError::Corrupt("checksum mismatch".to_string()));
    }
    Ok(file.model)
}
