//! Scoring (weighted P/R/F1, confusion matrix, correctly-classified count),
//! the repeated 2/3-1/3 split protocol, and greedy feature-subset search.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::features::{extract_vector, FeatureContext, FeatureError};
use crate::forest::{predict, train_forest, ForestHyperparameters, TrainError};
use crate::ingestion::{split_indices, IngestError, SplitSpec};
use crate::model::{map_label, FeatureSchema, FeatureVector, LabeledUnit, TaskKind};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("true and predicted label sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("nothing to score")]
    Empty,
    #[error("repetition {index}: {source}")]
    Repetition {
        index: usize,
        #[source]
        source: Box<EvalError>,
    },
    #[error(transparent)]
    Split(#[from] IngestError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: u32,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// counts[true][predicted], indexed by position in `classes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<u32>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().map(|row| row.iter().sum::<usize>()).sum()
    }

    pub fn trace(&self) -> usize {
        self.counts.iter().enumerate().map(|(i, row)| row[i]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub per_class: Vec<ClassMetrics>,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub correctly_classified: usize,
    pub total: usize,
    pub confusion: ConfusionMatrix,
}

/// Scores predictions against truth. Precision/recall/F1 of a class with a
/// zero denominator is 0; weighted metrics are support-weighted means.
pub fn score(
    true_labels: &[u32],
    predicted_labels: &[u32],
    classes: &[u32],
) -> Result<EvaluationReport, EvalError> {
    if true_labels.len() != predicted_labels.len() {
        return Err(EvalError::LengthMismatch(true_labels.len(), predicted_labels.len()));
    }
    if true_labels.is_empty() {
        return Err(EvalError::Empty);
    }
    let index = |c: u32| classes.iter().position(|&x| x == c);
    let k = classes.len();
    let mut counts = vec![vec![0usize; k]; k];
    for (&t, &p) in true_labels.iter().zip(predicted_labels) {
        let (ti, pi) = match (index(t), index(p)) {
            (Some(ti), Some(pi)) => (ti, pi),
            _ => return Err(EvalError::Empty),
        };
        counts[ti][pi] += 1;
    }
    let n = true_labels.len();
    let mut per_class = Vec::with_capacity(k);
    let mut weighted = (0.0, 0.0, 0.0);
    for (i, &class) in classes.iter().enumerate() {
        let tp = counts[i][i];
        let support: usize = counts[i].iter().sum();
        let predicted: usize = counts.iter().map(|row| row[i]).sum();
        let precision = if predicted > 0 { tp as f64 / predicted as f64 } else { 0.0 };
        let recall = if support > 0 { tp as f64 / support as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        weighted.0 += support as f64 * precision;
        weighted.1 += support as f64 * recall;
        weighted.2 += support as f64 * f1;
        per_class.push(ClassMetrics { class, precision, recall, f1, support });
    }
    let confusion = ConfusionMatrix { classes: classes.to_vec(), counts };
    Ok(EvaluationReport {
        per_class,
        weighted_precision: weighted.0 / n as f64,
        weighted_recall: weighted.1 / n as f64,
        weighted_f1: weighted.2 / n as f64,
        correctly_classified: confusion.trace(),
        total: n,
        confusion,
    })
}

/// Extracts the schema's features for every unit, in input order. Units are
/// processed in parallel; the first error wins deterministically.
pub fn extract_matrix(
    units: &[LabeledUnit],
    ctx: &FeatureContext,
    schema: &FeatureSchema,
) -> Result<Vec<FeatureVector>, FeatureError> {
    let results: Vec<Result<FeatureVector, FeatureError>> = units
        .par_iter()
        .map(|lu| extract_vector(&lu.unit, ctx, schema))
        .collect();
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepetitionReport {
    pub repetition: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub report: EvaluationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub schema_version: String,
    pub feature_names: Vec<String>,
    pub provider_fingerprint: String,
    pub task: TaskKind,
    pub split: SplitSpec,
    pub averaged_precision: f64,
    pub averaged_recall: f64,
    pub averaged_f1: f64,
    pub repetitions: Vec<RepetitionReport>,
}

/// Repeated stratified-split evaluation over a precomputed feature matrix.
pub fn cross_validate_matrix(
    matrix: &[FeatureVector],
    class_labels: &[u32],
    schema: &FeatureSchema,
    task: TaskKind,
    hyperparameters: ForestHyperparameters,
    spec: &SplitSpec,
) -> Result<Vec<RepetitionReport>, EvalError> {
    let classes = task.class_ids();
    let wrap = |index: usize| move |e: EvalError| EvalError::Repetition { index, source: Box::new(e) };
    (0..spec.repetitions)
        .map(|rep| {
            let run = || -> Result<RepetitionReport, EvalError> {
                let (train_idx, test_idx) = split_indices(class_labels, spec, rep)?;
                let train: Vec<(FeatureVector, u32)> = train_idx
                    .iter()
                    .map(|&i| (matrix[i].clone(), class_labels[i]))
                    .collect();
                let hp = ForestHyperparameters {
                    rng_seed: crate::seeding::derive_seed(hyperparameters.rng_seed, rep as u64),
                    ..hyperparameters
                };
                let model = train_forest(&train, schema, task, hp)?;
                let mut truth = Vec::with_capacity(test_idx.len());
                let mut predicted = Vec::with_capacity(test_idx.len());
                for &i in &test_idx {
                    truth.push(class_labels[i]);
                    predicted.push(predict(&model, &matrix[i])?.0);
                }
                Ok(RepetitionReport {
                    repetition: rep,
                    train_size: train_idx.len(),
                    test_size: test_idx.len(),
                    report: score(&truth, &predicted, &classes)?,
                })
            };
            run().map_err(wrap(rep))
        })
        .collect()
}

fn averaged(reports: &[RepetitionReport]) -> (f64, f64, f64) {
    let n = reports.len() as f64;
    let sum = reports.iter().fold((0.0, 0.0, 0.0), |acc, r| {
        (
            acc.0 + r.report.weighted_precision,
            acc.1 + r.report.weighted_recall,
            acc.2 + r.report.weighted_f1,
        )
    });
    (sum.0 / n, sum.1 / n, sum.2 / n)
}

/// Full protocol: extract features once, then run the repeated splits and
/// average the weighted metrics.
pub fn cross_validate(
    dataset: &[LabeledUnit],
    task: TaskKind,
    schema: &FeatureSchema,
    ctx: &FeatureContext,
    hyperparameters: ForestHyperparameters,
    spec: &SplitSpec,
) -> Result<CvReport, EvalError> {
    let matrix = extract_matrix(dataset, ctx, schema)?;
    let class_labels: Vec<u32> = dataset.iter().map(|lu| map_label(lu.label, task)).collect();
    let repetitions =
        cross_validate_matrix(&matrix, &class_labels, schema, task, hyperparameters, spec)?;
    let (p, r, f1) = averaged(&repetitions);
    Ok(CvReport {
        schema_version: schema.version.clone(),
        feature_names: schema.names.clone(),
        provider_fingerprint: ctx.fingerprint(),
        task,
        split: *spec,
        averaged_precision: p,
        averaged_recall: r,
        averaged_f1: f1,
        repetitions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionStep {
    pub added: String,
    pub features: Vec<String>,
    pub averaged_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub steps: Vec<SelectionStep>,
    pub selected: Vec<String>,
    pub selected_f1: f64,
    /// The fixed nine-feature set, evaluated alongside the search.
    pub default_nine_f1: Option<f64>,
}

const SELECTION_TOLERANCE: f64 = 1e-4;

fn project(matrix: &[FeatureVector], columns: &[usize]) -> Vec<FeatureVector> {
    matrix
        .iter()
        .map(|v| FeatureVector { values: columns.iter().map(|&c| v.values[c]).collect() })
        .collect()
}

fn subset_f1(
    matrix: &[FeatureVector],
    class_labels: &[u32],
    all: &FeatureSchema,
    names: &[String],
    task: TaskKind,
    hyperparameters: ForestHyperparameters,
    spec: &SplitSpec,
) -> Result<f64, EvalError> {
    let columns: Vec<usize> = names.iter().map(|n| all.index_of(n).unwrap()).collect();
    let schema = FeatureSchema::new(names.to_vec(), "subset").unwrap();
    let sub = project(matrix, &columns);
    let reps = cross_validate_matrix(&sub, class_labels, &schema, task, hyperparameters, spec)?;
    Ok(averaged(&reps).2)
}

/// Greedy forward selection: repeatedly add the candidate feature that
/// maximizes cross-validated weighted F1, stopping when no addition
/// improves by more than 1e-4.
pub fn select_features(
    dataset: &[LabeledUnit],
    task: TaskKind,
    candidates: &[String],
    ctx: &FeatureContext,
    hyperparameters: ForestHyperparameters,
    spec: &SplitSpec,
) -> Result<SelectionReport, EvalError> {
    assert!(!candidates.is_empty(), "at least one candidate feature required");
    let all = FeatureSchema::new(candidates.to_vec(), "candidates").unwrap();
    let matrix = extract_matrix(dataset, ctx, &all)?;
    let class_labels: Vec<u32> = dataset.iter().map(|lu| map_label(lu.label, task)).collect();

    let mut selected: Vec<String> = Vec::new();
    let mut best_f1 = f64::NEG_INFINITY;
    let mut steps = Vec::new();
    loop {
        let mut best_candidate: Option<(String, f64)> = None;
        for name in candidates {
            if selected.contains(name) {
                continue;
            }
            let mut trial = selected.clone();
            trial.push(name.clone());
            let f1 =
                subset_f1(&matrix, &class_labels, &all, &trial, task, hyperparameters, spec)?;
            let better = match &best_candidate {
                None => true,
                Some((_, bf)) => f1 > *bf,
            };
            if better {
                best_candidate = Some((name.clone(), f1));
            }
        }
        match best_candidate {
            Some((name, f1)) if best_f1 == f64::NEG_INFINITY || f1 > best_f1 + SELECTION_TOLERANCE => {
                selected.push(name.clone());
                best_f1 = f1;
                steps.push(SelectionStep { added: name, features: selected.clone(), averaged_f1: f1 });
            }
            _ => break,
        }
    }

    let nine: Vec<String> =
        crate::model::DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect();
    let default_nine_f1 = if nine.iter().all(|n| candidates.contains(n)) {
        Some(subset_f1(&matrix, &class_labels, &all, &nine, task, hyperparameters, spec)?)
    } else {
        None
    };

    Ok(SelectionReport { steps, selected, selected_f1: best_f1, default_nine_f1 })
}
