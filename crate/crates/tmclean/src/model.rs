//! Domain types shared by every stage of the pipeline. No I/O here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One bilingual segment pair with declared language codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationUnit {
    pub id: String,
    pub source_lang: String,
    pub target_lang: String,
    pub source_text: String,
    pub target_text: String,
}

impl TranslationUnit {
    pub fn source_primary_lang(&self) -> &str {
        primary_subtag(&self.source_lang)
    }

    pub fn target_primary_lang(&self) -> &str {
        primary_subtag(&self.target_lang)
    }
}

/// Primary subtag of a BCP-47-style code: "en-US" -> "en".
pub fn primary_subtag(code: &str) -> &str {
    code.split(['-', '_']).next().unwrap_or(code)
}

/// Quality class of a translation unit. Integer codes are fixed as 1/2/3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Correct = 1,
    AlmostCorrect = 2,
    Incorrect = 3,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Correct, Label::AlmostCorrect, Label::Incorrect];

    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<Label> {
        match code {
            1 => Some(Label::Correct),
            2 => Some(Label::AlmostCorrect),
            3 => Some(Label::Incorrect),
            _ => None,
        }
    }
}

/// Classification task variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    /// Groups correct and almost correct (classes 1, 2) against incorrect (class 3).
    BinaryII,
    /// Keeps all three labels apart.
    FineGrained,
}

impl TaskKind {
    /// Class ids a classifier for this task may emit.
    pub fn class_ids(self) -> Vec<u32> {
        match self {
            TaskKind::BinaryII => vec![0, 1],
            TaskKind::FineGrained => vec![1, 2, 3],
        }
    }
}

/// Maps a label to the class id used by classifiers for the given task.
///
/// BinaryII: 0 = valid (correct or almost correct), 1 = invalid.
/// FineGrained: identity on the 1/2/3 codes.
pub fn map_label(label: Label, task: TaskKind) -> u32 {
    match task {
        TaskKind::BinaryII => match label {
            Label::Correct | Label::AlmostCorrect => 0,
            Label::Incorrect => 1,
        },
        TaskKind::FineGrained => label.code(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledUnit {
    pub unit: TranslationUnit,
    pub label: Label,
}

/// Ordered, named feature set. The order is the contract for every vector
/// produced under the schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub names: Vec<String>,
    pub version: String,
}

/// The nine default features, in their fixed order.
pub const DEFAULT_FEATURES: [&str; 9] = [
    "ratio_words",
    "pos_sim_all",
    "language_detection",
    "mt_cfs",
    "mt_bleu",
    "ratio_chars",
    "cg_score",
    "only_capletters_dif",
    "punctuation_similarity",
];

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("duplicate feature name: {0}")]
    DuplicateFeature(String),
    #[error("feature vector has {got} values, schema has {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("non-finite value for feature {0}")]
    NonFinite(String),
}

impl FeatureSchema {
    pub fn new(names: Vec<String>, version: impl Into<String>) -> Result<FeatureSchema, ModelError> {
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(ModelError::DuplicateFeature(n.clone()));
            }
        }
        Ok(FeatureSchema { names, version: version.into() })
    }

    pub fn default_nine() -> FeatureSchema {
        FeatureSchema {
            names: DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect(),
            version: "default-9".to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Feature values in schema order. Construction rejects non-finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(schema: &FeatureSchema, values: Vec<f64>) -> Result<FeatureVector, ModelError> {
        if values.len() != schema.len() {
            return Err(ModelError::LengthMismatch { got: values.len(), expected: schema.len() });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(ModelError::NonFinite(schema.names[i].clone()));
            }
        }
        Ok(FeatureVector { values })
    }
}
