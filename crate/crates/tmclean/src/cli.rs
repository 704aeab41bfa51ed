//! Command implementations behind the `tmclean` binary: stats, extract,
//! train, predict, evaluate, cv, select-features, clean.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::eval;
use crate::features::{self, FeatureContext, FeatureError};
use crate::forest::{
    self, ForestHyperparameters, ForestModel, ModelIoError, TrainError,
};
use crate::ingestion::{self, IngestError, ReadMode, SplitSpec};
use crate::model::{map_label, FeatureSchema, LabeledUnit, TaskKind, TranslationUnit};
use crate::providers::{
    CachedTranslator, CavnarTrenkleIdentifier, ExternalTaggerAdapter, GlossaryTranslator,
    LexiconPosTagger, RemoteMtProvider, TagMapping, Translator,
};

/// Exit codes: 0 success, 1 usage, 2 data error, 3 provider error,
/// 4 internal.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Provider(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Provider(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Data(m)
            | CliError::Provider(m)
            | CliError::Internal(m) => m,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io(io) => CliError::Internal(io.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match &e {
            FeatureError::Provider { .. } => CliError::Provider(e.to_string()),
            FeatureError::UnknownFeature(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelIoError> for CliError {
    fn from(e: ModelIoError) -> Self {
        match e {
            ModelIoError::Io(io) => CliError::Internal(io.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<eval::EvalError> for CliError {
    fn from(e: eval::EvalError) -> Self {
        match e {
            eval::EvalError::Feature(f) => f.into(),
            eval::EvalError::Split(s) => s.into(),
            eval::EvalError::Train(t) => t.into(),
            eval::EvalError::Repetition { source, index } => {
                let inner: CliError = (*source).into();
                match inner {
                    CliError::Provider(m) => CliError::Provider(format!("repetition {index}: {m}")),
                    CliError::Data(m) => CliError::Data(format!("repetition {index}: {m}")),
                    other => other,
                }
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn default_n_best() -> usize {
    crate::providers::DEFAULT_N_BEST
}
fn default_trees() -> usize {
    100
}
fn default_min_leaf() -> usize {
    1
}
fn default_train_fraction() -> f64 {
    2.0 / 3.0
}
fn default_repetitions() -> usize {
    5
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct MtConfig {
    /// "glossary" or "remote"; absent means no MT provider configured.
    pub mode: Option<String>,
    pub glossary_path: Option<PathBuf>,
    pub source_lang: Option<String>,
    pub target_lang: Option<String>,
    pub endpoint: Option<String>,
    pub cache_path: Option<PathBuf>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct TaggerConfig {
    /// "builtin" (default) or "external".
    pub mode: Option<String>,
    pub command: Option<String>,
    #[serde(default)]
    pub args: Vec<String>,
    /// language code -> fine-tag mapping TSV, for external mode.
    #[serde(default)]
    pub mappings: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct LangIdConfig {
    /// "builtin" (default) or "profiles".
    pub mode: Option<String>,
    pub profile_dir: Option<PathBuf>,
}

/// One JSON document capturing every knob of a run; command-line flags
/// override individual fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct RunConfig {
    #[serde(default)]
    pub mt: MtConfig,
    #[serde(default)]
    pub tagger: TaggerConfig,
    #[serde(default)]
    pub langid: LangIdConfig,
    /// Feature names; absent means the default nine-feature schema.
    #[serde(default)]
    pub schema: Option<Vec<String>>,
    #[serde(default = "default_n_best")]
    pub n_best: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trees")]
    pub n_trees: usize,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default = "default_min_leaf")]
    pub min_leaf_size: usize,
    #[serde(default)]
    pub features_per_split: Option<usize>,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub task: Option<String>,
    #[serde(default = "default_true")]
    pub strict: bool,
    #[serde(default)]
    pub parallelism: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig, CliError> {
        let content = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read config: {e}")))?;
        serde_json::from_str(&content).map_err(|e| CliError::Usage(format!("bad config: {e}")))
    }

    pub fn task_kind(&self) -> Result<TaskKind, CliError> {
        match self.task.as_deref() {
            None | Some("binary") | Some("binary-ii") | Some("BinaryII") => Ok(TaskKind::BinaryII),
            Some("fine") | Some("fine-grained") | Some("FineGrained") => Ok(TaskKind::FineGrained),
            Some(other) => Err(CliError::Usage(format!("unknown task {other:?}"))),
        }
    }

    pub fn schema(&self) -> Result<FeatureSchema, CliError> {
        match &self.schema {
            None => Ok(FeatureSchema::default_nine()),
            Some(names) => {
                for n in names {
                    if !features::ALL_FEATURES.contains(&n.as_str()) {
                        return Err(CliError::Usage(format!("unknown feature {n:?}")));
                    }
                }
                FeatureSchema::new(names.clone(), "custom")
                    .map_err(|e| CliError::Usage(e.to_string()))
            }
        }
    }

    pub fn hyperparameters(&self) -> ForestHyperparameters {
        ForestHyperparameters {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_leaf_size: self.min_leaf_size,
            features_per_split: self.features_per_split,
            rng_seed: self.seed,
            bootstrap: true,
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec::new(self.train_fraction, self.repetitions, self.seed)
    }

    pub fn read_mode(&self) -> ReadMode {
        if self.strict {
            ReadMode::Strict
        } else {
            ReadMode::Lenient
        }
    }

    fn build_translator(&self) -> Result<Option<Arc<dyn Translator>>, CliError> {
        let base: Arc<dyn Translator> = match self.mt.mode.as_deref() {
            None => return Ok(None),
            Some("glossary") => {
                let path = self.mt.glossary_path.as_ref().ok_or_else(|| {
                    CliError::Usage("glossary MT mode requires mt.glossary_path".into())
                })?;
                let src = self.mt.source_lang.as_deref().unwrap_or("en");
                let tgt = self.mt.target_lang.as_deref().unwrap_or("de");
                Arc::new(
                    GlossaryTranslator::from_tsv(path, src, tgt)
                        .map_err(|e| CliError::Data(format!("glossary {path:?}: {e}")))?,
                )
            }
            Some("remote") => {
                let endpoint = self.mt.endpoint.as_ref().ok_or_else(|| {
                    CliError::Usage("remote MT mode requires mt.endpoint".into())
                })?;
                let timeout = Duration::from_secs(self.mt.timeout_secs.unwrap_or(30));
                Arc::new(RemoteMtProvider::new(endpoint.clone(), timeout))
            }
            Some(other) => return Err(CliError::Usage(format!("unknown MT mode {other:?}"))),
        };
        let translator = match &self.mt.cache_path {
            Some(cache) => Arc::new(
                CachedTranslator::open(base, cache)
                    .map_err(|e| CliError::Data(format!("MT cache {cache:?}: {e}")))?,
            ) as Arc<dyn Translator>,
            None => base,
        };
        Ok(Some(translator))
    }

    /// Builds the provider context, validating that every provider the
    /// schema needs is configured before any extraction work starts.
    pub fn build_context(&self, schema: &FeatureSchema) -> Result<FeatureContext, CliError> {
        let translator = match self.build_translator()? {
            Some(t) => t,
            None => {
                if features::needs_translator(schema) {
                    return Err(CliError::Usage(
                        "schema contains MT features but no MT provider is configured".into(),
                    ));
                }
                // inert placeholder; never called for this schema
                Arc::new(GlossaryTranslator::new("und", "und", std::iter::empty()))
            }
        };
        let tagger: Arc<dyn crate::providers::PosTagger> = match self.tagger.mode.as_deref() {
            None | Some("builtin") => Arc::new(LexiconPosTagger::new()),
            Some("external") => {
                let command = self.tagger.command.as_ref().ok_or_else(|| {
                    CliError::Usage("external tagger mode requires tagger.command".into())
                })?;
                let mut mapping = TagMapping::new();
                for (lang, path) in &self.tagger.mappings {
                    mapping
                        .load_table(lang, path)
                        .map_err(|e| CliError::Data(format!("tag mapping {path:?}: {e}")))?;
                }
                Arc::new(ExternalTaggerAdapter::new(
                    command.clone(),
                    self.tagger.args.clone(),
                    mapping,
                ))
            }
            Some(other) => return Err(CliError::Usage(format!("unknown tagger mode {other:?}"))),
        };
        let identifier: Arc<dyn crate::providers::LanguageIdentifier> =
            match self.langid.mode.as_deref() {
                None | Some("builtin") => Arc::new(CavnarTrenkleIdentifier::builtin()),
                Some("profiles") => {
                    let dir = self.langid.profile_dir.as_ref().ok_or_else(|| {
                        CliError::Usage("profiles langid mode requires langid.profile_dir".into())
                    })?;
                    Arc::new(
                        CavnarTrenkleIdentifier::from_dir(dir)
                            .map_err(|e| CliError::Data(format!("profiles {dir:?}: {e}")))?,
                    )
                }
                Some(other) => {
                    return Err(CliError::Usage(format!("unknown langid mode {other:?}")))
                }
            };
        Ok(FeatureContext { translator, tagger, identifier, n_best: self.n_best })
    }
}

/// Writes via a temp file in the target directory, then renames.
pub fn atomic_write(path: impl AsRef<Path>, bytes: &[u8]) -> std::io::Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn read_labeled(path: &Path, mode: ReadMode) -> Result<Vec<LabeledUnit>, CliError> {
    let outcome = ingestion::read_labeled_tsv(path, mode)?;
    for skipped in &outcome.skipped {
        eprintln!("warning: skipped record: {skipped}");
    }
    if outcome.records.is_empty() {
        return Err(CliError::Data(format!("{}: no labeled units", path.display())));
    }
    Ok(outcome.records)
}

fn read_units(
    path: &Path,
    mode: ReadMode,
    source_lang: Option<&str>,
    target_lang: Option<&str>,
) -> Result<Vec<TranslationUnit>, CliError> {
    let is_tmx = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tmx"));
    let outcome = if is_tmx {
        let src = source_lang
            .ok_or_else(|| CliError::Usage("TMX input requires --source-lang".into()))?;
        let tgt = target_lang
            .ok_or_else(|| CliError::Usage("TMX input requires --target-lang".into()))?;
        ingestion::read_tmx(path, src, tgt, mode)?
    } else {
        ingestion::read_unlabeled_tsv(path, mode)?
    };
    for skipped in &outcome.skipped {
        eprintln!("warning: skipped record: {skipped}");
    }
    Ok(outcome.records)
}

pub fn cmd_stats(input: &Path, config: &RunConfig) -> Result<String, CliError> {
    let units = read_labeled(input, config.read_mode())?;
    let stats = ingestion::stats(&units);
    let mut out = String::new();
    out.push_str("class\tcount\n");
    for (class, count) in &stats.class_counts {
        out.push_str(&format!("{class}\t{count}\n"));
    }
    out.push_str(&format!("total\t{}\n", stats.total));
    out.push_str("\nlanguage pair\tcount\n");
    for (pair, count) in &stats.language_pairs {
        out.push_str(&format!("{pair}\t{count}\n"));
    }
    Ok(out)
}

/// Feature matrix dump: id, optional label, then schema columns; TSV in
/// input order.
pub fn cmd_extract(
    input: &Path,
    output: &Path,
    labeled: bool,
    config: &RunConfig,
) -> Result<(), CliError> {
    let schema = config.schema()?;
    let ctx = config.build_context(&schema)?;
    init_parallelism(config);
    let (units, labels): (Vec<TranslationUnit>, Option<Vec<u32>>) = if labeled {
        let data = read_labeled(input, config.read_mode())?;
        let labels = data.iter().map(|lu| lu.label.code()).collect();
        (data.into_iter().map(|lu| lu.unit).collect(), Some(labels))
    } else {
        (read_units(input, config.read_mode(), None, None)?, None)
    };
    let wrapped: Vec<LabeledUnit> = units
        .iter()
        .map(|u| LabeledUnit { unit: u.clone(), label: crate::model::Label::Correct })
        .collect();
    let matrix = eval::extract_matrix(&wrapped, &ctx, &schema)?;

    let mut out = String::new();
    out.push_str("id");
    if labels.is_some() {
        out.push_str("\tlabel");
    }
    for name in &schema.names {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for (i, unit) in units.iter().enumerate() {
        out.push_str(&unit.id);
        if let Some(labels) = &labels {
            out.push_str(&format!("\t{}", labels[i]));
        }
        for v in &matrix[i].values {
            out.push_str(&format!("\t{v}"));
        }
        out.push('\n');
    }
    atomic_write(output, out.as_bytes())?;
    Ok(())
}

pub fn cmd_train(input: &Path, model_path: &Path, config: &RunConfig) -> Result<String, CliError> {
    let schema = config.schema()?;
    let task = config.task_kind()?;
    let ctx = config.build_context(&schema)?;
    init_parallelism(config);
    let data = read_labeled(input, config.read_mode())?;
    let matrix = eval::extract_matrix(&data, &ctx, &schema)?;
    let vectors: Vec<_> = matrix
        .into_iter()
        .zip(&data)
        .map(|(v, lu)| (v, map_label(lu.label, task)))
        .collect();
    let model = forest::train_forest(&vectors, &schema, task, config.hyperparameters())?;
    atomic_write(model_path, &forest::model_to_bytes(&model)?)?;
    Ok(format!(
        "trained {} trees on {} units ({} features, task {:?}), model written to {}\n",
        model.hyperparameters.n_trees,
        vectors.len(),
        schema.len(),
        task,
        model_path.display()
    ))
}

fn load_and_extract(
    units: &[TranslationUnit],
    model: &ForestModel,
    config: &RunConfig,
) -> Result<Vec<crate::model::FeatureVector>, CliError> {
    let ctx = config.build_context(&model.schema)?;
    init_parallelism(config);
    let wrapped: Vec<LabeledUnit> = units
        .iter()
        .map(|u| LabeledUnit { unit: u.clone(), label: crate::model::Label::Correct })
        .collect();
    Ok(eval::extract_matrix(&wrapped, &ctx, &model.schema)?)
}

/// Per-unit class and probability TSV, row order preserved.
pub fn cmd_predict(
    input: &Path,
    model_path: &Path,
    output: &Path,
    labeled: bool,
    config: &RunConfig,
) -> Result<(), CliError> {
    let model = forest::load_model(model_path)?;
    let units: Vec<TranslationUnit> = if labeled {
        read_labeled(input, config.read_mode())?.into_iter().map(|lu| lu.unit).collect()
    } else {
        read_units(input, config.read_mode(), None, None)?
    };
    let matrix = load_and_extract(&units, &model, config)?;
    let mut out = String::new();
    out.push_str("id\tpredicted");
    for c in &model.class_ids {
        out.push_str(&format!("\tp_{c}"));
    }
    out.push('\n');
    for (unit, vector) in units.iter().zip(&matrix) {
        let (class, probs) = forest::predict(&model, vector)?;
        out.push_str(&format!("{}\t{}", unit.id, class));
        for &(_, p) in &probs {
            out.push_str(&format!("\t{p}"));
        }
        out.push('\n');
    }
    atomic_write(output, out.as_bytes())?;
    Ok(())
}

pub fn cmd_evaluate(
    input: &Path,
    model_path: &Path,
    report_out: Option<&Path>,
    config: &RunConfig,
) -> Result<String, CliError> {
    let model = forest::load_model(model_path)?;
    let data = read_labeled(input, config.read_mode())?;
    let units: Vec<TranslationUnit> = data.iter().map(|lu| lu.unit.clone()).collect();
    let matrix = load_and_extract(&units, &model, config)?;
    let truth: Vec<u32> = data.iter().map(|lu| map_label(lu.label, model.task)).collect();
    let predicted: Vec<u32> = matrix
        .iter()
        .map(|v| forest::predict(&model, v).map(|(c, _)| c))
        .collect::<Result<_, _>>()?;
    let report = eval::score(&truth, &predicted, &model.class_ids)?;
    if let Some(path) = report_out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        atomic_write(path, format!("{json}\n").as_bytes())?;
    }
    Ok(render_report(&report))
}

fn render_report(report: &eval::EvaluationReport) -> String {
    let mut out = String::new();
    out.push_str("class\tprecision\trecall\tf1\tsupport\n");
    for m in &report.per_class {
        out.push_str(&format!(
            "{}\t{:.4}\t{:.4}\t{:.4}\t{}\n",
            m.class, m.precision, m.recall, m.f1, m.support
        ));
    }
    out.push_str(&format!(
        "weighted\t{:.4}\t{:.4}\t{:.4}\t{}\n",
        report.weighted_precision, report.weighted_recall, report.weighted_f1, report.total
    ));
    out.push_str(&format!("correctly classified\t{}\n", report.correctly_classified));
    out
}

pub fn cmd_cv(
    input: &Path,
    report_out: Option<&Path>,
    config: &RunConfig,
) -> Result<String, CliError> {
    let schema = config.schema()?;
    let task = config.task_kind()?;
    let ctx = config.build_context(&schema)?;
    init_parallelism(config);
    let data = read_labeled(input, config.read_mode())?;
    let report = eval::cross_validate(
        &data,
        task,
        &schema,
        &ctx,
        config.hyperparameters(),
        &config.split_spec(),
    )?;
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    if let Some(path) = report_out {
        atomic_write(path, format!("{json}\n").as_bytes())?;
    }
    let mut out = String::new();
    out.push_str(&format!(
        "averaged over {} repetitions: P {:.4}  R {:.4}  F1 {:.4}\n",
        report.repetitions.len(),
        report.averaged_precision,
        report.averaged_recall,
        report.averaged_f1
    ));
    for rep in &report.repetitions {
        out.push_str(&format!(
            "  repetition {}: F1 {:.4}, c {} of {}\n",
            rep.repetition,
            rep.report.weighted_f1,
            rep.report.correctly_classified,
            rep.test_size
        ));
    }
    Ok(out)
}

pub fn cmd_select_features(
    input: &Path,
    candidates: Option<&[String]>,
    report_out: Option<&Path>,
    config: &RunConfig,
) -> Result<String, CliError> {
    let task = config.task_kind()?;
    let candidates: Vec<String> = match candidates {
        Some(c) if !c.is_empty() => c.to_vec(),
        _ => features::ALL_FEATURES.iter().map(|s| s.to_string()).collect(),
    };
    let schema = FeatureSchema::new(candidates.clone(), "candidates")
        .map_err(|e| CliError::Usage(e.to_string()))?;
    for n in &candidates {
        if !features::ALL_FEATURES.contains(&n.as_str()) {
            return Err(CliError::Usage(format!("unknown feature {n:?}")));
        }
    }
    let ctx = config.build_context(&schema)?;
    init_parallelism(config);
    let data = read_labeled(input, config.read_mode())?;
    let report = eval::select_features(
        &data,
        task,
        &candidates,
        &ctx,
        config.hyperparameters(),
        &config.split_spec(),
    )?;
    if let Some(path) = report_out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        atomic_write(path, format!("{json}\n").as_bytes())?;
    }
    let mut out = String::new();
    for step in &report.steps {
        out.push_str(&format!("+ {}\tF1 {:.4}\n", step.added, step.averaged_f1));
    }
    out.push_str(&format!(
        "selected: [{}] F1 {:.4}\n",
        report.selected.join(", "),
        report.selected_f1
    ));
    if let Some(f1) = report.default_nine_f1 {
        out.push_str(&format!("default nine-feature set: F1 {f1:.4}\n"));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct CleanSummary {
    pub input_count: usize,
    pub kept: usize,
    pub rejected: usize,
    pub threshold: f64,
    pub rejected_units: Vec<RejectedUnit>,
}

#[derive(Debug, Serialize)]
pub struct RejectedUnit {
    pub id: String,
    pub invalid_probability: f64,
}

/// Splits a TM into kept and rejected files by the model's invalid-class
/// probability. Requires a Binary-II model.
#[allow(clippy::too_many_arguments)]
pub fn cmd_clean(
    input: &Path,
    model_path: &Path,
    kept_path: &Path,
    rejected_path: &Path,
    summary_path: Option<&Path>,
    threshold: f64,
    source_lang: Option<&str>,
    target_lang: Option<&str>,
    config: &RunConfig,
) -> Result<String, CliError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CliError::Usage(format!("threshold {threshold} not in [0,1]")));
    }
    let model = forest::load_model(model_path)?;
    if model.task != TaskKind::BinaryII {
        return Err(CliError::Data(
            "clean requires a Binary-II model; this model is fine-grained".into(),
        ));
    }
    // TM cleaning defaults to lenient ingestion
    let mode = if config.strict { ReadMode::Strict } else { ReadMode::Lenient };
    let units = read_units(input, mode, source_lang, target_lang)?;
    let matrix = load_and_extract(&units, &model, config)?;

    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    let mut rejected_units = Vec::new();
    for (unit, vector) in units.iter().zip(&matrix) {
        let (_, probs) = forest::predict(&model, vector)?;
        let p_invalid = forest::class_probability(&probs, 1);
        let reject = p_invalid > threshold || (threshold >= 1.0 && p_invalid >= 1.0);
        if reject {
            rejected_units
                .push(RejectedUnit { id: unit.id.clone(), invalid_probability: p_invalid });
            rejected.push(unit.clone());
        } else {
            kept.push(unit.clone());
        }
    }

    atomic_write(kept_path, ingestion::render_unlabeled_tsv(&kept).as_bytes())?;
    atomic_write(rejected_path, ingestion::render_unlabeled_tsv(&rejected).as_bytes())?;

    let summary = CleanSummary {
        input_count: units.len(),
        kept: kept.len(),
        rejected: rejected.len(),
        threshold,
        rejected_units,
    };
    if let Some(path) = summary_path {
        let json = serde_json::to_string_pretty(&summary)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        atomic_write(path, format!("{json}\n").as_bytes())?;
    }
    Ok(format!(
        "{} units: kept {}, rejected {} (threshold {})\n",
        summary.input_count, summary.kept, summary.rejected, summary.threshold
    ))
}

fn init_parallelism(config: &RunConfig) {
    if let Some(workers) = config.parallelism {
        // a second call is a no-op; the first configuration wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
}
