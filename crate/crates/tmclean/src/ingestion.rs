//! Dataset I/O: shared-task-style TSV, a TMX subset, corpus statistics, and
//! deterministic stratified train/test splits.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{primary_subtag, Label, LabeledUnit, TranslationUnit};
use crate::seeding::derive_seed;
use crate::text::normalize_whitespace;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected {expected} tab-separated columns, found {found}")]
    MalformedRow { line: usize, expected: usize, found: usize },
    #[error("line {line}: empty {side} segment")]
    EmptySegment { line: usize, side: &'static str },
    #[error("line {line}: label {value:?} not in {{1,2,3}}")]
    BadLabel { line: usize, value: String },
    #[error("line {line}: source and target language share primary subtag {lang}")]
    SameLanguage { line: usize, lang: String },
    #[error("xml error at byte {position}: {message}")]
    Xml { position: usize, message: String },
    #[error("tu {id}: missing {lang} variant")]
    MissingVariant { id: String, lang: String },
    #[error("tu {id}: empty {lang} segment")]
    EmptyTmxSegment { id: String, lang: String },
    #[error("split would leave class {class} with no training members")]
    DegenerateSplit { class: u32 },
    #[error("repetition index {index} out of range (repetitions = {repetitions})")]
    BadRepetition { index: usize, repetitions: usize },
}

/// Strict fails on the first bad record; lenient skips it and records a
/// warning. Strict is the default for labeled training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadMode {
    Strict,
    Lenient,
}

#[derive(Debug)]
pub struct ReadOutcome<T> {
    pub records: Vec<T>,
    pub skipped: Vec<IngestError>,
}

fn escape_field(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t").replace('\n', "\\n")
}

fn unescape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

fn parse_row(line: &str, line_no: usize, has_labels: bool) -> Result<(TranslationUnit, Option<Label>), IngestError> {
    let expected = if has_labels { 6 } else { 5 };
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != expected {
        return Err(IngestError::MalformedRow { line: line_no, expected, found: cols.len() });
    }
    let source_text = unescape_field(cols[3]);
    let target_text = unescape_field(cols[4]);
    if source_text.trim().is_empty() {
        return Err(IngestError::EmptySegment { line: line_no, side: "source" });
    }
    if target_text.trim().is_empty() {
        return Err(IngestError::EmptySegment { line: line_no, side: "target" });
    }
    if primary_subtag(cols[1]) == primary_subtag(cols[2]) {
        return Err(IngestError::SameLanguage {
            line: line_no,
            lang: primary_subtag(cols[1]).to_string(),
        });
    }
    let label = if has_labels {
        let code: u32 = cols[5]
            .trim()
            .parse()
            .map_err(|_| IngestError::BadLabel { line: line_no, value: cols[5].to_string() })?;
        Some(
            Label::from_code(code)
                .ok_or(IngestError::BadLabel { line: line_no, value: cols[5].to_string() })?,
        )
    } else {
        None
    };
    let unit = TranslationUnit {
        id: cols[0].to_string(),
        source_lang: cols[1].to_string(),
        target_lang: cols[2].to_string(),
        source_text,
        target_text,
    };
    Ok((unit, label))
}

fn read_rows(
    path: impl AsRef<Path>,
    has_labels: bool,
    mode: ReadMode,
) -> Result<ReadOutcome<(TranslationUnit, Option<Label>)>, IngestError> {
    let content = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_row(line, i + 1, has_labels) {
            Ok(row) => records.push(row),
            Err(e) if mode == ReadMode::Strict => return Err(e),
            Err(e) => skipped.push(e),
        }
    }
    Ok(ReadOutcome { records, skipped })
}

/// Reads a labeled TSV: id, source_lang, target_lang, source_text,
/// target_text, label. '#'-initial lines are comments; internal tabs and
/// newlines in text fields are escaped as \t and \n.
pub fn read_labeled_tsv(
    path: impl AsRef<Path>,
    mode: ReadMode,
) -> Result<ReadOutcome<LabeledUnit>, IngestError> {
    let outcome = read_rows(path, true, mode)?;
    Ok(ReadOutcome {
        records: outcome
            .records
            .into_iter()
            .map(|(unit, label)| LabeledUnit { unit, label: label.unwrap() })
            .collect(),
        skipped: outcome.skipped,
    })
}

/// Reads an unlabeled TSV (five columns).
pub fn read_unlabeled_tsv(
    path: impl AsRef<Path>,
    mode: ReadMode,
) -> Result<ReadOutcome<TranslationUnit>, IngestError> {
    let outcome = read_rows(path, false, mode)?;
    Ok(ReadOutcome {
        records: outcome.records.into_iter().map(|(unit, _)| unit).collect(),
        skipped: outcome.skipped,
    })
}

fn unit_row(unit: &TranslationUnit) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}",
        unit.id,
        unit.source_lang,
        unit.target_lang,
        escape_field(&unit.source_text),
        escape_field(&unit.target_text)
    )
}

pub fn render_labeled_tsv(units: &[LabeledUnit]) -> String {
    let mut out = String::new();
    for lu in units {
        out.push_str(&unit_row(&lu.unit));
        out.push('\t');
        out.push_str(&lu.label.code().to_string());
        out.push('\n');
    }
    out
}

pub fn render_unlabeled_tsv(units: &[TranslationUnit]) -> String {
    let mut out = String::new();
    for unit in units {
        out.push_str(&unit_row(unit));
        out.push('\n');
    }
    out
}

pub fn write_labeled_tsv(path: impl AsRef<Path>, units: &[LabeledUnit]) -> std::io::Result<()> {
    std::fs::write(path, render_labeled_tsv(units))
}

pub fn write_unlabeled_tsv(path: impl AsRef<Path>, units: &[TranslationUnit]) -> std::io::Result<()> {
    std::fs::write(path, render_unlabeled_tsv(units))
}

/// Reads the TMX subset: tu/tuv/seg elements with xml:lang (or lang)
/// attributes. Inline markup inside seg is stripped, its text kept; the
/// result is whitespace-normalized. One unit per tu carrying both requested
/// languages; anything else is MissingVariant.
pub fn read_tmx(
    path: impl AsRef<Path>,
    source_lang: &str,
    target_lang: &str,
    mode: ReadMode,
) -> Result<ReadOutcome<TranslationUnit>, IngestError> {
    let content = std::fs::read_to_string(path)?;
    let mut reader = Reader::from_str(&content);
    reader.trim_text(false);

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut tu_index = 0usize;
    let mut current: Option<TuState> = None;
    let mut current_lang: Option<String> = None;
    let mut in_seg = false;
    let mut seg_text = String::new();

    struct TuState {
        id: String,
        variants: BTreeMap<String, String>,
    }

    loop {
        let position = reader.buffer_position();
        let event = reader.read_event().map_err(|e| IngestError::Xml {
            position,
            message: e.to_string(),
        })?;
        match event {
            Event::Start(ref e) => match e.local_name().as_ref() {
                b"tu" => {
                    tu_index += 1;
                    let mut id = format!("tu-{tu_index}");
                    for attr in e.attributes().flatten() {
                        if attr.key.as_ref() == b"tuid" {
                            id = String::from_utf8_lossy(&attr.value).to_string();
                        }
                    }
                    current = Some(TuState { id, variants: BTreeMap::new() });
                }
                b"tuv" => {
                    current_lang = None;
                    for attr in e.attributes().flatten() {
                        let key = attr.key.as_ref();
                        if key == b"xml:lang" || key == b"lang" {
                            current_lang =
                                Some(String::from_utf8_lossy(&attr.value).to_string());
                        }
                    }
                }
                b"seg" => {
                    in_seg = true;
                    seg_text.clear();
                }
                _ => {}
            },
            Event::Text(ref t) => {
                if in_seg {
                    let text = t.unescape().map_err(|e| IngestError::Xml {
                        position,
                        message: e.to_string(),
                    })?;
                    seg_text.push_str(&text);
                }
            }
            Event::Empty(_) => {
                // self-closing inline element such as <ph/>: dropped, but it
                // still separates surrounding text
                if in_seg {
                    seg_text.push(' ');
                }
            }
            Event::End(ref e) => match e.local_name().as_ref() {
                b"seg" => {
                    in_seg = false;
                    if let (Some(tu), Some(lang)) = (current.as_mut(), current_lang.as_ref()) {
                        tu.variants
                            .insert(primary_subtag(lang).to_string(), normalize_whitespace(&seg_text));
                    }
                }
                b"tu" => {
                    if let Some(tu) = current.take() {
                        match finish_tu(tu.id, &tu.variants, source_lang, target_lang) {
                            Ok(unit) => records.push(unit),
                            Err(e) if mode == ReadMode::Strict => return Err(e),
                            Err(e) => skipped.push(e),
                        }
                    }
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(ReadOutcome { records, skipped })
}

fn finish_tu(
    id: String,
    variants: &BTreeMap<String, String>,
    source_lang: &str,
    target_lang: &str,
) -> Result<TranslationUnit, IngestError> {
    let src_key = primary_subtag(source_lang);
    let tgt_key = primary_subtag(target_lang);
    let source_text = variants
        .get(src_key)
        .ok_or_else(|| IngestError::MissingVariant { id: id.clone(), lang: src_key.to_string() })?;
    let target_text = variants
        .get(tgt_key)
        .ok_or_else(|| IngestError::MissingVariant { id: id.clone(), lang: tgt_key.to_string() })?;
    if source_text.trim().is_empty() {
        return Err(IngestError::EmptyTmxSegment { id, lang: src_key.to_string() });
    }
    if target_text.trim().is_empty() {
        return Err(IngestError::EmptyTmxSegment { id, lang: tgt_key.to_string() });
    }
    Ok(TranslationUnit {
        id,
        source_lang: source_lang.to_string(),
        target_lang: target_lang.to_string(),
        source_text: source_text.clone(),
        target_text: target_text.clone(),
    })
}

/// Per-class and per-language-pair counts.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct DatasetStats {
    pub class_counts: BTreeMap<u32, usize>,
    pub total: usize,
    pub language_pairs: BTreeMap<String, usize>,
}

pub fn stats(dataset: &[LabeledUnit]) -> DatasetStats {
    let mut class_counts = BTreeMap::new();
    let mut language_pairs = BTreeMap::new();
    for lu in dataset {
        *class_counts.entry(lu.label.code()).or_insert(0) += 1;
        let pair = format!(
            "{}-{}",
            primary_subtag(&lu.unit.source_lang),
            primary_subtag(&lu.unit.target_lang)
        );
        *language_pairs.entry(pair).or_insert(0) += 1;
    }
    DatasetStats { class_counts, total: dataset.len(), language_pairs }
}

/// Repeated stratified random subsampling spec. Defaults mirror the
/// 2/3-1/3 protocol with five repetitions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub repetitions: usize,
    pub rng_seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, repetitions: usize, rng_seed: u64) -> SplitSpec {
        assert!(train_fraction > 0.0 && train_fraction < 1.0);
        assert!(repetitions >= 1);
        SplitSpec { train_fraction, repetitions, rng_seed }
    }

    pub fn default_with_seed(rng_seed: u64) -> SplitSpec {
        SplitSpec { train_fraction: 2.0 / 3.0, repetitions: 5, rng_seed }
    }
}

/// Deterministic stratified split: returns (train indices, test indices)
/// into the dataset, in ascending order. |train| = round(fraction * N) and
/// every class's train share is within one unit of the global fraction.
pub fn split_indices(
    labels: &[u32],
    spec: &SplitSpec,
    repetition_index: usize,
) -> Result<(Vec<usize>, Vec<usize>), IngestError> {
    if repetition_index >= spec.repetitions {
        return Err(IngestError::BadRepetition {
            index: repetition_index,
            repetitions: spec.repetitions,
        });
    }
    let n = labels.len();
    let target_train = (spec.train_fraction * n as f64).round() as usize;

    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }

    // Largest-remainder allocation of the train budget across classes.
    let mut alloc: Vec<(u32, usize, f64)> = by_class
        .iter()
        .map(|(&class, members)| {
            let exact = spec.train_fraction * members.len() as f64;
            (class, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut remaining = target_train.saturating_sub(alloc.iter().map(|a| a.1).sum::<usize>());
    let mut order: Vec<usize> = (0..alloc.len()).collect();
    order.sort_by(|&a, &b| {
        alloc[b].2.partial_cmp(&alloc[a].2).unwrap().then(alloc[a].0.cmp(&alloc[b].0))
    });
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        let class_size = by_class[&alloc[i].0].len();
        if alloc[i].1 < class_size {
            alloc[i].1 += 1;
            remaining -= 1;
        }
    }
    for &(class, take, _) in &alloc {
        if take == 0 {
            return Err(IngestError::DegenerateSplit { class });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, repetition_index as u64));
    let mut train = Vec::new();
    let mut test = Vec::new();
    for &class in by_class.keys() {
        let take = alloc.iter().find(|a| a.0 == class).unwrap().1;
        let mut members = by_class[&class].clone();
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..take]);
        test.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Audit dump: one line per unit id with its train/test assignment.
pub fn write_partition(
    path: impl AsRef<Path>,
    units: &[LabeledUnit],
    train: &[usize],
) -> std::io::Result<()> {
    let train_set: std::collections::HashSet<usize> = train.iter().copied().collect();
    let mut file = std::fs::File::create(path)?;
    for (i, lu) in units.iter().enumerate() {
        let side = if train_set.contains(&i) { "train" } else { "test" };
        writeln!(file, "{}\t{}", lu.unit.id, side)?;
    }
    Ok(())
}
