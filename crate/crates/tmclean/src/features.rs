//! Per-unit feature computation and vector assembly. All values are finite
//! reals; boolean features are encoded as 0.0/1.0.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::metrics::{cfs, cosine_counts, coverage, sentence_bleu};
use crate::model::{FeatureSchema, FeatureVector, TranslationUnit};
use crate::providers::{
    LanguageIdentifier, NBestRequest, PosTagger, ProviderError, TranslationHypothesis, Translator,
    UniversalTag,
};
use crate::text::{char_len, is_punct_char, normalize_whitespace, tokenize, word_tokens};

/// Every feature this module can compute, in a stable order.
pub const ALL_FEATURES: [&str; 14] = [
    "ratio_words",
    "ratio_chars",
    "pos_sim_all",
    "pos_sim_some",
    "pos_exact",
    "language_detection",
    "lang_diff",
    "mt_cfs",
    "mt_bleu",
    "mt_coverage",
    "bisegment_similarity",
    "cg_score",
    "only_capletters_dif",
    "punctuation_similarity",
];

const MT_FEATURES: [&str; 4] = ["mt_cfs", "mt_bleu", "mt_coverage", "bisegment_similarity"];

/// Providers and knobs shared by all feature computations.
#[derive(Clone)]
pub struct FeatureContext {
    pub translator: Arc<dyn Translator>,
    pub tagger: Arc<dyn PosTagger>,
    pub identifier: Arc<dyn LanguageIdentifier>,
    pub n_best: usize,
}

impl std::fmt::Debug for FeatureContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.fingerprint())
    }
}

impl FeatureContext {
    /// Identifies the provider configuration for cache keys and reports.
    pub fn fingerprint(&self) -> String {
        format!(
            "mt={};tagger={};langid={};n={}",
            self.translator.id(),
            self.tagger.id(),
            self.identifier.id(),
            self.n_best
        )
    }
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("unit {unit_id}, feature {feature}: {source}")]
    Provider {
        unit_id: String,
        feature: &'static str,
        #[source]
        source: ProviderError,
    },
    #[error("unit {unit_id}, feature {feature}: target has no word tokens")]
    EmptyTarget { unit_id: String, feature: &'static str },
    #[error("unknown feature {0}")]
    UnknownFeature(String),
    #[error(transparent)]
    Vector(#[from] crate::model::ModelError),
}

fn provider_err<'a>(
    unit: &'a TranslationUnit,
    feature: &'static str,
) -> impl FnOnce(ProviderError) -> FeatureError + 'a {
    move |source| FeatureError::Provider { unit_id: unit.id.clone(), feature, source }
}

fn fetch_nbest(
    unit: &TranslationUnit,
    ctx: &FeatureContext,
    feature: &'static str,
) -> Result<Vec<TranslationHypothesis>, FeatureError> {
    let request = NBestRequest::new(
        normalize_whitespace(&unit.source_text),
        unit.source_lang.clone(),
        unit.target_lang.clone(),
        ctx.n_best,
    );
    ctx.translator.translate_nbest(&request).map_err(provider_err(unit, feature))
}

/// (1 + source words) / (1 + target words), punctuation tokens excluded.
pub fn ratio_words(unit: &TranslationUnit) -> f64 {
    let s = word_tokens(&unit.source_text).len();
    let t = word_tokens(&unit.target_text).len();
    (1 + s) as f64 / (1 + t) as f64
}

/// (1 + source chars) / (1 + target chars) on whitespace-normalized text.
pub fn ratio_chars(unit: &TranslationUnit) -> f64 {
    let s = char_len(&unit.source_text);
    let t = char_len(&unit.target_text);
    (1 + s) as f64 / (1 + t) as f64
}

fn tag_histogram(
    tags: &[(String, UniversalTag)],
    keep: Option<&[UniversalTag]>,
) -> HashMap<UniversalTag, u64> {
    let mut hist = HashMap::new();
    for (_, tag) in tags {
        if keep.is_none_or(|k| k.contains(tag)) {
            *hist.entry(*tag).or_insert(0) += 1;
        }
    }
    hist
}

type TaggedTokens = Vec<(String, UniversalTag)>;

fn tag_both(
    unit: &TranslationUnit,
    ctx: &FeatureContext,
    feature: &'static str,
) -> Result<(TaggedTokens, TaggedTokens), FeatureError> {
    let src = ctx
        .tagger
        .tag_pos(&unit.source_text, &unit.source_lang)
        .map_err(provider_err(unit, feature))?;
    let tgt = ctx
        .tagger
        .tag_pos(&unit.target_text, &unit.target_lang)
        .map_err(provider_err(unit, feature))?;
    Ok((src, tgt))
}

/// Cosine over the full Universal-tag histograms of both sides.
pub fn pos_sim_all(unit: &TranslationUnit, ctx: &FeatureContext) -> Result<f64, FeatureError> {
    let (src, tgt) = tag_both(unit, ctx, "pos_sim_all")?;
    Ok(cosine_counts(&tag_histogram(&src, None), &tag_histogram(&tgt, None)))
}

/// As pos_sim_all, restricted to NOUN, VERB, ADJ, PRON.
pub fn pos_sim_some(unit: &TranslationUnit, ctx: &FeatureContext) -> Result<f64, FeatureError> {
    const KEEP: [UniversalTag; 4] =
        [UniversalTag::Noun, UniversalTag::Verb, UniversalTag::Adj, UniversalTag::Pron];
    let (src, tgt) = tag_both(unit, ctx, "pos_sim_some")?;
    Ok(cosine_counts(&tag_histogram(&src, Some(&KEEP)), &tag_histogram(&tgt, Some(&KEEP))))
}

/// 1.0 iff the full tag sequences are identical element-wise.
pub fn pos_exact(unit: &TranslationUnit, ctx: &FeatureContext) -> Result<f64, FeatureError> {
    let (src, tgt) = tag_both(unit, ctx, "pos_exact")?;
    let seq = |tags: &[(String, UniversalTag)]| tags.iter().map(|(_, t)| *t).collect::<Vec<_>>();
    Ok(if seq(&src) == seq(&tgt) { 1.0 } else { 0.0 })
}

fn detected_matches(
    ctx: &FeatureContext,
    unit: &TranslationUnit,
    text: &str,
    declared_primary: &str,
    feature: &'static str,
) -> Result<bool, FeatureError> {
    let guess = ctx.identifier.identify(text).map_err(provider_err(unit, feature))?;
    // short texts get the benefit of the doubt
    Ok(guess.too_short || guess.lang == declared_primary)
}

/// 1.0 iff the detector confirms the declared target language.
pub fn language_detection(
    unit: &TranslationUnit,
    ctx: &FeatureContext,
) -> Result<f64, FeatureError> {
    let matched = detected_matches(
        ctx,
        unit,
        &unit.target_text,
        unit.target_primary_lang(),
        "language_detection",
    )?;
    Ok(if matched { 1.0 } else { 0.0 })
}

/// Difference indicator: 1.0 iff detection mismatches the declaration on
/// source or target.
pub fn lang_diff(unit: &TranslationUnit, ctx: &FeatureContext) -> Result<f64, FeatureError> {
    let src_ok =
        detected_matches(ctx, unit, &unit.source_text, unit.source_primary_lang(), "lang_diff")?;
    let tgt_ok =
        detected_matches(ctx, unit, &unit.target_text, unit.target_primary_lang(), "lang_diff")?;
    Ok(if src_ok && tgt_ok { 0.0 } else { 1.0 })
}

fn mt_cfs_from(unit: &TranslationUnit, hypotheses: &[TranslationHypothesis]) -> f64 {
    let target = normalize_whitespace(&unit.target_text);
    hypotheses
        .iter()
        .map(|h| cfs(&h.text, &target).unwrap_or(0.0))
        .fold(0.0, f64::max)
}

fn mt_bleu_from(unit: &TranslationUnit, hypotheses: &[TranslationHypothesis]) -> f64 {
    let reference = tokenize(&unit.target_text);
    hypotheses
        .iter()
        .map(|h| sentence_bleu(&tokenize(&h.text), &reference).unwrap_or(0.0))
        .fold(0.0, f64::max)
}

fn mt_coverage_from(
    unit: &TranslationUnit,
    hypotheses: &[TranslationHypothesis],
    feature: &'static str,
) -> Result<f64, FeatureError> {
    let target = word_tokens(&unit.target_text);
    if target.is_empty() {
        return Err(FeatureError::EmptyTarget { unit_id: unit.id.clone(), feature });
    }
    let union: Vec<String> = hypotheses.iter().flat_map(|h| tokenize(&h.text)).collect();
    Ok(coverage(&target, &union).expect("target checked non-empty"))
}

fn token_counts(text: &str) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for t in tokenize(text) {
        *counts.entry(t.to_lowercase()).or_insert(0) += 1;
    }
    counts
}

fn bisegment_similarity_from(unit: &TranslationUnit, hypotheses: &[TranslationHypothesis]) -> f64 {
    match hypotheses.first() {
        Some(top) => cosine_counts(&token_counts(&top.text), &token_counts(&unit.target_text)),
        None => 0.0,
    }
}

/// Best normalized character similarity over the n-best hypotheses.
pub fn mt_cfs(unit: &TranslationUnit, ctx: &FeatureContext) -> Result<f64, FeatureError> {
    Ok(mt_cfs_from(unit, &fetch_nbest(unit, ctx, "mt_cfs")?))
}

/// Best sentence BLEU over the n-best hypotheses.
pub fn mt_bleu(unit: &TranslationUnit, ctx: &FeatureContext) -> Result<f64, FeatureError> {
    Ok(mt_bleu_from(unit, &fetch_nbest(unit, ctx, "mt_bleu")?))
}

/// Fraction of target words found anywhere in the n-best hypotheses.
pub fn mt_coverage(unit: &TranslationUnit, ctx: &FeatureContext) -> Result<f64, FeatureError> {
    mt_coverage_from(unit, &fetch_nbest(unit, ctx, "mt_coverage")?, "mt_coverage")
}

/// Cosine over token counts of the top hypothesis and the target.
pub fn bisegment_similarity(
    unit: &TranslationUnit,
    ctx: &FeatureContext,
) -> Result<f64, FeatureError> {
    Ok(bisegment_similarity_from(unit, &fetch_nbest(unit, ctx, "bisegment_similarity")?))
}

/// Length-mismatch z-score under the Gale-Church length model (expected
/// character ratio 1, per-character variance 6.8).
pub fn cg_score(unit: &TranslationUnit) -> f64 {
    let s = char_len(&unit.source_text) as f64;
    let t = char_len(&unit.target_text) as f64;
    (t - s).abs() / (6.8 * s.max(1.0)).sqrt()
}

fn all_caps_tokens(text: &str) -> HashSet<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.chars().count() >= 2 && t.chars().all(|c| c.is_alphabetic() && c.is_uppercase()))
        .collect()
}

/// 1 - Jaccard over the sets of all-caps tokens (length >= 2) on each side.
pub fn only_capletters_dif(unit: &TranslationUnit) -> f64 {
    let a = all_caps_tokens(&unit.source_text);
    let b = all_caps_tokens(&unit.target_text);
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    let intersection = a.intersection(&b).count();
    1.0 - intersection as f64 / union as f64
}

/// Cosine over punctuation-character histograms of both sides.
pub fn punctuation_similarity(unit: &TranslationUnit) -> f64 {
    let hist = |text: &str| {
        let mut h: HashMap<char, u64> = HashMap::new();
        for c in text.chars().filter(|&c| is_punct_char(c)) {
            *h.entry(c).or_insert(0) += 1;
        }
        h
    };
    cosine_counts(&hist(&unit.source_text), &hist(&unit.target_text))
}

/// Whether a schema requires any MT-backed feature.
pub fn needs_translator(schema: &FeatureSchema) -> bool {
    schema.names.iter().any(|n| MT_FEATURES.contains(&n.as_str()))
}

pub fn needs_tagger(schema: &FeatureSchema) -> bool {
    schema.names.iter().any(|n| n.starts_with("pos_"))
}

pub fn needs_identifier(schema: &FeatureSchema) -> bool {
    schema.names.iter().any(|n| n == "language_detection" || n == "lang_diff")
}

/// Computes the schema's features for one unit. A single n-best request
/// serves every MT feature of the unit.
pub fn extract_vector(
    unit: &TranslationUnit,
    ctx: &FeatureContext,
    schema: &FeatureSchema,
) -> Result<FeatureVector, FeatureError> {
    let nbest = if needs_translator(schema) {
        Some(fetch_nbest(unit, ctx, "n_best")?)
    } else {
        None
    };
    let mut values = Vec::with_capacity(schema.len());
    for name in &schema.names {
        let value = match name.as_str() {
            "ratio_words" => ratio_words(unit),
            "ratio_chars" => ratio_chars(unit),
            "pos_sim_all" => pos_sim_all(unit, ctx)?,
            "pos_sim_some" => pos_sim_some(unit, ctx)?,
            "pos_exact" => pos_exact(unit, ctx)?,
            "language_detection" => language_detection(unit, ctx)?,
            "lang_diff" => lang_diff(unit, ctx)?,
            "mt_cfs" => mt_cfs_from(unit, nbest.as_deref().unwrap()),
            "mt_bleu" => mt_bleu_from(unit, nbest.as_deref().unwrap()),
            "mt_coverage" => mt_coverage_from(unit, nbest.as_deref().unwrap(), "mt_coverage")?,
            "bisegment_similarity" => bisegment_similarity_from(unit, nbest.as_deref().unwrap()),
            "cg_score" => cg_score(unit),
            "only_capletters_dif" => only_capletters_dif(unit),
            "punctuation_similarity" => punctuation_similarity(unit),
            other => return Err(FeatureError::UnknownFeature(other.to_string())),
        };
        values.push(value);
    }
    Ok(FeatureVector::new(schema, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::{
        CavnarTrenkleIdentifier, GlossaryTranslator, LexiconPosTagger,
    };

    fn unit(source: &str, target: &str) -> TranslationUnit {
        TranslationUnit {
            id: "t1".into(),
            source_lang: "en".into(),
            target_lang: "de".into(),
            source_text: source.into(),
            target_text: target.into(),
        }
    }

    fn ctx_with(pairs: &[(&str, &str)]) -> FeatureContext {
        FeatureContext {
            translator: Arc::new(GlossaryTranslator::new(
                "en",
                "de",
                pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())),
            )),
            tagger: Arc::new(LexiconPosTagger::new()),
            identifier: Arc::new(CavnarTrenkleIdentifier::builtin()),
            n_best: 20,
        }
    }

    #[test]
    fn ratio_words_smoothing() {
        assert_eq!(ratio_words(&unit("a b c d e", "v w x y z")), 1.0);
        assert!((ratio_words(&unit("a b c", "x y")) - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(ratio_words(&unit("...", "x")), 0.5);
    }

    #[test]
    fn ratio_chars_values() {
        assert_eq!(ratio_chars(&unit("abcd", "wxyz")), 1.0);
        let long = "a".repeat(100);
        let short = "b".repeat(50);
        assert!((ratio_chars(&unit(&long, &short)) - 101.0 / 51.0).abs() < 1e-12);
        assert!((ratio_chars(&unit(&short, &long)) - 51.0 / 101.0).abs() < 1e-12);
    }

    #[test]
    fn pos_sim_all_hand_case() {
        // "the cat sleeps" vs "die Katze schläft": DET NOUN VERB both sides
        let ctx = ctx_with(&[]);
        let u = unit("the cat sleeps", "die Katze schläft");
        assert!((pos_sim_all(&u, &ctx).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pos_exact_order_matters() {
        let ctx = ctx_with(&[]);
        assert_eq!(pos_exact(&unit("the cat", "die Katze"), &ctx).unwrap(), 1.0);
        assert_eq!(pos_exact(&unit("the cat", "Katze die"), &ctx).unwrap(), 0.0);
        assert_eq!(pos_exact(&unit("the cat", "die"), &ctx).unwrap(), 0.0);
    }

    #[test]
    fn language_detection_indicator() {
        let ctx = ctx_with(&[]);
        let german = "Die alten Männer saßen vor dem Café und sprachen über das Wetter und den Fluss.";
        let english = "The old men sat outside the cafe and talked about the weather and the river.";
        assert_eq!(language_detection(&unit("x", german), &ctx).unwrap(), 1.0);
        assert_eq!(language_detection(&unit("x", english), &ctx).unwrap(), 0.0);
        // short target: benefit of the doubt
        assert_eq!(language_detection(&unit("x", "Hallo"), &ctx).unwrap(), 1.0);
    }

    #[test]
    fn lang_diff_checks_both_sides() {
        let ctx = ctx_with(&[]);
        let english = "The old men sat outside the cafe and talked about the weather.";
        let german = "Die alten Männer saßen vor dem Café und sprachen über das Wetter.";
        assert_eq!(lang_diff(&unit(english, german), &ctx).unwrap(), 0.0);
        assert_eq!(lang_diff(&unit(english, english), &ctx).unwrap(), 1.0);
        assert_eq!(lang_diff(&unit(german, english), &ctx).unwrap(), 1.0);
    }

    #[test]
    fn mt_features_on_identical_translation() {
        let ctx = ctx_with(&[("red", "rot"), ("box", "Kiste")]);
        let u = unit("red box", "rot Kiste");
        assert_eq!(mt_cfs(&u, &ctx).unwrap(), 1.0);
        assert_eq!(mt_bleu(&u, &ctx).unwrap(), 1.0);
        assert_eq!(mt_coverage(&u, &ctx).unwrap(), 1.0);
        assert_eq!(bisegment_similarity(&u, &ctx).unwrap(), 1.0);
    }

    #[test]
    fn mt_cfs_takes_the_best_hypothesis() {
        // "box" has two alternatives; the second matches the target exactly
        let ctx = ctx_with(&[("box", "abc"), ("box", "abd")]);
        let u = unit("box", "abd");
        assert_eq!(mt_cfs(&u, &ctx).unwrap(), 1.0);
        let single = ctx_with(&[("box", "abc")]);
        assert!((mt_cfs(&u, &single).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mt_coverage_set_arithmetic() {
        let ctx = ctx_with(&[("one", "eins"), ("two", "zwei")]);
        let u = unit("one two", "eins zwei drei");
        assert!((mt_coverage(&u, &ctx).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let err = mt_coverage(&unit("one", "..."), &ctx);
        assert!(matches!(err, Err(FeatureError::EmptyTarget { .. })));
    }

    #[test]
    fn bisegment_similarity_hand_case() {
        let ctx = ctx_with(&[("x", "a"), ("y", "b")]);
        let u = unit("x y", "a c");
        assert!((bisegment_similarity(&u, &ctx).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cg_score_hand_cases() {
        assert_eq!(cg_score(&unit("abcd", "wxyz")), 0.0);
        let u = unit(&"a".repeat(100), &"b".repeat(126));
        assert!((cg_score(&u) - 26.0 / 680f64.sqrt()).abs() < 1e-9);
        let u = unit(&"a".repeat(10), &"b".repeat(80));
        assert!((cg_score(&u) - 70.0 / 68f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn only_capletters_known_cases() {
        assert_eq!(only_capletters_dif(&unit("no caps here", "auch hier nicht")), 0.0);
        assert_eq!(only_capletters_dif(&unit("API and CAD", "nur API")), 0.5);
        assert_eq!(only_capletters_dif(&unit("DWG file", "DWG Datei")), 0.0);
        // single letters do not count
        assert_eq!(only_capletters_dif(&unit("I am", "ich bin")), 0.0);
    }

    #[test]
    fn punctuation_similarity_known_cases() {
        assert!((punctuation_similarity(&unit("a, b.", "a; b.")) - 0.5).abs() < 1e-12);
        assert_eq!(punctuation_similarity(&unit("schlicht", "plain")), 1.0);
        assert_eq!(punctuation_similarity(&unit("a, b.", "x, y.")), 1.0);
    }

    #[test]
    fn extract_vector_default_schema() {
        let ctx = ctx_with(&[("red", "rot"), ("box", "Kiste")]);
        let schema = FeatureSchema::default_nine();
        let u = unit("red box", "rot Kiste");
        let v = extract_vector(&u, &ctx, &schema).unwrap();
        assert_eq!(v.values.len(), 9);
        assert_eq!(v.values[schema.index_of("mt_cfs").unwrap()], 1.0);
        assert_eq!(v.values[schema.index_of("mt_bleu").unwrap()], 1.0);
    }

    #[test]
    fn extract_vector_unknown_feature() {
        let ctx = ctx_with(&[]);
        let schema = FeatureSchema::new(vec!["bogus".into()], "v").unwrap();
        assert!(matches!(
            extract_vector(&unit("a", "b"), &ctx, &schema),
            Err(FeatureError::UnknownFeature(_))
        ));
    }

    #[test]
    fn provider_errors_carry_unit_and_feature() {
        // translator only supports en-de; the unit asks for en-fr
        let ctx = ctx_with(&[]);
        let mut u = unit("red box", "boite rouge");
        u.target_lang = "fr".into();
        let err = mt_bleu(&u, &ctx).unwrap_err();
        match err {
            FeatureError::Provider { unit_id, feature, .. } => {
                assert_eq!(unit_id, "t1");
                assert_eq!(feature, "mt_bleu");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
