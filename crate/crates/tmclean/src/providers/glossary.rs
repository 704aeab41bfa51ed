//! Deterministic word-by-word glossary translator. Stands in for a real MT
//! engine so feature math and end-to-end runs are reproducible.

use std::collections::HashMap;
use std::path::Path;

use super::{NBestRequest, ProviderError, TranslationHypothesis, Translator};
use crate::text::{is_punct_char, tokenize};

/// Word-by-word dictionary substitution with identity fallback. Entries may
/// be 1-to-many; the alternatives populate n-best variants via cartesian
/// expansion capped at the requested n.
pub struct GlossaryTranslator {
    source_lang: String,
    target_lang: String,
    entries: HashMap<String, Vec<String>>,
    id: String,
}

impl GlossaryTranslator {
    pub fn new(
        source_lang: impl Into<String>,
        target_lang: impl Into<String>,
        pairs: impl IntoIterator<Item = (String, String)>,
    ) -> GlossaryTranslator {
        let mut entries: HashMap<String, Vec<String>> = HashMap::new();
        for (src, tgt) in pairs {
            let alts = entries.entry(src.to_lowercase()).or_default();
            if !alts.contains(&tgt) {
                alts.push(tgt);
            }
        }
        let source_lang = source_lang.into();
        let target_lang = target_lang.into();
        let id = format!("glossary:{source_lang}-{target_lang}:{}", entries.len());
        GlossaryTranslator { source_lang, target_lang, entries, id }
    }

    /// Loads a two-or-more-column TSV: source word, then one or more target
    /// alternatives. '#'-initial lines are comments.
    pub fn from_tsv(
        path: impl AsRef<Path>,
        source_lang: &str,
        target_lang: &str,
    ) -> std::io::Result<GlossaryTranslator> {
        let content = std::fs::read_to_string(path)?;
        let mut pairs = Vec::new();
        for line in content.lines() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            if let Some(src) = cols.next() {
                for tgt in cols {
                    if !tgt.is_empty() {
                        pairs.push((src.to_string(), tgt.to_string()));
                    }
                }
            }
        }
        Ok(GlossaryTranslator::new(source_lang, target_lang, pairs))
    }

    /// Translation options for one token: dictionary alternatives, or the
    /// token itself when unknown or punctuation.
    fn options(&self, token: &str) -> Vec<String> {
        if token.chars().all(is_punct_char) {
            return vec![token.to_string()];
        }
        match self.entries.get(&token.to_lowercase()) {
            Some(alts) => alts
                .iter()
                .map(|t| match_capitalization(token, t))
                .collect(),
            None => vec![token.to_string()],
        }
    }
}

/// Carries an initial capital from the source token over to the translation.
fn match_capitalization(source: &str, translation: &str) -> String {
    let source_capitalized = source.chars().next().is_some_and(|c| c.is_uppercase());
    if !source_capitalized {
        return translation.to_string();
    }
    let mut chars = translation.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

impl Translator for GlossaryTranslator {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn translate_nbest(
        &self,
        request: &NBestRequest,
    ) -> Result<Vec<TranslationHypothesis>, ProviderError> {
        if request.source_lang != self.source_lang || request.target_lang != self.target_lang {
            return Err(ProviderError::UnsupportedPair(
                request.source_lang.clone(),
                request.target_lang.clone(),
            ));
        }
        let tokens = tokenize(&request.source_text);
        let options: Vec<Vec<String>> = tokens.iter().map(|t| self.options(t)).collect();

        // Mixed-radix counting with the last position varying fastest, so
        // hypothesis 0 takes every word's first alternative.
        let mut hypotheses = Vec::new();
        let mut indices = vec![0usize; options.len()];
        loop {
            let text: Vec<&str> = options
                .iter()
                .zip(&indices)
                .map(|(alts, &i)| alts[i].as_str())
                .collect();
            let rank = hypotheses.len();
            hypotheses.push(TranslationHypothesis {
                text: text.join(" "),
                score: 1.0 / (1.0 + rank as f64),
            });
            if hypotheses.len() >= request.n {
                break;
            }
            let mut pos = options.len();
            loop {
                if pos == 0 {
                    return Ok(hypotheses);
                }
                pos -= 1;
                indices[pos] += 1;
                if indices[pos] < options[pos].len() {
                    break;
                }
                indices[pos] = 0;
            }
        }
        Ok(hypotheses)
    }
}
