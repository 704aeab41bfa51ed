//! Character-trigram language identification with rank-order out-of-place
//! distance (Cavnar & Trenkle style).

use std::collections::HashMap;
use std::path::Path;

use super::{LanguageGuess, LanguageIdentifier, ProviderError};
use crate::model::primary_subtag;

pub const PROFILE_SIZE: usize = 300;
const MIN_TEXT_CHARS: usize = 20;

/// Ranked list of a language's most frequent character trigrams. Tokens are
/// padded with '_' sentinels before trigram extraction.
#[derive(Debug, Clone)]
pub struct LanguageProfile {
    pub lang: String,
    ngrams: Vec<String>,
    rank: HashMap<String, usize>,
}

fn trigrams(text: &str) -> Vec<String> {
    let mut grams = Vec::new();
    for token in text.split_whitespace() {
        let padded: Vec<char> = std::iter::once('_')
            .chain(token.to_lowercase().chars())
            .chain(std::iter::once('_'))
            .collect();
        for w in padded.windows(3) {
            grams.push(w.iter().collect());
        }
    }
    grams
}

/// Frequency-ranked trigram list, ties broken lexicographically, truncated
/// to `k` entries.
fn ranked_trigrams(text: &str, k: usize) -> Vec<String> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for g in trigrams(text) {
        *counts.entry(g).or_insert(0) += 1;
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked.into_iter().map(|(g, _)| g).collect()
}

impl LanguageProfile {
    pub fn from_text(lang: impl Into<String>, text: &str) -> LanguageProfile {
        Self::from_ngrams(lang, ranked_trigrams(text, PROFILE_SIZE))
    }

    pub fn from_ngrams(lang: impl Into<String>, ngrams: Vec<String>) -> LanguageProfile {
        let rank = ngrams.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        LanguageProfile { lang: lang.into(), ngrams, rank }
    }

    /// Reads a profile file: rank-ordered n-grams, one per line.
    pub fn from_file(lang: &str, path: impl AsRef<Path>) -> std::io::Result<LanguageProfile> {
        let content = std::fs::read_to_string(path)?;
        let ngrams = content.lines().filter(|l| !l.is_empty()).map(str::to_string).collect();
        Ok(LanguageProfile::from_ngrams(lang, ngrams))
    }

    pub fn to_file(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.ngrams.join("\n") + "\n")
    }

    pub fn len(&self) -> usize {
        self.ngrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ngrams.is_empty()
    }

    /// Out-of-place distance from a text's ranked trigram list. Trigrams
    /// missing from the profile cost the maximum penalty.
    pub fn distance(&self, text_ngrams: &[String]) -> u64 {
        let max_penalty = self.ngrams.len().max(1);
        text_ngrams
            .iter()
            .enumerate()
            .map(|(i, g)| match self.rank.get(g) {
                Some(&r) => (i as i64 - r as i64).unsigned_abs(),
                None => max_penalty as u64,
            })
            .sum()
    }
}

pub struct CavnarTrenkleIdentifier {
    profiles: Vec<LanguageProfile>,
}

impl CavnarTrenkleIdentifier {
    pub fn new(profiles: Vec<LanguageProfile>) -> CavnarTrenkleIdentifier {
        CavnarTrenkleIdentifier { profiles }
    }

    /// Identifier over the bundled seed corpora (en, de, es, it).
    pub fn builtin() -> CavnarTrenkleIdentifier {
        let seeds = [
            ("en", include_str!("../../resources/seed/en.txt")),
            ("de", include_str!("../../resources/seed/de.txt")),
            ("es", include_str!("../../resources/seed/es.txt")),
            ("it", include_str!("../../resources/seed/it.txt")),
        ];
        CavnarTrenkleIdentifier::new(
            seeds.iter().map(|(l, t)| LanguageProfile::from_text(*l, t)).collect(),
        )
    }

    /// Loads one profile per `<lang>.profile` file in a directory.
    pub fn from_dir(dir: impl AsRef<Path>) -> std::io::Result<CavnarTrenkleIdentifier> {
        let mut profiles = Vec::new();
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "profile"))
            .collect();
        paths.sort();
        for path in paths {
            let lang = path.file_stem().unwrap().to_string_lossy().to_string();
            profiles.push(LanguageProfile::from_file(&lang, &path)?);
        }
        Ok(CavnarTrenkleIdentifier::new(profiles))
    }

    pub fn has_profile(&self, lang: &str) -> bool {
        self.profiles.iter().any(|p| p.lang == primary_subtag(lang))
    }
}

impl LanguageIdentifier for CavnarTrenkleIdentifier {
    fn id(&self) -> String {
        let langs: Vec<&str> = self.profiles.iter().map(|p| p.lang.as_str()).collect();
        format!("cavnar-trenkle:{}", langs.join(","))
    }

    fn identify(&self, text: &str) -> Result<LanguageGuess, ProviderError> {
        if self.profiles.len() < 2 {
            return Err(ProviderError::NoProfiles);
        }
        let text_ngrams = ranked_trigrams(text, PROFILE_SIZE);
        let non_space = text.chars().filter(|c| !c.is_whitespace()).count();
        let mut best: Option<(&LanguageProfile, u64)> = None;
        for p in &self.profiles {
            let d = p.distance(&text_ngrams);
            let better = match best {
                Some((_, bd)) => d < bd,
                None => true,
            };
            if better {
                best = Some((p, d));
            }
        }
        let (profile, dist) = best.unwrap();
        let max_dist = (text_ngrams.len() * profile.len().max(1)) as f64;
        let confidence = if max_dist > 0.0 { 1.0 - dist as f64 / max_dist } else { 0.0 };
        Ok(LanguageGuess {
            lang: profile.lang.clone(),
            confidence,
            too_short: non_space < MIN_TEXT_CHARS,
        })
    }
}
