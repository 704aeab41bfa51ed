//! Provider contracts for machine translation, POS tagging, and language
//! identification, plus deterministic built-in implementations.

pub mod cache;
pub mod glossary;
pub mod langid;
pub mod remote;
pub mod tagger;

use thiserror::Error;

pub use cache::CachedTranslator;
pub use glossary::GlossaryTranslator;
pub use langid::{CavnarTrenkleIdentifier, LanguageProfile};
pub use remote::RemoteMtProvider;
pub use tagger::{ExternalTaggerAdapter, LexiconPosTagger, TagMapping, UniversalTag};

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    #[error("unsupported language pair {0}-{1}")]
    UnsupportedPair(String, String),
    #[error("unsupported language {0}")]
    UnsupportedLanguage(String),
    #[error("provider timeout: {0}")]
    Timeout(String),
    #[error("no language profiles loaded")]
    NoProfiles,
}

/// One MT hypothesis. Scores are provider-native; higher is better.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TranslationHypothesis {
    pub text: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NBestRequest {
    pub source_text: String,
    pub source_lang: String,
    pub target_lang: String,
    pub n: usize,
}

pub const DEFAULT_N_BEST: usize = 20;

impl NBestRequest {
    pub fn new(
        source_text: impl Into<String>,
        source_lang: impl Into<String>,
        target_lang: impl Into<String>,
        n: usize,
    ) -> NBestRequest {
        assert!(n >= 1, "n-best size must be at least 1");
        NBestRequest {
            source_text: source_text.into(),
            source_lang: source_lang.into(),
            target_lang: target_lang.into(),
            n,
        }
    }
}

/// Result of language identification. Texts under 20 non-space characters
/// are flagged rather than rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageGuess {
    pub lang: String,
    pub confidence: f64,
    pub too_short: bool,
}

pub trait Translator: Send + Sync {
    /// Stable identifier used for cache keys and provider fingerprints.
    fn id(&self) -> String;

    /// Returns between 1 and request.n hypotheses, ordered by
    /// non-increasing score.
    fn translate_nbest(
        &self,
        request: &NBestRequest,
    ) -> Result<Vec<TranslationHypothesis>, ProviderError>;
}

pub trait PosTagger: Send + Sync {
    fn id(&self) -> String;

    /// One tag per token of the shared tokenizer, already mapped to the
    /// Universal Tagset.
    fn tag_pos(&self, text: &str, lang: &str)
        -> Result<Vec<(String, UniversalTag)>, ProviderError>;
}

pub trait LanguageIdentifier: Send + Sync {
    fn id(&self) -> String;

    fn identify(&self, text: &str) -> Result<LanguageGuess, ProviderError>;
}
