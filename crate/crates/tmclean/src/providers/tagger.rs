//! Universal POS tagset, fine-tag mapping tables, a small built-in lexicon
//! tagger, and an adapter for external line-protocol taggers.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{PosTagger, ProviderError};
use crate::model::primary_subtag;
use crate::text::{is_punct_char, tokenize};

/// The 12 coarse Universal Tagset categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UniversalTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Conj,
    Prt,
    /// Punctuation; written "." in mapping files.
    Punct,
    /// Everything else.
    X,
}

impl UniversalTag {
    pub fn as_str(self) -> &'static str {
        match self {
            UniversalTag::Noun => "NOUN",
            UniversalTag::Verb => "VERB",
            UniversalTag::Adj => "ADJ",
            UniversalTag::Adv => "ADV",
            UniversalTag::Pron => "PRON",
            UniversalTag::Det => "DET",
            UniversalTag::Adp => "ADP",
            UniversalTag::Num => "NUM",
            UniversalTag::Conj => "CONJ",
            UniversalTag::Prt => "PRT",
            UniversalTag::Punct => ".",
            UniversalTag::X => "X",
        }
    }

    pub fn parse(s: &str) -> Option<UniversalTag> {
        Some(match s {
            "NOUN" => UniversalTag::Noun,
            "VERB" => UniversalTag::Verb,
            "ADJ" => UniversalTag::Adj,
            "ADV" => UniversalTag::Adv,
            "PRON" => UniversalTag::Pron,
            "DET" => UniversalTag::Det,
            "ADP" => UniversalTag::Adp,
            "NUM" => UniversalTag::Num,
            "CONJ" => UniversalTag::Conj,
            "PRT" => UniversalTag::Prt,
            "." | "PUNCT" => UniversalTag::Punct,
            "X" => UniversalTag::X,
            _ => return None,
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MappingError {
    #[error("line {line}: duplicate fine tag {tag}")]
    DuplicateFineTag { line: usize, tag: String },
    #[error("line {line}: unknown universal tag {tag}")]
    UnknownUniversalTag { line: usize, tag: String },
    #[error("line {line}: expected two tab-separated columns")]
    MalformedRow { line: usize },
}

/// Per-language tables from a tagger's fine tags to the Universal Tagset.
/// Fine tags missing from a table map to X.
#[derive(Debug, Clone, Default)]
pub struct TagMapping {
    tables: HashMap<String, HashMap<String, UniversalTag>>,
}

impl TagMapping {
    pub fn new() -> TagMapping {
        TagMapping::default()
    }

    /// Loads one language's two-column TSV (fine tag TAB universal tag)
    /// into the mapping.
    pub fn load_table(&mut self, lang: &str, path: impl AsRef<Path>) -> Result<(), LoadError> {
        let content = std::fs::read_to_string(path).map_err(LoadError::Io)?;
        let table = parse_table(&content).map_err(LoadError::Mapping)?;
        self.tables.insert(primary_subtag(lang).to_string(), table);
        Ok(())
    }

    pub fn insert(&mut self, lang: &str, table: HashMap<String, UniversalTag>) {
        self.tables.insert(primary_subtag(lang).to_string(), table);
    }

    pub fn map(&self, lang: &str, fine: &str) -> Option<UniversalTag> {
        self.tables
            .get(primary_subtag(lang))
            .map(|t| t.get(fine).copied().unwrap_or(UniversalTag::X))
    }

    pub fn supports(&self, lang: &str) -> bool {
        self.tables.contains_key(primary_subtag(lang))
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Io(std::io::Error),
    #[error(transparent)]
    Mapping(MappingError),
}

pub fn parse_table(content: &str) -> Result<HashMap<String, UniversalTag>, MappingError> {
    let mut table = HashMap::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (fine, coarse) = match (cols.next(), cols.next(), cols.next()) {
            (Some(f), Some(c), None) => (f, c),
            _ => return Err(MappingError::MalformedRow { line: line_no }),
        };
        let tag = UniversalTag::parse(coarse)
            .ok_or(MappingError::UnknownUniversalTag { line: line_no, tag: coarse.to_string() })?;
        if table.insert(fine.to_string(), tag).is_some() {
            return Err(MappingError::DuplicateFineTag { line: line_no, tag: fine.to_string() });
        }
    }
    Ok(table)
}

struct Lexicon {
    words: HashMap<&'static str, UniversalTag>,
    /// Suffixes stripped before a second lexicon lookup.
    strip_suffixes: &'static [&'static str],
    /// Suffix-based fallback tags, checked longest-first.
    suffix_tags: &'static [(&'static str, UniversalTag)],
    /// German capitalizes nouns.
    capitalized_is_noun: bool,
}

fn entries(pairs: &[(&'static str, UniversalTag)]) -> HashMap<&'static str, UniversalTag> {
    pairs.iter().copied().collect()
}

use UniversalTag::{Adj, Adp, Adv, Conj, Det, Noun, Pron, Prt, Verb};

fn english_lexicon() -> Lexicon {
    Lexicon {
        words: entries(&[
            ("the", Det), ("a", Det), ("an", Det), ("this", Det), ("that", Det),
            ("these", Det), ("those", Det), ("some", Det), ("any", Det), ("no", Det),
            ("every", Det), ("each", Det),
            ("i", Pron), ("you", Pron), ("he", Pron), ("she", Pron), ("it", Pron),
            ("we", Pron), ("they", Pron), ("me", Pron), ("him", Pron), ("her", Pron),
            ("us", Pron), ("them", Pron), ("who", Pron), ("what", Pron), ("which", Pron),
            ("my", Pron), ("your", Pron), ("his", Pron), ("its", Pron), ("our", Pron),
            ("their", Pron),
            ("in", Adp), ("on", Adp), ("at", Adp), ("by", Adp), ("with", Adp),
            ("from", Adp), ("of", Adp), ("for", Adp), ("into", Adp), ("over", Adp),
            ("under", Adp), ("between", Adp), ("through", Adp), ("after", Adp),
            ("before", Adp), ("about", Adp),
            ("and", Conj), ("or", Conj), ("but", Conj), ("because", Conj),
            ("while", Conj), ("if", Conj), ("when", Conj), ("although", Conj),
            ("to", Prt), ("not", Prt),
            ("be", Verb), ("is", Verb), ("are", Verb), ("was", Verb), ("were", Verb),
            ("been", Verb), ("have", Verb), ("has", Verb), ("had", Verb), ("do", Verb),
            ("does", Verb), ("did", Verb), ("will", Verb), ("would", Verb),
            ("can", Verb), ("could", Verb), ("should", Verb), ("may", Verb),
            ("go", Verb), ("went", Verb), ("come", Verb), ("came", Verb),
            ("make", Verb), ("made", Verb), ("take", Verb), ("took", Verb),
            ("see", Verb), ("saw", Verb), ("know", Verb), ("knew", Verb),
            ("walk", Verb), ("talk", Verb), ("sleep", Verb), ("run", Verb),
            ("open", Verb), ("close", Verb), ("use", Verb), ("select", Verb),
            ("click", Verb), ("save", Verb), ("delete", Verb), ("sit", Verb),
            ("sat", Verb), ("say", Verb), ("said", Verb),
            ("very", Adv), ("also", Adv), ("now", Adv), ("then", Adv), ("here", Adv),
            ("there", Adv), ("always", Adv), ("never", Adv), ("often", Adv),
            ("again", Adv), ("still", Adv), ("only", Adv),
            ("good", Adj), ("bad", Adj), ("new", Adj), ("old", Adj), ("small", Adj),
            ("large", Adj), ("long", Adj), ("short", Adj), ("high", Adj), ("low", Adj),
            ("red", Adj), ("green", Adj), ("blue", Adj), ("other", Adj), ("same", Adj),
            ("first", Adj), ("last", Adj),
            ("cat", Noun), ("dog", Noun), ("house", Noun), ("man", Noun),
            ("woman", Noun), ("child", Noun), ("water", Noun), ("file", Noun),
            ("time", Noun), ("day", Noun), ("city", Noun), ("town", Noun),
        ]),
        strip_suffixes: &["ing", "ed", "es", "s"],
        suffix_tags: &[("ly", Adv), ("tion", Noun), ("ness", Noun), ("ment", Noun), ("ing", Verb)],
        capitalized_is_noun: false,
    }
}

fn german_lexicon() -> Lexicon {
    Lexicon {
        words: entries(&[
            ("der", Det), ("die", Det), ("das", Det), ("ein", Det), ("eine", Det),
            ("einen", Det), ("einem", Det), ("einer", Det), ("dem", Det), ("den", Det),
            ("des", Det), ("kein", Det), ("jeder", Det), ("jede", Det), ("alle", Det),
            ("ich", Pron), ("du", Pron), ("er", Pron), ("sie", Pron), ("es", Pron),
            ("wir", Pron), ("ihr", Pron), ("mich", Pron), ("dich", Pron), ("ihn", Pron),
            ("uns", Pron), ("euch", Pron), ("wer", Pron), ("was", Pron),
            ("mein", Pron), ("dein", Pron), ("sein", Pron), ("unser", Pron),
            ("in", Adp), ("an", Adp), ("auf", Adp), ("bei", Adp), ("mit", Adp),
            ("von", Adp), ("aus", Adp), ("nach", Adp), ("zu", Adp), ("für", Adp),
            ("über", Adp), ("unter", Adp), ("zwischen", Adp), ("durch", Adp),
            ("vor", Adp), ("um", Adp),
            ("und", Conj), ("oder", Conj), ("aber", Conj), ("weil", Conj),
            ("während", Conj), ("wenn", Conj), ("dass", Conj), ("denn", Conj),
            ("nicht", Prt), ("ja", Prt), ("doch", Prt),
            ("sein", Verb), ("ist", Verb), ("sind", Verb), ("war", Verb),
            ("waren", Verb), ("bin", Verb), ("bist", Verb), ("haben", Verb),
            ("hat", Verb), ("hatte", Verb), ("hatten", Verb), ("werden", Verb),
            ("wird", Verb), ("wurde", Verb), ("kann", Verb), ("können", Verb),
            ("muss", Verb), ("soll", Verb), ("will", Verb), ("gehen", Verb),
            ("ging", Verb), ("kommen", Verb), ("kam", Verb), ("machen", Verb),
            ("sehen", Verb), ("sah", Verb), ("wissen", Verb), ("sagen", Verb),
            ("sagte", Verb), ("öffnen", Verb), ("schließen", Verb), ("speichern", Verb),
            ("löschen", Verb), ("wählen", Verb), ("schläft", Verb),
            ("sehr", Adv), ("auch", Adv), ("jetzt", Adv), ("dann", Adv),
            ("hier", Adv), ("dort", Adv), ("immer", Adv), ("nie", Adv), ("oft", Adv),
            ("wieder", Adv), ("noch", Adv), ("nur", Adv), ("schon", Adv),
            ("gut", Adj), ("schlecht", Adj), ("neu", Adj), ("alt", Adj),
            ("klein", Adj), ("groß", Adj), ("lang", Adj), ("kurz", Adj),
            ("hoch", Adj), ("rot", Adj), ("grün", Adj), ("blau", Adj),
            ("andere", Adj), ("gleich", Adj), ("erste", Adj), ("letzte", Adj),
        ]),
        strip_suffixes: &["en", "st", "t", "e"],
        suffix_tags: &[("ung", Noun), ("heit", Noun), ("keit", Noun), ("lich", Adj), ("isch", Adj)],
        capitalized_is_noun: true,
    }
}

fn spanish_lexicon() -> Lexicon {
    Lexicon {
        words: entries(&[
            ("el", Det), ("la", Det), ("los", Det), ("las", Det), ("un", Det),
            ("una", Det), ("unos", Det), ("unas", Det), ("este", Det), ("esta", Det),
            ("ese", Det), ("esa", Det), ("cada", Det), ("todo", Det), ("toda", Det),
            ("yo", Pron), ("tú", Pron), ("él", Pron), ("ella", Pron), ("usted", Pron),
            ("nosotros", Pron), ("ellos", Pron), ("ellas", Pron), ("me", Pron),
            ("te", Pron), ("se", Pron), ("lo", Pron), ("le", Pron), ("nos", Pron),
            ("que", Pron), ("quien", Pron), ("mi", Pron), ("tu", Pron), ("su", Pron),
            ("en", Adp), ("de", Adp), ("a", Adp), ("por", Adp), ("para", Adp),
            ("con", Adp), ("sin", Adp), ("sobre", Adp), ("entre", Adp),
            ("desde", Adp), ("hasta", Adp), ("hacia", Adp), ("bajo", Adp),
            ("y", Conj), ("o", Conj), ("pero", Conj), ("porque", Conj),
            ("mientras", Conj), ("si", Conj), ("cuando", Conj), ("aunque", Conj),
            ("no", Prt), ("sí", Prt),
            ("ser", Verb), ("es", Verb), ("son", Verb), ("era", Verb), ("eran", Verb),
            ("fue", Verb), ("estar", Verb), ("está", Verb), ("están", Verb),
            ("estaba", Verb), ("haber", Verb), ("hay", Verb), ("había", Verb),
            ("ha", Verb), ("han", Verb), ("tener", Verb), ("tiene", Verb),
            ("hacer", Verb), ("hace", Verb), ("ir", Verb), ("va", Verb),
            ("iba", Verb), ("ver", Verb), ("ve", Verb), ("saber", Verb),
            ("puede", Verb), ("debe", Verb), ("abrir", Verb), ("cerrar", Verb),
            ("guardar", Verb), ("borrar", Verb), ("decir", Verb), ("dice", Verb),
            ("muy", Adv), ("también", Adv), ("ahora", Adv), ("entonces", Adv),
            ("aquí", Adv), ("allí", Adv), ("siempre", Adv), ("nunca", Adv),
            ("todavía", Adv), ("solo", Adv), ("ya", Adv), ("más", Adv),
            ("bueno", Adj), ("malo", Adj), ("nuevo", Adj), ("viejo", Adj),
            ("pequeño", Adj), ("grande", Adj), ("largo", Adj), ("corto", Adj),
            ("alto", Adj), ("rojo", Adj), ("verde", Adj), ("azul", Adj),
            ("otro", Adj), ("mismo", Adj), ("primero", Adj), ("último", Adj),
        ]),
        strip_suffixes: &["es", "s", "a", "o"],
        suffix_tags: &[("mente", Adv), ("ción", Noun), ("dad", Noun), ("ando", Verb), ("iendo", Verb)],
        capitalized_is_noun: false,
    }
}

fn italian_lexicon() -> Lexicon {
    Lexicon {
        words: entries(&[
            ("il", Det), ("lo", Det), ("la", Det), ("i", Det), ("gli", Det),
            ("le", Det), ("un", Det), ("uno", Det), ("una", Det), ("questo", Det),
            ("questa", Det), ("quel", Det), ("quella", Det), ("ogni", Det),
            ("io", Pron), ("tu", Pron), ("lui", Pron), ("lei", Pron), ("noi", Pron),
            ("voi", Pron), ("loro", Pron), ("mi", Pron), ("ti", Pron), ("si", Pron),
            ("ci", Pron), ("che", Pron), ("chi", Pron), ("mio", Pron), ("tuo", Pron),
            ("suo", Pron),
            ("in", Adp), ("di", Adp), ("a", Adp), ("da", Adp), ("per", Adp),
            ("con", Adp), ("su", Adp), ("tra", Adp), ("fra", Adp), ("senza", Adp),
            ("sotto", Adp), ("sopra", Adp), ("verso", Adp), ("del", Adp),
            ("della", Adp), ("nel", Adp), ("alla", Adp), ("dal", Adp),
            ("e", Conj), ("o", Conj), ("ma", Conj), ("perché", Conj),
            ("mentre", Conj), ("se", Conj), ("quando", Conj), ("anche", Conj),
            ("non", Prt), ("sì", Prt),
            ("essere", Verb), ("è", Verb), ("sono", Verb), ("era", Verb),
            ("erano", Verb), ("fu", Verb), ("stare", Verb), ("sta", Verb),
            ("stanno", Verb), ("avere", Verb), ("ha", Verb), ("hanno", Verb),
            ("aveva", Verb), ("fare", Verb), ("fa", Verb), ("andare", Verb),
            ("va", Verb), ("andava", Verb), ("vedere", Verb), ("vede", Verb),
            ("sapere", Verb), ("può", Verb), ("deve", Verb), ("aprire", Verb),
            ("chiudere", Verb), ("salvare", Verb), ("dire", Verb), ("dice", Verb),
            ("molto", Adv), ("ora", Adv), ("poi", Adv), ("qui", Adv), ("lì", Adv),
            ("sempre", Adv), ("mai", Adv), ("spesso", Adv), ("ancora", Adv),
            ("già", Adv), ("più", Adv),
            ("buono", Adj), ("cattivo", Adj), ("nuovo", Adj), ("vecchio", Adj),
            ("piccolo", Adj), ("grande", Adj), ("lungo", Adj), ("corto", Adj),
            ("alto", Adj), ("rosso", Adj), ("verde", Adj), ("blu", Adj),
            ("altro", Adj), ("stesso", Adj), ("primo", Adj), ("ultimo", Adj),
        ]),
        strip_suffixes: &["i", "e", "a", "o"],
        suffix_tags: &[("mente", Adv), ("zione", Noun), ("ando", Verb), ("endo", Verb)],
        capitalized_is_noun: false,
    }
}

/// Closed-class lexicons plus suffix heuristics, defaulting to NOUN. A
/// desk-scale stand-in for a real tagger.
pub struct LexiconPosTagger {
    lexicons: HashMap<&'static str, Lexicon>,
}

impl Default for LexiconPosTagger {
    fn default() -> Self {
        Self::new()
    }
}

impl LexiconPosTagger {
    pub fn new() -> LexiconPosTagger {
        let mut lexicons = HashMap::new();
        lexicons.insert("en", english_lexicon());
        lexicons.insert("de", german_lexicon());
        lexicons.insert("es", spanish_lexicon());
        lexicons.insert("it", italian_lexicon());
        LexiconPosTagger { lexicons }
    }

    fn tag_token(lex: &Lexicon, token: &str) -> UniversalTag {
        if token.chars().all(is_punct_char) {
            return UniversalTag::Punct;
        }
        if token.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',')
            && token.chars().any(|c| c.is_ascii_digit())
        {
            return UniversalTag::Num;
        }
        let lower = token.to_lowercase();
        if let Some(&tag) = lex.words.get(lower.as_str()) {
            return tag;
        }
        for suffix in lex.strip_suffixes {
            if let Some(stem) = lower.strip_suffix(suffix) {
                if let Some(&tag) = lex.words.get(stem) {
                    return tag;
                }
            }
        }
        for (suffix, tag) in lex.suffix_tags {
            if lower.ends_with(suffix) {
                return *tag;
            }
        }
        if lex.capitalized_is_noun && token.chars().next().is_some_and(|c| c.is_uppercase()) {
            return UniversalTag::Noun;
        }
        UniversalTag::Noun
    }
}

impl PosTagger for LexiconPosTagger {
    fn id(&self) -> String {
        "lexicon-tagger:v1".to_string()
    }

    fn tag_pos(
        &self,
        text: &str,
        lang: &str,
    ) -> Result<Vec<(String, UniversalTag)>, ProviderError> {
        let lex = self
            .lexicons
            .get(primary_subtag(lang))
            .ok_or_else(|| ProviderError::UnsupportedLanguage(lang.to_string()))?;
        Ok(tokenize(text)
            .into_iter()
            .map(|t| {
                let tag = Self::tag_token(lex, &t);
                (t, tag)
            })
            .collect())
    }
}

/// Runs an external tagger per call: newline-delimited tokens on stdin,
/// token TAB fine-tag lines on stdout, sentences separated by blank lines.
/// Fine tags are mapped through the configured TagMapping.
pub struct ExternalTaggerAdapter {
    command: String,
    args: Vec<String>,
    mapping: TagMapping,
}

impl ExternalTaggerAdapter {
    pub fn new(command: impl Into<String>, args: Vec<String>, mapping: TagMapping) -> Self {
        ExternalTaggerAdapter { command: command.into(), args, mapping }
    }
}

impl PosTagger for ExternalTaggerAdapter {
    fn id(&self) -> String {
        format!("external-tagger:{}", self.command)
    }

    fn tag_pos(
        &self,
        text: &str,
        lang: &str,
    ) -> Result<Vec<(String, UniversalTag)>, ProviderError> {
        if !self.mapping.supports(lang) {
            return Err(ProviderError::UnsupportedLanguage(lang.to_string()));
        }
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Ok(Vec::new());
        }
        let mut child = Command::new(&self.command)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| ProviderError::Unavailable(format!("{}: {e}", self.command)))?;
        {
            let stdin = child.stdin.as_mut().unwrap();
            for t in &tokens {
                writeln!(stdin, "{t}")
                    .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
            }
            writeln!(stdin).map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        }
        let output = child
            .wait_with_output()
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        if !output.status.success() {
            return Err(ProviderError::Unavailable(format!(
                "{} exited with {}",
                self.command, output.status
            )));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let mut tagged = Vec::new();
        for line in stdout.lines() {
            if line.is_empty() {
                break;
            }
            let mut cols = line.split('\t');
            let token = cols.next().unwrap_or_default().to_string();
            let fine = cols.next().unwrap_or_default();
            let tag = self.mapping.map(lang, fine).unwrap_or(UniversalTag::X);
            tagged.push((token, tag));
        }
        if tagged.len() != tokens.len() {
            return Err(ProviderError::Unavailable(format!(
                "external tagger returned {} tags for {} tokens",
                tagged.len(),
                tokens.len()
            )));
        }
        Ok(tagged)
    }
}
