//! Shared fixtures for the integration tests: a small English-German
//! glossary and a deterministic synthetic corpus generator.
//!
//! Each test binary compiles its own copy, so some items are unused in
//! some binaries.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tmclean::features::FeatureContext;
use tmclean::model::{Label, LabeledUnit, TranslationUnit};
use tmclean::providers::{
    CavnarTrenkleIdentifier, GlossaryTranslator, LexiconPosTagger, Translator,
};

/// Italian prose bundled with the language identifier, reused here as
/// wrong-language corruption material.
pub const ITALIAN_TEXT: &str = include_str!("../../resources/seed/it.txt");

/// English-German word pairs with genuinely German right-hand sides so the
/// built-in language identifier recognizes generated targets as German.
pub fn glossary_pairs() -> Vec<(&'static str, &'static str)> {
    vec![
        ("the", "die"),
        ("a", "eine"),
        ("and", "und"),
        ("or", "oder"),
        ("but", "aber"),
        ("not", "nicht"),
        ("with", "mit"),
        ("without", "ohne"),
        ("under", "unter"),
        ("over", "über"),
        ("house", "Haus"),
        ("tree", "Baum"),
        ("river", "Fluss"),
        ("bridge", "Brücke"),
        ("city", "Stadt"),
        ("village", "Dorf"),
        ("street", "Straße"),
        ("market", "Markt"),
        ("bread", "Brot"),
        ("cheese", "Käse"),
        ("water", "Wasser"),
        ("light", "Licht"),
        ("morning", "Morgen"),
        ("evening", "Abend"),
        ("night", "Nacht"),
        ("day", "Tag"),
        ("year", "Jahr"),
        ("time", "Zeit"),
        ("people", "Leute"),
        ("child", "Kind"),
        ("children", "Kinder"),
        ("school", "Schule"),
        ("work", "Arbeit"),
        ("office", "Büro"),
        ("shop", "Laden"),
        ("corner", "Ecke"),
        ("door", "Tür"),
        ("window", "Fenster"),
        ("roof", "Dach"),
        ("garden", "Garten"),
        ("stone", "Stein"),
        ("rain", "Regen"),
        ("cloud", "Wolke"),
        ("sun", "Sonne"),
        ("weather", "Wetter"),
        ("autumn", "Herbst"),
        ("winter", "Winter"),
        ("spring", "Frühling"),
        ("summer", "Sommer"),
        ("boat", "Boot"),
        ("coast", "Küste"),
        ("fisherman", "Fischer"),
        ("goods", "Waren"),
        ("price", "Preis"),
        ("coffee", "Kaffee"),
        ("table", "Tisch"),
        ("chair", "Stuhl"),
        ("book", "Buch"),
        ("letter", "Brief"),
        ("word", "Wort"),
        ("language", "Sprache"),
        ("question", "Frage"),
        ("answer", "Antwort"),
        ("machine", "Maschine"),
        ("engine", "Motor"),
        ("tool", "Werkzeug"),
        ("screw", "Schraube"),
        ("wheel", "Rad"),
        ("model", "Modell"),
        ("drawing", "Zeichnung"),
        ("surface", "Oberfläche"),
        ("layer", "Schicht"),
        ("file", "Datei"),
        ("folder", "Ordner"),
        ("settings", "Einstellungen"),
        ("menu", "Menü"),
        ("button", "Schaltfläche"),
        ("error", "Fehler"),
        ("warning", "Warnung"),
        ("message", "Nachricht"),
        ("user", "Benutzer"),
        ("name", "Name"),
        ("number", "Nummer"),
        ("value", "Wert"),
        ("list", "Liste"),
        ("new", "neue"),
        ("old", "alte"),
        ("small", "kleine"),
        ("large", "große"),
        ("wide", "breite"),
        ("narrow", "schmale"),
        ("fresh", "frische"),
        ("slow", "langsame"),
        ("fast", "schnelle"),
        ("good", "gute"),
        ("bad", "schlechte"),
        ("open", "öffnen"),
        ("close", "schließen"),
        ("save", "speichern"),
        ("delete", "löschen"),
        ("select", "wählen"),
        ("change", "ändern"),
        ("show", "zeigen"),
        ("hide", "verbergen"),
        ("create", "erstellen"),
        ("remove", "entfernen"),
        ("buy", "kaufen"),
        ("sell", "verkaufen"),
        ("carry", "tragen"),
        ("bring", "bringen"),
        ("see", "sehen"),
        ("hear", "hören"),
        ("speak", "sprechen"),
        ("write", "schreiben"),
        ("read", "lesen"),
        ("wait", "warten"),
        ("walk", "gehen"),
        ("stand", "stehen"),
        ("sit", "sitzen"),
        ("live", "wohnen"),
        ("remember", "erinnern"),
        ("forget", "vergessen"),
        ("always", "immer"),
        ("never", "niemals"),
        ("often", "oft"),
        ("again", "wieder"),
        ("here", "hier"),
        ("there", "dort"),
        ("today", "heute"),
        ("tomorrow", "morgen"),
        ("yesterday", "gestern"),
        ("between", "zwischen"),
        ("against", "gegen"),
        ("through", "durch"),
        ("because", "weil"),
        ("early", "früh"),
        ("late", "spät"),
        ("quiet", "ruhige"),
        ("loud", "laute"),
        ("dark", "dunkle"),
        ("bright", "helle"),
    ]
}

pub fn write_glossary_tsv(path: &Path) {
    let mut out = String::new();
    for (src, tgt) in glossary_pairs() {
        out.push_str(&format!("{src}\t{tgt}\n"));
    }
    std::fs::write(path, out).unwrap();
}

pub fn glossary_translator() -> GlossaryTranslator {
    GlossaryTranslator::new(
        "en",
        "de",
        glossary_pairs().into_iter().map(|(s, t)| (s.to_string(), t.to_string())),
    )
}

pub fn glossary_context(n_best: usize) -> FeatureContext {
    FeatureContext {
        translator: Arc::new(glossary_translator()),
        tagger: Arc::new(LexiconPosTagger::new()),
        identifier: Arc::new(CavnarTrenkleIdentifier::builtin()),
        n_best,
    }
}

pub struct SyntheticCorpus {
    pub units: Vec<LabeledUnit>,
    pub corrupted_ids: BTreeSet<String>,
}

fn italian_sentences() -> Vec<String> {
    ITALIAN_TEXT
        .split(['.', ','])
        .map(|s| s.trim())
        .filter(|s| s.split_whitespace().count() >= 4)
        .map(|s| format!("{s}."))
        .collect()
}

/// Builds `n` English-German units whose targets come from the glossary
/// translator, then corrupts `corrupt_fraction` of them (target swapped
/// with another corrupted unit, Italian prose, or 50% truncation) and
/// labels those class 3. Deterministic for a given seed.
pub fn synthetic_corpus(n: usize, corrupt_fraction: f64, seed: u64) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let translator = glossary_translator();
    let vocabulary: Vec<&str> = glossary_pairs().iter().map(|&(s, _)| s).collect();
    let italian = italian_sentences();

    let mut units = Vec::with_capacity(n);
    for i in 0..n {
        let len = rng.gen_range(5..=12);
        let mut words: Vec<&str> = (0..len)
            .map(|_| *vocabulary.choose(&mut rng).unwrap())
            .collect();
        // capitalized sentence start and a closing period, like real TM rows
        let source = {
            let mut s = words.remove(0).to_string();
            let mut chars = s.chars();
            s = chars
                .next()
                .map(|c| c.to_uppercase().collect::<String>() + chars.as_str())
                .unwrap_or_default();
            for w in &words {
                s.push(' ');
                s.push_str(w);
            }
            s.push('.');
            s
        };
        let request = tmclean::providers::NBestRequest::new(&source, "en", "de", 1);
        let target = translator.translate_nbest(&request).unwrap()[0].text.clone();
        // label 2: nearly correct, one trailing word dropped
        let (label, target) = if rng.gen_bool(0.2) {
            let mut toks: Vec<&str> = target.split(' ').collect();
            if toks.len() > 3 {
                toks.pop();
            }
            (Label::AlmostCorrect, format!("{}.", toks.join(" ").trim_end_matches('.')))
        } else {
            (Label::Correct, target)
        };
        units.push(LabeledUnit {
            unit: TranslationUnit {
                id: format!("syn-{i:05}"),
                source_lang: "en".to_string(),
                target_lang: "de".to_string(),
                source_text: source,
                target_text: target,
            },
            label,
        });
    }

    let n_corrupt = (n as f64 * corrupt_fraction).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let victims: Vec<usize> = order.into_iter().take(n_corrupt).collect();
    let mut corrupted_ids = BTreeSet::new();
    for (k, &i) in victims.iter().enumerate() {
        let unit = &mut units[i];
        match k % 3 {
            // swapped target: another corrupted unit's original target
            0 => {
                let j = victims[(k + 1) % victims.len()];
                if j != i {
                    let other = units[j].unit.target_text.clone();
                    units[i].unit.target_text = other;
                } else {
                    units[i].unit.target_text = "Die Wolke steht.".to_string();
                }
            }
            // wrong language: Italian prose
            1 => {
                unit.unit.target_text = italian[k % italian.len()].clone();
            }
            // truncation to half the characters
            _ => {
                let chars: Vec<char> = unit.unit.target_text.chars().collect();
                let keep = (chars.len() / 2).max(1);
                unit.unit.target_text = chars[..keep].iter().collect();
            }
        }
        units[i].label = Label::Incorrect;
        corrupted_ids.insert(units[i].unit.id.clone());
    }

    SyntheticCorpus { units, corrupted_ids }
}
