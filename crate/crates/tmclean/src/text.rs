//! Shared tokenizer and text normalization. Every module that counts words,
//! characters, or punctuation goes through these functions so the numbers
//! stay mutually consistent.

/// Punctuation characters recognized across the supported languages.
pub const PUNCTUATION_ALPHABET: &[char] = &[
    '.', ',', ';', ':', '!', '?', '(', ')', '[', ']', '{', '}', '"', '\'', '%', '/', '\\', '-',
    '–', '—', '…', '¿', '¡', '«', '»',
];

pub fn is_punct_char(c: char) -> bool {
    PUNCTUATION_ALPHABET.contains(&c)
}

/// Trim ends and collapse internal runs of Unicode whitespace to one space.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Split on Unicode whitespace, then split off leading/trailing punctuation
/// characters as separate tokens. Case is preserved.
pub fn tokenize(s: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in s.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        let mut leading = Vec::new();
        while start < end && is_punct_char(chars[start]) {
            leading.push(chars[start].to_string());
            start += 1;
        }
        let mut trailing = Vec::new();
        while end > start && is_punct_char(chars[end - 1]) {
            trailing.push(chars[end - 1].to_string());
            end -= 1;
        }
        tokens.extend(leading);
        if start < end {
            tokens.push(chars[start..end].iter().collect());
        }
        trailing.reverse();
        tokens.extend(trailing);
    }
    tokens
}

/// Tokens that are not pure punctuation.
pub fn word_tokens(s: &str) -> Vec<String> {
    tokenize(s)
        .into_iter()
        .filter(|t| !t.chars().all(is_punct_char))
        .collect()
}

/// Length in Unicode scalar values of the whitespace-normalized text.
pub fn char_len(s: &str) -> usize {
    normalize_whitespace(s).chars().count()
}
