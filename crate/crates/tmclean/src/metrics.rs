//! Pure string and sequence similarity kernels: character Levenshtein,
//! normalized character similarity (cfs), smoothed sentence-level BLEU,
//! cosine over count vectors, and token-set coverage.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("cfs is undefined when both strings are empty")]
    BothEmpty,
    #[error("BLEU reference must be non-empty")]
    EmptyReference,
    #[error("coverage target must be non-empty")]
    EmptyTarget,
}

/// Character-level edit distance over Unicode scalar values.
pub fn levenshtein_chars(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = if ca == cb { 0 } else { 1 };
            cur[j + 1] = (prev[j + 1] + 1).min(cur[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Normalized character similarity: 1 - distance / length of the longer
/// string. Identical strings score 1.0, disjoint strings 0.0.
pub fn cfs(a: &str, b: &str) -> Result<f64, MetricError> {
    let la = a.chars().count();
    let lb = b.chars().count();
    let longer = la.max(lb);
    if longer == 0 {
        return Err(MetricError::BothEmpty);
    }
    Ok(1.0 - levenshtein_chars(a, b) as f64 / longer as f64)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sentence-level BLEU with add-one smoothing on the n >= 2 precisions and
/// the usual brevity penalty. Order is capped at min(4, candidate length).
pub fn sentence_bleu(candidate: &[String], reference: &[String]) -> Result<f64, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let max_n = 4.min(candidate.len());
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let cand = ngram_counts(candidate, n);
        let refs = ngram_counts(reference, n);
        let total: usize = cand.values().sum();
        let matched: usize = cand
            .iter()
            .map(|(gram, &c)| c.min(*refs.get(gram).unwrap_or(&0)))
            .sum();
        let p = if n == 1 {
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        if p == 0.0 {
            return Ok(0.0);
        }
        log_sum += p.ln();
    }
    let precision = (log_sum / max_n as f64).exp();
    let bp = (1.0 - reference.len() as f64 / candidate.len() as f64).min(0.0).exp();
    Ok(precision * bp)
}

/// Cosine similarity over non-negative count vectors. Two zero vectors are
/// treated as identical (1.0); exactly one zero vector scores 0.0.
pub fn cosine_counts<K: Eq + Hash>(u: &HashMap<K, u64>, v: &HashMap<K, u64>) -> f64 {
    let sq = |m: &HashMap<K, u64>| m.values().map(|&c| (c * c) as f64).sum::<f64>();
    let nu2 = sq(u);
    let nv2 = sq(v);
    if nu2 == 0.0 && nv2 == 0.0 {
        return 1.0;
    }
    if nu2 == 0.0 || nv2 == 0.0 {
        return 0.0;
    }
    let dot: f64 = u
        .iter()
        .map(|(k, &cu)| cu as f64 * *v.get(k).unwrap_or(&0) as f64)
        .sum();
    // single sqrt keeps identical vectors at exactly 1.0; the clamp guards
    // the upper bound against rounding
    (dot / (nu2 * nv2).sqrt()).min(1.0)
}

/// Fraction of distinct case-folded target tokens present in the case-folded
/// hypothesis token union.
pub fn coverage(target_tokens: &[String], hypothesis_union: &[String]) -> Result<f64, MetricError> {
    if target_tokens.is_empty() {
        return Err(MetricError::EmptyTarget);
    }
    let union: HashSet<String> = hypothesis_union.iter().map(|t| t.to_lowercase()).collect();
    let distinct: HashSet<String> = target_tokens.iter().map(|t| t.to_lowercase()).collect();
    let covered = distinct.iter().filter(|t| union.contains(*t)).count();
    Ok(covered as f64 / distinct.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(|t| t.to_string()).collect()
    }

    /// Brute-force recursive edit distance, used as the oracle.
    pub(crate) fn levenshtein_oracle(a: &[char], b: &[char]) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        let cost = usize::from(a[0] != b[0]);
        (levenshtein_oracle(&a[1..], b) + 1)
            .min(levenshtein_oracle(a, &b[1..]) + 1)
            .min(levenshtein_oracle(&a[1..], &b[1..]) + cost)
    }

    #[test]
    fn levenshtein_known_cases() {
        assert_eq!(levenshtein_chars("kitten", "sitting"), 3);
        assert_eq!(levenshtein_chars("abc", "abc"), 0);
        assert_eq!(levenshtein_chars("", "abc"), 3);
        assert_eq!(levenshtein_chars("abc", ""), 3);
    }

    #[test]
    fn levenshtein_matches_oracle_on_short_strings() {
        let alphabet = ['a', 'b', 'c'];
        let mut strings = vec![String::new()];
        for _ in 0..4 {
            let mut next = Vec::new();
            for s in &strings {
                for c in alphabet {
                    let mut t = s.clone();
                    t.push(c);
                    next.push(t);
                }
            }
            strings.extend(next);
        }
        for a in &strings {
            for b in &strings {
                let ac: Vec<char> = a.chars().collect();
                let bc: Vec<char> = b.chars().collect();
                assert_eq!(levenshtein_chars(a, b), levenshtein_oracle(&ac, &bc), "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn cfs_known_cases() {
        assert_eq!(cfs("abc", "abc").unwrap(), 1.0);
        assert!((cfs("abc", "abd").unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(cfs("", "abc").unwrap(), 0.0);
        assert_eq!(cfs("", "").unwrap_err(), MetricError::BothEmpty);
    }

    #[test]
    fn bleu_hand_worked_case() {
        // p1 = 2/3, p2 = (1+1)/(2+1), p3 = (0+1)/(1+1), BP = 1
        let score = sentence_bleu(&toks("the cat sat"), &toks("the cat slept")).unwrap();
        let expected = (2.0f64 / 3.0 * 2.0 / 3.0 * 0.5).powf(1.0 / 3.0);
        assert!((score - expected).abs() < 1e-12);
        assert!((score - 0.6057).abs() < 1e-4);
    }

    #[test]
    fn bleu_identity_and_disjoint() {
        let s = toks("a b c d e f");
        assert_eq!(sentence_bleu(&s, &s).unwrap(), 1.0);
        assert_eq!(sentence_bleu(&toks("x y z"), &toks("a b c")).unwrap(), 0.0);
        assert_eq!(sentence_bleu(&[], &toks("a")).unwrap(), 0.0);
        assert_eq!(sentence_bleu(&toks("a"), &[]).unwrap_err(), MetricError::EmptyReference);
    }

    #[test]
    fn bleu_short_candidate_caps_order() {
        // 2-token candidate: only unigram and bigram precisions
        let score = sentence_bleu(&toks("a b"), &toks("a b c")).unwrap();
        let expected = (1.0f64 * 1.0).powf(0.5) * (1.0f64 - 1.5).exp();
        assert!((score - expected).abs() < 1e-12);
    }

    #[test]
    fn cosine_known_cases() {
        let u: HashMap<&str, u64> = [("NOUN", 2), ("VERB", 1)].into_iter().collect();
        let v: HashMap<&str, u64> = [("NOUN", 1), ("VERB", 1)].into_iter().collect();
        assert!((cosine_counts(&u, &v) - 3.0 / 10f64.sqrt()).abs() < 1e-12);
        assert_eq!(cosine_counts(&u, &u), 1.0);
        let a: HashMap<&str, u64> = [("a", 1)].into_iter().collect();
        let b: HashMap<&str, u64> = [("b", 1)].into_iter().collect();
        assert_eq!(cosine_counts(&a, &b), 0.0);
        let zero: HashMap<&str, u64> = HashMap::new();
        assert_eq!(cosine_counts(&zero, &zero), 1.0);
        assert_eq!(cosine_counts(&a, &zero), 0.0);
    }

    #[test]
    fn coverage_known_cases() {
        assert_eq!(coverage(&toks("a b c"), &toks("a b c x")).unwrap(), 1.0);
        assert!((coverage(&toks("a b c"), &toks("a c x")).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(coverage(&toks("a a b"), &toks("a")).unwrap(), 0.5);
        assert_eq!(coverage(&toks("A b"), &toks("a B")).unwrap(), 1.0);
        assert_eq!(coverage(&[], &toks("a")).unwrap_err(), MetricError::EmptyTarget);
    }
}
