use std::collections::{BTreeMap, BTreeSet};

pub const TFIDF_KEYWORDS: usize = 10;

fn is_cjk(c: char) -> bool {
    matches!(c as u32, 0x3040..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0xAC00..=0xD7AF)
}

/// Lowercased alphanumeric words; CJK characters become single tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if is_cjk(c) {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            out.push(c.to_string());
        } else if c.is_alphanumeric() {
            word.push(c);
        } else if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// Top keywords of `corpus[doc]` by `tf * ln(N / df)`, ties broken by
/// higher raw frequency, then alphabetically.
pub fn tfidf_keywords<S: AsRef<str>>(corpus: &[Vec<S>], doc: usize) -> Vec<(String, f64)> {
    let n = corpus.len() as f64;
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for terms in corpus {
        let unique: BTreeSet<&str> = terms.iter().map(|t| t.as_ref()).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut tf: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &corpus[doc] {
        *tf.entry(t.as_ref()).or_default() += 1;
    }
    let mut scored: Vec<(&str, usize, f64)> = tf
        .into_iter()
        .map(|(t, f)| (t, f, f as f64 * (n / df[t] as f64).ln()))
        .collect();
    scored.sort_by(|a, b| b.2.total_cmp(&a.2).then(b.1.cmp(&a.1)).then(a.0.cmp(b.0)));
    scored.truncate(TFIDF_KEYWORDS);
    scored.into_iter().map(|(t, _, s)| (t.to_string(), s)).collect()
}
