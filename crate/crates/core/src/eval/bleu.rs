use std::collections::HashMap;

use super::metrics::Prf;

pub const MAX_ORDER: usize = 4;

fn is_cjk(c: char) -> bool {
    matches!(c as u32, 0x3040..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0xAC00..=0xD7AF)
}

/// Lowercased whitespace tokens; a phrase written without spaces in a CJK
/// script is split into characters.
pub fn bleu_tokens(phrase: &str) -> Vec<String> {
    let phrase = phrase.trim().to_lowercase();
    if !phrase.contains(char::is_whitespace) && phrase.chars().any(is_cjk) {
        return phrase.chars().map(|c| c.to_string()).collect();
    }
    phrase.split_whitespace().map(str::to_string).collect()
}

fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w).or_default() += 1;
        }
    }
    out
}

/// Sentence BLEU of `candidate` against one `reference`, up to 4-grams.
///
/// Unigram precision is unsmoothed; a higher order with no match scores
/// `1 / (candidate n-grams + 1)`.
pub fn sentence_bleu(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let cand = ngrams(candidate, n);
        let refs = ngrams(reference, n);
        let total: usize = cand.values().sum();
        let matched: usize = cand
            .iter()
            .map(|(g, c)| (*c).min(refs.get(g).copied().unwrap_or(0)))
            .sum();
        let p = if matched > 0 {
            matched as f64 / total as f64
        } else if n == 1 {
            return 0.0;
        } else {
            1.0 / (total as f64 + 1.0)
        };
        log_sum += p.ln();
    }
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    bp * (log_sum / MAX_ORDER as f64).exp()
}

pub fn phrase_bleu(candidate: &str, reference: &str) -> f64 {
    sentence_bleu(&bleu_tokens(candidate), &bleu_tokens(reference))
}

/// BLEU-aligned precision and recall: each prediction is scored by its best
/// BLEU against any gold phrase and each gold phrase by the best BLEU any
/// prediction reaches against it.
pub fn bleu_prf<S: AsRef<str>, T: AsRef<str>>(pred: &[S], gold: &[T]) -> Prf {
    if pred.is_empty() || gold.is_empty() {
        return Prf::default();
    }
    let pred: Vec<Vec<String>> = pred.iter().map(|p| bleu_tokens(p.as_ref())).collect();
    let gold: Vec<Vec<String>> = gold.iter().map(|g| bleu_tokens(g.as_ref())).collect();
    let scores: Vec<Vec<f64>> = pred
        .iter()
        .map(|p| gold.iter().map(|g| sentence_bleu(p, g)).collect())
        .collect();
    let p = scores
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .sum::<f64>()
        / pred.len() as f64;
    let r = (0..gold.len())
        .map(|j| scores.iter().map(|row| row[j]).fold(0.0, f64::max))
        .sum::<f64>()
        / gold.len() as f64;
    Prf::new(p, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_is_one() {
        assert_eq!(phrase_bleu("scratch the card", "scratch the card"), 1.0);
        assert_eq!(phrase_bleu("pay", "pay"), 1.0);
        assert_eq!(bleu_prf(&["a b", "c"], &["a b", "c"]), Prf::new(1.0, 1.0));
    }

    #[test]
    fn empty_sides_score_zero() {
        assert_eq!(bleu_prf::<&str, &str>(&[], &["x"]), Prf::default());
        assert_eq!(bleu_prf::<&str, &str>(&["x"], &[]), Prf::default());
        assert_eq!(phrase_bleu("", "x"), 0.0);
    }

    #[test]
    fn shorter_candidate_pays_brevity_penalty() {
        // p = (1, 1/2, 1/2, 1), brevity exp(1 - 4/3)
        let expected = 0.25f64.powf(0.25) * (-1.0f64 / 3.0).exp();
        assert!((phrase_bleu("sign in app", "sign in the app") - expected).abs() < 1e-12);
        assert!((expected - 0.50667).abs() < 1e-4);
    }

    #[test]
    fn no_shared_word_is_zero() {
        assert_eq!(phrase_bleu("scan", "pay"), 0.0);
    }

    #[test]
    fn cjk_phrases_split_into_characters() {
        assert_eq!(bleu_tokens("刮刮卡"), vec!["刮", "刮", "卡"]);
        assert_eq!(bleu_tokens("Hit  Rate"), vec!["hit", "rate"]);
    }

    #[test]
    fn clipping_limits_repeated_words() {
        // p1 = 2/4 after clipping "the" to one match
        let p = phrase_bleu("the the the card", "the card");
        assert!(p > 0.0 && p < 1.0);
    }
}
