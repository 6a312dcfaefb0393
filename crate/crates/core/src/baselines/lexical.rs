use super::{top_k, Ranking};
use crate::matcher::node_similarity;

/// Scores every sentence against the question by edit similarity (case
/// folded) and returns the best two.
pub fn lexical_match<S: AsRef<str>>(question: &str, sentences: &[S]) -> Ranking {
    let q = question.trim().to_lowercase();
    let scored = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| (i, node_similarity(&q, &s.as_ref().trim().to_lowercase())))
        .collect();
    top_k(scored, 2)
}
