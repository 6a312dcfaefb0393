//! Reference systems to compare against graph-based answering: sentence
//! level edit similarity, and keyword matching with TF-IDF keywords.

mod keyword;
mod lexical;
mod tfidf;

pub use keyword::{keyword_features, keyword_match, KeywordContext, KeywordFeatures};
pub use lexical::lexical_match;
pub use tfidf::{tfidf_keywords, tokenize, TFIDF_KEYWORDS};

/// Sentence indices with scores, best first.
pub type Ranking = Vec<(usize, f64)>;

/// Sorts by score (descending), then index, and keeps the first `k`.
pub(crate) fn top_k(mut scored: Ranking, k: usize) -> Ranking {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}
