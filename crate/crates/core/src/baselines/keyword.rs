use std::collections::{BTreeMap, BTreeSet};

use super::tfidf::tokenize;
use super::{top_k, Ranking};
use crate::graph::TaraGraph;
use crate::sdp::SdpSentence;

/// Keywords of one manual and one question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordContext {
    pub manual_keywords: BTreeSet<String>,
    pub question_keywords: BTreeSet<String>,
    question_tokens: BTreeSet<String>,
}

impl KeywordContext {
    /// Question keywords are the question's tokens that are manual keywords
    /// or occur in a node label of the question graph.
    pub fn new<S: AsRef<str>>(manual_keywords: &[S], question: &str, question_graph: Option<&TaraGraph>) -> Self {
        let manual_keywords: BTreeSet<String> =
            manual_keywords.iter().map(|k| k.as_ref().to_lowercase()).collect();
        let question_tokens: BTreeSet<String> = tokenize(question).into_iter().collect();
        let label_tokens: BTreeSet<String> = question_graph
            .map(|g| {
                g.nodes()
                    .iter()
                    .filter(|n| !n.is_user)
                    .flat_map(|n| tokenize(&n.label))
                    .collect()
            })
            .unwrap_or_default();
        let question_keywords = question_tokens
            .iter()
            .filter(|t| manual_keywords.contains(*t) || label_tokens.contains(*t))
            .cloned()
            .collect();
        KeywordContext {
            manual_keywords,
            question_keywords,
            question_tokens,
        }
    }
}

/// The counts entering the keyword score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KeywordFeatures {
    /// Candidate keywords that occur in the question.
    pub kq: usize,
    /// Question keywords that occur in the candidate.
    pub ka: usize,
    /// Words that are both question and candidate keywords.
    pub both: usize,
    /// Question keywords sharing a subtree with another one in the
    /// candidate's parse.
    pub subtree: usize,
    /// Token distance between the two farthest question keywords in the
    /// candidate.
    pub d_max: usize,
}

impl KeywordFeatures {
    pub fn score(&self) -> f64 {
        16.0 * (self.kq + self.ka + self.both + self.subtree) as f64 - 4.0 * (self.d_max as f64).sqrt()
    }
}

/// Ancestors of each token through all of its heads, the virtual root
/// excluded.
fn ancestors(parse: &SdpSentence) -> BTreeMap<u32, BTreeSet<u32>> {
    let mut out = BTreeMap::new();
    for t in &parse.tokens {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<u32> = t.heads().filter(|h| *h != 0).collect();
        while let Some(h) = stack.pop() {
            if seen.insert(h) {
                if let Some(tok) = parse.token(h) {
                    stack.extend(tok.heads().filter(|h| *h != 0));
                }
            }
        }
        out.insert(t.index, seen);
    }
    out
}

fn share_subtree(a: u32, b: u32, anc: &BTreeMap<u32, BTreeSet<u32>>, roots: &BTreeSet<u32>) -> bool {
    let empty = BTreeSet::new();
    let (aa, ab) = (anc.get(&a).unwrap_or(&empty), anc.get(&b).unwrap_or(&empty));
    a == b || aa.contains(&b) || ab.contains(&a) || aa.intersection(ab).any(|x| !roots.contains(x))
}

/// Computes the score inputs for one candidate sentence. Token positions
/// come from the parse when given, else from the tokenized text.
pub fn keyword_features(candidate: &str, parse: Option<&SdpSentence>, ctx: &KeywordContext) -> KeywordFeatures {
    let positions: Vec<(String, u32)> = match parse {
        Some(p) => p
            .tokens
            .iter()
            .flat_map(|t| tokenize(&t.form).into_iter().map(move |w| (w, t.index)))
            .collect(),
        None => tokenize(candidate)
            .into_iter()
            .enumerate()
            .map(|(i, w)| (w, i as u32 + 1))
            .collect(),
    };
    let words: BTreeSet<&str> = positions.iter().map(|(w, _)| w.as_str()).collect();
    let answer_keywords: BTreeSet<&str> = ctx
        .manual_keywords
        .iter()
        .map(String::as_str)
        .filter(|k| words.contains(k))
        .collect();
    let present: Vec<&str> = ctx
        .question_keywords
        .iter()
        .map(String::as_str)
        .filter(|k| words.contains(k))
        .collect();

    let at = |k: &str| -> Vec<u32> {
        positions.iter().filter(|(w, _)| w == k).map(|(_, p)| *p).collect()
    };
    let mut d_max = 0;
    for (i, a) in present.iter().enumerate() {
        for b in &present[i + 1..] {
            for pa in at(a) {
                for pb in at(b) {
                    d_max = d_max.max(pa.abs_diff(pb) as usize);
                }
            }
        }
    }

    let subtree = match parse {
        None => 0,
        Some(p) => {
            let anc = ancestors(p);
            let roots: BTreeSet<u32> = p
                .tokens
                .iter()
                .filter(|t| t.heads().any(|h| h == 0))
                .map(|t| t.index)
                .collect();
            present
                .iter()
                .filter(|a| {
                    present.iter().any(|b| {
                        a != &b
                            && at(a)
                                .iter()
                                .any(|pa| at(b).iter().any(|pb| share_subtree(*pa, *pb, &anc, &roots)))
                    })
                })
                .count()
        }
    };

    KeywordFeatures {
        kq: answer_keywords
            .iter()
            .filter(|k| ctx.question_tokens.contains(**k))
            .count(),
        ka: present.len(),
        both: answer_keywords
            .iter()
            .filter(|k| ctx.question_keywords.contains(**k))
            .count(),
        subtree,
        d_max,
    }
}

/// Scores every sentence and returns the best two.
pub fn keyword_match<S: AsRef<str>>(
    sentences: &[S],
    parses: Option<&[SdpSentence]>,
    ctx: &KeywordContext,
) -> Ranking {
    let scored = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let parse = parses.and_then(|p| p.get(i));
            (i, keyword_features(s.as_ref(), parse, ctx).score())
        })
        .collect();
    top_k(scored, 2)
}
