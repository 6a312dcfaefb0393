//! Corpus loading, answer metrics and report assembly.

mod basic;
mod bleu;
mod corpus;
mod metrics;
mod report;
mod systems;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

pub use basic::{evaluate_basic, mean_basic, BasicScores};
pub use bleu::{bleu_prf, bleu_tokens, phrase_bleu, sentence_bleu};
pub use corpus::{load_corpus, Corpus, CorpusError, Manual, QaRecord, QuestionType};
pub use metrics::{at1_prf, harmonic_mean, span_prf, Prf};
pub use report::{Averaging, EvalReport, FaqScores, QuestionResult, TypeScores, BLEU_ALIGNMENT};
pub use systems::{make_system, FaqSystem, HumSystem, KeywordSystem, LexicalSystem, SystemKind};

use crate::builder::build_document;
use crate::inference::AnswerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub averaging: Averaging,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            averaging: Averaging::Micro,
            jobs: 0,
        }
    }
}

fn score_question(index: usize, record: &QaRecord, ranked: Vec<usize>) -> QuestionResult {
    let gold: BTreeSet<usize> = record.gold_sentences.iter().copied().collect();
    let pred: BTreeSet<usize> = ranked.iter().copied().collect();
    QuestionResult {
        index,
        manual_id: record.manual_id.clone(),
        qtype: record.qtype,
        scores: FaqScores {
            span: span_prf(&pred, &gold),
            at1: at1_prf(&ranked, &gold),
        },
        gold: gold.into_iter().collect(),
        ranked,
    }
}

/// Runs `system` on every question and aggregates the scores. Questions are
/// answered in parallel; aggregation runs in corpus order.
pub fn evaluate_faq(system: &dyn FaqSystem, corpus: &Corpus, options: &EvalOptions) -> EvalReport {
    let run = || -> Vec<QuestionResult> {
        corpus
            .questions
            .par_iter()
            .enumerate()
            .map(|(i, rec)| score_question(i, rec, system.rank(rec)))
            .collect()
    };
    let per_question = match rayon::ThreadPoolBuilder::new().num_threads(options.jobs).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}); running on the global pool");
            run()
        }
    };

    let mut by_type: BTreeMap<QuestionType, Vec<FaqScores>> = BTreeMap::new();
    for q in &per_question {
        by_type.entry(q.qtype).or_default().push(q.scores);
    }
    let per_type: BTreeMap<QuestionType, TypeScores> = by_type
        .into_iter()
        .map(|(t, s)| {
            (
                t,
                TypeScores {
                    count: s.len(),
                    scores: FaqScores::mean(&s),
                },
            )
        })
        .collect();
    let overall = match options.averaging {
        Averaging::Micro => FaqScores::mean(&per_question.iter().map(|q| q.scores).collect::<Vec<_>>()),
        Averaging::Macro => FaqScores::mean(&per_type.values().map(|t| t.scores).collect::<Vec<_>>()),
    };
    EvalReport {
        system: system.name().to_string(),
        averaging: options.averaging,
        bleu_alignment: BLEU_ALIGNMENT.to_string(),
        questions: per_question.len(),
        answered: per_question.iter().filter(|q| !q.ranked.is_empty()).count(),
        overall,
        per_type,
        per_question,
        basic: None,
        notices: system.notices(),
    }
}

/// Builds graphs for every manual with gold graphs and a parse, and scores
/// them against the gold. Returns `None` and notices when nothing could be
/// compared.
pub fn evaluate_basic_corpus(corpus: &Corpus, config: &AnswerConfig) -> (Option<BasicScores>, Vec<String>) {
    if !corpus.has_gold_graphs() {
        return (None, vec!["no gold graphs; basic-question evaluation disabled".to_string()]);
    }
    let mut notices = Vec::new();
    let mut per_manual = Vec::new();
    for (id, gold) in &corpus.gold_graphs {
        let Some(doc) = corpus.manual(id).and_then(|m| m.parse.as_ref()) else {
            notices.push(format!("gold graphs for `{id}` skipped: manual has no parse"));
            continue;
        };
        match build_document(doc, &config.build) {
            Ok(built) => per_manual.push(evaluate_basic(&built, gold)),
            Err(e) => {
                notices.push(format!("manual `{id}`: {e}"));
                per_manual.push(evaluate_basic(&[], gold));
            }
        }
    }
    if per_manual.is_empty() {
        return (None, notices);
    }
    (Some(mean_basic(&per_manual)), notices)
}

/// Full evaluation of one of the built-in systems; graph-based answering also
/// gets the basic-question scores.
pub fn run_eval(kind: SystemKind, corpus: &Corpus, config: &AnswerConfig, options: &EvalOptions) -> EvalReport {
    let system = make_system(kind, corpus, config);
    let mut report = evaluate_faq(system.as_ref(), corpus, options);
    if kind == SystemKind::Hum {
        let (basic, notices) = evaluate_basic_corpus(corpus, config);
        report.basic = basic;
        report.notices.extend(notices);
    }
    report
}
