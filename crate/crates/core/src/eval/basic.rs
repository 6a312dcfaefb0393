use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::bleu::bleu_prf;
use super::metrics::{span_prf, Prf};
use crate::graph::{answer_basic, BasicAnswer, BasicQuestion, ElementId, TaraGraph};

/// Scores per basic question; `None` when neither side has an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasicScores {
    pub scores: BTreeMap<String, Option<Prf>>,
}

impl BasicScores {
    pub fn get(&self, q: BasicQuestion) -> Option<Prf> {
        self.scores.get(&q.to_string()).copied().flatten()
    }
}

fn phrases(g: &TaraGraph, q: BasicQuestion, ctx: &[ElementId]) -> Vec<String> {
    match answer_basic(g, q, ctx) {
        Ok(BasicAnswer::Phrases(p)) => p,
        _ => Vec::new(),
    }
}

/// Labels of an element and its owners, joined into one key.
fn path(g: &TaraGraph, id: ElementId) -> String {
    match id {
        ElementId::Node(_) => g.label_of(id).unwrap_or_default().to_string(),
        ElementId::Arg(a) => match g.arg(a) {
            Some(arg) => format!("{}/{}:{}", path(g, arg.owner), arg.category, arg.value),
            None => String::new(),
        },
    }
}

/// Context key to answer list, merged over all graphs of a manual.
fn contexts(graphs: &[TaraGraph], q: BasicQuestion) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for g in graphs {
        let ids: Vec<ElementId> = match q {
            BasicQuestion::B3 => g.actions().map(|n| ElementId::Node(n.id)).collect(),
            BasicQuestion::B4 => g.entities().map(|n| ElementId::Node(n.id)).collect(),
            _ => g.args().iter().map(|a| ElementId::Arg(a.id)).collect(),
        };
        for id in ids {
            out.entry(path(g, id))
                .or_default()
                .extend(phrases(g, q, &[id]));
        }
    }
    out
}

fn relation_pairs(graphs: &[TaraGraph], q: BasicQuestion) -> BTreeSet<(String, String)> {
    let kind = q.relation().expect("relation question");
    graphs
        .iter()
        .flat_map(|g| {
            g.edges()
                .iter()
                .filter(move |e| e.kind == kind)
                .map(move |e| (path(g, e.from), path(g, e.to)))
        })
        .collect()
}

fn score(built: &[TaraGraph], gold: &[TaraGraph], q: BasicQuestion) -> Option<Prf> {
    match q {
        BasicQuestion::B1 | BasicQuestion::B2 => {
            let all = |gs: &[TaraGraph]| -> Vec<String> { gs.iter().flat_map(|g| phrases(g, q, &[])).collect() };
            let (p, g) = (all(built), all(gold));
            (!p.is_empty() || !g.is_empty()).then(|| bleu_prf(&p, &g))
        }
        BasicQuestion::B3 | BasicQuestion::B4 | BasicQuestion::B5 => {
            let (p, g) = (contexts(built, q), contexts(gold, q));
            let keys: BTreeSet<&String> = p.keys().chain(g.keys()).collect();
            let empty = Vec::new();
            let items: Vec<Prf> = keys
                .into_iter()
                .filter_map(|k| {
                    let (pv, gv) = (p.get(k).unwrap_or(&empty), g.get(k).unwrap_or(&empty));
                    (!pv.is_empty() || !gv.is_empty()).then(|| bleu_prf(pv, gv))
                })
                .collect();
            (!items.is_empty()).then(|| Prf::mean(&items))
        }
        _ => {
            let (p, g) = (relation_pairs(built, q), relation_pairs(gold, q));
            (!p.is_empty() || !g.is_empty()).then(|| span_prf(&p, &g))
        }
    }
}

/// Compares the graphs built for one manual with its gold graphs. List
/// questions use BLEU-aligned scores, per context for B3 to B5 (contexts
/// are matched by label); relation questions use set scores over label
/// pairs.
pub fn evaluate_basic(built: &[TaraGraph], gold: &[TaraGraph]) -> BasicScores {
    BasicScores {
        scores: BasicQuestion::ALL
            .into_iter()
            .map(|q| (q.to_string(), score(built, gold, q)))
            .collect(),
    }
}

/// Averages per-manual scores question by question, skipping manuals where
/// a question has no instance.
pub fn mean_basic(items: &[BasicScores]) -> BasicScores {
    BasicScores {
        scores: BasicQuestion::ALL
            .into_iter()
            .map(|q| {
                let present: Vec<Prf> = items.iter().filter_map(|s| s.get(q)).collect();
                (q.to_string(), (!present.is_empty()).then(|| Prf::mean(&present)))
            })
            .collect(),
    }
}

