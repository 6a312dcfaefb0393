//! Question answering over a matching: classify how the question conflicts
//! with the matched part of the manual, then resolve the answer.
//!
//! Conflicts are checked in priority order: a negated question Action
//! first, then an Action-ARG present in the question but missing from the
//! manual, then argument values that differ.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::builder::{build_document, BuildConfig};
use crate::graph::{
    ArgCategory, ArgId, Argument, EdgeKind, ElementId, NodeId, NodeKind, Provenance, TaraGraph,
};
use crate::matcher::{match_subgraph_with, node_similarity, EditSimilarity, Matching, Similarity, DEFAULT_THRESHOLD};
use crate::preprocess::NEGATION;
use crate::sdp::SdpDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConflictKind {
    NegationMod,
    MissingActionArg,
    ValueConflict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictSite {
    pub question: ElementId,
    pub manual: Option<ElementId>,
    pub category: Option<ArgCategory>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub kind: ConflictKind,
    pub sites: Vec<ConflictSite>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AnswerStatus {
    Answered,
    NoMatch,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnswerItem {
    pub text: String,
    pub element: ElementId,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Answer {
    pub question_id: String,
    pub status: AnswerStatus,
    pub conflict: Option<Conflict>,
    pub matched_graph_id: Option<String>,
    pub payload: Vec<AnswerItem>,
    pub diagnostic: Option<String>,
}

impl Answer {
    fn empty(question_id: &str, status: AnswerStatus, diagnostic: impl Into<String>) -> Answer {
        Answer {
            question_id: question_id.to_string(),
            status,
            conflict: None,
            matched_graph_id: None,
            payload: Vec::new(),
            diagnostic: Some(diagnostic.into()),
        }
    }

    /// Evidence sentences in payload order, each listed once.
    pub fn ranked_sentences(&self) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        self.payload
            .iter()
            .flat_map(|item| item.provenance.iter().copied())
            .filter(|s| seen.insert(*s))
            .collect()
    }

    pub fn values(&self) -> Vec<&str> {
        self.payload.iter().map(|i| i.text.as_str()).collect()
    }
}

fn matched_actions<'a>(matching: &'a Matching, q: &'a TaraGraph) -> impl Iterator<Item = (NodeId, NodeId)> + 'a {
    matching
        .pairs
        .iter()
        .filter(move |p| q.node(p.question).is_some_and(|n| n.kind == NodeKind::Action))
        .map(|p| (p.question, p.manual))
}

/// Aligns a question argument with the most similar manual argument of the
/// same category among `candidates` (lowest id on ties).
fn align<'a>(qa: &Argument, candidates: impl Iterator<Item = &'a Argument>) -> Option<(&'a Argument, f64)> {
    let mut best: Option<(&Argument, f64)> = None;
    for ma in candidates.filter(|ma| ma.category == qa.category) {
        let s = node_similarity(&qa.value.to_lowercase(), &ma.value.to_lowercase());
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((ma, s));
        }
    }
    best
}

fn value_sites(
    q: &TaraGraph,
    m: &TaraGraph,
    q_owner: ElementId,
    m_owner: ElementId,
    out: &mut Vec<ConflictSite>,
) {
    for qa in q.args_of(q_owner) {
        let Some((ma, s)) = align(qa, m.args_of(m_owner)) else {
            continue;
        };
        if s < 1.0 {
            out.push(ConflictSite {
                question: qa.id.into(),
                manual: Some(ma.id.into()),
                category: Some(qa.category),
            });
        } else {
            value_sites(q, m, qa.id.into(), ma.id.into(), out);
        }
    }
}

/// Returns the conflict between the question and its matched subgraph, or
/// `None` when they agree.
pub fn classify_conflict(matching: &Matching, q: &TaraGraph, m: &TaraGraph) -> Option<Conflict> {
    let negations: Vec<ConflictSite> = matched_actions(matching, q)
        .flat_map(|(qa, ma)| {
            q.args_of(qa)
                .filter(|a| a.category == ArgCategory::Mod && a.value == NEGATION)
                .map(move |a| ConflictSite {
                    question: a.id.into(),
                    manual: Some(ma.into()),
                    category: Some(ArgCategory::Mod),
                })
        })
        .collect();
    if !negations.is_empty() {
        return Some(Conflict {
            kind: ConflictKind::NegationMod,
            sites: negations,
        });
    }

    for (qa, ma) in matched_actions(matching, q) {
        for category in ArgCategory::ACTION {
            let asked = q.args_of(qa).find(|a| a.category == category);
            let present = m.args_of(ma).any(|a| a.category == category);
            if let (Some(asked), false) = (asked, present) {
                return Some(Conflict {
                    kind: ConflictKind::MissingActionArg,
                    sites: vec![ConflictSite {
                        question: asked.id.into(),
                        manual: Some(ma.into()),
                        category: Some(category),
                    }],
                });
            }
        }
    }

    let mut sites = Vec::new();
    for pair in &matching.pairs {
        value_sites(q, m, pair.question.into(), pair.manual.into(), &mut sites);
    }
    (!sites.is_empty()).then_some(Conflict {
        kind: ConflictKind::ValueConflict,
        sites,
    })
}

fn item(m: &TaraGraph, id: ElementId) -> AnswerItem {
    AnswerItem {
        text: m.label_of(id).unwrap_or_default().to_string(),
        element: id,
        provenance: m.provenance(id).cloned().unwrap_or_default(),
    }
}

fn position(m: &TaraGraph, n: NodeId) -> (usize, NodeId) {
    let first = m
        .node(n)
        .and_then(|n| n.provenance.first().copied())
        .unwrap_or(0);
    (first, n)
}

/// Walks NEXT edges backwards from `start` in rings of equal hop count and
/// returns the first ring's node satisfying `accept` that sits latest in
/// the document.
fn nearest_predecessor(m: &TaraGraph, start: NodeId, accept: impl Fn(NodeId) -> bool) -> Option<NodeId> {
    let mut seen = BTreeSet::from([start]);
    let mut ring: Vec<NodeId> = vec![start];
    while !ring.is_empty() {
        let mut next_ring = Vec::new();
        for n in &ring {
            for p in m.next_predecessors(*n) {
                if seen.insert(p) {
                    next_ring.push(p);
                }
            }
        }
        if let Some(best) = next_ring
            .iter()
            .copied()
            .filter(|n| accept(*n))
            .max_by_key(|n| position(m, *n))
        {
            return Some(best);
        }
        ring = next_ring;
    }
    None
}

/// The node an argument ultimately hangs from.
fn owner_node(m: &TaraGraph, arg: ArgId) -> Option<NodeId> {
    let mut current = m.arg(arg)?.owner;
    for _ in 0..=m.args().len() {
        match current {
            ElementId::Node(n) => return Some(n),
            ElementId::Arg(a) => current = m.arg(a)?.owner,
        }
    }
    None
}

fn with_descendants(m: &TaraGraph, arg: ArgId, out: &mut BTreeSet<ArgId>) {
    if out.insert(arg) {
        let children: Vec<ArgId> = m.args_of(arg).map(|a| a.id).collect();
        for c in children {
            with_descendants(m, c, out);
        }
    }
}

/// Entities connected to the matched manual nodes: the matched entities and
/// entities one PAT, SUB or PATA hop away.
fn connected_entities(matching: &Matching, m: &TaraGraph) -> BTreeSet<NodeId> {
    let matched: BTreeSet<NodeId> = matching.pairs.iter().map(|p| p.manual).collect();
    let is_entity = |n: NodeId| m.node(n).is_some_and(|n| n.kind == NodeKind::Entity);
    let mut out: BTreeSet<NodeId> = matched.iter().copied().filter(|n| is_entity(*n)).collect();
    for e in m.edges() {
        let ends = match e.kind {
            EdgeKind::Pat | EdgeKind::Sub => match (e.from, e.to) {
                (ElementId::Node(a), ElementId::Node(b)) => Some((a, b)),
                _ => None,
            },
            EdgeKind::Pata => match (e.from, e.to) {
                (ElementId::Arg(a), ElementId::Node(b)) => owner_node(m, a).map(|o| (o, b)),
                _ => None,
            },
            _ => None,
        };
        let Some((a, b)) = ends else {
            continue;
        };
        if matched.contains(&a) && is_entity(b) {
            out.insert(b);
        }
        if matched.contains(&b) && is_entity(a) {
            out.insert(a);
        }
    }
    out
}

/// STATE arguments of the entity, ATT arguments carrying a STATE, and
/// STATEs pointing at the entity, each with its children.
fn constraint_args(m: &TaraGraph, entity: NodeId, out: &mut BTreeSet<ArgId>) {
    for a in m.args_of(entity) {
        match a.category {
            ArgCategory::State => with_descendants(m, a.id, out),
            ArgCategory::Att if m.args_of(a.id).any(|c| c.category == ArgCategory::State) => {
                out.insert(a.id);
                let states: Vec<ArgId> = m
                    .args_of(a.id)
                    .filter(|c| c.category == ArgCategory::State)
                    .map(|c| c.id)
                    .collect();
                for s in states {
                    with_descendants(m, s, out);
                }
            }
            _ => {}
        }
    }
    for e in m.edges_of(EdgeKind::Pata) {
        if let (ElementId::Arg(a), ElementId::Node(n)) = (e.from, e.to) {
            if n == entity {
                with_descendants(m, a, out);
            }
        }
    }
}

/// Resolves a conflict into an answer payload.
pub fn resolve(conflict: &Conflict, matching: &Matching, m: &TaraGraph) -> (AnswerStatus, Vec<AnswerItem>, Option<String>) {
    match conflict.kind {
        ConflictKind::ValueConflict => {
            let mut seen = BTreeSet::new();
            let payload: Vec<AnswerItem> = conflict
                .sites
                .iter()
                .filter_map(|s| s.manual)
                .filter(|id| seen.insert(*id))
                .map(|id| item(m, id))
                .collect();
            (AnswerStatus::Answered, payload, None)
        }
        ConflictKind::MissingActionArg => {
            let site = &conflict.sites[0];
            let category = site.category.expect("missing-argument site has a category");
            let Some(ElementId::Node(start)) = site.manual else {
                return (AnswerStatus::Unresolved, Vec::new(), Some("no manual action".into()));
            };
            let has = |n: NodeId| m.args_of(n).any(|a| a.category == category);
            match nearest_predecessor(m, start, has) {
                Some(n) => {
                    let payload = m
                        .args_of(n)
                        .filter(|a| a.category == category)
                        .map(|a| item(m, a.id.into()))
                        .collect();
                    (AnswerStatus::Answered, payload, None)
                }
                None => (
                    AnswerStatus::Unresolved,
                    Vec::new(),
                    Some(format!(
                        "no NEXT predecessor of `{}` carries {category}",
                        m.label_of(start.into()).unwrap_or_default()
                    )),
                ),
            }
        }
        ConflictKind::NegationMod => {
            let mut payload = Vec::new();
            if let Some(ElementId::Node(start)) = conflict.sites[0].manual {
                if let Some(prev) = nearest_predecessor(m, start, |_| true) {
                    payload.push(item(m, prev.into()));
                }
            }
            let mut args = BTreeSet::new();
            for e in connected_entities(matching, m) {
                constraint_args(m, e, &mut args);
            }
            payload.extend(args.into_iter().map(|a| item(m, a.into())));
            if payload.is_empty() {
                (
                    AnswerStatus::Unresolved,
                    payload,
                    Some("no preceding step or constraint found".into()),
                )
            } else {
                (AnswerStatus::Answered, payload, None)
            }
        }
    }
}

/// Evidence when question and manual agree: the matched manual nodes.
fn agreement(matching: &Matching, m: &TaraGraph) -> Vec<AnswerItem> {
    matching
        .pairs
        .iter()
        .map(|p| item(m, p.manual.into()))
        .collect()
}

/// Classifies and resolves a question graph against one manual graph.
pub fn answer_with_graph(question_id: &str, q: &TaraGraph, m: &TaraGraph, matching: Matching) -> Answer {
    let conflict = classify_conflict(&matching, q, m);
    let (status, payload, diagnostic) = match &conflict {
        Some(c) => resolve(c, &matching, m),
        None => (AnswerStatus::Answered, agreement(&matching, m), None),
    };
    Answer {
        question_id: question_id.to_string(),
        status,
        conflict,
        matched_graph_id: Some(matching.manual_graph_id.clone()),
        payload,
        diagnostic,
    }
}

#[derive(Debug, Clone)]
pub struct AnswerConfig {
    pub threshold: f64,
    pub build: BuildConfig,
}

impl Default for AnswerConfig {
    fn default() -> Self {
        AnswerConfig {
            threshold: DEFAULT_THRESHOLD,
            build: BuildConfig::default(),
        }
    }
}

/// Builds the question's graph, picks the best-matching manual graph and
/// answers against it. The best aggregate wins; ties go to the graph whose
/// content starts earliest in the manual.
pub fn answer_question(question: &SdpDocument, graphs: &[TaraGraph], config: &AnswerConfig) -> Answer {
    answer_question_with(question, graphs, config, &EditSimilarity)
}

pub fn answer_question_with(
    question: &SdpDocument,
    graphs: &[TaraGraph],
    config: &AnswerConfig,
    sim: &dyn Similarity,
) -> Answer {
    let qid = question.manual_id.as_str();
    let build = BuildConfig {
        allow_no_action: true,
        ..config.build.clone()
    };
    let q = match build_document(question, &build) {
        Ok(mut gs) if !gs.is_empty() => gs.swap_remove(0),
        Ok(_) => return Answer::empty(qid, AnswerStatus::NoMatch, "question yields no graph"),
        Err(e) => return Answer::empty(qid, AnswerStatus::NoMatch, e.to_string()),
    };
    let mut best: Option<(&TaraGraph, Matching)> = None;
    for m in graphs {
        let Some(matching) = match_subgraph_with(&q, m, config.threshold, sim) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((bm, bmatch)) => {
                matching.aggregate > bmatch.aggregate + 1e-12
                    || ((matching.aggregate - bmatch.aggregate).abs() <= 1e-12
                        && m.earliest_provenance().unwrap_or(usize::MAX)
                            < bm.earliest_provenance().unwrap_or(usize::MAX))
            }
        };
        if better {
            best = Some((m, matching));
        }
    }
    match best {
        Some((m, matching)) => answer_with_graph(qid, &q, m, matching),
        None => Answer::empty(qid, AnswerStatus::NoMatch, "no manual subgraph matches the question"),
    }
}
