use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{ArgCategory, EdgeKind, ElementId, GraphError, NodeKind, TaraGraph};

/// The nine basic questions about a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicQuestion {
    /// Which actions are there?
    B1,
    /// Which entities are there?
    B2,
    /// Arguments of an action.
    B3,
    /// Arguments of an entity.
    B4,
    /// Children of an argument.
    B5,
    /// Is action 2 the next step of action 1?
    B6,
    /// Is the entity the patient of the action?
    B7,
    /// Is entity 2 a sub-entity of entity 1?
    B8,
    /// Is the entity the patient of the state?
    B9,
}

impl BasicQuestion {
    pub const ALL: [BasicQuestion; 9] = [
        BasicQuestion::B1,
        BasicQuestion::B2,
        BasicQuestion::B3,
        BasicQuestion::B4,
        BasicQuestion::B5,
        BasicQuestion::B6,
        BasicQuestion::B7,
        BasicQuestion::B8,
        BasicQuestion::B9,
    ];

    /// Number of context ids the question takes.
    pub fn arity(self) -> usize {
        match self {
            BasicQuestion::B1 | BasicQuestion::B2 => 0,
            BasicQuestion::B3 | BasicQuestion::B4 | BasicQuestion::B5 => 1,
            _ => 2,
        }
    }

    /// The relation a yes/no question asks about.
    pub fn relation(self) -> Option<EdgeKind> {
        match self {
            BasicQuestion::B6 => Some(EdgeKind::Next),
            BasicQuestion::B7 => Some(EdgeKind::Pat),
            BasicQuestion::B8 => Some(EdgeKind::Sub),
            BasicQuestion::B9 => Some(EdgeKind::Pata),
            _ => None,
        }
    }
}

impl fmt::Display for BasicQuestion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for BasicQuestion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        BasicQuestion::ALL
            .into_iter()
            .find(|q| q.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown basic question `{s}` (expected B1..B9)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum BasicAnswer {
    Phrases(Vec<String>),
    Boolean(bool),
}

/// Answers a basic question. B1 and B2 take no context; B3 to B5 take one
/// element id; B6 to B9 take two, in the order the relation reads
/// (`B8 [e2, e1]` asks whether `e2` is a sub-entity of `e1`).
pub fn answer_basic(
    g: &TaraGraph,
    question: BasicQuestion,
    context: &[ElementId],
) -> Result<BasicAnswer, GraphError> {
    let invalid = |expected| GraphError::InvalidContext { question, expected };
    if context.len() != question.arity() {
        return Err(invalid(match question.arity() {
            0 => "no context ids",
            1 => "one context id",
            _ => "two context ids",
        }));
    }
    for id in context {
        if !g.contains(*id) {
            return Err(GraphError::UnknownElement(id.to_string()));
        }
    }
    let node_kind = |id: ElementId| match id {
        ElementId::Node(n) => g.node(n).map(|n| n.kind),
        ElementId::Arg(_) => None,
    };
    let values = |owner: ElementId| {
        BasicAnswer::Phrases(g.args_of(owner).map(|a| a.value.clone()).collect())
    };
    let labels = |kind: NodeKind| {
        BasicAnswer::Phrases(
            g.nodes()
                .iter()
                .filter(|n| n.kind == kind)
                .map(|n| n.label.clone())
                .collect(),
        )
    };

    match question {
        BasicQuestion::B1 => Ok(labels(NodeKind::Action)),
        BasicQuestion::B2 => Ok(labels(NodeKind::Entity)),
        BasicQuestion::B3 => match node_kind(context[0]) {
            Some(NodeKind::Action) => Ok(values(context[0])),
            _ => Err(invalid("an Action id")),
        },
        BasicQuestion::B4 => match node_kind(context[0]) {
            Some(NodeKind::Entity) => Ok(values(context[0])),
            _ => Err(invalid("an Entity id")),
        },
        BasicQuestion::B5 => match context[0] {
            ElementId::Arg(_) => Ok(values(context[0])),
            ElementId::Node(_) => Err(invalid("an argument id")),
        },
        BasicQuestion::B6 | BasicQuestion::B7 | BasicQuestion::B8 | BasicQuestion::B9 => {
            let (from, to) = (context[0], context[1]);
            let ok = match question {
                BasicQuestion::B6 => {
                    node_kind(from) == Some(NodeKind::Action) && node_kind(to) == Some(NodeKind::Action)
                }
                BasicQuestion::B7 => {
                    node_kind(from) == Some(NodeKind::Action) && node_kind(to) == Some(NodeKind::Entity)
                }
                BasicQuestion::B8 => {
                    node_kind(from) == Some(NodeKind::Entity) && node_kind(to) == Some(NodeKind::Entity)
                }
                _ => {
                    let state = match from {
                        ElementId::Arg(a) => g.arg(a).is_some_and(|a| a.category == ArgCategory::State),
                        ElementId::Node(_) => false,
                    };
                    state && node_kind(to) == Some(NodeKind::Entity)
                }
            };
            if !ok {
                return Err(invalid(match question {
                    BasicQuestion::B6 => "two Action ids",
                    BasicQuestion::B7 => "an Action id and an Entity id",
                    BasicQuestion::B8 => "two Entity ids",
                    _ => "a STATE argument id and an Entity id",
                }));
            }
            let kind = question.relation().expect("relation question");
            Ok(BasicAnswer::Boolean(g.has_edge(kind, from, to)))
        }
    }
}
