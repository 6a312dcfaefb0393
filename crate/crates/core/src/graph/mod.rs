//! TARA graphs: Action and Entity nodes, typed arguments, and typed edges.
//!
//! ATT and STATE are arguments, never nodes. Argument children (ARG-ARG)
//! are arguments whose owner is another argument. Every element except the
//! default user entity records the sentences it was built from.

mod basic;
mod io;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use crate::sdp::ArgCategory;
pub use basic::{answer_basic, BasicAnswer, BasicQuestion};
pub use io::{graphs_to_json, load_graph_file, load_graphs_file, parse_graph, parse_graphs, save_graph};
pub use validate::{validate, Violation};

pub const USER_LABEL: &str = "user";

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("malformed graph file: {0}")]
    MalformedGraphFile(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("{question} expects {expected}")]
    InvalidContext {
        question: BasicQuestion,
        expected: &'static str,
    },
    #[error("graph `{graph_id}` is invalid: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid {
        graph_id: String,
        violations: Vec<Violation>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

macro_rules! element_id {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                s.strip_prefix($prefix)
                    .and_then(|n| n.parse().ok())
                    .map($name)
                    .ok_or_else(|| format!("bad {} id `{s}`", stringify!($name)))
            }
        }

        impl TryFrom<String> for $name {
            type Error = String;
            fn try_from(s: String) -> Result<Self, String> {
                s.parse()
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.to_string()
            }
        }
    };
}

element_id!(NodeId, "n");
element_id!(ArgId, "a");

/// A node or an argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ElementId {
    Node(NodeId),
    Arg(ArgId),
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementId::Node(n) => n.fmt(f),
            ElementId::Arg(a) => a.fmt(f),
        }
    }
}

impl FromStr for ElementId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.starts_with('n') {
            s.parse().map(ElementId::Node)
        } else {
            s.parse().map(ElementId::Arg)
        }
    }
}

impl TryFrom<String> for ElementId {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ElementId> for String {
    fn from(id: ElementId) -> String {
        id.to_string()
    }
}

impl From<NodeId> for ElementId {
    fn from(id: NodeId) -> Self {
        ElementId::Node(id)
    }
}

impl From<ArgId> for ElementId {
    fn from(id: ArgId) -> Self {
        ElementId::Arg(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Action,
    Entity,
}

/// Relation kinds, in serialization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EdgeKind {
    Next,
    Agt,
    Pat,
    Sub,
    Pata,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 5] = [
        EdgeKind::Next,
        EdgeKind::Agt,
        EdgeKind::Pat,
        EdgeKind::Sub,
        EdgeKind::Pata,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Next => "NEXT",
            EdgeKind::Agt => "AGT",
            EdgeKind::Pat => "PAT",
            EdgeKind::Sub => "SUB",
            EdgeKind::Pata => "PATA",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type Provenance = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
    #[serde(default)]
    pub is_user: bool,
    #[serde(default)]
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub id: ArgId,
    pub owner: ElementId,
    pub category: ArgCategory,
    pub value: String,
    #[serde(default)]
    pub provenance: Provenance,
}

/// Ordered by `(kind, from, to)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub from: ElementId,
    pub to: ElementId,
}

/// A finalized graph. Nodes and arguments are kept sorted by id and edges
/// by `(kind, from, to)`, so equal graphs serialize identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaraGraph {
    graph_id: String,
    manual_id: String,
    nodes: Vec<Node>,
    args: Vec<Argument>,
    edges: Vec<Edge>,
}

/// Content hash of the manual id and the node labels in id order.
pub fn compute_graph_id<'a>(manual_id: &str, labels: impl IntoIterator<Item = &'a str>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(manual_id.as_bytes());
    for label in labels {
        hasher.update([0u8]);
        hasher.update(label.as_bytes());
    }
    let digest = format!("{:x}", hasher.finalize());
    digest[..16].to_string()
}

impl TaraGraph {
    /// Assembles a graph from loose parts, sorting them canonically. When
    /// `graph_id` is `None` the content hash is used.
    pub fn from_parts(
        graph_id: Option<String>,
        manual_id: impl Into<String>,
        mut nodes: Vec<Node>,
        mut args: Vec<Argument>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> TaraGraph {
        nodes.sort_by_key(|n| n.id);
        args.sort_by_key(|a| a.id);
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        let manual_id = manual_id.into();
        let graph_id = graph_id.unwrap_or_else(|| {
            compute_graph_id(&manual_id, nodes.iter().map(|n| n.label.as_str()))
        });
        TaraGraph {
            graph_id,
            manual_id,
            nodes,
            args,
            edges: edges.into_iter().collect(),
        }
    }

    pub fn graph_id(&self) -> &str {
        &self.graph_id
    }

    pub fn manual_id(&self) -> &str {
        &self.manual_id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn args(&self) -> &[Argument] {
        &self.args
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn arg(&self, id: ArgId) -> Option<&Argument> {
        self.args
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.args[i])
    }

    pub fn contains(&self, id: ElementId) -> bool {
        match id {
            ElementId::Node(n) => self.node(n).is_some(),
            ElementId::Arg(a) => self.arg(a).is_some(),
        }
    }

    pub fn provenance(&self, id: ElementId) -> Option<&Provenance> {
        match id {
            ElementId::Node(n) => self.node(n).map(|n| &n.provenance),
            ElementId::Arg(a) => self.arg(a).map(|a| &a.provenance),
        }
    }

    pub fn user(&self) -> Option<&Node> {
        self.nodes.iter().find(|n| n.is_user)
    }

    pub fn actions(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Action)
    }

    pub fn entities(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Entity)
    }

    /// Arguments owned directly by `owner`, in id order.
    pub fn args_of(&self, owner: impl Into<ElementId>) -> impl Iterator<Item = &Argument> {
        let owner = owner.into();
        self.args.iter().filter(move |a| a.owner == owner)
    }

    pub fn has_edge(&self, kind: EdgeKind, from: impl Into<ElementId>, to: impl Into<ElementId>) -> bool {
        self.edges
            .binary_search(&Edge {
                kind,
                from: from.into(),
                to: to.into(),
            })
            .is_ok()
    }

    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    /// Sources of NEXT edges ending at `action`.
    pub fn next_predecessors(&self, action: NodeId) -> Vec<NodeId> {
        self.edges_of(EdgeKind::Next)
            .filter(|e| e.to == ElementId::Node(action))
            .filter_map(|e| match e.from {
                ElementId::Node(n) => Some(n),
                ElementId::Arg(_) => None,
            })
            .collect()
    }

    /// Earliest sentence any element of the graph was built from.
    pub fn earliest_provenance(&self) -> Option<usize> {
        self.nodes
            .iter()
            .flat_map(|n| n.provenance.iter())
            .chain(self.args.iter().flat_map(|a| a.provenance.iter()))
            .min()
            .copied()
    }

    /// All sentence indices referenced by the graph.
    pub fn sentences(&self) -> Provenance {
        self.nodes
            .iter()
            .flat_map(|n| n.provenance.iter())
            .chain(self.args.iter().flat_map(|a| a.provenance.iter()))
            .copied()
            .collect()
    }

    pub fn label_of(&self, id: ElementId) -> Option<&str> {
        match id {
            ElementId::Node(n) => self.node(n).map(|n| n.label.as_str()),
            ElementId::Arg(a) => self.arg(a).map(|a| a.value.as_str()),
        }
    }

    /// Returns `Err` with every violation when the graph is not well formed.
    pub fn check(&self) -> Result<(), GraphError> {
        let violations = validate(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(GraphError::Invalid {
                graph_id: self.graph_id.clone(),
                violations,
            })
        }
    }

    /// A copy with one edge removed or added. Used to derive variants of a
    /// graph in tests and experiments; the graph id is kept.
    pub fn with_edges(&self, remove: &[Edge], add: &[Edge]) -> TaraGraph {
        let mut edges: BTreeSet<Edge> = self.edges.iter().copied().collect();
        for e in remove {
            edges.remove(e);
        }
        edges.extend(add.iter().copied());
        TaraGraph {
            edges: edges.into_iter().collect(),
            ..self.clone()
        }
    }
}

/// Mutable graph under construction. Starts with the user entity `n0`.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    manual_id: String,
    nodes: Vec<Node>,
    args: Vec<Argument>,
    edges: BTreeSet<Edge>,
}

impl GraphBuilder {
    pub fn new(manual_id: impl Into<String>) -> GraphBuilder {
        GraphBuilder {
            manual_id: manual_id.into(),
            nodes: vec![Node {
                id: NodeId(0),
                kind: NodeKind::Entity,
                label: USER_LABEL.to_string(),
                is_user: true,
                provenance: Provenance::new(),
            }],
            args: Vec::new(),
            edges: BTreeSet::new(),
        }
    }

    pub fn user(&self) -> NodeId {
        NodeId(0)
    }

    fn add_node(&mut self, kind: NodeKind, label: &str, provenance: Provenance) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            kind,
            label: label.to_string(),
            is_user: false,
            provenance,
        });
        id
    }

    pub fn add_action(&mut self, label: &str, provenance: Provenance) -> NodeId {
        self.add_node(NodeKind::Action, label, provenance)
    }

    pub fn add_entity(&mut self, label: &str, provenance: Provenance) -> NodeId {
        self.add_node(NodeKind::Entity, label, provenance)
    }

    pub fn add_arg(
        &mut self,
        owner: impl Into<ElementId>,
        category: ArgCategory,
        value: &str,
        provenance: Provenance,
    ) -> ArgId {
        let id = ArgId(self.args.len() as u32);
        self.args.push(Argument {
            id,
            owner: owner.into(),
            category,
            value: value.to_string(),
            provenance,
        });
        id
    }

    pub fn add_edge(&mut self, kind: EdgeKind, from: impl Into<ElementId>, to: impl Into<ElementId>) {
        self.edges.insert(Edge {
            kind,
            from: from.into(),
            to: to.into(),
        });
    }

    pub fn has_edge(&self, kind: EdgeKind, from: impl Into<ElementId>, to: impl Into<ElementId>) -> bool {
        self.edges.contains(&Edge {
            kind,
            from: from.into(),
            to: to.into(),
        })
    }

    pub fn add_provenance(&mut self, id: ElementId, sentences: &Provenance) {
        let target = match id {
            ElementId::Node(n) => self.nodes.get_mut(n.0 as usize).map(|n| &mut n.provenance),
            ElementId::Arg(a) => self.args.get_mut(a.0 as usize).map(|a| &mut a.provenance),
        };
        if let Some(p) = target {
            p.extend(sentences.iter().copied());
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0 as usize)
    }

    pub fn arg(&self, id: ArgId) -> Option<&Argument> {
        self.args.get(id.0 as usize)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn args(&self) -> &[Argument] {
        &self.args
    }

    /// True when a NEXT path leads from `from` to `to`.
    pub fn next_reachable(&self, from: NodeId, to: NodeId) -> bool {
        let mut adjacency: BTreeMap<ElementId, Vec<ElementId>> = BTreeMap::new();
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Next) {
            adjacency.entry(e.from).or_default().push(e.to);
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![ElementId::Node(from)];
        while let Some(current) = stack.pop() {
            if current == ElementId::Node(to) {
                return true;
            }
            if seen.insert(current) {
                stack.extend(adjacency.get(&current).into_iter().flatten().copied());
            }
        }
        false
    }

    pub fn finish(self) -> TaraGraph {
        TaraGraph::from_parts(None, self.manual_id, self.nodes, self.args, self.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_through_strings() {
        assert_eq!("n12".parse::<NodeId>().unwrap(), NodeId(12));
        assert_eq!("a3".parse::<ElementId>().unwrap(), ElementId::Arg(ArgId(3)));
        assert!("x1".parse::<ElementId>().is_err());
        assert!("n".parse::<NodeId>().is_err());
        assert_eq!(ElementId::Node(NodeId(4)).to_string(), "n4");
    }

    #[test]
    fn element_ordering_puts_nodes_first() {
        assert!(ElementId::Node(NodeId(9)) < ElementId::Arg(ArgId(0)));
        assert!(EdgeKind::Next < EdgeKind::Agt && EdgeKind::Sub < EdgeKind::Pata);
    }

    #[test]
    fn builder_starts_with_user() {
        let g = GraphBuilder::new("m").finish();
        assert_eq!(g.nodes().len(), 1);
        assert!(g.user().unwrap().is_user);
        assert_eq!(g.user().unwrap().label, "user");
    }

    #[test]
    fn graph_id_depends_on_labels_and_manual() {
        let mut a = GraphBuilder::new("m");
        a.add_action("pay", Provenance::from([0]));
        let mut b = GraphBuilder::new("m");
        b.add_action("scan", Provenance::from([0]));
        let mut c = GraphBuilder::new("other");
        c.add_action("pay", Provenance::from([0]));
        let (a, b, c) = (a.finish(), b.finish(), c.finish());
        assert_eq!(a.graph_id().len(), 16);
        assert_ne!(a.graph_id(), b.graph_id());
        assert_ne!(a.graph_id(), c.graph_id());
        // label boundaries matter
        assert_ne!(
            compute_graph_id("m", ["ab", "c"]),
            compute_graph_id("m", ["a", "bc"])
        );
    }

    #[test]
    fn next_reachability() {
        let mut b = GraphBuilder::new("m");
        let x = b.add_action("x", Provenance::from([0]));
        let y = b.add_action("y", Provenance::from([1]));
        let z = b.add_action("z", Provenance::from([2]));
        b.add_edge(EdgeKind::Next, x, y);
        b.add_edge(EdgeKind::Next, y, z);
        assert!(b.next_reachable(x, z));
        assert!(!b.next_reachable(z, x));
        let g = b.finish();
        assert_eq!(g.next_predecessors(z), vec![y]);
        assert_eq!(g.earliest_provenance(), Some(0));
    }
}
