use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use super::{compute_graph_id, ArgCategory, ArgId, EdgeKind, ElementId, NodeId, NodeKind, TaraGraph};

/// One broken invariant, naming the elements involved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UserCount(usize),
    DuplicateId(ElementId),
    EmptyLabel(ElementId),
    MissingProvenance(ElementId),
    DanglingOwner { arg: ArgId, owner: ElementId },
    OwnerCycle(ArgId),
    DanglingEdge { kind: EdgeKind, from: ElementId, to: ElementId },
    /// An argument category on the wrong kind of owner.
    CategoryOnOwner { arg: ArgId, category: ArgCategory },
    /// A child argument whose category does not fit its parent.
    ChildCategory { arg: ArgId, parent: ArgId },
    StateOnUser(ArgId),
    PataOnUser(ArgId),
    EdgeTyping { kind: EdgeKind, from: ElementId, to: ElementId },
    NextCycle(Vec<NodeId>),
    MissingAgt(NodeId),
    GraphIdMismatch { expected: String, found: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UserCount(n) => write!(f, "user count: {n} user entities"),
            Violation::DuplicateId(id) => write!(f, "duplicate id: {id}"),
            Violation::EmptyLabel(id) => write!(f, "empty label: {id}"),
            Violation::MissingProvenance(id) => write!(f, "missing provenance: {id}"),
            Violation::DanglingOwner { arg, owner } => {
                write!(f, "dangling owner: {arg} owned by missing {owner}")
            }
            Violation::OwnerCycle(arg) => write!(f, "owner cycle: {arg}"),
            Violation::DanglingEdge { kind, from, to } => {
                write!(f, "dangling edge: {kind} {from} -> {to}")
            }
            Violation::CategoryOnOwner { arg, category } => {
                write!(f, "category on wrong owner: {category} {arg}")
            }
            Violation::ChildCategory { arg, parent } => {
                write!(f, "child category: {arg} under {parent}")
            }
            Violation::StateOnUser(arg) => write!(f, "STATE on user: {arg}"),
            Violation::PataOnUser(arg) => write!(f, "PATA on user: {arg}"),
            Violation::EdgeTyping { kind, from, to } => {
                write!(f, "{kind} typing: {from} -> {to}")
            }
            Violation::NextCycle(nodes) => {
                let ids: Vec<String> = nodes.iter().map(|n| n.to_string()).collect();
                write!(f, "NEXT cycle: {}", ids.join(" -> "))
            }
            Violation::MissingAgt(n) => write!(f, "missing AGT: {n}"),
            Violation::GraphIdMismatch { expected, found } => {
                write!(f, "graph id mismatch: expected {expected}, found {found}")
            }
        }
    }
}

/// Checks every structural invariant. An empty result means well formed.
pub fn validate(g: &TaraGraph) -> Vec<Violation> {
    let mut out = Vec::new();

    let users: Vec<NodeId> = g.nodes().iter().filter(|n| n.is_user).map(|n| n.id).collect();
    if users.len() != 1 {
        out.push(Violation::UserCount(users.len()));
    }
    let is_user = |id: ElementId| matches!(id, ElementId::Node(n) if users.contains(&n));

    let mut seen = HashSet::new();
    for n in g.nodes() {
        let id = ElementId::Node(n.id);
        if !seen.insert(id) {
            out.push(Violation::DuplicateId(id));
        }
        if n.is_user && n.kind != NodeKind::Entity {
            out.push(Violation::EdgeTyping {
                kind: EdgeKind::Agt,
                from: id,
                to: id,
            });
        }
        if n.label.trim().is_empty() {
            out.push(Violation::EmptyLabel(id));
        }
        if !n.is_user && n.provenance.is_empty() {
            out.push(Violation::MissingProvenance(id));
        }
    }
    for a in g.args() {
        let id = ElementId::Arg(a.id);
        if !seen.insert(id) {
            out.push(Violation::DuplicateId(id));
        }
        if a.value.trim().is_empty() {
            out.push(Violation::EmptyLabel(id));
        }
        if a.provenance.is_empty() {
            out.push(Violation::MissingProvenance(id));
        }
    }

    check_arguments(g, &is_user, &mut out);
    check_edges(g, &is_user, &mut out);

    let expected = compute_graph_id(g.manual_id(), g.nodes().iter().map(|n| n.label.as_str()));
    if expected != g.graph_id() {
        out.push(Violation::GraphIdMismatch {
            expected,
            found: g.graph_id().to_string(),
        });
    }
    out
}

fn check_arguments(g: &TaraGraph, is_user: &dyn Fn(ElementId) -> bool, out: &mut Vec<Violation>) {
    for a in g.args() {
        match a.owner {
            ElementId::Node(n) => match g.node(n) {
                None => out.push(Violation::DanglingOwner {
                    arg: a.id,
                    owner: a.owner,
                }),
                Some(node) => {
                    let fits = match node.kind {
                        NodeKind::Action => a.category.is_action_arg(),
                        NodeKind::Entity => a.category.is_entity_arg(),
                    };
                    if !fits {
                        out.push(Violation::CategoryOnOwner {
                            arg: a.id,
                            category: a.category,
                        });
                    }
                    if a.category == ArgCategory::State && is_user(a.owner) {
                        out.push(Violation::StateOnUser(a.id));
                    }
                }
            },
            ElementId::Arg(p) => match g.arg(p) {
                None => out.push(Violation::DanglingOwner {
                    arg: a.id,
                    owner: a.owner,
                }),
                Some(parent) => {
                    let fits = match parent.category {
                        ArgCategory::Att => a.category.is_entity_arg(),
                        ArgCategory::State => a.category.is_action_arg(),
                        _ => false,
                    };
                    if !fits {
                        out.push(Violation::ChildCategory {
                            arg: a.id,
                            parent: p,
                        });
                    }
                }
            },
        }
        // owner chains must end at a node
        let mut current = a.owner;
        let mut visited = BTreeSet::from([a.id]);
        while let ElementId::Arg(p) = current {
            if !visited.insert(p) {
                out.push(Violation::OwnerCycle(a.id));
                break;
            }
            match g.arg(p) {
                Some(parent) => current = parent.owner,
                None => break,
            }
        }
    }
}

fn check_edges(g: &TaraGraph, is_user: &dyn Fn(ElementId) -> bool, out: &mut Vec<Violation>) {
    let kind_of = |id: ElementId| match id {
        ElementId::Node(n) => g.node(n).map(|n| Some(n.kind)),
        ElementId::Arg(a) => g.arg(a).map(|_| None),
    };
    for e in g.edges() {
        let (Some(from), Some(to)) = (kind_of(e.from), kind_of(e.to)) else {
            out.push(Violation::DanglingEdge {
                kind: e.kind,
                from: e.from,
                to: e.to,
            });
            continue;
        };
        use NodeKind::{Action, Entity};
        let typed = match e.kind {
            EdgeKind::Next => from == Some(Action) && to == Some(Action),
            EdgeKind::Agt => is_user(e.from) && to == Some(Action),
            EdgeKind::Pat => from == Some(Action) && to == Some(Entity),
            EdgeKind::Sub => from == Some(Entity) && to == Some(Entity) && e.from != e.to,
            EdgeKind::Pata => {
                let state = match e.from {
                    ElementId::Arg(a) => g.arg(a).is_some_and(|a| a.category == ArgCategory::State),
                    ElementId::Node(_) => false,
                };
                state && to == Some(Entity)
            }
        };
        if !typed {
            out.push(Violation::EdgeTyping {
                kind: e.kind,
                from: e.from,
                to: e.to,
            });
        }
        if e.kind == EdgeKind::Pata && is_user(e.to) {
            if let ElementId::Arg(a) = e.from {
                out.push(Violation::PataOnUser(a));
            }
        }
    }

    for action in g.actions() {
        let has_agt = g
            .edges_of(EdgeKind::Agt)
            .any(|e| e.to == ElementId::Node(action.id) && is_user(e.from));
        if !has_agt {
            out.push(Violation::MissingAgt(action.id));
        }
    }

    if let Some(cycle) = next_cycle(g) {
        out.push(Violation::NextCycle(cycle));
    }
}

/// Finds one NEXT cycle, if any, listing its nodes from the smallest id.
fn next_cycle(g: &TaraGraph) -> Option<Vec<NodeId>> {
    let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for e in g.edges_of(EdgeKind::Next) {
        if let (ElementId::Node(a), ElementId::Node(b)) = (e.from, e.to) {
            adjacency.entry(a).or_default().push(b);
        }
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<NodeId, Mark> = BTreeMap::new();
    let starts: Vec<NodeId> = adjacency.keys().copied().collect();
    for start in starts {
        if marks.contains_key(&start) {
            continue;
        }
        let mut path: Vec<NodeId> = vec![start];
        let mut iters: Vec<usize> = vec![0];
        marks.insert(start, Mark::Open);
        while let Some(&node) = path.last() {
            let i = *iters.last().unwrap();
            let next = adjacency.get(&node).and_then(|v| v.get(i)).copied();
            *iters.last_mut().unwrap() += 1;
            match next {
                Some(n) => match marks.get(&n) {
                    Some(Mark::Open) => {
                        let pos = path.iter().position(|p| *p == n).unwrap();
                        let mut cycle = path[pos..].to_vec();
                        let min = cycle.iter().enumerate().min_by_key(|(_, id)| **id).unwrap().0;
                        cycle.rotate_left(min);
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(n, Mark::Open);
                        path.push(n);
                        iters.push(0);
                    }
                },
                None => {
                    marks.insert(node, Mark::Done);
                    path.pop();
                    iters.pop();
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn base() -> (GraphBuilder, NodeId, NodeId, NodeId) {
        let mut b = GraphBuilder::new("m");
        let user = b.user();
        let x = b.add_action("x", Provenance::from([0]));
        let y = b.add_action("y", Provenance::from([1]));
        let card = b.add_entity("card", Provenance::from([1]));
        b.add_edge(EdgeKind::Agt, user, x);
        b.add_edge(EdgeKind::Agt, user, y);
        b.add_edge(EdgeKind::Pat, y, card);
        b.add_edge(EdgeKind::Next, x, y);
        (b, x, y, card)
    }

    #[test]
    fn well_formed_graph_is_clean() {
        let (b, ..) = base();
        assert_eq!(validate(&b.finish()), vec![]);
    }

    #[test]
    fn state_on_user_is_reported() {
        let (mut b, ..) = base();
        let user = b.user();
        let s = b.add_arg(user, ArgCategory::State, "have", Provenance::from([2]));
        let v = validate(&b.finish());
        assert_eq!(v, vec![Violation::StateOnUser(s)]);
        assert!(v[0].to_string().starts_with("STATE on user"));
    }

    #[test]
    fn pata_on_user_is_reported() {
        let (mut b, _, _, card) = base();
        let s = b.add_arg(card, ArgCategory::State, "limited", Provenance::from([2]));
        b.add_edge(EdgeKind::Pata, s, b.user());
        assert_eq!(validate(&b.finish()), vec![Violation::PataOnUser(s)]);
    }

    #[test]
    fn next_cycle_is_reported() {
        let (mut b, x, y, _) = base();
        b.add_edge(EdgeKind::Next, y, x);
        let v = validate(&b.finish());
        assert_eq!(v, vec![Violation::NextCycle(vec![x, y])]);
        assert!(v[0].to_string().starts_with("NEXT cycle"));
    }

    #[test]
    fn agt_typing_is_enforced() {
        let (mut b, x, _, card) = base();
        b.add_edge(EdgeKind::Agt, card, x);
        let v = validate(&b.finish());
        assert_eq!(
            v,
            vec![Violation::EdgeTyping {
                kind: EdgeKind::Agt,
                from: card.into(),
                to: x.into()
            }]
        );
    }

    #[test]
    fn action_without_agent_is_reported() {
        let (mut b, ..) = base();
        let z = b.add_action("z", Provenance::from([3]));
        assert_eq!(validate(&b.finish()), vec![Violation::MissingAgt(z)]);
    }

    #[test]
    fn argument_typing_is_enforced() {
        let (mut b, x, _, card) = base();
        let bad = b.add_arg(x, ArgCategory::Fn, "100%", Provenance::from([0]));
        let att = b.add_arg(card, ArgCategory::Att, "rate", Provenance::from([1]));
        let child = b.add_arg(att, ArgCategory::Loc, "here", Provenance::from([1]));
        let leaf = b.add_arg(x, ArgCategory::Mod, "can", Provenance::from([0]));
        let under_leaf = b.add_arg(leaf, ArgCategory::Mod, "not", Provenance::from([0]));
        let v = validate(&b.finish());
        assert_eq!(
            v,
            vec![
                Violation::CategoryOnOwner {
                    arg: bad,
                    category: ArgCategory::Fn
                },
                Violation::ChildCategory { arg: child, parent: att },
                Violation::ChildCategory {
                    arg: under_leaf,
                    parent: leaf
                },
            ]
        );
    }

    #[test]
    fn dangling_references_and_tampered_id() {
        let (b, x, ..) = base();
        let g = b.finish();
        let broken = TaraGraph::from_parts(
            Some("0000000000000000".into()),
            "m",
            g.nodes().to_vec(),
            vec![Argument {
                id: ArgId(0),
                owner: ElementId::Node(NodeId(42)),
                category: ArgCategory::Mod,
                value: "v".into(),
                provenance: Provenance::from([0]),
            }],
            g.edges().iter().copied().chain([Edge {
                kind: EdgeKind::Next,
                from: x.into(),
                to: NodeId(99).into(),
            }]),
        );
        let v = validate(&broken);
        assert!(v.contains(&Violation::DanglingOwner {
            arg: ArgId(0),
            owner: NodeId(42).into()
        }));
        assert!(v.iter().any(|x| matches!(x, Violation::DanglingEdge { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::GraphIdMismatch { .. })));
    }

    #[test]
    fn user_count_and_labels() {
        let g = TaraGraph::from_parts(
            None,
            "m",
            vec![Node {
                id: NodeId(0),
                kind: NodeKind::Entity,
                label: " ".into(),
                is_user: false,
                provenance: Provenance::new(),
            }],
            vec![],
            vec![],
        );
        let v = validate(&g);
        assert!(v.contains(&Violation::UserCount(0)));
        assert!(v.contains(&Violation::EmptyLabel(NodeId(0).into())));
        assert!(v.contains(&Violation::MissingProvenance(NodeId(0).into())));
    }
}
