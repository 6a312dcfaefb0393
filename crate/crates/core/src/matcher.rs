//! Node similarity and node-only matching of a question graph against a
//! manual graph.
//!
//! Matching is an assignment problem solved separately for Actions and
//! Entities: the sum of pair similarities is maximized subject to
//! injectivity, and pairs below the threshold are not allowed. Among optimal
//! assignments the lexicographically first one wins, with question nodes
//! taken in id order and manual candidates ranked by earliest provenance
//! sentence, then id.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Node, NodeId, NodeKind, TaraGraph};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const BRUTE_FORCE_MAX_QUESTION: usize = 6;
pub const BRUTE_FORCE_MAX_MANUAL: usize = 8;
const EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("brute force limited to {max_q} question and {max_m} manual nodes, got {q} and {m}")]
    SizeGuardExceeded {
        q: usize,
        m: usize,
        max_q: usize,
        max_m: usize,
    },
}

/// Unit-cost edit distance over characters.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - levenshtein(x, y) / max(|x|, |y|)` with lengths in characters, and
/// 1 when both strings are empty.
pub fn node_similarity(x: &str, y: &str) -> f64 {
    let longest = x.chars().count().max(y.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(x, y) as f64 / longest as f64
}

/// Pluggable label similarity. Scores must lie in `[0, 1]`.
pub trait Similarity: Sync {
    fn similarity(&self, x: &str, y: &str) -> f64;
}

/// The default edit-distance similarity.
#[derive(Debug, Clone, Copy, Default)]
pub struct EditSimilarity;

impl Similarity for EditSimilarity {
    fn similarity(&self, x: &str, y: &str) -> f64 {
        node_similarity(x, y)
    }
}

impl<F: Fn(&str, &str) -> f64 + Sync> Similarity for F {
    fn similarity(&self, x: &str, y: &str) -> f64 {
        self(x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchPair {
    pub question: NodeId,
    pub manual: NodeId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    /// Sorted by question node id.
    pub pairs: Vec<MatchPair>,
    /// Sum of pair scores over the number of non-user question nodes.
    pub aggregate: f64,
    pub manual_graph_id: String,
}

impl Matching {
    pub fn manual_for(&self, question: NodeId) -> Option<NodeId> {
        self.pairs
            .iter()
            .find(|p| p.question == question)
            .map(|p| p.manual)
    }
}

fn candidates(g: &TaraGraph, kind: NodeKind) -> Vec<&Node> {
    g.nodes()
        .iter()
        .filter(|n| n.kind == kind && !n.is_user)
        .collect()
}

fn rank_key(n: &Node) -> (usize, NodeId) {
    (n.provenance.first().copied().unwrap_or(usize::MAX), n.id)
}

/// Weight matrix for one kind. `None` marks pairs that may not be matched.
/// Manual nodes are sorted by rank.
struct Problem<'a> {
    question: Vec<&'a Node>,
    manual: Vec<&'a Node>,
    weights: Vec<Vec<Option<f64>>>,
}

impl<'a> Problem<'a> {
    fn new(
        q: &'a TaraGraph,
        m: &'a TaraGraph,
        kind: NodeKind,
        threshold: f64,
        sim: &dyn Similarity,
    ) -> Problem<'a> {
        let question = candidates(q, kind);
        let mut manual = candidates(m, kind);
        manual.sort_by_key(|n| rank_key(n));
        let weights = question
            .iter()
            .map(|qn| {
                manual
                    .iter()
                    .map(|mn| {
                        let s = sim.similarity(&qn.label, &mn.label);
                        (s >= threshold && s > 0.0).then_some(s)
                    })
                    .collect()
            })
            .collect();
        Problem {
            question,
            manual,
            weights,
        }
    }
}

/// Minimum-cost assignment of every row to a distinct column
/// (`rows <= cols`). Returns the column of each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    debug_assert!(n <= m);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Best total weight when `rows` are matched into the unused `cols`.
fn optimum(weights: &[Vec<Option<f64>>], rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    // each row also gets a private zero-weight column meaning "unmatched"
    let width = cols.len() + rows.len();
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| {
            let mut line: Vec<f64> = cols.iter().map(|&c| -weights[r][c].unwrap_or(0.0)).collect();
            line.extend(std::iter::repeat_n(0.0, rows.len()));
            debug_assert_eq!(line.len(), width);
            line
        })
        .collect();
    let assignment = hungarian(&cost);
    assignment
        .iter()
        .enumerate()
        .filter(|(_, &c)| c < cols.len())
        .map(|(i, &c)| weights[rows[i]][cols[c]].unwrap_or(0.0))
        .sum()
}

/// Lexicographically first assignment among those within `EPS` of the
/// optimum. Entries are manual column indices, `None` for unmatched.
fn solve(problem: &Problem) -> Vec<Option<usize>> {
    let rows: Vec<usize> = (0..problem.question.len()).collect();
    let all_cols: Vec<usize> = (0..problem.manual.len()).collect();
    let best = optimum(&problem.weights, &rows, &all_cols);
    let mut chosen: Vec<Option<usize>> = Vec::with_capacity(rows.len());
    let mut used = vec![false; problem.manual.len()];
    let mut fixed = 0.0;
    for r in 0..rows.len() {
        let rest: Vec<usize> = (r + 1..rows.len()).collect();
        let mut pick = None;
        for c in 0..problem.manual.len() {
            let Some(w) = problem.weights[r][c] else {
                continue;
            };
            if used[c] {
                continue;
            }
            let free: Vec<usize> = all_cols.iter().copied().filter(|&x| !used[x] && x != c).collect();
            if fixed + w + optimum(&problem.weights, &rest, &free) >= best - EPS {
                pick = Some((c, w));
                break;
            }
        }
        match pick {
            Some((c, w)) => {
                used[c] = true;
                fixed += w;
                chosen.push(Some(c));
            }
            None => chosen.push(None),
        }
    }
    chosen
}

fn assemble(
    q: &TaraGraph,
    m: &TaraGraph,
    mut pairs: Vec<MatchPair>,
) -> Option<Matching> {
    pairs.sort_by_key(|p| p.question);
    let question_nodes: Vec<&Node> = q.nodes().iter().filter(|n| !n.is_user).collect();
    if question_nodes.is_empty() || pairs.is_empty() {
        return None;
    }
    let has_actions = question_nodes.iter().any(|n| n.kind == NodeKind::Action);
    let matched_action = pairs.iter().any(|p| {
        q.node(p.question)
            .is_some_and(|n| n.kind == NodeKind::Action)
    });
    if has_actions && !matched_action {
        return None;
    }
    let total: f64 = pairs.iter().map(|p| p.score).sum();
    Some(Matching {
        aggregate: total / question_nodes.len() as f64,
        pairs,
        manual_graph_id: m.graph_id().to_string(),
    })
}

/// Matches `q` into `m` with the default edit similarity. `None` means no
/// match: no question Action found a partner, or, for a question without
/// Actions, no node did.
pub fn match_subgraph(q: &TaraGraph, m: &TaraGraph, threshold: f64) -> Option<Matching> {
    match_subgraph_with(q, m, threshold, &EditSimilarity)
}

pub fn match_subgraph_with(
    q: &TaraGraph,
    m: &TaraGraph,
    threshold: f64,
    sim: &dyn Similarity,
) -> Option<Matching> {
    let mut pairs = Vec::new();
    for kind in [NodeKind::Action, NodeKind::Entity] {
        let problem = Problem::new(q, m, kind, threshold, sim);
        for (r, c) in solve(&problem).into_iter().enumerate() {
            if let Some(c) = c {
                pairs.push(MatchPair {
                    question: problem.question[r].id,
                    manual: problem.manual[c].id,
                    score: problem.weights[r][c].unwrap_or(0.0),
                });
            }
        }
    }
    assemble(q, m, pairs)
}

/// Exhaustive reference for [`match_subgraph`] on small graphs, enumerating
/// every injective kind-respecting partial mapping.
pub fn brute_force_match(
    q: &TaraGraph,
    m: &TaraGraph,
    threshold: f64,
) -> Result<Option<Matching>, MatchError> {
    brute_force_match_with(q, m, threshold, &EditSimilarity)
}

pub fn brute_force_match_with(
    q: &TaraGraph,
    m: &TaraGraph,
    threshold: f64,
    sim: &dyn Similarity,
) -> Result<Option<Matching>, MatchError> {
    let (qn, mn) = (q.nodes().len(), m.nodes().len());
    if qn > BRUTE_FORCE_MAX_QUESTION || mn > BRUTE_FORCE_MAX_MANUAL {
        return Err(MatchError::SizeGuardExceeded {
            q: qn,
            m: mn,
            max_q: BRUTE_FORCE_MAX_QUESTION,
            max_m: BRUTE_FORCE_MAX_MANUAL,
        });
    }
    let mut pairs = Vec::new();
    for kind in [NodeKind::Action, NodeKind::Entity] {
        let problem = Problem::new(q, m, kind, threshold, sim);
        let mut all = Vec::new();
        enumerate(&problem, 0, &mut vec![false; problem.manual.len()], &mut Vec::new(), &mut all);
        let best = all.iter().map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max);
        // enumeration order is lexicographic, so the first near-best wins
        if let Some((_, assignment)) = all.into_iter().find(|(v, _)| *v >= best - EPS) {
            for (r, c) in assignment.into_iter().enumerate() {
                if let Some(c) = c {
                    pairs.push(MatchPair {
                        question: problem.question[r].id,
                        manual: problem.manual[c].id,
                        score: problem.weights[r][c].unwrap_or(0.0),
                    });
                }
            }
        }
    }
    Ok(assemble(q, m, pairs))
}

fn enumerate(
    problem: &Problem,
    row: usize,
    used: &mut Vec<bool>,
    current: &mut Vec<Option<usize>>,
    out: &mut Vec<(f64, Vec<Option<usize>>)>,
) {
    if row == problem.question.len() {
        let value = current
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.and_then(|c| problem.weights[r][c]))
            .sum();
        out.push((value, current.clone()));
        return;
    }
    for c in 0..problem.manual.len() {
        if used[c] || problem.weights[row][c].is_none() {
            continue;
        }
        used[c] = true;
        current.push(Some(c));
        enumerate(problem, row + 1, used, current, out);
        current.pop();
        used[c] = false;
    }
    current.push(None);
    enumerate(problem, row + 1, used, current, out);
    current.pop();
}
