//! Second stage of graph construction: turn predicate frames into TARA
//! graphs.
//!
//! Active predicates of the user become Action nodes chained by NEXT.
//! Patients become Entity nodes, near-duplicate entity labels are merged,
//! attributive mentions spawn SUB entities, and everything else (state verbs,
//! predicates of other agents, attributes of possessed entities) becomes
//! ATT/STATE/FN arguments.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::graph::{ArgId, EdgeKind, ElementId, GraphBuilder, NodeId, Provenance, TaraGraph};
use crate::matcher::node_similarity;
use crate::preprocess::{
    extract_frames_with, ArgumentSlot, FrameConfig, Participant, Phrase, PredicateFrame,
};
use crate::sdp::{ArgCategory, SdpDocument};

pub const DEFAULT_MERGE_THRESHOLD: f64 = 0.8;
pub const REVERSE: &str = "reverse";

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("manual `{0}` yields no Action node")]
    NoActionFound(String),
    #[error("state-verb lexicon is empty")]
    EmptyLexicon,
    #[error("cannot read lexicon {path}: {source}")]
    LexiconIo {
        path: String,
        source: std::io::Error,
    },
}

/// Predicates treated as state verbs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVerbLexicon {
    surfaces: BTreeSet<String>,
}

impl Default for StateVerbLexicon {
    fn default() -> Self {
        StateVerbLexicon::new([
            "have", "has", "had", "having", "be", "is", "am", "are", "was", "were", "been",
            "being", "有", "是",
        ])
        .expect("default lexicon is non-empty")
    }
}

impl StateVerbLexicon {
    pub fn new<S: AsRef<str>>(surfaces: impl IntoIterator<Item = S>) -> Result<Self, BuildError> {
        let surfaces: BTreeSet<String> = surfaces
            .into_iter()
            .map(|s| s.as_ref().trim().to_lowercase())
            .filter(|s| !s.is_empty())
            .collect();
        if surfaces.is_empty() {
            return Err(BuildError::EmptyLexicon);
        }
        Ok(StateVerbLexicon { surfaces })
    }

    /// One phrase per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, BuildError> {
        StateVerbLexicon::new(text.lines().map(|l| l.split('#').next().unwrap_or("")))
    }

    pub fn from_file(path: &Path) -> Result<Self, BuildError> {
        let text = std::fs::read_to_string(path).map_err(|source| BuildError::LexiconIo {
            path: path.display().to_string(),
            source,
        })?;
        StateVerbLexicon::parse(&text)
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.surfaces.contains(&phrase.trim().to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub lexicon: StateVerbLexicon,
    pub merge_threshold: f64,
    pub frames: FrameConfig,
    /// Build a graph even when no Action node arises (used for questions).
    pub allow_no_action: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            lexicon: StateVerbLexicon::default(),
            merge_threshold: DEFAULT_MERGE_THRESHOLD,
            frames: FrameConfig::default(),
            allow_no_action: false,
        }
    }
}

/// A group of merged entity labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityGroup {
    pub canonical: String,
    /// In input order.
    pub members: Vec<String>,
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32, 0x3040..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0xAC00..=0xD7AF)
}

/// True when `short` names the head of `long`: its tokens are a suffix of
/// `long`'s, all equal except the last, which only needs to be similar.
/// Labels written in an unspaced script compare by character suffix.
fn suffix_head(short: &str, long: &str, threshold: f64) -> bool {
    let all_cjk = |s: &str| !s.is_empty() && s.chars().all(is_cjk);
    if all_cjk(short) && all_cjk(long) {
        return long.ends_with(short);
    }
    let s: Vec<&str> = short.split_whitespace().collect();
    let l: Vec<&str> = long.split_whitespace().collect();
    if s.is_empty() || s.len() > l.len() {
        return false;
    }
    let tail = &l[l.len() - s.len()..];
    let last = s.len() - 1;
    s[..last] == tail[..last] && node_similarity(s[last], tail[last]) >= threshold
}

fn same_entity(a: &str, b: &str, threshold: f64) -> bool {
    let (short, long) = if a.chars().count() <= b.chars().count() {
        (a, b)
    } else {
        (b, a)
    };
    node_similarity(a, b) >= threshold || suffix_head(short, long, threshold)
}

/// Groups labels that name the same entity. Groups appear in order of
/// their first member; each canonical label is the longest member (the
/// earliest one on ties).
pub fn merge_entities<S: AsRef<str>>(labels: &[S], threshold: f64) -> Vec<EntityGroup> {
    let labels: Vec<&str> = labels.iter().map(|s| s.as_ref()).collect();
    let mut parent: Vec<usize> = (0..labels.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            if same_entity(labels[i], labels[j], threshold) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..labels.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups
        .into_values()
        .map(|members| {
            let mut canonical = members[0];
            for &m in &members {
                if labels[m].chars().count() > labels[canonical].chars().count() {
                    canonical = m;
                }
            }
            EntityGroup {
                canonical: labels[canonical].to_string(),
                members: members.iter().map(|&m| labels[m].to_string()).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum EntityRef {
    User,
    Base(String),
    Sub(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum End {
    Action(usize),
    Entity(EntityRef),
    Arg(usize),
}

struct PendingArg {
    owner: End,
    category: ArgCategory,
    value: String,
    sentence: usize,
}

/// Graph content with symbolic entity references, before merging and id
/// assignment.
#[derive(Default)]
struct Draft {
    actions: Vec<(String, usize)>,
    mentions: Vec<(EntityRef, usize)>,
    args: Vec<PendingArg>,
    edges: Vec<(EdgeKind, End, End)>,
    next: Vec<(usize, usize)>,
}

impl Draft {
    fn mention(&mut self, r: EntityRef, sentence: usize) -> End {
        if r != EntityRef::User {
            self.mentions.push((r.clone(), sentence));
        }
        End::Entity(r)
    }

    fn arg(&mut self, owner: End, category: ArgCategory, value: String, sentence: usize) -> End {
        self.args.push(PendingArg {
            owner,
            category,
            value,
            sentence,
        });
        End::Arg(self.args.len() - 1)
    }

    fn edge(&mut self, kind: EdgeKind, from: End, to: End) {
        self.edges.push((kind, from, to));
    }

    fn next_reachable(&self, from: usize, to: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(cur) = stack.pop() {
            if cur == to {
                return true;
            }
            if seen.insert(cur) {
                stack.extend(self.next.iter().filter(|(a, _)| *a == cur).map(|(_, b)| *b));
            }
        }
        false
    }
}

struct FrameBuilder<'a> {
    config: &'a BuildConfig,
    draft: Draft,
    /// Action index for each `(sentence, predicate token)`.
    action_at: BTreeMap<(usize, u32), usize>,
    /// Explicit precedence links `(sentence, earlier predicate, action)`.
    after: Vec<(usize, u32, usize)>,
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

impl<'a> FrameBuilder<'a> {
    fn new(config: &'a BuildConfig) -> Self {
        FrameBuilder {
            config,
            draft: Draft::default(),
            action_at: BTreeMap::new(),
            after: Vec::new(),
        }
    }

    /// The entity standing for a participant. Attributive mentions produce
    /// a SUB entity pointing at the bare one.
    fn entity(&mut self, p: &Participant, sentence: usize) -> End {
        match p {
            Participant::User { mention } => match mention {
                Some(phrase) if phrase.has_attributives() => {
                    let sub = self
                        .draft
                        .mention(EntityRef::Sub(lower(&phrase.label())), sentence);
                    self.draft
                        .edge(EdgeKind::Sub, sub.clone(), End::Entity(EntityRef::User));
                    sub
                }
                _ => End::Entity(EntityRef::User),
            },
            Participant::Other(phrase) => self.phrase_entity(phrase, sentence),
        }
    }

    fn phrase_entity(&mut self, phrase: &Phrase, sentence: usize) -> End {
        let base_label = lower(&phrase.base_label());
        let base = if self.config.frames.is_user(&base_label) {
            End::Entity(EntityRef::User)
        } else {
            self.draft.mention(EntityRef::Base(base_label), sentence)
        };
        if !phrase.has_attributives() {
            return base;
        }
        let sub = self
            .draft
            .mention(EntityRef::Sub(lower(&phrase.label())), sentence);
        self.draft.edge(EdgeKind::Sub, sub.clone(), base);
        sub
    }

    fn slot_args(&mut self, owner: &End, slots: &[&ArgumentSlot], sentence: usize) {
        for slot in slots {
            self.draft
                .arg(owner.clone(), slot.category, slot.value(), sentence);
        }
    }

    fn add_frame(&mut self, frame: &PredicateFrame) {
        let s = frame.sentence_index;
        let pred_label = frame.predicate_label();
        let state_verb = self.config.lexicon.contains(&pred_label);
        let action_slots: Vec<&ArgumentSlot> = frame
            .argument_slots
            .iter()
            .filter(|a| a.category.is_action_arg())
            .collect();
        let fn_slots: Vec<&ArgumentSlot> = frame
            .argument_slots
            .iter()
            .filter(|a| a.category == ArgCategory::Fn)
            .collect();

        if frame.agent_is_user() && frame.passive {
            // the user's role is passive: only the patient survives
            if let Some(patient) = &frame.patient {
                self.entity(patient, s);
            }
            log::debug!("sentence {s}: passive predicate `{pred_label}` kept as entity only");
            return;
        }

        if frame.agent_is_user() && !state_verb {
            let idx = self.draft.actions.len();
            self.draft.actions.push((pred_label, s));
            self.action_at.insert((s, frame.predicate.head), idx);
            let action = End::Action(idx);
            // an attributive mention still yields its SUB entity
            self.entity(frame.agent.as_ref().expect("user agent"), s);
            self.draft
                .edge(EdgeKind::Agt, End::Entity(EntityRef::User), action.clone());
            self.slot_args(&action, &action_slots, s);
            if frame.reversed {
                self.draft
                    .arg(action.clone(), ArgCategory::Mod, REVERSE.to_string(), s);
            }
            let patient = frame.patient.as_ref().map(|p| self.entity(p, s));
            if let Some(patient) = &patient {
                self.draft.edge(EdgeKind::Pat, action.clone(), patient.clone());
            }
            match &patient {
                Some(p) => self.slot_args(p, &fn_slots, s),
                None if !fn_slots.is_empty() => {
                    log::debug!("sentence {s}: FN slot of `{}` has no entity", frame.predicate.text())
                }
                None => {}
            }
            for pred in &frame.after {
                self.after.push((s, *pred, idx));
            }
            return;
        }

        self.add_state_frame(frame, state_verb, &action_slots, &fn_slots);
    }

    fn add_state_frame(
        &mut self,
        frame: &PredicateFrame,
        state_verb: bool,
        action_slots: &[&ArgumentSlot],
        fn_slots: &[&ArgumentSlot],
    ) {
        let s = frame.sentence_index;
        let value = frame.predicate.text();
        let linking = state_verb && frame.patient.is_none() && !fn_slots.is_empty();
        let patient = frame.patient.as_ref().map(|p| self.entity(p, s));

        // the subject: the agent, or the patient of an agentless predicate
        let subject = match (&frame.agent, &patient) {
            (Some(agent), _) => self.subject(agent, s),
            (None, Some(p)) => Some(p.clone()),
            (None, None) => None,
        };
        let Some(subject) = subject else {
            log::info!("sentence {s}: predicate `{value}` has nothing to attach to");
            return;
        };
        let subject_is_user = subject == End::Entity(EntityRef::User);

        if linking {
            self.slot_args(&subject, fn_slots, s);
            return;
        }
        if subject_is_user {
            log::info!("sentence {s}: STATE `{value}` of the user dropped");
            return;
        }
        let state = self.draft.arg(subject.clone(), ArgCategory::State, value, s);
        self.slot_args(&state, action_slots, s);
        match &patient {
            Some(p) if *p != subject => {
                if *p != End::Entity(EntityRef::User) {
                    self.draft.edge(EdgeKind::Pata, state.clone(), p.clone());
                }
                self.slot_args(p, fn_slots, s);
            }
            _ => self.slot_args(&subject, fn_slots, s),
        }
    }

    /// Owner for the arguments of a state frame. A possessed agent turns
    /// into an ATT argument of its possessor.
    fn subject(&mut self, agent: &Participant, s: usize) -> Option<End> {
        if let Participant::Other(phrase) = agent {
            if let Some(possessor) = phrase.possessor() {
                let owner = self.phrase_entity(&possessor, s);
                let att = self
                    .draft
                    .arg(owner, ArgCategory::Att, phrase.owned_label(), s);
                return Some(att);
            }
        }
        Some(self.entity(agent, s))
    }

    fn link_actions(&mut self) {
        for (s, pred, idx) in std::mem::take(&mut self.after) {
            if let Some(&prev) = self.action_at.get(&(s, pred)) {
                if !self.draft.next_reachable(idx, prev) {
                    self.draft.next.push((prev, idx));
                }
            }
        }
        for i in 1..self.draft.actions.len() {
            let (a, b) = (i - 1, i);
            let linked = self
                .draft
                .next
                .iter()
                .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a));
            if !linked && !self.draft.next_reachable(b, a) {
                self.draft.next.push((a, b));
            }
        }
    }

    fn finish(mut self, manual_id: &str) -> TaraGraph {
        self.link_actions();
        let draft = self.draft;

        let mut base_labels: Vec<String> = Vec::new();
        for (r, _) in &draft.mentions {
            if let EntityRef::Base(l) = r {
                if !base_labels.contains(l) {
                    base_labels.push(l.clone());
                }
            }
        }
        let mut canonical: BTreeMap<String, String> = BTreeMap::new();
        for group in merge_entities(&base_labels, self.config.merge_threshold) {
            for m in group.members {
                canonical.insert(m, group.canonical.clone());
            }
        }
        let resolve = |r: &EntityRef| match r {
            EntityRef::Base(l) => EntityRef::Base(canonical.get(l).cloned().unwrap_or_else(|| l.clone())),
            other => other.clone(),
        };

        let mut b = GraphBuilder::new(manual_id);
        let actions: Vec<NodeId> = draft
            .actions
            .iter()
            .map(|(label, s)| b.add_action(label, Provenance::from([*s])))
            .collect();
        let mut entities: BTreeMap<EntityRef, NodeId> = BTreeMap::new();
        entities.insert(EntityRef::User, b.user());
        for (r, s) in &draft.mentions {
            let r = resolve(r);
            let id = match entities.get(&r) {
                Some(id) => *id,
                None => {
                    let label = match &r {
                        EntityRef::Base(l) | EntityRef::Sub(l) => l.clone(),
                        EntityRef::User => unreachable!("user is never mentioned"),
                    };
                    let id = b.add_entity(&label, Provenance::new());
                    entities.insert(r.clone(), id);
                    id
                }
            };
            b.add_provenance(id.into(), &Provenance::from([*s]));
        }

        let mut arg_ids: Vec<ArgId> = Vec::with_capacity(draft.args.len());
        let element = |end: &End, arg_ids: &[ArgId]| -> ElementId {
            match end {
                End::Action(i) => actions[*i].into(),
                End::Entity(r) => entities[&resolve(r)].into(),
                End::Arg(i) => arg_ids[*i].into(),
            }
        };
        for a in &draft.args {
            let owner = element(&a.owner, &arg_ids);
            let id = b.add_arg(owner, a.category, &a.value, Provenance::from([a.sentence]));
            arg_ids.push(id);
        }
        for (kind, from, to) in &draft.edges {
            let (from, to) = (element(from, &arg_ids), element(to, &arg_ids));
            if from != to {
                b.add_edge(*kind, from, to);
            }
        }
        for (x, y) in &draft.next {
            b.add_edge(EdgeKind::Next, actions[*x], actions[*y]);
        }
        b.finish()
    }
}

/// Builds one graph per task segment. A segment without Action nodes is
/// folded into its predecessor (or its successor when it comes first).
pub fn build(
    manual_id: &str,
    frames: &[PredicateFrame],
    config: &BuildConfig,
) -> Result<Vec<TaraGraph>, BuildError> {
    let is_action = |f: &PredicateFrame| {
        f.agent_is_user() && !f.passive && !config.lexicon.contains(&f.predicate_label())
    };
    let mut segments: Vec<(usize, Vec<&PredicateFrame>)> = Vec::new();
    for f in frames {
        match segments.last_mut() {
            Some((seg, list)) if *seg == f.segment => list.push(f),
            _ => segments.push((f.segment, vec![f])),
        }
    }
    let total_actions = frames.iter().filter(|f| is_action(f)).count();
    if total_actions == 0 {
        if !config.allow_no_action {
            log::warn!("manual `{manual_id}`: no Action node, no graph built");
            return Err(BuildError::NoActionFound(manual_id.to_string()));
        }
        let mut fb = FrameBuilder::new(config);
        for f in frames {
            fb.add_frame(f);
        }
        return Ok(vec![fb.finish(manual_id)]);
    }

    let mut groups: Vec<Vec<&PredicateFrame>> = Vec::new();
    let mut pending: Vec<&PredicateFrame> = Vec::new();
    for (_, list) in segments {
        let has_action = list.iter().any(|f| is_action(f));
        match (has_action, groups.last_mut()) {
            (false, Some(last)) => last.extend(list),
            (false, None) => pending.extend(list),
            (true, _) => {
                let mut group = std::mem::take(&mut pending);
                group.extend(list);
                groups.push(group);
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|group| {
            let mut fb = FrameBuilder::new(config);
            for f in group {
                fb.add_frame(f);
            }
            fb.finish(manual_id)
        })
        .collect())
}

/// Extracts frames from a document and builds its graphs.
pub fn build_document(doc: &SdpDocument, config: &BuildConfig) -> Result<Vec<TaraGraph>, BuildError> {
    let frames = extract_frames_with(doc, &config.frames);
    build(&doc.manual_id, &frames, config)
}
