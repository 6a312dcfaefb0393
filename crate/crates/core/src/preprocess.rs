//! First stage of graph construction: normalize each parsed sentence into
//! predicate frames.
//!
//! Three rewrites are applied in order: a synthetic `USER` subject is added
//! to imperative clauses, the offspring of every predicate child are folded
//! into that child to form a phrase, and frames whose patient is the user
//! swap agent and patient so the user keeps the leading role.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::sdp::{ArgCategory, SdpDocument, SdpSentence, SdpTag};

pub const USER_SURFACE: &str = "user";
pub const NEGATION: &str = "negation";

/// Surfaces recognized as the user and auxiliaries that mark a passive
/// predicate. Comparison is case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameConfig {
    pub user_aliases: BTreeSet<String>,
    pub passive_markers: BTreeSet<String>,
}

impl Default for FrameConfig {
    fn default() -> Self {
        let set = |words: &[&str]| words.iter().map(|w| w.to_string()).collect();
        FrameConfig {
            user_aliases: set(&[
                "user", "users", "you", "i", "me", "we", "用户", "您", "你", "我",
            ]),
            passive_markers: set(&["is", "are", "was", "were", "be", "been", "being", "被"]),
        }
    }
}

impl FrameConfig {
    pub fn is_user(&self, label: &str) -> bool {
        self.user_aliases.contains(&label.to_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseToken {
    pub index: u32,
    pub form: String,
    /// How the token hangs inside the phrase: `(head token, tag)`. `None`
    /// for the phrase head.
    pub attach: Option<(u32, SdpTagLabel)>,
    #[serde(default)]
    pub synthetic: bool,
}

/// Serializable form of a tag, kept as its label.
pub type SdpTagLabel = String;

/// A phrase built by folding a predicate child with all of its offspring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phrase {
    pub head: u32,
    /// Sorted by token index.
    pub tokens: Vec<PhraseToken>,
    pub spaced: bool,
}

impl Phrase {
    pub fn single(index: u32, form: &str, spaced: bool) -> Phrase {
        Phrase {
            head: index,
            tokens: vec![PhraseToken {
                index,
                form: form.to_string(),
                attach: None,
                synthetic: false,
            }],
            spaced,
        }
    }

    fn user(index: u32, spaced: bool) -> Phrase {
        let mut p = Phrase::single(index, USER_SURFACE, spaced);
        p.tokens[0].synthetic = true;
        p
    }

    pub fn joiner(&self) -> &'static str {
        if self.spaced {
            " "
        } else {
            ""
        }
    }

    pub fn indices(&self) -> Vec<u32> {
        self.tokens.iter().map(|t| t.index).collect()
    }

    pub fn is_synthetic(&self) -> bool {
        self.tokens.iter().all(|t| t.synthetic)
    }

    pub fn head_form(&self) -> &str {
        self.tokens
            .iter()
            .find(|t| t.index == self.head)
            .map(|t| t.form.as_str())
            .unwrap_or("")
    }

    /// Surface text, all tokens in order.
    pub fn text(&self) -> String {
        join(self.tokens.iter().map(|t| t.form.as_str()), self.joiner())
    }

    fn tag_of(token: &PhraseToken) -> Option<SdpTag> {
        token
            .attach
            .as_ref()
            .map(|(_, label)| SdpTag::known(label).unwrap_or(SdpTag::Extension(label.clone())))
    }

    /// Token indices in the subtree rooted at `root` (inside the phrase).
    pub fn subtree(&self, root: u32) -> BTreeSet<u32> {
        let mut out = BTreeSet::from([root]);
        loop {
            let before = out.len();
            for t in &self.tokens {
                if let Some((head, _)) = &t.attach {
                    if out.contains(head) {
                        out.insert(t.index);
                    }
                }
            }
            if out.len() == before {
                return out;
            }
        }
    }

    fn subtrees_where(&self, pred: impl Fn(&SdpTag) -> bool) -> BTreeSet<u32> {
        self.tokens
            .iter()
            .filter(|t| Self::tag_of(t).is_some_and(|tag| pred(&tag)))
            .flat_map(|t| self.subtree(t.index))
            .collect()
    }

    /// Roots of attributive modifiers (`Desc`, `Feat`).
    pub fn attributive_tokens(&self) -> BTreeSet<u32> {
        self.subtrees_where(SdpTag::is_attributive)
    }

    pub fn has_attributives(&self) -> bool {
        self.tokens
            .iter()
            .any(|t| Self::tag_of(t).is_some_and(|tag| tag.is_attributive()))
    }

    /// The possessor folded into this phrase (`Poss`/`Belg`), if any.
    pub fn possessor(&self) -> Option<Phrase> {
        let root = self.tokens.iter().find(|t| {
            Self::tag_of(t).is_some_and(|tag| matches!(tag, SdpTag::Poss | SdpTag::Belg))
        })?;
        let members = self.subtree(root.index);
        Some(Phrase {
            head: root.index,
            tokens: self
                .tokens
                .iter()
                .filter(|t| members.contains(&t.index))
                .map(|t| PhraseToken {
                    attach: if t.index == root.index {
                        None
                    } else {
                        t.attach.clone()
                    },
                    ..t.clone()
                })
                .collect(),
            spaced: self.spaced,
        })
    }

    /// Content label: the surface without function markers and quantities,
    /// also leaving out the given token indices.
    pub fn label_without(&self, excluded: &BTreeSet<u32>) -> String {
        let skip = self.subtrees_where(|tag| tag.is_function_marker() || tag.is_quantity());
        let label = join(
            self.tokens
                .iter()
                .filter(|t| !excluded.contains(&t.index) && !skip.contains(&t.index))
                .map(|t| t.form.as_str()),
            self.joiner(),
        );
        if label.is_empty() {
            self.head_form().to_string()
        } else {
            label
        }
    }

    pub fn label(&self) -> String {
        self.label_without(&BTreeSet::new())
    }

    /// Label with attributive modifiers removed.
    pub fn base_label(&self) -> String {
        self.label_without(&self.attributive_tokens())
    }

    /// Label with the possessor removed.
    pub fn owned_label(&self) -> String {
        let excluded = self
            .possessor()
            .map(|p| p.indices().into_iter().collect())
            .unwrap_or_default();
        self.label_without(&excluded)
    }
}

fn join<'a>(parts: impl Iterator<Item = &'a str>, joiner: &str) -> String {
    parts.collect::<Vec<_>>().join(joiner)
}

/// A phrase plus its dependencies on other units of the sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub phrase: Phrase,
    pub deps: Vec<(u32, SdpTag)>,
}

impl Unit {
    pub fn id(&self) -> u32 {
        self.phrase.head
    }

    fn has_dep(&self, head: u32, tag: &SdpTag) -> bool {
        self.deps.iter().any(|(h, t)| *h == head && t == tag)
    }
}

/// A sentence under rewriting. Starts with one unit per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkSentence {
    pub index: usize,
    pub text: String,
    pub task_break: bool,
    pub spaced: bool,
    pub units: Vec<Unit>,
}

impl WorkSentence {
    pub fn new(sentence: &SdpSentence, spaced: bool) -> WorkSentence {
        WorkSentence {
            index: sentence.sentence_index,
            text: sentence.raw_text.clone(),
            task_break: sentence.task_break,
            spaced,
            units: sentence
                .tokens
                .iter()
                .map(|t| Unit {
                    phrase: Phrase::single(t.index, &t.form, spaced),
                    deps: t
                        .dependencies
                        .iter()
                        .map(|d| (d.head, d.tag.clone()))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn unit(&self, id: u32) -> Option<&Unit> {
        self.units.iter().find(|u| u.id() == id)
    }

    fn children_of(&self, id: u32) -> impl Iterator<Item = (&Unit, &SdpTag)> {
        self.units.iter().filter_map(move |u| {
            u.deps
                .iter()
                .find(|(h, _)| *h == id)
                .map(|(_, tag)| (u, tag))
        })
    }

    pub fn roots(&self) -> Vec<u32> {
        self.units
            .iter()
            .filter(|u| u.deps.iter().any(|(h, _)| *h == 0))
            .map(Unit::id)
            .collect()
    }

    /// Predicates: roots, units carrying an `Agt` or `Pat` dependent, and
    /// units linked to a predicate by an event relation.
    pub fn predicates(&self) -> BTreeSet<u32> {
        let mut preds: BTreeSet<u32> = self.roots().into_iter().collect();
        for u in &self.units {
            for (head, tag) in &u.deps {
                if matches!(tag, SdpTag::Agt | SdpTag::Pat) && *head != 0 {
                    preds.insert(*head);
                }
            }
        }
        loop {
            let before = preds.len();
            for u in &self.units {
                for (head, tag) in &u.deps {
                    if tag.is_event() && preds.contains(head) {
                        preds.insert(u.id());
                    }
                }
            }
            if preds.len() == before {
                return preds;
            }
        }
    }

    fn next_synthetic_index(&self) -> u32 {
        self.units
            .iter()
            .flat_map(|u| u.phrase.tokens.iter().map(|t| t.index))
            .max()
            .unwrap_or(0)
            + 1
    }
}

/// Gives imperative clauses an explicit `USER` subject.
///
/// A root predicate without an `Agt` dependent receives an `Agt` edge from
/// one synthetic `USER` token. Predicates chained to such a clause by an
/// event relation and lacking their own `Agt` share the subject of their head
/// predicate.
pub fn insert_imperative_subject(mut sentence: WorkSentence) -> WorkSentence {
    let has_agent = |s: &WorkSentence, pred: u32| {
        s.units
            .iter()
            .any(|u| u.has_dep(pred, &SdpTag::Agt))
    };
    let bare_roots: Vec<u32> = sentence
        .roots()
        .into_iter()
        .filter(|r| !has_agent(&sentence, *r))
        .collect();
    if bare_roots.is_empty() {
        return sentence;
    }
    let user_id = sentence.next_synthetic_index();
    sentence.units.push(Unit {
        phrase: Phrase::user(user_id, sentence.spaced),
        deps: bare_roots.iter().map(|r| (*r, SdpTag::Agt)).collect(),
    });

    // propagate subjects along event relations until nothing changes
    let predicates = sentence.predicates();
    loop {
        let mut additions: Vec<(u32, u32)> = Vec::new();
        for pred in &predicates {
            if has_agent(&sentence, *pred) {
                continue;
            }
            let Some(unit) = sentence.unit(*pred) else {
                continue;
            };
            let source = unit
                .deps
                .iter()
                .find(|(h, tag)| tag.is_event() && predicates.contains(h))
                .map(|(h, _)| *h);
            if let Some(source) = source {
                let agents: Vec<u32> = sentence
                    .units
                    .iter()
                    .filter(|u| u.has_dep(source, &SdpTag::Agt))
                    .map(Unit::id)
                    .collect();
                if let Some(agent) = agents.first() {
                    additions.push((*agent, *pred));
                }
            }
        }
        if additions.is_empty() {
            break;
        }
        for (agent, pred) in additions {
            if let Some(u) = sentence.units.iter_mut().find(|u| u.id() == agent) {
                u.deps.push((pred, SdpTag::Agt));
            }
        }
    }
    sentence
}

/// Folds the offspring of each predicate child into the child.
///
/// Predicates are never folded, so a predicate nested under a child keeps
/// its own frame. A token that is itself a direct child of a predicate also
/// keeps its own unit. Surfaces are concatenated in original token order.
pub fn collapse_offspring(sentence: WorkSentence) -> WorkSentence {
    let predicates = sentence.predicates();
    let direct_children: BTreeSet<u32> = sentence
        .units
        .iter()
        .filter(|u| u.deps.iter().any(|(h, _)| predicates.contains(h)))
        .map(Unit::id)
        .collect();
    let keep = |id: u32| predicates.contains(&id) || direct_children.contains(&id);

    // absorber for each folded unit; children processed in token order
    let mut owner: BTreeMap<u32, u32> = BTreeMap::new();
    let mut children: Vec<u32> = direct_children
        .iter()
        .copied()
        .filter(|id| !predicates.contains(id))
        .collect();
    children.sort_unstable();
    for child in &children {
        let mut frontier = vec![*child];
        while let Some(current) = frontier.pop() {
            for u in &sentence.units {
                let id = u.id();
                if keep(id) || owner.contains_key(&id) {
                    continue;
                }
                if u.deps.iter().any(|(h, _)| *h == current) {
                    owner.insert(id, *child);
                    frontier.push(id);
                }
            }
        }
    }
    if owner.is_empty() {
        return sentence;
    }

    let resolve = |id: u32| owner.get(&id).copied().unwrap_or(id);
    let mut merged: BTreeMap<u32, Vec<PhraseToken>> = BTreeMap::new();
    for u in &sentence.units {
        if let Some(target) = owner.get(&u.id()) {
            let mut tokens = u.phrase.tokens.clone();
            // the folded unit's own head now hangs off its original head
            if let Some(head_token) = tokens.iter_mut().find(|t| t.index == u.id()) {
                if let Some((h, tag)) = u.deps.iter().find(|(h, _)| *h != 0) {
                    head_token.attach = Some((*h, tag.as_str().to_string()));
                }
            }
            merged.entry(*target).or_default().extend(tokens);
        }
    }

    let units = sentence
        .units
        .iter()
        .filter(|u| !owner.contains_key(&u.id()))
        .map(|u| {
            let mut phrase = u.phrase.clone();
            if let Some(extra) = merged.remove(&u.id()) {
                phrase.tokens.extend(extra);
                phrase.tokens.sort_by_key(|t| t.index);
            }
            let mut deps: Vec<(u32, SdpTag)> = Vec::new();
            for (h, tag) in &u.deps {
                let h = resolve(*h);
                if h != u.id() && !deps.iter().any(|(dh, dt)| *dh == h && dt == tag) {
                    deps.push((h, tag.clone()));
                }
            }
            Unit { phrase, deps }
        })
        .collect();
    WorkSentence { units, ..sentence }
}

/// The user, possibly mentioned explicitly (and then with its phrase), or
/// any other participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Participant {
    User { mention: Option<Phrase> },
    Other(Phrase),
}

impl Participant {
    pub fn is_user(&self) -> bool {
        matches!(self, Participant::User { .. })
    }

    pub fn phrase(&self) -> Option<&Phrase> {
        match self {
            Participant::User { mention } => mention.as_ref(),
            Participant::Other(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentSlot {
    pub category: ArgCategory,
    pub phrase: Phrase,
    pub tag: String,
    /// Normalized value when the slot has one (`negation` for `mNEG`).
    pub normalized: Option<String>,
}

impl ArgumentSlot {
    pub fn value(&self) -> String {
        self.normalized.clone().unwrap_or_else(|| self.phrase.text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateFrame {
    pub sentence_index: usize,
    /// Index of the task segment the sentence belongs to.
    pub segment: usize,
    pub predicate: Phrase,
    pub agent: Option<Participant>,
    pub patient: Option<Participant>,
    pub argument_slots: Vec<ArgumentSlot>,
    pub reversed: bool,
    pub passive: bool,
    /// Predicates of the same sentence that this one explicitly follows.
    pub after: Vec<u32>,
}

impl PredicateFrame {
    pub fn predicate_label(&self) -> String {
        self.predicate.text().to_lowercase()
    }

    pub fn agent_is_user(&self) -> bool {
        self.agent.as_ref().is_some_and(Participant::is_user)
    }
}

/// Swaps agent and patient when the user sits in the patient role. Frames
/// already marked as reversed are returned unchanged.
pub fn reverse_user_patient(mut frame: PredicateFrame) -> PredicateFrame {
    if frame.reversed || !frame.patient.as_ref().is_some_and(Participant::is_user) {
        return frame;
    }
    std::mem::swap(&mut frame.agent, &mut frame.patient);
    frame.reversed = true;
    frame
}

fn participant(unit: &Unit, config: &FrameConfig) -> Participant {
    let phrase = &unit.phrase;
    if phrase.is_synthetic() {
        Participant::User { mention: None }
    } else if config.is_user(&phrase.base_label()) {
        Participant::User {
            mention: Some(phrase.clone()),
        }
    } else {
        Participant::Other(phrase.clone())
    }
}

fn frames_for_sentence(
    doc: &SdpDocument,
    sentence: &WorkSentence,
    segment: usize,
    config: &FrameConfig,
) -> Vec<PredicateFrame> {
    let predicates = sentence.predicates();
    let mut frames = Vec::new();
    for pred in &predicates {
        let Some(pred_unit) = sentence.unit(*pred) else {
            continue;
        };
        let mut agent = None;
        let mut patient = None;
        let mut slots = Vec::new();
        let mut passive = false;
        let mut after = Vec::new();
        for (child, tag) in sentence.children_of(*pred) {
            match tag {
                SdpTag::Agt if agent.is_none() => agent = Some(participant(child, config)),
                SdpTag::Pat if patient.is_none() && !predicates.contains(&child.id()) => {
                    patient = Some(participant(child, config))
                }
                SdpTag::mAux
                    if config
                        .passive_markers
                        .contains(&child.phrase.text().to_lowercase()) =>
                {
                    passive = true
                }
                // the dependent precedes its head
                SdpTag::ePrec if predicates.contains(&child.id()) => after.push(child.id()),
                _ => {
                    if let Some(category) = doc.arg_category(tag) {
                        if !predicates.contains(&child.id()) {
                            slots.push(ArgumentSlot {
                                category,
                                phrase: child.phrase.clone(),
                                tag: tag.as_str().to_string(),
                                normalized: (*tag == SdpTag::mNEG).then(|| NEGATION.to_string()),
                            });
                        }
                    }
                }
            }
        }
        for (head, tag) in &pred_unit.deps {
            if *tag == SdpTag::eSucc && predicates.contains(head) {
                after.push(*head);
            }
        }
        after.sort_unstable();
        after.dedup();
        let frame = PredicateFrame {
            sentence_index: sentence.index,
            segment,
            predicate: pred_unit.phrase.clone(),
            agent,
            patient,
            argument_slots: slots,
            reversed: false,
            passive,
            after,
        };
        let frame = reverse_user_patient(frame);
        if frame.agent.is_none() {
            log::warn!(
                "sentence {}: predicate `{}` has no agent",
                frame.sentence_index,
                frame.predicate.text()
            );
        }
        frames.push(frame);
    }
    frames
}

/// Runs the full first stage over a document with default settings.
pub fn extract_frames(doc: &SdpDocument) -> Vec<PredicateFrame> {
    extract_frames_with(doc, &FrameConfig::default())
}

pub fn extract_frames_with(doc: &SdpDocument, config: &FrameConfig) -> Vec<PredicateFrame> {
    let mut frames = Vec::new();
    let mut segment = 0usize;
    let mut seen_content = false;
    for sentence in &doc.sentences {
        if sentence.task_break && seen_content {
            segment += 1;
        }
        if sentence.tokens.is_empty() {
            continue;
        }
        seen_content = true;
        let work = WorkSentence::new(sentence, doc.spaced);
        let work = collapse_offspring(insert_imperative_subject(work));
        frames.extend(frames_for_sentence(doc, &work, segment, config));
    }
    frames.sort_by_key(|f| (f.sentence_index, f.predicate.head));
    frames
}

/// Original token indices appearing in the units of a rewritten sentence,
/// synthetic tokens excluded. Each index is listed once per occurrence.
pub fn covered_tokens(sentence: &WorkSentence) -> Vec<u32> {
    let mut out: Vec<u32> = sentence
        .units
        .iter()
        .flat_map(|u| u.phrase.tokens.iter())
        .filter(|t| !t.synthetic)
        .map(|t| t.index)
        .collect();
    out.sort_unstable();
    out
}
