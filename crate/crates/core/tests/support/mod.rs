//! Generators and reference implementations shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use tara_core::graph::{EdgeKind, GraphBuilder, Provenance, TaraGraph};
use tara_core::sdp::{Dependency, SdpDocument, SdpSentence, SdpTag, SdpToken};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(rel)
}

const WORDS: &[&str] = &[
    "scan", "pay", "get", "card", "bill", "app", "code", "page", "is", "have", "can", "limited",
    "I", "you", "user", "the", "not", "at", "most", "10", "rate", "hit", "same", "open", "button",
];

const TAGS: &[&str] = &[
    "Agt", "Pat", "Exp", "Poss", "Belg", "Desc", "Feat", "Nmod", "Quan", "Cont", "Datv", "mNEG",
    "mMod", "mRang", "Time", "Loc", "Lfin", "Mann", "Tool", "Clas", "LINK", "eSucc", "ePrec",
    "eCoo", "eCau", "mAux", "mPrep", "mPunc", "mConj",
];

/// A random document that passes SDP validation: every token hangs off a
/// token placed earlier in a random order, so no cycle can form.
pub fn random_document(rng: &mut impl Rng, id: &str) -> SdpDocument {
    let n_sent = rng.gen_range(1..=6);
    let sentences = (0..n_sent)
        .map(|s| {
            let n = rng.gen_range(1..=9u32);
            let mut order: Vec<u32> = (1..=n).collect();
            order.shuffle(rng);
            let mut deps: Vec<Vec<Dependency>> = vec![Vec::new(); n as usize];
            for (pos, &tok) in order.iter().enumerate() {
                let tag = |rng: &mut dyn rand::RngCore| SdpTag::known(TAGS[rng.gen_range(0..TAGS.len())]).unwrap();
                if pos == 0 || rng.gen_bool(0.1) {
                    deps[tok as usize - 1].push(Dependency { head: 0, tag: SdpTag::Root });
                } else {
                    let head = order[rng.gen_range(0..pos)];
                    deps[tok as usize - 1].push(Dependency { head, tag: tag(rng) });
                    if pos > 1 && rng.gen_bool(0.15) {
                        let other = order[rng.gen_range(0..pos)];
                        if other != head {
                            deps[tok as usize - 1].push(Dependency { head: other, tag: tag(rng) });
                        }
                    }
                }
            }
            let tokens: Vec<SdpToken> = deps
                .into_iter()
                .enumerate()
                .map(|(i, d)| SdpToken {
                    index: i as u32 + 1,
                    form: WORDS[rng.gen_range(0..WORDS.len())].to_string(),
                    dependencies: d,
                })
                .collect();
            SdpSentence {
                sentence_index: s,
                raw_text: tokens.iter().map(|t| t.form.as_str()).collect::<Vec<_>>().join(" "),
                task_break: s > 0 && rng.gen_bool(0.2),
                tokens,
            }
        })
        .collect();
    let doc = SdpDocument {
        manual_id: id.to_string(),
        spaced: true,
        sentences,
        tag_extensions: Default::default(),
    };
    doc.validate().expect("generated document is valid");
    doc
}

const LABELS: &[&str] = &[
    "scan", "scan code", "pay", "pay bill", "get", "get card", "scratch", "card", "scratch card",
    "bill", "app", "qr code", "page", "cart",
];

/// A random graph with `actions` Action and `entities` Entity nodes.
pub fn random_graph(rng: &mut impl Rng, id: &str, actions: usize, entities: usize) -> TaraGraph {
    let mut b = GraphBuilder::new(id);
    let user = b.user();
    let mut acts = Vec::new();
    for i in 0..actions {
        let a = b.add_action(LABELS[rng.gen_range(0..LABELS.len())], Provenance::from([i]));
        b.add_edge(EdgeKind::Agt, user, a);
        acts.push(a);
    }
    for w in acts.windows(2) {
        b.add_edge(EdgeKind::Next, w[0], w[1]);
    }
    for i in 0..entities {
        let e = b.add_entity(LABELS[rng.gen_range(0..LABELS.len())], Provenance::from([i]));
        if let Some(a) = acts.choose(rng) {
            b.add_edge(EdgeKind::Pat, *a, e);
        }
    }
    b.finish()
}

/// Full-matrix edit distance over characters.
#[allow(clippy::needless_range_loop)]
pub fn levenshtein_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 0..=a.len() {
        d[i][0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

/// Sentence BLEU written independently: product of precisions rather than
/// a log sum, counts via string keys.
pub fn bleu_oracle(candidate: &str, reference: &str) -> f64 {
    let c: Vec<String> = candidate.to_lowercase().split_whitespace().map(String::from).collect();
    let r: Vec<String> = reference.to_lowercase().split_whitespace().map(String::from).collect();
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let grams = |t: &[String], n: usize| -> HashMap<String, usize> {
        let mut m = HashMap::new();
        for i in 0..(t.len() + 1).saturating_sub(n) {
            *m.entry(t[i..i + n].join("\u{1}")).or_insert(0) += 1;
        }
        m
    };
    let mut product = 1.0;
    for n in 1..=4 {
        let (cg, rg) = (grams(&c, n), grams(&r, n));
        let total: usize = cg.values().sum();
        let hits: usize = cg.iter().map(|(g, k)| *k.min(rg.get(g).unwrap_or(&0))).sum();
        let p = match (n, hits) {
            (1, 0) => return 0.0,
            (_, 0) => 1.0 / (total as f64 + 1.0),
            _ => hits as f64 / total as f64,
        };
        product *= p;
    }
    let bp = if c.len() > r.len() {
        1.0
    } else {
        (1.0 - r.len() as f64 / c.len() as f64).exp()
    };
    bp * product.powf(0.25)
}

use tara_core::preprocess::{ArgumentSlot, Participant, Phrase, PhraseToken, PredicateFrame};
use tara_core::sdp::ArgCategory;

const PREDICATES: &[&str] = &["scan", "pay", "sign in", "open", "get", "is", "have", "limited", "can"];
const NOUNS: &[&str] = &["card", "scratch card", "bill", "app", "code", "rate", "number", "user", "you"];
const MODIFIER_TAGS: &[&str] = &["Nmod", "Desc", "Feat", "Poss", "Belg", "Quan", "mAux"];

fn random_phrase(rng: &mut impl Rng, next: &mut u32, pool: &[&str]) -> Phrase {
    let head = *next;
    *next += 1;
    let mut p = Phrase::single(head, pool[rng.gen_range(0..pool.len())], true);
    if rng.gen_bool(0.4) {
        p.tokens.push(PhraseToken {
            index: *next,
            form: NOUNS[rng.gen_range(0..NOUNS.len())].to_string(),
            attach: Some((head, MODIFIER_TAGS[rng.gen_range(0..MODIFIER_TAGS.len())].to_string())),
            synthetic: false,
        });
        *next += 1;
    }
    p
}

fn random_participant(rng: &mut impl Rng, next: &mut u32) -> Option<Participant> {
    match rng.gen_range(0..4) {
        0 => None,
        1 => Some(Participant::User { mention: None }),
        2 => Some(Participant::User {
            mention: Some(Phrase::single(
                {
                    *next += 1;
                    *next - 1
                },
                "I",
                true,
            )),
        }),
        _ => Some(Participant::Other(random_phrase(rng, next, NOUNS))),
    }
}

/// Frame lists meant to provoke invalid graphs: state verbs with the user as
/// subject or patient, explicit ordering links in both directions, passive
/// and reversed frames, agents that are not the user.
pub fn random_frames(rng: &mut impl Rng) -> Vec<PredicateFrame> {
    let mut frames = Vec::new();
    let mut segment = 0;
    for sentence in 0..rng.gen_range(1..=5) {
        if sentence > 0 && rng.gen_bool(0.2) {
            segment += 1;
        }
        let mut next = 1u32;
        let start = frames.len();
        for _ in 0..rng.gen_range(1..=3) {
            let predicate = random_phrase(rng, &mut next, PREDICATES);
            let agent = random_participant(rng, &mut next);
            let patient = random_participant(rng, &mut next);
            let argument_slots = (0..rng.gen_range(0..=3))
                .map(|_| {
                    let category = [ArgCategory::Mod, ArgCategory::Time, ArgCategory::Loc, ArgCategory::Mann, ArgCategory::Fn]
                        [rng.gen_range(0..5)];
                    let negated = category == ArgCategory::Mod && rng.gen_bool(0.3);
                    ArgumentSlot {
                        category,
                        phrase: random_phrase(rng, &mut next, &["not", "at most", "on the page", "100%", "quickly"]),
                        tag: if negated { "mNEG".into() } else { "Loc".into() },
                        normalized: negated.then(|| "negation".to_string()),
                    }
                })
                .collect();
            frames.push(PredicateFrame {
                sentence_index: sentence,
                segment,
                predicate,
                agent,
                patient,
                argument_slots,
                reversed: rng.gen_bool(0.15),
                passive: rng.gen_bool(0.15),
                after: Vec::new(),
            });
        }
        let heads: Vec<u32> = frames[start..].iter().map(|f| f.predicate.head).collect();
        for f in &mut frames[start..] {
            for h in &heads {
                if *h != f.predicate.head && rng.gen_bool(0.5) {
                    f.after.push(*h);
                }
            }
        }
    }
    frames
}

/// Best total similarity over injective, kind-respecting partial mappings
/// of non-user question nodes, divided by the number of those nodes. No
/// size limit; `None` under the same no-match rules as the matcher.
pub fn exhaustive_aggregate(q: &TaraGraph, m: &TaraGraph, threshold: f64) -> Option<f64> {
    use tara_core::graph::NodeKind;
    use tara_core::matcher::node_similarity;

    fn best(w: &[Vec<Option<f64>>], row: usize, used: &mut Vec<bool>) -> (f64, usize) {
        if row == w.len() {
            return (0.0, 0);
        }
        let mut out = best(w, row + 1, used);
        for c in 0..used.len() {
            if let (false, Some(s)) = (used[c], w[row][c]) {
                used[c] = true;
                let (v, n) = best(w, row + 1, used);
                used[c] = false;
                if v + s > out.0 + 1e-12 {
                    out = (v + s, n + 1);
                }
            }
        }
        out
    }

    let non_user = |g: &TaraGraph, k: NodeKind| -> Vec<String> {
        g.nodes().iter().filter(|n| !n.is_user && n.kind == k).map(|n| n.label.clone()).collect()
    };
    let mut total = 0.0;
    let mut matched = [0usize; 2];
    for (i, kind) in [NodeKind::Action, NodeKind::Entity].into_iter().enumerate() {
        let (qs, ms) = (non_user(q, kind), non_user(m, kind));
        let w: Vec<Vec<Option<f64>>> = qs
            .iter()
            .map(|a| {
                ms.iter()
                    .map(|b| {
                        let s = node_similarity(a, b);
                        (s >= threshold && s > 0.0).then_some(s)
                    })
                    .collect()
            })
            .collect();
        let (v, n) = best(&w, 0, &mut vec![false; ms.len()]);
        total += v;
        matched[i] = n;
    }
    let q_actions = non_user(q, NodeKind::Action).len();
    let q_all = q_actions + non_user(q, NodeKind::Entity).len();
    if q_all == 0 || matched[0] + matched[1] == 0 || (q_actions > 0 && matched[0] == 0) {
        return None;
    }
    Some(total / q_all as f64)
}
