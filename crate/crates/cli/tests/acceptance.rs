//! One line per acceptance criterion; exits non-zero when any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use support::{bleu_oracle, exhaustive_aggregate, fixture, levenshtein_oracle, random_frames, random_graph};
use tara_core::baselines::KeywordFeatures;
use tara_core::builder::{build, build_document, BuildConfig, StateVerbLexicon};
use tara_core::eval::{at1_prf, bleu_prf, evaluate_basic, span_prf, Prf};
use tara_core::graph::{load_graphs_file, validate, BasicQuestion, Edge, EdgeKind, ElementId, TaraGraph};
use tara_core::inference::{answer_question, AnswerConfig, AnswerStatus};
use tara_core::matcher::{brute_force_match, levenshtein, match_subgraph, node_similarity, DEFAULT_THRESHOLD};
use tara_core::preprocess::Participant;
use tara_core::sdp::{load_sdp_file, SdpDocument};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn manual_graphs() -> Vec<TaraGraph> {
    let doc = load_sdp_file(&fixture("scratch_card.sdp.json")).unwrap();
    build_document(&doc, &BuildConfig::default()).unwrap()
}

fn question(name: &str) -> SdpDocument {
    load_sdp_file(&fixture(&format!("questions/{name}.sdp.json"))).unwrap()
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let graphs = manual_graphs();
    let cfg = AnswerConfig::default();
    let expected: [(&str, &[&str], &[usize]); 3] = [
        ("q1", &["100%"], &[4]),
        ("q2", &["on the payment page"], &[2]),
        ("q3", &["pay", "have", "can", "at most", "total number", "limited"], &[2, 5, 6]),
    ];
    for (name, values, sentences) in expected {
        let a = answer_question(&question(name), &graphs, &cfg);
        ensure!(a.status == AnswerStatus::Answered, "{name}: status {:?}", a.status);
        ensure!(a.values() == values, "{name}: values {:?}", a.values());
        ensure!(a.ranked_sentences() == sentences, "{name}: sentences {:?}", a.ranked_sentences());
    }
    // the location comes from the step right before scratching
    let g = &graphs[0];
    let a = answer_question(&question("q2"), &graphs, &cfg);
    let owner = match a.payload[0].element {
        ElementId::Arg(id) => g.arg(id).unwrap().owner,
        other => return Err(format!("q2 answer is not an argument: {other}")),
    };
    let scratch = g.nodes().iter().find(|n| n.label == "scratch").unwrap().id;
    ensure!(g.has_edge(EdgeKind::Next, owner, scratch), "q2 answer owner {owner} does not precede scratch");
    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    Ok(format!("Q1/Q2/Q3 exact, {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn graph_validity() -> Outcome {
    let lexicon = StateVerbLexicon::default();
    let config = BuildConfig {
        allow_no_action: true,
        ..BuildConfig::default()
    };
    let mut graphs = 0;
    let (mut state_user, mut state_user_patient, mut mutual_after, mut foreign_agent) = (0, 0, 0, 0);
    for seed in 0..100u64 {
        let frames = random_frames(&mut StdRng::seed_from_u64(seed));
        for f in &frames {
            let state = lexicon.contains(&f.predicate_label());
            state_user += usize::from(state && f.agent_is_user());
            state_user_patient += usize::from(state && matches!(f.patient, Some(Participant::User { .. })));
            foreign_agent += usize::from(matches!(f.agent, Some(Participant::Other(_))));
            mutual_after += frames
                .iter()
                .filter(|o| {
                    o.sentence_index == f.sentence_index
                        && f.after.contains(&o.predicate.head)
                        && o.after.contains(&f.predicate.head)
                })
                .count();
        }
        for g in build("adversarial", &frames, &config).map_err(|e| format!("seed {seed}: {e}"))? {
            let v = validate(&g);
            ensure!(v.is_empty(), "seed {seed}: {v:?}");
            graphs += 1;
        }
    }
    ensure!(
        state_user > 0 && state_user_patient > 0 && mutual_after > 0 && foreign_agent > 0,
        "generator did not exercise every hazard"
    );
    Ok(format!(
        "100 frame lists, {graphs} graphs, 0 violations (state/user subject {state_user}, state/user patient {state_user_patient}, ordering cycles {}, non-user agents {foreign_agent})",
        mutual_after / 2
    ))
}

fn matcher_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut pairs, mut worst) = (0, 1.0f64);
    for _ in 0..600 {
        let (qa, qe, ma, me) = (rng.gen_range(0..=3), rng.gen_range(0..=2), rng.gen_range(1..=4), rng.gen_range(0..=3));
        let q = random_graph(&mut rng, "q", qa, qe);
        let m = random_graph(&mut rng, "m", ma, me);
        let fast = match_subgraph(&q, &m, DEFAULT_THRESHOLD).map(|x| x.aggregate);
        let slow = brute_force_match(&q, &m, DEFAULT_THRESHOLD)
            .map_err(|e| e.to_string())?
            .map(|x| x.aggregate);
        ensure!(fast.is_some() == slow.is_some(), "match/no-match disagreement");
        if let (Some(f), Some(s)) = (fast, slow) {
            ensure!(f >= 0.99 * s - 1e-9, "aggregate {f} below 0.99 x {s}");
            worst = worst.min(if s > 0.0 { f / s } else { 1.0 });
        }
        pairs += 1;
    }

    let mut fixtures = 0;
    let manual = manual_graphs();
    let qcfg = BuildConfig {
        allow_no_action: true,
        ..BuildConfig::default()
    };
    let coffee = build_document(
        &load_sdp_file(&fixture("corpus/manuals/coffee-machine.sdp.json")).unwrap(),
        &BuildConfig::default(),
    )
    .unwrap();
    let corpus = tara_core::eval::load_corpus(&fixture("corpus")).unwrap();
    for rec in corpus.questions.iter().filter(|r| r.parse.is_some()) {
        let q = &build_document(rec.parse.as_ref().unwrap(), &qcfg).unwrap()[0];
        let graphs = if rec.manual_id == "coffee-machine" { &coffee } else { &manual };
        for m in graphs {
            let fast = match_subgraph(q, m, DEFAULT_THRESHOLD).map(|x| x.aggregate);
            let exact = exhaustive_aggregate(q, m, DEFAULT_THRESHOLD);
            ensure!(
                match (fast, exact) {
                    (Some(f), Some(e)) => (f - e).abs() < 1e-9,
                    (None, None) => true,
                    _ => false,
                },
                "fixture {}: {fast:?} vs {exact:?}",
                rec.question
            );
            if let Ok(b) = brute_force_match(q, m, DEFAULT_THRESHOLD) {
                ensure!(fast.map(|f| (f - b.unwrap().aggregate).abs() < 1e-9).unwrap_or(true), "guarded oracle differs");
            }
            fixtures += 1;
        }
    }
    Ok(format!("{pairs} random pairs, worst ratio {worst:.6}; {fixtures} fixture pairs exact"))
}

fn similarity_properties() -> Outcome {
    let alphabet: Vec<char> = "abcde 刮卡码".chars().collect();
    let mut rng = StdRng::seed_from_u64(11);
    let word = |rng: &mut StdRng| -> String {
        (0..rng.gen_range(0..=12)).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
    };
    for _ in 0..10_000 {
        let (a, b) = (word(&mut rng), word(&mut rng));
        let s = node_similarity(&a, &b);
        ensure!(s == node_similarity(&b, &a), "asymmetric on {a:?} {b:?}");
        ensure!((0.0..=1.0).contains(&s), "out of range on {a:?} {b:?}");
        ensure!(node_similarity(&a, &a) == 1.0, "self similarity of {a:?}");
        ensure!(levenshtein(&a, &b) == levenshtein_oracle(&a, &b), "distance differs on {a:?} {b:?}");
        let longest = a.chars().count().max(b.chars().count());
        if longest > 0 {
            let expected = 1.0 - levenshtein_oracle(&a, &b) as f64 / longest as f64;
            ensure!((s - expected).abs() < 1e-9, "similarity formula on {a:?} {b:?}");
        }
    }
    Ok("10000 pairs: symmetric, reflexive, in [0,1], distance equals DP oracle".into())
}

fn metric_arithmetic() -> Outcome {
    let set = |v: &[usize]| -> BTreeSet<usize> { v.iter().copied().collect() };
    let triple = |p: Prf| (p.p, p.r, p.f1);
    ensure!(triple(span_prf(&set(&[2, 3]), &set(&[3, 4]))) == (0.5, 0.5, 0.5), "span {{2,3}} vs {{3,4}}");
    ensure!(triple(span_prf(&set(&[1, 5]), &set(&[1, 5]))) == (1.0, 1.0, 1.0), "span identical");
    ensure!(triple(span_prf(&set(&[]), &set(&[1]))) == (0.0, 0.0, 0.0), "span empty");
    let top = at1_prf(&[3, 7], &set(&[3, 4]));
    ensure!(top.p == 1.0 && top.r == 0.5 && (top.f1 - 2.0 / 3.0).abs() < 1e-15, "at1 half recall");
    ensure!(triple(at1_prf(&[], &set(&[1]))) == (0.0, 0.0, 0.0), "at1 empty");
    ensure!(triple(at1_prf(&[9], &set(&[9]))) == (1.0, 1.0, 1.0), "at1 single");

    let words = ["sign", "in", "the", "app", "scan", "code", "pay", "bill", "card"];
    let mut rng = StdRng::seed_from_u64(5);
    let phrase = |rng: &mut StdRng| -> String {
        (0..rng.gen_range(1..=7)).map(|_| words[rng.gen_range(0..words.len())]).collect::<Vec<_>>().join(" ")
    };
    let mut worst = 0.0f64;
    let mut samples = vec![(vec!["sign in app".to_string()], vec!["sign in the app".to_string()])];
    while samples.len() < 50 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        samples.push(((0..n).map(|_| phrase(&mut rng)).collect(), (0..m).map(|_| phrase(&mut rng)).collect()));
    }
    for (pred, gold) in &samples {
        let got = bleu_prf(pred, gold);
        let p = pred.iter().map(|a| gold.iter().map(|b| bleu_oracle(a, b)).fold(0.0, f64::max)).sum::<f64>() / pred.len() as f64;
        let r = gold.iter().map(|b| pred.iter().map(|a| bleu_oracle(a, b)).fold(0.0, f64::max)).sum::<f64>() / gold.len() as f64;
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        worst = worst.max((got.p - p).abs()).max((got.r - r).abs()).max((got.f1 - f).abs());
    }
    ensure!(worst < 1e-6, "BLEU deviates by {worst}");
    Ok(format!("6 hand triples exact; 50 BLEU samples, max deviation {worst:.1e}"))
}

fn keyword_formula() -> Outcome {
    let hand = KeywordFeatures {
        kq: 2,
        ka: 1,
        both: 1,
        subtree: 1,
        d_max: 4,
    };
    ensure!(hand.score() == 72.0, "expected 72, got {}", hand.score());
    let far = KeywordFeatures {
        d_max: 9,
        ..KeywordFeatures::default()
    };
    ensure!(far.score() == -12.0, "expected -12, got {}", far.score());
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..1000 {
        let f = KeywordFeatures {
            kq: rng.gen_range(0..20),
            ka: rng.gen_range(0..20),
            both: rng.gen_range(0..20),
            subtree: rng.gen_range(0..20),
            d_max: rng.gen_range(0..100),
        };
        let mut g = f;
        let step = rng.gen_range(1..5);
        match rng.gen_range(0..5) {
            0 => g.kq += step,
            1 => g.ka += step,
            2 => g.both += step,
            3 => g.subtree += step,
            _ => {
                g.d_max += step;
                ensure!(g.score() <= f.score(), "distance raised the score");
                continue;
            }
        }
        ensure!(g.score() >= f.score(), "a count lowered the score");
    }
    Ok("72 and -12 exact; 1000 perturbations monotone".into())
}

fn basic_round_trip() -> Outcome {
    let built = manual_graphs();
    let gold = load_graphs_file(&fixture("corpus/gold_graphs/scratch-card.tara.json")).unwrap();
    let scores = evaluate_basic(&built, &gold);
    for q in BasicQuestion::ALL {
        ensure!(scores.get(q).map(|s| s.f1) == Some(1.0), "{q}: {:?}", scores.get(q));
    }
    let g = &built[0];
    let next: Vec<Edge> = g.edges().iter().filter(|e| e.kind == EdgeKind::Next).copied().collect();
    let corrupted = g.with_edges(
        &[next[0]],
        &[Edge {
            kind: EdgeKind::Next,
            from: next[0].from,
            to: next[2].to,
        }],
    );
    let after = evaluate_basic(&[corrupted], &gold);
    let dropped: Vec<BasicQuestion> = BasicQuestion::ALL
        .into_iter()
        .filter(|q| after.get(*q) != scores.get(*q))
        .collect();
    ensure!(dropped == [BasicQuestion::B6], "changed: {dropped:?}");
    let b6 = after.get(BasicQuestion::B6).unwrap();
    ensure!(b6.f1 < 1.0, "B6 did not drop");
    Ok(format!("B1..B9 F1 = 1; corrupted NEXT edge leaves only B6 changed (F1 {:.3})", b6.f1))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = fixture("corpus");
    let mut checked = Vec::new();
    for system in ["hum", "lexical", "keyword"] {
        let mut reports = Vec::new();
        for jobs in ["1", "8"] {
            let out = dir.path().join(format!("{system}-{jobs}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_tara"))
                .args(["eval", corpus.to_str().unwrap(), "--system", system, "--jobs", jobs, "--out"])
                .arg(&out)
                .env_remove("TARA_FORMAT")
                .env("RUST_LOG", "error")
                .status()
                .map_err(|e| e.to_string())?;
            ensure!(status.success(), "tara eval --system {system} --jobs {jobs} failed");
            reports.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure!(reports[0] == reports[1], "{system}: reports differ between --jobs 1 and --jobs 8");
        checked.push(format!("{system} {} bytes", reports[0].len()));
    }
    Ok(format!("--jobs 1 and --jobs 8 byte-identical ({})", checked.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("worked-example fidelity", worked_example),
        ("graph validity", graph_validity),
        ("matcher oracle", matcher_oracle),
        ("similarity properties", similarity_properties),
        ("metric arithmetic", metric_arithmetic),
        ("keyword formula", keyword_formula),
        ("basic-question round trip", basic_round_trip),
        ("evaluation determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
