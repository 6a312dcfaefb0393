use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

fn tara(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tara"))
        .args(args)
        .env_remove("TARA_FORMAT")
        .env_remove("TARA_THRESHOLD")
        .output()
        .unwrap()
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn answer_where_question() {
    let manual = fixture("scratch_card.sdp.json");
    let q = fixture("questions/q2.sdp.json");
    let out = tara(&["answer", "--manual", path(&manual), "--question", path(&q)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["status"], "Answered");
    assert_eq!(v["payload"][0]["text"], "on the payment page");
}

#[test]
fn answer_from_graph_file_and_stdin() {
    use std::io::Write;
    let manual = fixture("corpus/gold_graphs/scratch-card.tara.json");
    let mut child = Command::new(env!("CARGO_BIN_EXE_tara"))
        .args(["answer", "--manual", path(&manual), "--question", "-", "-vv"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let q = std::fs::read(fixture("questions/q1.sdp.json")).unwrap();
    child.stdin.take().unwrap().write_all(&q).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["payload"][0]["text"], "100%");
}

#[test]
fn eval_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = tara(&["eval", path(&fixture("corpus")), "--system", "lexical", "--out", path(&report)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["system"], "lexical");
    assert_eq!(v["questions"], 6);
    assert_eq!(v["averaging"], "micro");
    assert!(v["bleu_alignment"].as_str().unwrap().contains("BLEU"));
}

#[test]
fn eval_hum_table_has_basic_scores() {
    let out = tara(&["eval", path(&fixture("corpus")), "--format", "table", "--averaging", "macro"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("averaging: Macro"));
    assert!(text.contains("B9"));
    assert!(text.lines().any(|l| l.starts_with("overall")));
}

#[test]
fn cyclic_parse_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cyc.sdp.json");
    std::fs::write(
        &file,
        r#"{"manual_id": "x", "sentences": [{"index": 0, "text": "a b", "tokens": [
            {"i": 1, "form": "a", "deps": [[2, "Pat"]]}, {"i": 2, "form": "b", "deps": [[1, "Agt"]]}]}]}"#,
    )
    .unwrap();
    let out = tara(&["build-graph", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_CYCLIC_DEPENDENCY"));
}

#[test]
fn manual_without_actions_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("state.sdp.json");
    std::fs::write(
        &file,
        r#"{"manual_id": "s", "sentences": [{"index": 0, "text": "rate is high", "tokens": [
            {"i": 1, "form": "rate", "deps": [[2, "Agt"]]}, {"i": 2, "form": "is", "deps": [[0, "Root"]]},
            {"i": 3, "form": "high", "deps": [[2, "Clas"]]}]}]}"#,
    )
    .unwrap();
    let out = tara(&["build-graph", path(&file)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_NO_ACTION_FOUND"));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = tara(&["build-graph", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_IO"));
}

#[test]
fn build_graph_matches_gold() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("g.json");
    let out = tara(&["build-graph", path(&fixture("scratch_card.sdp.json")), "--out", path(&out_file)]);
    assert!(out.status.success());
    let built: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    let gold: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("corpus/gold_graphs/scratch-card.tara.json")).unwrap())
            .unwrap();
    assert_eq!(built, serde_json::Value::Array(vec![gold]));
}

#[test]
fn inspect_lists_and_checks() {
    let g = fixture("corpus/gold_graphs/scratch-card.tara.json");
    let out = tara(&["inspect", path(&g), "B1", "--format", "table"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "sign in\nscan\npay\nget\nscratch\n");
    let out = tara(&["inspect", path(&g), "B9", "a3", "n9"]);
    assert_eq!(stdout_json(&out)["answer"], true);
    let out = tara(&["inspect", path(&g), "B6", "n2", "n1"]);
    assert_eq!(stdout_json(&out)["answer"], false);
    let out = tara(&["inspect", path(&g), "B4", "n99"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_UNKNOWN_ELEMENT"));
    let out = tara(&["inspect", path(&g), "B10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_overrides_flags_and_env_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tara.toml");
    std::fs::write(&cfg, "format = \"table\"\n").unwrap();
    let g = fixture("corpus/gold_graphs/scratch-card.tara.json");
    let out = tara(&["--config", path(&cfg), "inspect", path(&g), "B1", "--format", "json"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("sign in\n"));

    let out = Command::new(env!("CARGO_BIN_EXE_tara"))
        .args(["inspect", path(&g), "B1"])
        .env("TARA_FORMAT", "table")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("sign in\n"));

    std::fs::write(&cfg, "threshold = 3.0\n").unwrap();
    let out = tara(&["--config", path(&cfg), "inspect", path(&g), "B1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_CONFIG"));
}

#[test]
fn help_lists_subcommands() {
    let out = tara(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in ["build-graph", "answer", "eval", "inspect"] {
        assert!(text.contains(cmd), "{cmd}");
    }
    for flag in ["--threshold", "--merge-threshold", "--lexicon", "--jobs", "--format"] {
        assert!(text.contains(flag), "{flag}");
    }
}
