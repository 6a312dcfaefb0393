use std::fmt::Write;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use tara_core::builder::build_document;
use tara_core::eval::{load_corpus, run_eval};
use tara_core::graph::{answer_basic, graphs_to_json, parse_graphs, validate, BasicAnswer};
use tara_core::inference::{answer_question, Answer};
use tara_core::sdp::parse_sdp_document;
use tara_core::{BasicQuestion, ElementId, GraphError, SystemKind, TaraGraph};

use crate::config::{CliConfig, Format};
use crate::CliError;

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn check(graphs: Vec<TaraGraph>) -> Result<Vec<TaraGraph>, CliError> {
    for g in &graphs {
        let violations = validate(g);
        if !violations.is_empty() {
            return Err(GraphError::Invalid {
                graph_id: g.graph_id().to_string(),
                violations,
            }
            .into());
        }
    }
    Ok(graphs)
}

pub fn build_graph(input: &Path, cfg: &CliConfig) -> Result<String, CliError> {
    let doc = parse_sdp_document(&read_text(input)?)?;
    let graphs = build_document(&doc, &cfg.build_config()?)?;
    log::info!("{}: {} graph(s)", doc.manual_id, graphs.len());
    Ok(match cfg.format {
        Format::Json => graphs_to_json(&graphs),
        Format::Table => graphs.iter().map(graph_table).collect::<Vec<_>>().join("\n"),
    })
}

fn graph_table(g: &TaraGraph) -> String {
    let mut out = format!("graph {} ({})\n", g.graph_id(), g.manual_id());
    for n in g.nodes() {
        let _ = writeln!(out, "{:<5} {:?}  {}", n.id.to_string(), n.kind, n.label);
    }
    for a in g.args() {
        let _ = writeln!(out, "{:<5} {} of {}  {}", a.id.to_string(), a.category, a.owner, a.value);
    }
    for e in g.edges() {
        let _ = writeln!(out, "{} {} -> {}", e.kind, e.from, e.to);
    }
    out
}

/// A manual file holds either an SDP document or graphs; graph files are
/// recognised by their `nodes` key.
fn load_manual(path: &Path, cfg: &CliConfig) -> Result<Vec<TaraGraph>, CliError> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| tara_core::SdpError::MalformedInput(format!("{}: {e}", path.display())))?;
    let is_graph = match &value {
        serde_json::Value::Array(items) => items.first().is_some_and(|v| v.get("nodes").is_some()),
        v => v.get("nodes").is_some(),
    };
    if is_graph {
        check(parse_graphs(&text)?)
    } else {
        let doc = parse_sdp_document(&text)?;
        Ok(build_document(&doc, &cfg.build_config()?)?)
    }
}

pub fn answer(manual: &Path, question: &str, cfg: &CliConfig) -> Result<String, CliError> {
    let graphs = load_manual(manual, cfg)?;
    let qdoc = if question == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::io(Path::new("<stdin>"), e))?;
        parse_sdp_document(&text)?
    } else {
        parse_sdp_document(&read_text(Path::new(question))?)?
    };
    let answer = answer_question(&qdoc, &graphs, &cfg.answer_config()?);
    Ok(match cfg.format {
        Format::Json => to_json(&answer),
        Format::Table => answer_table(&answer),
    })
}

fn answer_table(a: &Answer) -> String {
    let mut out = format!("status: {:?}\n", a.status);
    if let Some(c) = &a.conflict {
        let _ = writeln!(out, "conflict: {:?}", c.kind);
    }
    for item in &a.payload {
        let sentences: Vec<String> = item.provenance.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{}\t{}\t[{}]", item.element, item.text, sentences.join(", "));
    }
    if let Some(d) = &a.diagnostic {
        let _ = writeln!(out, "note: {d}");
    }
    out
}

pub fn eval(corpus: &Path, system: SystemKind, cfg: &CliConfig) -> Result<String, CliError> {
    let corpus = load_corpus(corpus)?;
    let report = run_eval(system, &corpus, &cfg.answer_config()?, &cfg.eval_options());
    for n in &report.notices {
        log::warn!("{n}");
    }
    Ok(match cfg.format {
        Format::Json => report.to_json(),
        Format::Table => report.to_table(),
    })
}

#[derive(Serialize)]
struct InspectOutput<'a> {
    graph_id: &'a str,
    question: String,
    context: &'a [ElementId],
    answer: BasicAnswer,
}

pub fn inspect(path: &Path, question: BasicQuestion, ids: &[String], index: usize, cfg: &CliConfig) -> Result<String, CliError> {
    let graphs = check(parse_graphs(&read_text(path)?)?)?;
    let g = graphs
        .get(index)
        .ok_or_else(|| CliError::Usage(format!("{} holds {} graph(s), no index {index}", path.display(), graphs.len())))?;
    let context = ids
        .iter()
        .map(|s| s.parse::<ElementId>().map_err(|_| GraphError::UnknownElement(s.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let answer = answer_basic(g, question, &context)?;
    Ok(match cfg.format {
        Format::Json => to_json(&InspectOutput {
            graph_id: g.graph_id(),
            question: question.to_string(),
            context: &context,
            answer,
        }),
        Format::Table => match answer {
            BasicAnswer::Phrases(p) => p.iter().map(|s| format!("{s}\n")).collect(),
            BasicAnswer::Boolean(b) => format!("{b}\n"),
        },
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}
