use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{parse_graphs, validate, TaraGraph};
use crate::sdp::{parse_sdp_document, SdpDocument};

#[derive(Debug, Error)]
#[error("malformed corpus: {}{}: {message}", file.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
pub struct CorpusError {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl CorpusError {
    fn new(file: &Path, line: Option<usize>, message: impl Into<String>) -> Self {
        CorpusError {
            file: file.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionType {
    Factoid,
    Procedure,
    Inconsistent,
}

impl QuestionType {
    pub const ALL: [QuestionType; 3] = [QuestionType::Factoid, QuestionType::Procedure, QuestionType::Inconsistent];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::Factoid => "factoid",
            QuestionType::Procedure => "procedure",
            QuestionType::Inconsistent => "inconsistent",
        }
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One line of `questions.jsonl`. `parse` optionally carries the question's
/// own SDP parse, needed by graph-based answering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaRecord {
    pub manual_id: String,
    pub question: String,
    pub gold_sentences: Vec<usize>,
    #[serde(rename = "type")]
    pub qtype: QuestionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse: Option<SdpDocument>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manual {
    pub id: String,
    pub sentences: Vec<String>,
    /// Present for `.sdp.json` manuals.
    pub parse: Option<SdpDocument>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub manuals: BTreeMap<String, Manual>,
    pub questions: Vec<QaRecord>,
    pub gold_graphs: BTreeMap<String, Vec<TaraGraph>>,
}

impl Corpus {
    pub fn manual(&self, id: &str) -> Option<&Manual> {
        self.manuals.get(id)
    }

    pub fn has_gold_graphs(&self) -> bool {
        !self.gold_graphs.is_empty()
    }
}

fn read(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|e| CorpusError::new(path, None, e.to_string()))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CorpusError::new(dir, None, e.to_string()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    out.sort();
    Ok(out)
}

fn file_name(path: &Path) -> &str {
    path.file_name().and_then(|n| n.to_str()).unwrap_or("")
}

fn load_manual(path: &Path) -> Result<Option<Manual>, CorpusError> {
    let name = file_name(path);
    if let Some(id) = name.strip_suffix(".sdp.json") {
        let doc = parse_sdp_document(&read(path)?).map_err(|e| CorpusError::new(path, None, e.to_string()))?;
        if doc.manual_id != id {
            return Err(CorpusError::new(
                path,
                None,
                format!("manual_id `{}` does not match file name", doc.manual_id),
            ));
        }
        Ok(Some(Manual {
            id: id.to_string(),
            sentences: doc.sentences.iter().map(|s| s.raw_text.clone()).collect(),
            parse: Some(doc),
        }))
    } else if let Some(id) = name.strip_suffix(".txt") {
        let sentences: Vec<String> = read(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        Ok(Some(Manual {
            id: id.to_string(),
            sentences,
            parse: None,
        }))
    } else {
        log::warn!("ignoring {}", path.display());
        Ok(None)
    }
}

fn parse_record(path: &Path, line: usize, text: &str, manuals: &BTreeMap<String, Manual>) -> Result<QaRecord, CorpusError> {
    let err = |m: String| CorpusError::new(path, Some(line), m);
    let rec: QaRecord = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let manual = manuals
        .get(&rec.manual_id)
        .ok_or_else(|| err(format!("unknown manual `{}`", rec.manual_id)))?;
    if rec.gold_sentences.is_empty() {
        return Err(err("gold_sentences is empty".into()));
    }
    if let Some(bad) = rec.gold_sentences.iter().find(|i| **i >= manual.sentences.len()) {
        return Err(err(format!(
            "gold sentence {bad} is beyond manual `{}` ({} sentences)",
            manual.id,
            manual.sentences.len()
        )));
    }
    if let Some(p) = &rec.parse {
        p.validate().map_err(|e| err(format!("question parse: {e}")))?;
    }
    Ok(rec)
}

/// Loads and validates a corpus directory: `manuals/<id>.sdp.json` or
/// `manuals/<id>.txt`, `questions.jsonl`, and optionally
/// `gold_graphs/<id>.tara.json`.
pub fn load_corpus(root: &Path) -> Result<Corpus, CorpusError> {
    let manual_dir = root.join("manuals");
    if !manual_dir.is_dir() {
        return Err(CorpusError::new(&manual_dir, None, "missing manuals directory"));
    }
    let mut manuals = BTreeMap::new();
    for path in sorted_entries(&manual_dir)? {
        if let Some(m) = load_manual(&path)? {
            if manuals.contains_key(&m.id) {
                return Err(CorpusError::new(&path, None, format!("duplicate manual `{}`", m.id)));
            }
            manuals.insert(m.id.clone(), m);
        }
    }

    let qpath = root.join("questions.jsonl");
    let mut questions = Vec::new();
    for (n, line) in read(&qpath)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        questions.push(parse_record(&qpath, n + 1, line, &manuals)?);
    }

    let mut gold_graphs = BTreeMap::new();
    let gold_dir = root.join("gold_graphs");
    if gold_dir.is_dir() {
        for path in sorted_entries(&gold_dir)? {
            let Some(id) = file_name(&path).strip_suffix(".tara.json") else {
                log::warn!("ignoring {}", path.display());
                continue;
            };
            if !manuals.contains_key(id) {
                return Err(CorpusError::new(&path, None, format!("no manual `{id}`")));
            }
            let graphs = parse_graphs(&read(&path)?).map_err(|e| CorpusError::new(&path, None, e.to_string()))?;
            for g in &graphs {
                if g.manual_id() != id {
                    return Err(CorpusError::new(&path, None, format!("graph for manual `{}`", g.manual_id())));
                }
                let violations = validate(g);
                if let Some(v) = violations.first() {
                    return Err(CorpusError::new(&path, None, format!("graph {}: {v}", g.graph_id())));
                }
            }
            gold_graphs.insert(id.to_string(), graphs);
        }
    }
    Ok(Corpus {
        manuals,
        questions,
        gold_graphs,
    })
}
