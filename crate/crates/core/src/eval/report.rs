use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::basic::BasicScores;
use super::corpus::QuestionType;
use super::metrics::Prf;

pub const BLEU_ALIGNMENT: &str =
    "mean over items of the best sentence BLEU against the other side (up to 4-grams, add-one smoothing above unigrams, brevity penalty)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Per-question precision and recall averaged over all questions.
    #[default]
    Micro,
    /// Per-type averages averaged over the question types present.
    Macro,
}

impl FromStr for Averaging {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "micro" => Ok(Averaging::Micro),
            "macro" => Ok(Averaging::Macro),
            _ => Err(format!("unknown averaging `{s}` (expected micro or macro)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FaqScores {
    pub span: Prf,
    pub at1: Prf,
}

impl FaqScores {
    pub fn mean(items: &[FaqScores]) -> FaqScores {
        let span: Vec<Prf> = items.iter().map(|s| s.span).collect();
        let at1: Vec<Prf> = items.iter().map(|s| s.at1).collect();
        FaqScores {
            span: Prf::mean(&span),
            at1: Prf::mean(&at1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeScores {
    pub count: usize,
    #[serde(flatten)]
    pub scores: FaqScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    /// Position in `questions.jsonl`, counting non-empty lines from 0.
    pub index: usize,
    pub manual_id: String,
    #[serde(rename = "type")]
    pub qtype: QuestionType,
    pub ranked: Vec<usize>,
    pub gold: Vec<usize>,
    #[serde(flatten)]
    pub scores: FaqScores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub system: String,
    pub averaging: Averaging,
    pub bleu_alignment: String,
    pub questions: usize,
    pub answered: usize,
    pub overall: FaqScores,
    pub per_type: BTreeMap<QuestionType, TypeScores>,
    pub per_question: Vec<QuestionResult>,
    /// Basic-question scores, when gold graphs were available.
    pub basic: Option<BasicScores>,
    pub notices: Vec<String>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_table(&self) -> String {
        let fmt = |v: f64| format!("{v:.4}");
        let mut rows: Vec<[String; 8]> = vec![[
            "type", "n", "P", "R", "F1", "P@1", "R@1", "F1@1",
        ]
        .map(String::from)];
        let row = |name: &str, n: usize, s: &FaqScores| {
            [
                name.to_string(),
                n.to_string(),
                fmt(s.span.p),
                fmt(s.span.r),
                fmt(s.span.f1),
                fmt(s.at1.p),
                fmt(s.at1.r),
                fmt(s.at1.f1),
            ]
        };
        for (t, s) in &self.per_type {
            rows.push(row(t.as_str(), s.count, &s.scores));
        }
        rows.push(row("overall", self.questions, &self.overall));

        let mut out = String::new();
        let _ = writeln!(
            out,
            "system: {}  averaging: {:?}  answered: {}/{}",
            self.system, self.averaging, self.answered, self.questions
        );
        out.push_str(&align(&rows));
        if let Some(basic) = &self.basic {
            let mut rows: Vec<[String; 4]> = vec![["question", "P", "R", "F1"].map(String::from)];
            for (q, s) in &basic.scores {
                rows.push(match s {
                    Some(s) => [q.clone(), fmt(s.p), fmt(s.r), fmt(s.f1)],
                    None => [q.clone(), "n/a".into(), "n/a".into(), "n/a".into()],
                });
            }
            out.push('\n');
            out.push_str(&align(&rows));
        }
        for n in &self.notices {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

fn align<const N: usize>(rows: &[[String; N]]) -> String {
    let widths: Vec<usize> = (0..N)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, v)| {
                if c == 0 {
                    format!("{v:<w$}", w = widths[c])
                } else {
                    format!("{v:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
