use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::corpus::{Corpus, QaRecord};
use crate::baselines::{keyword_match, lexical_match, tfidf_keywords, tokenize, KeywordContext, Ranking};
use crate::builder::{build_document, BuildConfig};
use crate::graph::TaraGraph;
use crate::inference::{answer_question, AnswerConfig};

/// Something that answers a FAQ record with sentence indices, best first.
pub trait FaqSystem: Sync {
    fn name(&self) -> &str;
    fn rank(&self, record: &QaRecord) -> Vec<usize>;
    /// Problems met while preparing the system.
    fn notices(&self) -> Vec<String> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Hum,
    Lexical,
    Keyword,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Hum => "hum",
            SystemKind::Lexical => "lexical",
            SystemKind::Keyword => "keyword",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hum" => Ok(SystemKind::Hum),
            "lexical" => Ok(SystemKind::Lexical),
            "keyword" => Ok(SystemKind::Keyword),
            _ => Err(format!("unknown system `{s}` (expected hum, lexical or keyword)")),
        }
    }
}

fn indices(r: Ranking) -> Vec<usize> {
    r.into_iter().map(|(i, _)| i).collect()
}

/// Graph matching over manuals built from their parses.
pub struct HumSystem<'a> {
    corpus: &'a Corpus,
    graphs: BTreeMap<String, Vec<TaraGraph>>,
    config: AnswerConfig,
    notices: Vec<String>,
}

impl<'a> HumSystem<'a> {
    pub fn new(corpus: &'a Corpus, config: AnswerConfig) -> Self {
        let mut graphs = BTreeMap::new();
        let mut notices = Vec::new();
        for (id, manual) in &corpus.manuals {
            let Some(doc) = &manual.parse else {
                notices.push(format!("manual `{id}` has no parse; its questions go unanswered"));
                continue;
            };
            match build_document(doc, &config.build) {
                Ok(gs) => {
                    graphs.insert(id.clone(), gs);
                }
                Err(e) => notices.push(format!("manual `{id}`: {e}")),
            }
        }
        HumSystem {
            corpus,
            graphs,
            config,
            notices,
        }
    }

    pub fn graphs(&self, manual_id: &str) -> Option<&[TaraGraph]> {
        self.graphs.get(manual_id).map(Vec::as_slice)
    }

    pub fn corpus(&self) -> &Corpus {
        self.corpus
    }
}

impl FaqSystem for HumSystem<'_> {
    fn name(&self) -> &str {
        "hum"
    }

    fn rank(&self, record: &QaRecord) -> Vec<usize> {
        let (Some(q), Some(graphs)) = (&record.parse, self.graphs.get(&record.manual_id)) else {
            return Vec::new();
        };
        answer_question(q, graphs, &self.config).ranked_sentences()
    }

    fn notices(&self) -> Vec<String> {
        let mut out = self.notices.clone();
        let unparsed = self.corpus.questions.iter().filter(|q| q.parse.is_none()).count();
        if unparsed > 0 {
            out.push(format!("{unparsed} question(s) have no parse and go unanswered"));
        }
        out
    }
}

/// Sentence edit similarity against the question.
pub struct LexicalSystem<'a> {
    corpus: &'a Corpus,
}

impl<'a> LexicalSystem<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        LexicalSystem { corpus }
    }
}

impl FaqSystem for LexicalSystem<'_> {
    fn name(&self) -> &str {
        "lexical"
    }

    fn rank(&self, record: &QaRecord) -> Vec<usize> {
        match self.corpus.manual(&record.manual_id) {
            Some(m) => indices(lexical_match(&record.question, &m.sentences)),
            None => Vec::new(),
        }
    }
}

/// Keyword scoring with TF-IDF keywords computed over the corpus manuals.
pub struct KeywordSystem<'a> {
    corpus: &'a Corpus,
    keywords: BTreeMap<String, Vec<String>>,
    build: BuildConfig,
}

impl<'a> KeywordSystem<'a> {
    pub fn new(corpus: &'a Corpus, build: BuildConfig) -> Self {
        let ids: Vec<&String> = corpus.manuals.keys().collect();
        let terms: Vec<Vec<String>> = corpus
            .manuals
            .values()
            .map(|m| m.sentences.iter().flat_map(|s| tokenize(s)).collect())
            .collect();
        let keywords = ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let kws = tfidf_keywords(&terms, i).into_iter().map(|(t, _)| t).collect();
                ((*id).clone(), kws)
            })
            .collect();
        KeywordSystem {
            corpus,
            keywords,
            build: BuildConfig {
                allow_no_action: true,
                ..build
            },
        }
    }

    pub fn keywords(&self, manual_id: &str) -> Option<&[String]> {
        self.keywords.get(manual_id).map(Vec::as_slice)
    }
}

impl FaqSystem for KeywordSystem<'_> {
    fn name(&self) -> &str {
        "keyword"
    }

    fn rank(&self, record: &QaRecord) -> Vec<usize> {
        let Some(m) = self.corpus.manual(&record.manual_id) else {
            return Vec::new();
        };
        let qgraph = record
            .parse
            .as_ref()
            .and_then(|p| build_document(p, &self.build).ok())
            .and_then(|mut gs| (!gs.is_empty()).then(|| gs.swap_remove(0)));
        let ctx = KeywordContext::new(
            self.keywords.get(&m.id).map(Vec::as_slice).unwrap_or_default(),
            &record.question,
            qgraph.as_ref(),
        );
        let parses = m.parse.as_ref().map(|d| d.sentences.as_slice());
        indices(keyword_match(&m.sentences, parses, &ctx))
    }
}

pub fn make_system<'a>(kind: SystemKind, corpus: &'a Corpus, config: &AnswerConfig) -> Box<dyn FaqSystem + 'a> {
    match kind {
        SystemKind::Hum => Box::new(HumSystem::new(corpus, config.clone())),
        SystemKind::Lexical => Box::new(LexicalSystem::new(corpus)),
        SystemKind::Keyword => Box::new(KeywordSystem::new(corpus, config.build.clone())),
    }
}
