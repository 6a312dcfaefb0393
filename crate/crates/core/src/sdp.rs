//! Semantic-dependency-parsed documents: the engine's only linguistic input.
//!
//! A document is a list of sentences, each a list of tokens carrying one or
//! more `(head, tag)` dependencies. Head `0` is the virtual root. The JSON
//! layout is
//!
//! ```json
//! {"manual_id": "m1",
//!  "sentences": [{"index": 0, "text": "Sign in the APP.",
//!                 "tokens": [{"i": 1, "form": "Sign in", "deps": [[0, "Root"]]}]}],
//!  "tag_extensions": {"Quasi": "MOD"}}
//! ```
//!
//! `tag_extensions`, the document-level `spaced` flag and the per-sentence
//! `task_break` flag are optional.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("unknown tag `{tag}` in sentence {sentence}, token {token}")]
    UnknownTag {
        tag: String,
        sentence: usize,
        token: u32,
    },
    #[error("cyclic dependency in sentence {sentence} through token {token}")]
    CyclicDependency { sentence: usize, token: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Argument categories. The first four attach to Action nodes, the last
/// three to Entity nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArgCategory {
    #[serde(rename = "MOD")]
    Mod,
    #[serde(rename = "TIME")]
    Time,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "MANN")]
    Mann,
    #[serde(rename = "FN")]
    Fn,
    #[serde(rename = "ATT")]
    Att,
    #[serde(rename = "STATE")]
    State,
}

impl ArgCategory {
    pub const ACTION: [ArgCategory; 4] = [Self::Mod, Self::Time, Self::Loc, Self::Mann];
    pub const ENTITY: [ArgCategory; 3] = [Self::Fn, Self::Att, Self::State];

    pub fn is_action_arg(self) -> bool {
        matches!(self, Self::Mod | Self::Time | Self::Loc | Self::Mann)
    }

    pub fn is_entity_arg(self) -> bool {
        !self.is_action_arg()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mod => "MOD",
            Self::Time => "TIME",
            Self::Loc => "LOC",
            Self::Mann => "MANN",
            Self::Fn => "FN",
            Self::Att => "ATT",
            Self::State => "STATE",
        }
    }
}

impl fmt::Display for ArgCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArgCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "MOD" => Self::Mod,
            "TIME" => Self::Time,
            "LOC" => Self::Loc,
            "MANN" => Self::Mann,
            "FN" => Self::Fn,
            "ATT" => Self::Att,
            "STATE" => Self::State,
            other => return Err(format!("unknown argument category `{other}`")),
        })
    }
}

macro_rules! vocabulary {
    ($($variant:ident),+ $(,)?) => {
        /// Relation labels understood by the engine. Anything else must be
        /// declared through a document's `tag_extensions`.
        #[allow(non_camel_case_types)]
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum SdpTag {
            $($variant,)+
            /// A tag declared in the document's extension block.
            Extension(String),
        }

        impl SdpTag {
            pub const VOCABULARY: &'static [SdpTag] = &[$(SdpTag::$variant),+];

            pub fn as_str(&self) -> &str {
                match self {
                    $(SdpTag::$variant => stringify!($variant),)+
                    SdpTag::Extension(s) => s,
                }
            }

            /// Looks the label up in the closed vocabulary.
            pub fn known(label: &str) -> Option<SdpTag> {
                match label {
                    $(stringify!($variant) => Some(SdpTag::$variant),)+
                    _ => None,
                }
            }
        }
    };
}

vocabulary! {
    // roles
    Root, Agt, Pat, Exp, Aft, Poss, Cont, Prod, Orig, Datv, Comp, Belg, Reas,
    Int, Cons, Proc, Sco, Quan, Qp, Freq, Seq, Desc, Feat, Nmod,
    // Action-ARG tags
    mDEPD, mTime, mRang, mDegr, mFreq, mDir, mNEG, mMod,
    Time, Tini, Tfin, Tdur, Trang,
    Loc, Lini, Lfin, Lthru, Dir,
    Mann, Tool, Matl, Accd,
    // Entity-ARG tags
    LINK, Clas,
    // event relations between predicates
    eCoo, eSelt, eEqu, ePrec, eSucc, eProg, eAdvt, eCau, eResu, eInf, eCond,
    eSupp, eConc, eMetd, ePurp, eAban, ePref, eSum, eRect,
    // function markers
    mConj, mAux, mPrep, mTone, mPars, mPunc, mPept, mMaj, mVain, mSepa,
}

impl SdpTag {
    /// Relations between two predicates (`eSucc`, `eCoo`, ...).
    pub fn is_event(&self) -> bool {
        matches!(
            self,
            SdpTag::eCoo
                | SdpTag::eSelt
                | SdpTag::eEqu
                | SdpTag::ePrec
                | SdpTag::eSucc
                | SdpTag::eProg
                | SdpTag::eAdvt
                | SdpTag::eCau
                | SdpTag::eResu
                | SdpTag::eInf
                | SdpTag::eCond
                | SdpTag::eSupp
                | SdpTag::eConc
                | SdpTag::eMetd
                | SdpTag::ePurp
                | SdpTag::eAban
                | SdpTag::ePref
                | SdpTag::eSum
                | SdpTag::eRect
        )
    }

    /// Function words that carry no content of their own.
    pub fn is_function_marker(&self) -> bool {
        matches!(
            self,
            SdpTag::mConj
                | SdpTag::mAux
                | SdpTag::mPrep
                | SdpTag::mTone
                | SdpTag::mPars
                | SdpTag::mPunc
                | SdpTag::mPept
                | SdpTag::mMaj
                | SdpTag::mVain
                | SdpTag::mSepa
        )
    }

    pub fn is_quantity(&self) -> bool {
        matches!(self, SdpTag::Quan | SdpTag::Qp)
    }

    pub fn is_attributive(&self) -> bool {
        matches!(self, SdpTag::Desc | SdpTag::Feat)
    }
}

impl fmt::Display for SdpTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Alignment of vocabulary tags to argument categories. Role tags, event
/// relations and markers have no argument category.
pub fn map_tag_to_arg(tag: &SdpTag) -> Option<ArgCategory> {
    use SdpTag::*;
    match tag {
        mDEPD | mTime | mRang | mDegr | mFreq | mDir | mNEG | mMod => Some(ArgCategory::Mod),
        Time | Tini | Tfin | Tdur | Trang => Some(ArgCategory::Time),
        Loc | Lini | Lfin | Lthru | Dir => Some(ArgCategory::Loc),
        Mann | Tool | Matl | Accd => Some(ArgCategory::Mann),
        LINK | Clas => Some(ArgCategory::Fn),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dependency {
    /// 0 is the virtual root.
    pub head: u32,
    pub tag: SdpTag,
}

impl Serialize for Dependency {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.head, self.tag.as_str()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dependency {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (head, label): (u32, String) = Deserialize::deserialize(deserializer)?;
        // vocabulary is checked against the document's extensions after parsing
        let tag = SdpTag::known(&label).unwrap_or(SdpTag::Extension(label));
        Ok(Dependency { head, tag })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdpToken {
    #[serde(rename = "i")]
    pub index: u32,
    pub form: String,
    #[serde(rename = "deps")]
    pub dependencies: Vec<Dependency>,
}

impl SdpToken {
    pub fn heads(&self) -> impl Iterator<Item = u32> + '_ {
        self.dependencies.iter().map(|d| d.head)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdpSentence {
    #[serde(rename = "index")]
    pub sentence_index: usize,
    #[serde(rename = "text")]
    pub raw_text: String,
    /// Marks the first sentence of a new task description.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub task_break: bool,
    pub tokens: Vec<SdpToken>,
}

impl SdpSentence {
    pub fn token(&self, index: u32) -> Option<&SdpToken> {
        index
            .checked_sub(1)
            .and_then(|i| self.tokens.get(i as usize))
            .filter(|t| t.index == index)
    }
}

fn is_true(b: &bool) -> bool {
    *b
}

fn default_spaced() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdpDocument {
    pub manual_id: String,
    /// Whether phrase surfaces are joined with a space (false for scripts
    /// written without word delimiters).
    #[serde(default = "default_spaced", skip_serializing_if = "is_true")]
    pub spaced: bool,
    pub sentences: Vec<SdpSentence>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tag_extensions: BTreeMap<String, ArgCategory>,
}

impl SdpDocument {
    /// Argument category of a tag, consulting the document's extension block
    /// for non-vocabulary tags.
    pub fn arg_category(&self, tag: &SdpTag) -> Option<ArgCategory> {
        match tag {
            SdpTag::Extension(label) => self.tag_extensions.get(label).copied(),
            known => map_tag_to_arg(known),
        }
    }

    pub fn joiner(&self) -> &'static str {
        if self.spaced {
            " "
        } else {
            ""
        }
    }

    /// Checks every structural invariant of the document.
    pub fn validate(&self) -> Result<(), SdpError> {
        for label in self.tag_extensions.keys() {
            if SdpTag::known(label).is_some() {
                return Err(SdpError::MalformedInput(format!(
                    "tag extension `{label}` shadows a vocabulary tag"
                )));
            }
            if matches!(
                self.tag_extensions[label],
                ArgCategory::Att | ArgCategory::State
            ) {
                return Err(SdpError::MalformedInput(format!(
                    "tag extension `{label}` must map to MOD, TIME, LOC, MANN or FN"
                )));
            }
        }
        for (position, sentence) in self.sentences.iter().enumerate() {
            if sentence.sentence_index != position {
                return Err(SdpError::MalformedInput(format!(
                    "sentence at position {position} has index {}",
                    sentence.sentence_index
                )));
            }
            validate_sentence(sentence, &self.tag_extensions)?;
        }
        Ok(())
    }

    pub fn to_canonical_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("document serializes");
        out.push('\n');
        out
    }
}

fn validate_sentence(
    sentence: &SdpSentence,
    extensions: &BTreeMap<String, ArgCategory>,
) -> Result<(), SdpError> {
    let n = sentence.tokens.len() as u32;
    for (position, token) in sentence.tokens.iter().enumerate() {
        let expected = position as u32 + 1;
        if token.index != expected {
            return Err(SdpError::MalformedInput(format!(
                "sentence {}: token at position {position} has index {} (expected {expected})",
                sentence.sentence_index, token.index
            )));
        }
        if token.dependencies.is_empty() {
            return Err(SdpError::MalformedInput(format!(
                "sentence {}: token {} has no dependency",
                sentence.sentence_index, token.index
            )));
        }
        for dep in &token.dependencies {
            if dep.head > n {
                return Err(SdpError::MalformedInput(format!(
                    "sentence {}: token {} points to missing head {}",
                    sentence.sentence_index, token.index, dep.head
                )));
            }
            if let SdpTag::Extension(label) = &dep.tag {
                if !extensions.contains_key(label) {
                    return Err(SdpError::UnknownTag {
                        tag: label.clone(),
                        sentence: sentence.sentence_index,
                        token: token.index,
                    });
                }
            }
        }
    }
    check_acyclic(sentence)
}

fn check_acyclic(sentence: &SdpSentence) -> Result<(), SdpError> {
    // 0 = unvisited, 1 = on stack, 2 = done; walk from each token towards its heads
    let n = sentence.tokens.len();
    let mut state = vec![0u8; n + 1];
    for start in 1..=n {
        if state[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        state[start] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let deps = &sentence.tokens[node - 1].dependencies;
            if *next < deps.len() {
                let head = deps[*next].head as usize;
                *next += 1;
                if head == 0 {
                    continue;
                }
                match state[head] {
                    0 => {
                        state[head] = 1;
                        stack.push((head, 0));
                    }
                    1 => {
                        return Err(SdpError::CyclicDependency {
                            sentence: sentence.sentence_index,
                            token: head as u32,
                        })
                    }
                    _ => {}
                }
            } else {
                state[node] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}

/// Parses and validates one document.
pub fn load_sdp_document<R: Read>(reader: R) -> Result<SdpDocument, SdpError> {
    let doc: SdpDocument =
        serde_json::from_reader(reader).map_err(|e| SdpError::MalformedInput(e.to_string()))?;
    doc.validate()?;
    Ok(doc)
}

pub fn parse_sdp_document(text: &str) -> Result<SdpDocument, SdpError> {
    load_sdp_document(text.as_bytes())
}

pub fn load_sdp_file(path: &Path) -> Result<SdpDocument, SdpError> {
    let file = std::fs::File::open(path)?;
    load_sdp_document(std::io::BufReader::new(file))
}

/// Loads a corpus of documents: either every `*.json` file of a directory
/// (sorted by file name) or a JSON-lines stream with one document per line.
pub fn load_sdp_corpus(path: &Path) -> Result<Vec<SdpDocument>, SdpError> {
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
            .collect();
        files.sort();
        files.iter().map(|p| load_sdp_file(p)).collect()
    } else {
        let text = std::fs::read_to_string(path)?;
        text.lines()
            .enumerate()
            .filter(|(_, line)| !line.trim().is_empty())
            .map(|(n, line)| {
                parse_sdp_document(line).map_err(|e| match e {
                    SdpError::MalformedInput(msg) => {
                        SdpError::MalformedInput(format!("line {}: {msg}", n + 1))
                    }
                    other => other,
                })
            })
            .collect()
    }
}
