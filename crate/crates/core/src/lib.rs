//! Task-argument graphs for user manuals: building them from semantic
//! dependency parses, answering questions by subgraph matching, reference
//! baselines and evaluation.

pub mod baselines;
pub mod builder;
pub mod eval;
pub mod graph;
pub mod inference;
pub mod matcher;
pub mod preprocess;
pub mod sdp;

use thiserror::Error;

pub use builder::{build, build_document, BuildConfig, BuildError, StateVerbLexicon};
pub use eval::{load_corpus, CorpusError, EvalOptions, EvalReport, SystemKind};
pub use graph::{BasicAnswer, BasicQuestion, ElementId, GraphError, TaraGraph};
pub use inference::{answer_question, Answer, AnswerConfig, AnswerStatus};
pub use matcher::{match_subgraph, MatchError, Matching};
pub use sdp::{load_sdp_file, SdpDocument, SdpError};

/// Broad classes of failure, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input data or arguments.
    Input,
    /// Valid input the engine cannot handle.
    Domain,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl Error {
    /// A stable identifier for scripts.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Sdp(SdpError::MalformedInput(_)) => "E_MALFORMED_INPUT",
            Error::Sdp(SdpError::UnknownTag { .. }) => "E_UNKNOWN_TAG",
            Error::Sdp(SdpError::CyclicDependency { .. }) => "E_CYCLIC_DEPENDENCY",
            Error::Sdp(SdpError::Io(_)) | Error::Graph(GraphError::Io(_)) => "E_IO",
            Error::Build(BuildError::NoActionFound(_)) => "E_NO_ACTION_FOUND",
            Error::Build(BuildError::EmptyLexicon) => "E_EMPTY_LEXICON",
            Error::Build(BuildError::LexiconIo { .. }) => "E_IO",
            Error::Graph(GraphError::MalformedGraphFile(_)) => "E_MALFORMED_GRAPH_FILE",
            Error::Graph(GraphError::UnknownElement(_)) => "E_UNKNOWN_ELEMENT",
            Error::Graph(GraphError::InvalidContext { .. }) => "E_INVALID_CONTEXT",
            Error::Graph(GraphError::Invalid { .. }) => "E_INVALID_GRAPH",
            Error::Match(MatchError::SizeGuardExceeded { .. }) => "E_SIZE_GUARD_EXCEEDED",
            Error::Corpus(_) => "E_MALFORMED_CORPUS",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self.code() {
            "E_IO" => ErrorClass::Io,
            "E_NO_ACTION_FOUND" | "E_EMPTY_LEXICON" | "E_SIZE_GUARD_EXCEEDED" => ErrorClass::Domain,
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
