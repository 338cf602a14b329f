//! Structural node embeddings from heat-diffusion wavelets.
//!
//! Each node's wavelet coefficients at a few diffusion scales are treated
//! as a distribution; sampling that distribution's empirical characteristic
//! function gives a fixed-length vector, and Euclidean distance between
//! vectors measures structural similarity.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedding;
pub mod eval;
pub mod experiments;
pub mod graph;
pub mod seeds;
pub mod sparse;
pub mod spectral;
pub mod synthgen;
pub mod wavelet;

pub use embedding::{embed_all, EmbeddingConfig, EmbeddingError, EmbeddingSet, ScaleSource};
pub use graph::{parse_edge_list, Graph, GraphError};
pub use spectral::{SpectralError, SpectrumMode};
pub use wavelet::{WaveletError, WaveletMode};

/// Coarse failure categories for scripting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Disconnected,
    ParseError,
    EigensolverFailure,
    NumericalFailure,
    InvalidInput,
    RefusedDeviation,
    Io,
}

impl ErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Disconnected => "disconnected",
            ErrorClass::ParseError => "parse-error",
            ErrorClass::EigensolverFailure => "eigensolver-failure",
            ErrorClass::NumericalFailure => "numerical-failure",
            ErrorClass::InvalidInput => "invalid-input",
            ErrorClass::RefusedDeviation => "refused-deviation",
            ErrorClass::Io => "io-error",
        }
    }

    /// 2 for input problems, 3 for numerical failures, 4 for refused
    /// protocol deviations.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Disconnected | ErrorClass::ParseError | ErrorClass::InvalidInput | ErrorClass::Io => 2,
            ErrorClass::EigensolverFailure | ErrorClass::NumericalFailure => 3,
            ErrorClass::RefusedDeviation => 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Synth(#[from] synthgen::SynthError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Experiment(#[from] experiments::ExperimentError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn spectral_class(e: &SpectralError) -> ErrorClass {
    match e {
        SpectralError::Disconnected { .. } => ErrorClass::Disconnected,
        SpectralError::NoConvergence { .. } => ErrorClass::EigensolverFailure,
        SpectralError::BoundViolation { .. } => ErrorClass::NumericalFailure,
        _ => ErrorClass::InvalidInput,
    }
}

fn wavelet_class(e: &WaveletError) -> ErrorClass {
    match e {
        WaveletError::Spectral(s) => spectral_class(s),
        WaveletError::Disconnected { .. } => ErrorClass::Disconnected,
        WaveletError::InvalidScales(_) => ErrorClass::InvalidInput,
    }
}

fn embedding_class(e: &EmbeddingError) -> ErrorClass {
    match e {
        EmbeddingError::Wavelet(w) => wavelet_class(w),
        EmbeddingError::Parse { .. } => ErrorClass::ParseError,
        _ => ErrorClass::InvalidInput,
    }
}

fn eval_class(e: &eval::EvalError) -> ErrorClass {
    match e {
        eval::EvalError::Embedding(x) => embedding_class(x),
        _ => ErrorClass::InvalidInput,
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use experiments::ExperimentError as X;
        match self {
            Error::Graph(GraphError::Parse { .. } | GraphError::Empty) => ErrorClass::ParseError,
            Error::Graph(_) | Error::Synth(_) | Error::Invalid(_) => ErrorClass::InvalidInput,
            Error::Spectral(e) => spectral_class(e),
            Error::Wavelet(e) => wavelet_class(e),
            Error::Embedding(e) => embedding_class(e),
            Error::Eval(e) => eval_class(e),
            Error::Experiment(X::RefusedDeviation(_)) => ErrorClass::RefusedDeviation,
            Error::Experiment(X::Embedding(e)) => embedding_class(e),
            Error::Experiment(X::Eval(e)) => eval_class(e),
            Error::Experiment(_) => ErrorClass::InvalidInput,
            Error::Io { .. } => ErrorClass::Io,
        }
    }
}
