use thiserror::Error;

use crate::hierarchy::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("interval lower bound {lo} exceeds upper bound {hi}")]
    InvertedInterval { lo: f64, hi: f64 },

    #[error("non-finite parameter in {0}")]
    NonFinite(String),

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("no layers")]
    NoLayers,

    #[error("layer {layer}: {reason}")]
    InvalidLayer { layer: usize, reason: String },

    #[error("invalid hierarchy: {}", format_violations(.0))]
    InvalidHierarchy(Vec<Violation>),

    #[error("unknown class label `{0}`")]
    UnknownClass(String),

    #[error("unknown level `{0}`")]
    UnknownLevel(String),

    #[error("safe set equals the whole output space; every network is trivially safe")]
    TrivialSafeSet,

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("{field}: {source}")]
    Parse {
        field: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
