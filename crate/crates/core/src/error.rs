use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by construction and by the operations of this crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A vertex color lies outside `1..=d`.
    ColorOutOfRange { color: usize, d: usize },
    /// Children of some vertex are not in nondecreasing color order.
    SiblingOrder { parent: usize },
    /// A path increment violates the coding-sequence shape constraints.
    InvalidIncrement { kind: usize, step: usize },
    /// A first-passage level is never reached within the path length.
    LevelNotReached { kind: usize, level: usize },
    /// A cyclic-shift offset is outside the admissible window.
    ShiftOutOfRange { kind: usize, offset: usize, len: usize },
    /// The pair (sequence, root types) does not code a forest.
    InvalidCoding(String),
    /// Arithmetic hypotheses of a closed form are violated.
    Hypothesis(String),
    /// A sparse-convolution support cap was exceeded.
    SupportCapExceeded { cap: usize },
    /// The spectral-radius enclosure cannot separate the regime from 1
    /// at the configured iteration budget.
    EnclosureStraddlesOne,
    /// A reducible-law formula was applied outside its mean-matrix regime.
    RegimeMismatch(String),
    /// A law is not admissible for the requested operation.
    InvalidLaw(String),
    /// The smallest-solution iteration exceeded its proven round bound;
    /// this indicates a defect, not bad input.
    IterationCapExceeded,
    /// Malformed input data (JSON schema, flag syntax, ...).
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ColorOutOfRange { color, d } => {
                write!(f, "color {color} outside 1..={d}")
            }
            Error::SiblingOrder { parent } => {
                write!(f, "children of vertex {parent} not in nondecreasing color order")
            }
            Error::InvalidIncrement { kind, step } => {
                write!(f, "path {kind}: invalid increment at step {step}")
            }
            Error::LevelNotReached { kind, level } => {
                write!(f, "path {kind} never reaches level -{level}")
            }
            Error::ShiftOutOfRange { kind, offset, len } => {
                write!(f, "shift offset {offset} out of range for path {kind} of window {len}")
            }
            Error::InvalidCoding(msg) => write!(f, "invalid coding: {msg}"),
            Error::Hypothesis(msg) => write!(f, "hypothesis violated: {msg}"),
            Error::SupportCapExceeded { cap } => {
                write!(f, "convolution support exceeded cap {cap}")
            }
            Error::EnclosureStraddlesOne => {
                write!(f, "spectral-radius enclosure straddles 1 at the configured width")
            }
            Error::RegimeMismatch(msg) => write!(f, "regime mismatch: {msg}"),
            Error::InvalidLaw(msg) => write!(f, "invalid law: {msg}"),
            Error::IterationCapExceeded => {
                write!(f, "smallest-solution iteration exceeded its round cap (defect)")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
