use std::fmt;

use thiserror::Error;

use crate::numerics::Rational;

/// Shift direction of a step-line family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Shift along the first measure, levels `(j, 0)`.
    E1,
    /// Shift along the second measure, levels `(0, k)`.
    E2,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::E1 => f.write_str("e1"),
            Axis::E2 => f.write_str("e2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot start shift on axis {axis} at level {level}: {quantity} is zero")]
    Init {
        axis: Axis,
        level: usize,
        quantity: String,
    },

    #[error(
        "normality breakdown on axis {axis}, level {level}, n = {n}: denominator {denominator} vanishes"
    )]
    Normality {
        axis: Axis,
        level: usize,
        n: usize,
        denominator: String,
    },

    #[error("normality breakdown at nearest-neighbor index ({n}, {m}): {detail} vanishes")]
    GridNormality { n: usize, m: usize, detail: String },

    #[error("seed for axis e2 level {level} must be {expected}, got {supplied}")]
    SeedMismatch {
        level: usize,
        expected: Box<Rational>,
        supplied: Box<Rational>,
    },

    #[error("singular sweep at multi-index {}: b[{i}] equals b[{j}]", tuple(index))]
    SingularSweep { index: Vec<usize>, i: usize, j: usize },

    #[error("{what}: index {index} out of range")]
    Range { what: String, index: String },

    #[error("multi-index {} is not normal (singular moment system)", tuple(.0))]
    NonNormalIndex(Vec<usize>),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn range(what: impl Into<String>, index: impl fmt::Display) -> Self {
        Error::Range {
            what: what.into(),
            index: index.to_string(),
        }
    }
}

fn tuple(index: &[usize]) -> String {
    let parts: Vec<String> = index.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

pub type Result<T> = std::result::Result<T, Error>;
