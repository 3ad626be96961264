//! Scalar expressions over a coordinate chart: parsing, symbolic
//! differentiation, compiled evaluation and randomized zero testing.

mod domain;
mod eval;
mod expr;
mod parse;
mod zero;

pub use domain::Domain;
pub use eval::{Tape, TapeValues};
pub use expr::{BinaryOp, Expr, ExprDisplay, HalfInt, Node, Symbols, UnaryOp};
pub use parse::parse;
pub use zero::{is_zero, zero_test, SampleOpts, ZeroReport};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SymError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("undeclared identifier '{name}' at offset {pos}: {hint}")]
    Undeclared {
        name: String,
        pos: usize,
        hint: String,
    },
    #[error("domain error in {subexpr} (value {value})")]
    Domain { subexpr: String, value: f64 },
    #[error("unbound {what}")]
    Unbound { what: String },
    #[error("undecidable: {0}")]
    Undecidable(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}
