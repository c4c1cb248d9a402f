//! A small expression language for integer sets and numeric functions.
//!
//! Grammar (EBNF) is in the README. Sets always carry a bound `N` and
//! evaluate to an [`IntSet`](crate::intset::IntSet) inside `[0,N)`.

mod func;
mod lexer;
mod set;

pub use func::{parse_func, Env, FuncExpr, Sort, Value};
pub use set::{eval_set, parse_list_file, parse_set, SetExpr, SetNode};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetlangError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: {value} is outside [0, {bound})")]
    Bound { line: usize, col: usize, value: u64, bound: usize },
    #[error("{line}:{col}: type error: {msg}")]
    Sort { line: usize, col: usize, msg: String },
    #[error("bound must be at least 1")]
    ZeroBound,
    #[error("division by zero")]
    DivisionByZero,
    #[error("mod needs a nonnegative left side and a positive modulus, got {0} mod {1}")]
    NegativeMod(i64, i64),
    #[error("integer overflow")]
    Overflow,
    #[error("variable {0} has no value")]
    Unbound(String),
    #[error("floor of {0} is not a representable integer")]
    Floor(f64),
}

pub type Result<T> = std::result::Result<T, SetlangError>;

/// A source position, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    fn syntax(self, msg: impl Into<String>) -> SetlangError {
        SetlangError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn sort(self, msg: impl Into<String>) -> SetlangError {
        SetlangError::Sort {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }
}
