//! Signal temporal logic over discrete traces: syntax, quantitative
//! robustness, and a boolean reference semantics.

mod eval;
mod parse;
pub mod random;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{
    normalize, robustness, robustness_bool_oracle, robustness_signal, robustness_signal_with, robustness_with,
    FunctionRegistry, ScalarFn, DEFAULT_BIG,
};
pub use parse::parse;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StlError {
    #[error("syntax-error: at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("bad-interval: [{a},{b}]")]
    BadInterval { a: f64, b: f64 },
    #[error("index-out-of-range: {index} not below trace length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unresolved-function: {0}")]
    UnresolvedFunction(String),
    #[error("nonpositive-scale: {0}")]
    NonpositiveScale(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    Ge,
    Le,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Ge => ">=",
            Cmp::Le => "<=",
        }
    }
}

/// Closed time interval `[a, b]`, `0 <= a <= b < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self, StlError> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a <= b) {
            return Err(StlError::BadInterval { a, b });
        }
        Ok(Interval { a, b })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Formula {
    True,
    /// `f(x) >= mu` or `f(x) <= mu` for the registered function `func`.
    Atom { func: String, cmp: Cmp, mu: f64 },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Always(Interval, Box<Formula>),
}

impl Formula {
    pub fn atom(func: impl Into<String>, cmp: Cmp, mu: f64) -> Self {
        Formula::Atom { func: func.into(), cmp, mu }
    }

    pub fn ge(func: impl Into<String>, mu: f64) -> Self {
        Self::atom(func, Cmp::Ge, mu)
    }

    pub fn le(func: impl Into<String>, mu: f64) -> Self {
        Self::atom(func, Cmp::Le, mu)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn until(self, i: Interval, other: Formula) -> Self {
        Formula::Until(i, Box::new(self), Box::new(other))
    }

    pub fn eventually(i: Interval, f: Formula) -> Self {
        Formula::Eventually(i, Box::new(f))
    }

    pub fn always(i: Interval, f: Formula) -> Self {
        Formula::Always(i, Box::new(f))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::Atom { .. } => vec![],
            Formula::Not(f) | Formula::Eventually(_, f) | Formula::Always(_, f) => vec![f],
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(_, l, r) => vec![l, r],
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Function ids referenced by atoms, in first-occurrence order.
    pub fn functions(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_functions(&mut out);
        out
    }

    fn collect_functions(&self, out: &mut Vec<String>) {
        if let Formula::Atom { func, .. } = self {
            if !out.contains(func) {
                out.push(func.clone());
            }
        }
        for c in self.children() {
            c.collect_functions(out);
        }
    }

    /// Largest time offset the formula looks ahead.
    pub fn horizon(&self) -> f64 {
        match self {
            Formula::True | Formula::Atom { .. } => 0.0,
            Formula::Not(f) => f.horizon(),
            Formula::And(l, r) | Formula::Or(l, r) => l.horizon().max(r.horizon()),
            Formula::Until(i, l, r) => i.b + l.horizon().max(r.horizon()),
            Formula::Eventually(i, f) | Formula::Always(i, f) => i.b + f.horizon(),
        }
    }
}

fn fmt_operand(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::True | Formula::Atom { .. } => write!(out, "{f}"),
        _ => write!(out, "({f})"),
    }
}

/// Canonical text: every compound operand is parenthesized, so the output
/// parses back to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(out, "true"),
            Formula::Atom { func, cmp, mu } => write!(out, "{func} {} {mu}", cmp.symbol()),
            Formula::Not(f) => {
                write!(out, "!")?;
                fmt_operand(f, out)
            }
            Formula::And(l, r) | Formula::Or(l, r) => {
                fmt_operand(l, out)?;
                write!(out, " {} ", if matches!(self, Formula::And(..)) { "&" } else { "|" })?;
                fmt_operand(r, out)
            }
            Formula::Until(i, l, r) => {
                fmt_operand(l, out)?;
                write!(out, " U[{},{}] ", i.a, i.b)?;
                fmt_operand(r, out)
            }
            Formula::Eventually(i, f) | Formula::Always(i, f) => {
                let op = if matches!(self, Formula::Eventually(..)) { 'F' } else { 'G' };
                write!(out, "{op}[{},{}] ", i.a, i.b)?;
                fmt_operand(f, out)
            }
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = StlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
