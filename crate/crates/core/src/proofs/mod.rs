//! Hilbert-style derivations: file format, line-by-line checking, and proof
//! construction for the grade order.

mod builder;
mod check;
mod taut;

use std::fmt;

use thiserror::Error;

use crate::formulas::{parse_formula, Formula, FormulaError};
use crate::grades::{GeneratorPoset, GradeError};

pub use builder::{expand_derived, expand_proof, prove_order, ProofBuilder};
pub use check::{check_proof, LineDiagnostic, ProofReport};
pub use taut::{is_tautology, MAX_TAUT_VARIABLES};

/// How a proof line is obtained. Line references are proof line numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Justification {
    Taut,
    K,
    Dtop,
    A1,
    A2,
    A3,
    A4,
    A5,
    /// `mp i j`: line `j` is `line i -> this`.
    Mp(usize, usize),
    Nec(usize),
    Glb(usize, usize),
    Gen(usize),
    /// Derived scheme `([a]A & [b](A -> B)) -> [a & b]B`.
    Ag,
    /// Graded modus ponens from `[a]A` (line i) and `[b](A -> B)` (line j).
    Gmp(usize, usize),
    /// Weakening from `[a]A` (line i) to `[b]A` with `b <= a`.
    Weak(usize),
}

impl Justification {
    pub fn is_derived(&self) -> bool {
        matches!(self, Justification::Ag | Justification::Gmp(..) | Justification::Weak(_))
    }

    pub fn references(&self) -> Vec<usize> {
        match *self {
            Justification::Mp(i, j) | Justification::Glb(i, j) | Justification::Gmp(i, j) => vec![i, j],
            Justification::Nec(i) | Justification::Gen(i) | Justification::Weak(i) => vec![i],
            _ => Vec::new(),
        }
    }

    /// Rewrites line references with `f`.
    pub fn map_refs(self, f: impl Fn(usize) -> usize) -> Self {
        match self {
            Justification::Mp(i, j) => Justification::Mp(f(i), f(j)),
            Justification::Glb(i, j) => Justification::Glb(f(i), f(j)),
            Justification::Gmp(i, j) => Justification::Gmp(f(i), f(j)),
            Justification::Nec(i) => Justification::Nec(f(i)),
            Justification::Gen(i) => Justification::Gen(f(i)),
            Justification::Weak(i) => Justification::Weak(f(i)),
            other => other,
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| format!("expected a line number, found `{s}`"))
        };
        Ok(match words.as_slice() {
            ["taut"] => Justification::Taut,
            ["K"] => Justification::K,
            ["Dtop"] => Justification::Dtop,
            ["A1"] => Justification::A1,
            ["A2"] => Justification::A2,
            ["A3"] => Justification::A3,
            ["A4"] => Justification::A4,
            ["A5"] => Justification::A5,
            ["ag"] => Justification::Ag,
            ["mp", i, j] => Justification::Mp(num(i)?, num(j)?),
            ["glb", i, j] => Justification::Glb(num(i)?, num(j)?),
            ["gmp", i, j] => Justification::Gmp(num(i)?, num(j)?),
            ["nec", i] => Justification::Nec(num(i)?),
            ["gen", i] => Justification::Gen(num(i)?),
            ["weak", i] => Justification::Weak(num(i)?),
            _ => return Err(format!("unknown justification `{}`", text.trim())),
        })
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Taut => f.write_str("taut"),
            Justification::K => f.write_str("K"),
            Justification::Dtop => f.write_str("Dtop"),
            Justification::A1 => f.write_str("A1"),
            Justification::A2 => f.write_str("A2"),
            Justification::A3 => f.write_str("A3"),
            Justification::A4 => f.write_str("A4"),
            Justification::A5 => f.write_str("A5"),
            Justification::Ag => f.write_str("ag"),
            Justification::Mp(i, j) => write!(f, "mp {i} {j}"),
            Justification::Glb(i, j) => write!(f, "glb {i} {j}"),
            Justification::Gmp(i, j) => write!(f, "gmp {i} {j}"),
            Justification::Nec(i) => write!(f, "nec {i}"),
            Justification::Gen(i) => write!(f, "gen {i}"),
            Justification::Weak(i) => write!(f, "weak {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub number: usize,
    pub formula: Formula,
    pub justification: Justification,
}

impl fmt::Display for ProofLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ; {}", self.number, self.formula, self.justification)
    }
}

/// A numbered derivation over a generator poset. The last line is the
/// conclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub poset: GeneratorPoset,
    pub lines: Vec<ProofLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Formula { line: usize, source: FormulaError },
    #[error("proof line {line}: {message}")]
    Shape { line: usize, message: String },
    #[error("order does not hold: {lower} is not below {upper}")]
    OrderDoesNotHold { lower: String, upper: String },
    #[error(transparent)]
    Grade(#[from] GradeError),
}

impl Proof {
    pub fn new(poset: GeneratorPoset, lines: Vec<ProofLine>) -> Self {
        Proof { poset, lines }
    }

    pub fn conclusion(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }

    pub fn line(&self, number: usize) -> Option<&ProofLine> {
        self.lines.iter().find(|l| l.number == number)
    }

    pub fn uses_derived_rules(&self) -> bool {
        self.lines.iter().any(|l| l.justification.is_derived())
    }

    /// Renders the proof file body (without the `poset:` header).
    pub fn body_text(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }

    /// Renders the full proof file.
    pub fn to_text(&self, poset_path: &str) -> String {
        format!("poset: {poset_path}\n{}", self.body_text())
    }
}

/// Splits a proof file into its `poset:` path (if any) and the body lines with
/// their 1-based line numbers in the file.
pub fn proof_header(text: &str) -> Option<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find_map(|l| l.strip_prefix("poset:").map(|p| p.trim().to_string()))
}

/// Parses a proof file against `poset`. The `poset:` header, if present, is
/// skipped; resolving it is the caller's job.
pub fn parse_proof(text: &str, poset: &GeneratorPoset) -> Result<Proof, ProofError> {
    let mut lines = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("poset:") {
            continue;
        }
        let err = |message: String| ProofError::Parse {
            line: lineno,
            message,
        };
        let (num, rest) = line
            .split_once(':')
            .ok_or_else(|| err("expected `<n>: <formula> ; <justification>`".into()))?;
        let number: usize = num
            .trim()
            .parse()
            .map_err(|_| err(format!("invalid line number `{}`", num.trim())))?;
        let (formula, just) = rest
            .rsplit_once(';')
            .ok_or_else(|| err("missing `; <justification>`".into()))?;
        let formula = parse_formula(formula.trim(), poset).map_err(|source| ProofError::Formula {
            line: lineno,
            source,
        })?;
        let justification = Justification::parse(just).map_err(err)?;
        lines.push(ProofLine {
            number,
            formula,
            justification,
        });
    }
    if lines.is_empty() {
        return Err(ProofError::Parse {
            line: 0,
            message: "proof has no lines".into(),
        });
    }
    Ok(Proof::new(poset.clone(), lines))
}
