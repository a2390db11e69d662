use std::collections::BTreeSet;
use std::fmt;

use crate::lexer::{Cursor, SyntaxError, Token};

use super::{GeneratorPoset, GradeError};

/// A grade expression: generators combined by meet (`&`) and join (`|`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GradeExpr {
    Gen(String),
    Meet(Box<GradeExpr>, Box<GradeExpr>),
    Join(Box<GradeExpr>, Box<GradeExpr>),
}

impl GradeExpr {
    pub fn gen(name: impl Into<String>) -> Self {
        GradeExpr::Gen(name.into())
    }

    pub fn meet(a: GradeExpr, b: GradeExpr) -> Self {
        GradeExpr::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: GradeExpr, b: GradeExpr) -> Self {
        GradeExpr::Join(Box::new(a), Box::new(b))
    }

    /// Left-folded meet of a non-empty list.
    pub fn meet_all(items: impl IntoIterator<Item = GradeExpr>) -> Option<Self> {
        items.into_iter().reduce(GradeExpr::meet)
    }

    /// Left-folded join of a non-empty list.
    pub fn join_all(items: impl IntoIterator<Item = GradeExpr>) -> Option<Self> {
        items.into_iter().reduce(GradeExpr::join)
    }

    /// Parses the bracket syntax: identifiers, `&` (tighter), `|`, parentheses.
    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        let mut cur = Cursor::new(text)?;
        let e = parse_grade(&mut cur)?;
        cur.finish()?;
        Ok(e)
    }

    pub fn depth(&self) -> usize {
        match self {
            GradeExpr::Gen(_) => 0,
            GradeExpr::Meet(a, b) | GradeExpr::Join(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn generators(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            GradeExpr::Gen(g) => {
                out.insert(g.as_str());
            }
            GradeExpr::Meet(a, b) | GradeExpr::Join(a, b) => {
                a.collect_generators(out);
                b.collect_generators(out);
            }
        }
    }

    /// Checks that every leaf names a generator of `p`.
    pub fn validate(&self, p: &GeneratorPoset) -> Result<(), GradeError> {
        for g in self.generators() {
            p.index_of(g)?;
        }
        Ok(())
    }
}

/// Parses a grade expression from a token stream; stops at the first token
/// that cannot continue the expression.
pub(crate) fn parse_grade(cur: &mut Cursor) -> Result<GradeExpr, SyntaxError> {
    let mut lhs = parse_meet(cur)?;
    while cur.eat(&Token::Pipe) {
        let rhs = parse_meet(cur)?;
        lhs = GradeExpr::join(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_meet(cur: &mut Cursor) -> Result<GradeExpr, SyntaxError> {
    let mut lhs = parse_grade_atom(cur)?;
    while cur.eat(&Token::Amp) {
        let rhs = parse_grade_atom(cur)?;
        lhs = GradeExpr::meet(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_grade_atom(cur: &mut Cursor) -> Result<GradeExpr, SyntaxError> {
    match cur.peek() {
        Some(Token::Ident(_)) => match cur.bump() {
            Some(Token::Ident(name)) => Ok(GradeExpr::Gen(name)),
            _ => unreachable!(),
        },
        Some(Token::LParen) => {
            cur.bump();
            let e = parse_grade(cur)?;
            cur.expect(&Token::RParen)?;
            Ok(e)
        }
        _ => Err(cur.unexpected("a grade")),
    }
}

impl fmt::Display for GradeExpr {
    /// Meets nested under a join are parenthesized for readability even though
    /// `&` binds tighter.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradeExpr::Gen(g) => f.write_str(g),
            GradeExpr::Meet(a, b) => {
                write_operand(f, a, matches!(**a, GradeExpr::Join(..)))?;
                f.write_str(" & ")?;
                write_operand(f, b, !matches!(**b, GradeExpr::Gen(_)))
            }
            GradeExpr::Join(a, b) => {
                write_operand(f, a, matches!(**a, GradeExpr::Meet(..)))?;
                f.write_str(" | ")?;
                write_operand(f, b, !matches!(**b, GradeExpr::Gen(_)))
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &GradeExpr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}
