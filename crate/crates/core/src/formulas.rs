//! The graded multimodal language: formulas with `[grade]` box operators.
//!
//! Concrete syntax, from loosest to tightest binding:
//!
//! | operator | meaning        | associativity |
//! |----------|----------------|---------------|
//! | `<->`    | equivalence    | left          |
//! | `->`     | implication    | right         |
//! | `\|`     | disjunction    | left          |
//! | `&`      | conjunction    | left          |
//! | `!`, `[g]` | negation, box | prefix       |
//!
//! Inside brackets `&` and `|` are lattice meet and join.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::grades::{parse_grade, GeneratorPoset, GradeError, GradeExpr};
use crate::lexer::{Cursor, SyntaxError, Token};

/// The atom reserved for encoding the grade order inside proofs.
pub const RESERVED_ATOM: &str = "p0";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    True,
    False,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Boxed(GradeExpr, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("undeclared generator `{name}` at position {position}")]
    UndeclaredGenerator { name: String, position: usize },
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn reserved() -> Self {
        Formula::Atom(RESERVED_ATOM.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn boxed(g: GradeExpr, f: Formula) -> Self {
        Formula::Boxed(g, Box::new(f))
    }

    /// Left-folded conjunction of a non-empty list.
    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Option<Self> {
        items.into_iter().reduce(Formula::and)
    }

    /// Parses without checking grade generators against a poset.
    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        let mut cur = Cursor::new(text)?;
        let f = parse_iff(&mut cur, &mut |_, _| Ok(()))?;
        cur.finish()?;
        Ok(f)
    }

    /// Modal nesting depth.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::True | Formula::False => 0,
            Formula::Not(a) => a.modal_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            Formula::Boxed(_, a) => 1 + a.modal_depth(),
        }
    }

    /// Connective nesting depth (atoms and constants have depth 0).
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::True | Formula::False => 0,
            Formula::Not(a) | Formula::Boxed(_, a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(a) = f {
                out.insert(a.clone());
            }
        });
        out
    }

    /// Every grade expression used as a box parameter.
    pub fn grades(&self) -> BTreeSet<GradeExpr> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Boxed(g, _) = f {
                out.insert(g.clone());
            }
        });
        out
    }

    /// Every generator named inside a box parameter.
    pub fn generators(&self) -> BTreeSet<String> {
        self.grades()
            .iter()
            .flat_map(|g| g.generators().into_iter().map(str::to_string).collect::<Vec<_>>())
            .collect()
    }

    pub fn mentions_reserved(&self) -> bool {
        self.atoms().contains(RESERVED_ATOM)
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Atom(_) | Formula::True | Formula::False => {}
            Formula::Not(a) | Formula::Boxed(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Rewrites every box parameter with `map`.
    pub fn try_map_grades<E>(
        &self,
        map: &mut impl FnMut(&GradeExpr) -> Result<GradeExpr, E>,
    ) -> Result<Formula, E> {
        Ok(match self {
            Formula::Atom(_) | Formula::True | Formula::False => self.clone(),
            Formula::Not(a) => Formula::not(a.try_map_grades(map)?),
            Formula::And(a, b) => Formula::and(a.try_map_grades(map)?, b.try_map_grades(map)?),
            Formula::Or(a, b) => Formula::or(a.try_map_grades(map)?, b.try_map_grades(map)?),
            Formula::Implies(a, b) => {
                Formula::implies(a.try_map_grades(map)?, b.try_map_grades(map)?)
            }
            Formula::Iff(a, b) => Formula::iff(a.try_map_grades(map)?, b.try_map_grades(map)?),
            Formula::Boxed(g, a) => Formula::boxed(map(g)?, a.try_map_grades(map)?),
        })
    }

    /// Replaces every box parameter by the canonical expression of its
    /// normal form. Two formulas are equal up to grade equivalence iff their
    /// canonical forms are structurally equal.
    pub fn canonical(&self, p: &GeneratorPoset) -> Result<Formula, GradeError> {
        self.try_map_grades(&mut |g| Ok(p.nf_to_expr(&p.normalize(g)?)))
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            _ => 5,
        }
    }
}

/// Parses a formula, resolving every bracketed grade against `p`.
pub fn parse_formula(text: &str, p: &GeneratorPoset) -> Result<Formula, FormulaError> {
    let mut cur = Cursor::new(text)?;
    let mut check = |g: &GradeExpr, pos: usize| -> Result<(), FormulaError> {
        match g.generators().into_iter().find(|name| !p.contains(name)) {
            Some(name) => Err(FormulaError::UndeclaredGenerator {
                name: name.to_string(),
                position: pos,
            }),
            None => Ok(()),
        }
    };
    let f = parse_iff(&mut cur, &mut check)?;
    cur.finish()?;
    Ok(f)
}

pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

type GradeCheck<'a, E> = dyn FnMut(&GradeExpr, usize) -> Result<(), E> + 'a;

fn parse_iff<E: From<SyntaxError>>(
    cur: &mut Cursor,
    check: &mut GradeCheck<'_, E>,
) -> Result<Formula, E> {
    let mut lhs = parse_implies(cur, check)?;
    while cur.eat(&Token::DoubleArrow) {
        let rhs = parse_implies(cur, check)?;
        lhs = Formula::iff(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_implies<E: From<SyntaxError>>(
    cur: &mut Cursor,
    check: &mut GradeCheck<'_, E>,
) -> Result<Formula, E> {
    let lhs = parse_or(cur, check)?;
    if cur.eat(&Token::Arrow) {
        let rhs = parse_implies(cur, check)?;
        return Ok(Formula::implies(lhs, rhs));
    }
    Ok(lhs)
}

fn parse_or<E: From<SyntaxError>>(
    cur: &mut Cursor,
    check: &mut GradeCheck<'_, E>,
) -> Result<Formula, E> {
    let mut lhs = parse_and(cur, check)?;
    while cur.eat(&Token::Pipe) {
        let rhs = parse_and(cur, check)?;
        lhs = Formula::or(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_and<E: From<SyntaxError>>(
    cur: &mut Cursor,
    check: &mut GradeCheck<'_, E>,
) -> Result<Formula, E> {
    let mut lhs = parse_unary(cur, check)?;
    while cur.eat(&Token::Amp) {
        let rhs = parse_unary(cur, check)?;
        lhs = Formula::and(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_unary<E: From<SyntaxError>>(
    cur: &mut Cursor,
    check: &mut GradeCheck<'_, E>,
) -> Result<Formula, E> {
    match cur.peek() {
        Some(Token::Bang) => {
            cur.bump();
            Ok(Formula::not(parse_unary(cur, check)?))
        }
        Some(Token::LBracket) => {
            cur.bump();
            let pos = cur.offset();
            let g = parse_grade(cur)?;
            cur.expect(&Token::RBracket)?;
            check(&g, pos)?;
            Ok(Formula::boxed(g, parse_unary(cur, check)?))
        }
        Some(Token::LParen) => {
            cur.bump();
            let f = parse_iff(cur, check)?;
            cur.expect(&Token::RParen)?;
            Ok(f)
        }
        Some(Token::Ident(_)) => match cur.bump() {
            Some(Token::Ident(name)) => Ok(match name.as_str() {
                "true" => Formula::True,
                "false" => Formula::False,
                _ => Formula::Atom(name),
            }),
            _ => unreachable!(),
        },
        _ => Err(cur.unexpected("a formula").into()),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn sub(f: &mut fmt::Formatter<'_>, x: &Formula, min: u8) -> fmt::Result {
            if x.prec() < min {
                write!(f, "({x})")
            } else {
                write!(f, "{x}")
            }
        }
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Not(a) => {
                f.write_str("!")?;
                sub(f, a, 5)
            }
            Formula::Boxed(g, a) => {
                write!(f, "[{g}] ")?;
                sub(f, a, 5)
            }
            Formula::And(a, b) => {
                sub(f, a, 4)?;
                f.write_str(" & ")?;
                sub(f, b, 5)
            }
            Formula::Or(a, b) => {
                sub(f, a, 3)?;
                f.write_str(" | ")?;
                sub(f, b, 4)
            }
            Formula::Implies(a, b) => {
                sub(f, a, 3)?;
                f.write_str(" -> ")?;
                sub(f, b, 2)
            }
            Formula::Iff(a, b) => {
                sub(f, a, 1)?;
                f.write_str(" <-> ")?;
                sub(f, b, 2)
            }
        }
    }
}

/// Summary of a formula's vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaStats {
    pub atoms: BTreeSet<String>,
    pub uses_reserved: bool,
    pub modal_depth: usize,
    pub grades: BTreeSet<GradeExpr>,
}

pub fn analyze(f: &Formula) -> FormulaStats {
    let atoms = f.atoms();
    FormulaStats {
        uses_reserved: atoms.contains(RESERVED_ATOM),
        atoms,
        modal_depth: f.modal_depth(),
        grades: f.grades(),
    }
}
