//! Classical tautology test over the propositional skeleton of a formula.
//!
//! Atoms and maximal boxed subformulas are the propositional variables. The
//! caller passes canonical formulas so that boxes with equivalent grades are
//! the same variable.

use crate::formulas::Formula;

/// Skeletons with more variables than this are rejected.
pub const MAX_TAUT_VARIABLES: usize = 40;

enum Prop {
    Var(usize),
    Const(bool),
    Not(Box<Prop>),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Implies(Box<Prop>, Box<Prop>),
    Iff(Box<Prop>, Box<Prop>),
}

fn skeleton<'a>(f: &'a Formula, vars: &mut Vec<&'a Formula>) -> Prop {
    let mut var = |f: &'a Formula| {
        let i = match vars.iter().position(|v| *v == f) {
            Some(i) => i,
            None => {
                vars.push(f);
                vars.len() - 1
            }
        };
        Prop::Var(i)
    };
    match f {
        Formula::Atom(_) | Formula::Boxed(..) => var(f),
        Formula::True => Prop::Const(true),
        Formula::False => Prop::Const(false),
        Formula::Not(a) => Prop::Not(Box::new(skeleton(a, vars))),
        Formula::And(a, b) => Prop::And(Box::new(skeleton(a, vars)), Box::new(skeleton(b, vars))),
        Formula::Or(a, b) => Prop::Or(Box::new(skeleton(a, vars)), Box::new(skeleton(b, vars))),
        Formula::Implies(a, b) => {
            Prop::Implies(Box::new(skeleton(a, vars)), Box::new(skeleton(b, vars)))
        }
        Formula::Iff(a, b) => Prop::Iff(Box::new(skeleton(a, vars)), Box::new(skeleton(b, vars))),
    }
}

/// Three-valued evaluation under a partial assignment.
fn eval(p: &Prop, assign: &[Option<bool>]) -> Option<bool> {
    match p {
        Prop::Var(i) => assign[*i],
        Prop::Const(b) => Some(*b),
        Prop::Not(a) => eval(a, assign).map(|x| !x),
        Prop::And(a, b) => match (eval(a, assign), eval(b, assign)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Prop::Or(a, b) => match (eval(a, assign), eval(b, assign)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Prop::Implies(a, b) => match (eval(a, assign), eval(b, assign)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
        Prop::Iff(a, b) => match (eval(a, assign), eval(b, assign)) {
            (Some(x), Some(y)) => Some(x == y),
            _ => None,
        },
    }
}

fn all_true(p: &Prop, assign: &mut Vec<Option<bool>>, next: usize) -> bool {
    match eval(p, assign) {
        Some(v) => v,
        None => {
            let var = (next..assign.len())
                .find(|&i| assign[i].is_none())
                .expect("an undetermined formula has an unassigned variable");
            let mut ok = true;
            for value in [false, true] {
                assign[var] = Some(value);
                if !all_true(p, assign, var + 1) {
                    ok = false;
                    break;
                }
            }
            assign[var] = None;
            ok
        }
    }
}

/// Whether `f` is a classical tautology when boxed subformulas and atoms are
/// treated as opaque propositional variables.
pub fn is_tautology(f: &Formula) -> Result<bool, String> {
    let mut vars = Vec::new();
    let prop = skeleton(f, &mut vars);
    if vars.len() > MAX_TAUT_VARIABLES {
        return Err(format!(
            "{} propositional variables exceed the limit of {MAX_TAUT_VARIABLES}",
            vars.len()
        ));
    }
    let mut assign = vec![None; vars.len()];
    Ok(all_true(&prop, &mut assign, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taut(s: &str) -> bool {
        is_tautology(&Formula::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn classical_cases() {
        assert!(taut("p -> p"));
        assert!(taut("p | !p"));
        assert!(taut("(p -> q) -> ((q -> r) -> (p -> r))"));
        assert!(taut("((p -> q) -> p) -> p"));
        assert!(taut("(p <-> q) <-> (q <-> p)"));
        assert!(taut("true"));
        assert!(!taut("false"));
        assert!(!taut("p -> q"));
        assert!(!taut("p | q"));
    }

    #[test]
    fn boxes_are_opaque() {
        assert!(taut("[a] p -> [a] p"));
        assert!(!taut("[a] p -> [b] p"));
        assert!(!taut("[T] p -> p"));
        assert!(taut("[a] (p & q) | ![a] (p & q)"));
    }

    #[test]
    fn agrees_with_truth_table() {
        // exhaustive comparison on a few formulas over three atoms
        let cases = ["(p & q) -> r", "(p -> q) & (q -> p) <-> (p <-> q)", "!(p & !p)", "p | q | !r"];
        for c in cases {
            let f = Formula::parse(c).unwrap();
            let mut all = true;
            for mask in 0..8u32 {
                let v = |name: &str| match name {
                    "p" => mask & 1 == 1,
                    "q" => mask & 2 == 2,
                    _ => mask & 4 == 4,
                };
                fn ev(f: &Formula, v: &dyn Fn(&str) -> bool) -> bool {
                    match f {
                        Formula::Atom(a) => v(a),
                        Formula::True => true,
                        Formula::False => false,
                        Formula::Not(a) => !ev(a, v),
                        Formula::And(a, b) => ev(a, v) && ev(b, v),
                        Formula::Or(a, b) => ev(a, v) || ev(b, v),
                        Formula::Implies(a, b) => !ev(a, v) || ev(b, v),
                        Formula::Iff(a, b) => ev(a, v) == ev(b, v),
                        Formula::Boxed(..) => unreachable!(),
                    }
                }
                all &= ev(&f, &v);
            }
            assert_eq!(is_tautology(&f).unwrap(), all, "{c}");
        }
    }
}
