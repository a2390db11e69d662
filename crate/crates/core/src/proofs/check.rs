use std::collections::HashMap;

use crate::formulas::{Formula, RESERVED_ATOM};
use crate::grades::{GeneratorPoset, GradeExpr, GradeNF};

use super::builder::expand_line;
use super::taut::is_tautology;
use super::{Justification, Proof};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofReport {
    pub accepted: bool,
    pub diagnostics: Vec<LineDiagnostic>,
}

/// Checks every line of `proof` against its justification. Derived
/// justifications are expanded into core steps, which are then checked.
pub fn check_proof(proof: &Proof) -> ProofReport {
    let p = &proof.poset;
    let mut ctx: HashMap<usize, Formula> = HashMap::new();
    let mut originals: HashMap<usize, Formula> = HashMap::new();
    let mut diagnostics = Vec::new();
    let first_free = proof.lines.iter().map(|l| l.number).max().unwrap_or(0) + 1;

    for line in &proof.lines {
        let mut fail = |message: String| {
            diagnostics.push(LineDiagnostic {
                line: line.number,
                message,
            })
        };
        if ctx.contains_key(&line.number) {
            fail(format!("duplicate line number {}", line.number));
            continue;
        }
        let canon = match line.formula.canonical(p) {
            Ok(c) => c,
            Err(e) => {
                fail(e.to_string());
                continue;
            }
        };
        if let Some(missing) = line
            .justification
            .references()
            .into_iter()
            .find(|r| !ctx.contains_key(r))
        {
            fail(format!("cites line {missing}, which does not precede it"));
        } else if line.justification.is_derived() {
            let lookup = |n: usize| originals.get(&n).cloned();
            match expand_line(p, &line.formula, line.justification, &lookup, first_free) {
                Err(message) => fail(format!("{}: {message}", line.justification)),
                Ok(expansion) => {
                    let mut local = ctx.clone();
                    for step in &expansion {
                        let step_canon = step.formula.canonical(p).expect("expansion stays in the poset");
                        if let Err(message) = check_core(p, &step_canon, step.justification, &local) {
                            fail(format!(
                                "{}: expansion step `{step}` fails: {message}",
                                line.justification
                            ));
                            break;
                        }
                        local.insert(step.number, step_canon);
                    }
                    let concluded = expansion.last().map(|l| l.formula.canonical(p).ok());
                    if concluded != Some(Some(canon.clone())) {
                        fail(format!("{}: expansion does not conclude this line", line.justification));
                    }
                }
            }
        } else if let Err(message) = check_core(p, &canon, line.justification, &ctx) {
            fail(message);
        }
        ctx.insert(line.number, canon);
        originals.insert(line.number, line.formula.clone());
    }
    ProofReport {
        accepted: diagnostics.is_empty(),
        diagnostics,
    }
}

fn imp(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        Formula::Implies(a, b) => Some((a, b)),
        _ => None,
    }
}

fn boxed(f: &Formula) -> Option<(&GradeExpr, &Formula)> {
    match f {
        Formula::Boxed(g, a) => Some((g, a)),
        _ => None,
    }
}

fn and(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        Formula::And(a, b) => Some((a, b)),
        _ => None,
    }
}

fn or(f: &Formula) -> Option<(&Formula, &Formula)> {
    match f {
        Formula::Or(a, b) => Some((a, b)),
        _ => None,
    }
}

fn is_reserved(f: &Formula) -> bool {
    matches!(f, Formula::Atom(a) if a == RESERVED_ATOM)
}

/// `[b]X -> [a]Y` as `(b, X, a, Y)`.
fn box_implication(f: &Formula) -> Option<(&GradeExpr, &Formula, &GradeExpr, &Formula)> {
    let (l, r) = imp(f)?;
    let (b, x) = boxed(l)?;
    let (a, y) = boxed(r)?;
    Some((b, x, a, y))
}

fn reserved_body(body: &Formula, scheme: &str) -> Result<(), String> {
    if is_reserved(body) {
        Ok(())
    } else {
        Err(format!(
            "{scheme} is restricted to the reserved atom {RESERVED_ATOM}, found body `{body}`"
        ))
    }
}

/// Checks one line with a core justification. Formulas are canonical, so
/// equivalent grades are structurally equal.
pub(crate) fn check_core(
    p: &GeneratorPoset,
    f: &Formula,
    just: Justification,
    ctx: &HashMap<usize, Formula>,
) -> Result<(), String> {
    let nf = |g: &GradeExpr| -> GradeNF { p.normalize(g).expect("canonical grades are valid") };
    let cited = |n: usize| -> Result<&Formula, String> {
        ctx.get(&n).ok_or_else(|| format!("cites line {n}, which does not precede it"))
    };
    let shape = |name: &str, expected: &str| format!("not an instance of {name}: expected `{expected}`");
    match just {
        Justification::Taut => match is_tautology(f) {
            Ok(true) => Ok(()),
            Ok(false) => Err("not a propositional tautology".into()),
            Err(e) => Err(e),
        },
        Justification::K => {
            let expected = "[a](A -> B) -> ([a]A -> [a]B)";
            let ok = (|| {
                let (l, r) = imp(f)?;
                let (a1, ab) = boxed(l)?;
                let (x, y) = imp(ab)?;
                let (ba, bb) = imp(r)?;
                let (a2, x2) = boxed(ba)?;
                let (a3, y2) = boxed(bb)?;
                Some(a1 == a2 && a2 == a3 && x == x2 && y == y2)
            })();
            if ok == Some(true) {
                Ok(())
            } else {
                Err(shape("K", expected))
            }
        }
        Justification::Dtop => match f {
            Formula::Not(inner) => match boxed(inner) {
                Some((g, Formula::False)) if nf(g) == p.top_nf() => Ok(()),
                _ => Err(shape("Dtop", "![T]false")),
            },
            _ => Err(shape("Dtop", "![T]false")),
        },
        Justification::A1 => {
            let expected = "([a]A & [b]A) -> [a | b]A";
            let (l, r) = imp(f).ok_or_else(|| shape("A1", expected))?;
            let (la, lb) = and(l).ok_or_else(|| shape("A1", expected))?;
            let ((a, x), (b, y), (c, z)) = match (boxed(la), boxed(lb), boxed(r)) {
                (Some(u), Some(v), Some(w)) => (u, v, w),
                _ => return Err(shape("A1", expected)),
            };
            if x != y || y != z {
                return Err(shape("A1", expected));
            }
            if nf(c) != p.join(&nf(a), &nf(b)) {
                return Err(format!("A1: consequent grade `{c}` is not the join of `{a}` and `{b}`"));
            }
            Ok(())
        }
        Justification::A2 => {
            let expected = "([a]p0 | [b]p0) -> [a & b]p0";
            let (l, r) = imp(f).ok_or_else(|| shape("A2", expected))?;
            let (la, lb) = or(l).ok_or_else(|| shape("A2", expected))?;
            let ((a, x), (b, y), (c, z)) = match (boxed(la), boxed(lb), boxed(r)) {
                (Some(u), Some(v), Some(w)) => (u, v, w),
                _ => return Err(shape("A2", expected)),
            };
            for body in [x, y, z] {
                reserved_body(body, "A2")?;
            }
            if nf(c) != p.meet(&nf(a), &nf(b)) {
                return Err(format!("A2: consequent grade `{c}` is not the meet of `{a}` and `{b}`"));
            }
            Ok(())
        }
        Justification::A3 => {
            let expected = "[a | b]p0 -> ([a]p0 & [b]p0)";
            let (l, r) = imp(f).ok_or_else(|| shape("A3", expected))?;
            let (ra, rb) = and(r).ok_or_else(|| shape("A3", expected))?;
            let ((c, z), (a, x), (b, y)) = match (boxed(l), boxed(ra), boxed(rb)) {
                (Some(u), Some(v), Some(w)) => (u, v, w),
                _ => return Err(shape("A3", expected)),
            };
            for body in [x, y, z] {
                reserved_body(body, "A3")?;
            }
            if nf(c) != p.join(&nf(a), &nf(b)) {
                return Err(format!("A3: antecedent grade `{c}` is not the join of `{a}` and `{b}`"));
            }
            Ok(())
        }
        Justification::A4 => {
            let expected = "[(a & b) | (a & c)]p0 -> [a & (b | c)]p0";
            let (l, x, r, y) = box_implication(f).ok_or_else(|| shape("A4", expected))?;
            reserved_body(x, "A4")?;
            reserved_body(y, "A4")?;
            if nf(l) != nf(r) {
                return Err(format!("A4: grades `{l}` and `{r}` are not equal by distributivity"));
            }
            Ok(())
        }
        Justification::A5 => {
            let expected = "[a]p0 -> [b]p0 with generators b < a";
            let (a, x, b, y) = box_implication(f).ok_or_else(|| shape("A5", expected))?;
            reserved_body(x, "A5")?;
            reserved_body(y, "A5")?;
            match (nf(a).as_generator(), nf(b).as_generator()) {
                (Some(ga), Some(gb)) if p.lt_idx(gb, ga) => Ok(()),
                (Some(_), Some(_)) => Err(format!("A5: `{b}` is not strictly below `{a}` in the poset")),
                _ => Err(format!("A5: both grades must be generators, found `{a}` and `{b}`")),
            }
        }
        Justification::Mp(i, j) => {
            let fi = cited(i)?;
            let fj = cited(j)?;
            match imp(fj) {
                Some((ante, cons)) if ante == fi && cons == f => Ok(()),
                _ => Err(format!("mp: line {j} is not `(line {i}) -> (this line)`")),
            }
        }
        Justification::Nec(i) => {
            let fi = cited(i)?;
            match boxed(f) {
                Some((g, body)) if nf(g) == p.top_nf() && body == fi => Ok(()),
                _ => Err(format!("nec: expected `[{}] (line {i})`", p.top_name())),
            }
        }
        Justification::Glb(i, j) => {
            let expected = "[b]p0 -> [a]p0";
            let (b, x, a1, x2) = box_implication(cited(i)?)
                .ok_or_else(|| format!("glb: line {i} is not of the form `{expected}`"))?;
            let (c, y, a2, y2) = box_implication(cited(j)?)
                .ok_or_else(|| format!("glb: line {j} is not of the form `[c]p0 -> [a]p0`"))?;
            let (d, z, a3, z2) = box_implication(f)
                .ok_or_else(|| shape("glb", "[b & c]p0 -> [a]p0"))?;
            for body in [x, x2, y, y2, z, z2] {
                reserved_body(body, "glb")?;
            }
            if a1 != a2 || a2 != a3 {
                return Err("glb: the three consequent grades differ".into());
            }
            if nf(d) != p.meet(&nf(b), &nf(c)) {
                return Err(format!("glb: antecedent grade `{d}` is not the meet of `{b}` and `{c}`"));
            }
            Ok(())
        }
        Justification::Gen(i) => {
            let (b, x, a, y) = box_implication(cited(i)?)
                .ok_or_else(|| format!("gen: line {i} is not of the form `[b]p0 -> [a]p0`"))?;
            reserved_body(x, "gen premise")?;
            reserved_body(y, "gen premise")?;
            match box_implication(f) {
                Some((b2, u, a2, v)) if b2 == b && a2 == a && u == v => Ok(()),
                _ => Err(format!("gen: expected `[{b}]A -> [{a}]A`")),
            }
        }
        Justification::Ag | Justification::Gmp(..) | Justification::Weak(_) => {
            Err(format!("{just} is a derived rule and must be expanded"))
        }
    }
}
