use std::collections::HashMap;

use crate::formulas::Formula;
use crate::grades::{GeneratorPoset, GradeExpr, GradeNF, MeetSet};

use super::{Justification, Proof, ProofError, ProofLine};

fn p0(g: GradeExpr) -> Formula {
    Formula::boxed(g, Formula::reserved())
}

/// Incrementally emits numbered proof lines. Axiom, tautology and order
/// lemmas are shared when requested more than once.
pub struct ProofBuilder<'p> {
    poset: &'p GeneratorPoset,
    lines: Vec<ProofLine>,
    next: usize,
    known: HashMap<usize, Formula>,
    axioms: HashMap<(Formula, Justification), usize>,
    orders: HashMap<(GradeNF, GradeNF), usize>,
}

impl<'p> ProofBuilder<'p> {
    /// A builder whose first emitted line is numbered `first`.
    pub fn new(poset: &'p GeneratorPoset, first: usize) -> Self {
        ProofBuilder {
            poset,
            lines: Vec::new(),
            next: first,
            known: HashMap::new(),
            axioms: HashMap::new(),
            orders: HashMap::new(),
        }
    }

    pub fn poset(&self) -> &GeneratorPoset {
        self.poset
    }

    pub fn lines(&self) -> &[ProofLine] {
        &self.lines
    }

    pub fn into_lines(self) -> Vec<ProofLine> {
        self.lines
    }

    pub fn into_proof(self) -> Proof {
        Proof::new(self.poset.clone(), self.lines)
    }

    /// Makes an existing line (not emitted by this builder) citable.
    pub fn seed(&mut self, number: usize, formula: Formula) {
        self.known.insert(number, formula);
    }

    pub fn formula(&self, number: usize) -> Option<&Formula> {
        self.known.get(&number)
    }

    pub fn push(&mut self, formula: Formula, justification: Justification) -> usize {
        let number = self.next;
        self.next += 1;
        self.known.insert(number, formula.clone());
        self.lines.push(ProofLine {
            number,
            formula,
            justification,
        });
        number
    }

    /// Emits an axiom or tautology line, reusing an identical earlier one.
    pub fn axiom(&mut self, formula: Formula, justification: Justification) -> usize {
        let key = (formula, justification);
        if let Some(&n) = self.axioms.get(&key) {
            return n;
        }
        let n = self.push(key.0.clone(), justification);
        self.axioms.insert(key, n);
        n
    }

    pub fn taut(&mut self, formula: Formula) -> usize {
        self.axiom(formula, Justification::Taut)
    }

    /// Modus ponens from `premise` and `implication`, which must be
    /// `premise -> C`; emits `C`.
    pub fn mp(&mut self, premise: usize, implication: usize) -> usize {
        let consequent = match self.known.get(&implication) {
            Some(Formula::Implies(_, c)) => (**c).clone(),
            other => panic!("line {implication} is not an implication: {other:?}"),
        };
        self.push(consequent, Justification::Mp(premise, implication))
    }

    /// Derives `conclusion` from the cited lines by one tautology
    /// `P1 -> (P2 -> ... -> conclusion)` and a modus ponens chain.
    pub fn glue(&mut self, premises: &[usize], conclusion: Formula) -> usize {
        let mut chain = conclusion;
        for &n in premises.iter().rev() {
            chain = Formula::implies(self.known[&n].clone(), chain);
        }
        let mut cur = self.taut(chain);
        for &n in premises {
            cur = self.mp(n, cur);
        }
        cur
    }

    /// From an order line `[upper]p0 -> [lower]p0`, emits
    /// `[upper]body -> [lower]body`. The grade expressions may be any
    /// equivalent spelling of the order line's grades.
    pub fn gen(&mut self, order: usize, upper: GradeExpr, lower: GradeExpr, body: Formula) -> usize {
        let f = Formula::implies(Formula::boxed(upper, body.clone()), Formula::boxed(lower, body));
        self.push(f, Justification::Gen(order))
    }

    pub fn nec(&mut self, line: usize) -> usize {
        let f = Formula::boxed(GradeExpr::gen(self.poset.top_name()), self.known[&line].clone());
        self.push(f, Justification::Nec(line))
    }

    /// `[g](a -> b) -> ([g]a -> [g]b)`.
    pub fn k(&mut self, g: GradeExpr, a: Formula, b: Formula) -> usize {
        let f = Formula::implies(
            Formula::boxed(g.clone(), Formula::implies(a.clone(), b.clone())),
            Formula::implies(Formula::boxed(g.clone(), a), Formula::boxed(g, b)),
        );
        self.axiom(f, Justification::K)
    }

    fn expr(&self, nf: &GradeNF) -> GradeExpr {
        self.poset.nf_to_expr(nf)
    }

    fn clause_expr(&self, s: &MeetSet) -> GradeExpr {
        GradeExpr::meet_all(s.iter().map(|&g| GradeExpr::gen(self.poset.name(g))))
            .expect("meet-sets are non-empty")
    }

    /// Chains `[x]p0 -> [y]p0` and `[y]p0 -> [z]p0`; `None` is the identity.
    fn compose(&mut self, first: Option<usize>, second: Option<usize>, from: &GradeExpr, to: &GradeExpr) -> Option<usize> {
        match (first, second) {
            (None, s) => s,
            (f, None) => f,
            (Some(f), Some(s)) => Some(self.glue(&[f, s], Formula::implies(p0(from.clone()), p0(to.clone())))),
        }
    }

    fn materialize(&mut self, lemma: Option<usize>, from: &GradeExpr, to: &GradeExpr) -> usize {
        match lemma {
            Some(n) => n,
            None => self.taut(Formula::implies(p0(from.clone()), p0(to.clone()))),
        }
    }

    /// `[b]p0 -> [clause]p0` for one clause of the join `b`.
    fn project(&mut self, b: &GradeNF, clause: &MeetSet) -> Option<usize> {
        if b.clauses().len() == 1 {
            return None;
        }
        let cj = self.clause_expr(clause);
        let rest = GradeExpr::join_all(
            b.clauses()
                .iter()
                .filter(|c| *c != clause)
                .map(|c| self.clause_expr(c)),
        )
        .expect("a join with several clauses has a remainder");
        let a3 = self.axiom(
            Formula::implies(
                p0(GradeExpr::join(cj.clone(), rest.clone())),
                Formula::and(p0(cj.clone()), p0(rest)),
            ),
            Justification::A3,
        );
        let eb = self.expr(b);
        Some(self.glue(&[a3], Formula::implies(p0(eb), p0(cj))))
    }

    /// `[s]p0 -> [clause]p0` for a member `s` of the meet-set `clause`.
    fn shrink(&mut self, s: usize, clause: &MeetSet) -> Option<usize> {
        if clause.len() == 1 {
            return None;
        }
        let es = GradeExpr::gen(self.poset.name(s));
        let rest = self.clause_expr(&clause.iter().copied().filter(|&g| g != s).collect());
        let a2 = self.axiom(
            Formula::implies(
                Formula::or(p0(es.clone()), p0(rest.clone())),
                p0(GradeExpr::meet(es.clone(), rest)),
            ),
            Justification::A2,
        );
        let ec = self.clause_expr(clause);
        Some(self.glue(&[a2], Formula::implies(p0(es), p0(ec))))
    }

    /// `[upper]p0 -> [lower]p0` for meet-sets with `lower <= upper`.
    fn meet_sets(&mut self, lower: &MeetSet, upper: &MeetSet) -> Option<usize> {
        if lower == upper {
            return None;
        }
        let p = self.poset;
        let el = self.clause_expr(lower);
        let mut folded: Option<(GradeExpr, usize)> = None;
        for &t in upper {
            let s = *lower
                .iter()
                .find(|&&s| p.leq_idx(s, t))
                .expect("meet-set order guarantees a member below each upper generator");
            let et = GradeExpr::gen(p.name(t));
            let es = GradeExpr::gen(p.name(s));
            let step = if s == t {
                None
            } else {
                Some(self.axiom(Formula::implies(p0(et.clone()), p0(es.clone())), Justification::A5))
            };
            let widen = self.shrink(s, lower);
            let lemma = self.compose(step, widen, &et, &el);
            let line = self.materialize(lemma, &et, &el);
            folded = Some(match folded {
                None => (et, line),
                Some((acc, acc_line)) => {
                    let m = GradeExpr::meet(acc, et);
                    let f = Formula::implies(p0(m.clone()), p0(el.clone()));
                    (m, self.push(f, Justification::Glb(acc_line, line)))
                }
            });
        }
        folded.map(|(_, n)| n)
    }

    /// Proves `[b]p0 -> [a]p0` for `a <= b` and returns the final line, which
    /// is stated with the canonical expressions of `a` and `b`.
    pub fn order(&mut self, a: &GradeNF, b: &GradeNF) -> Result<usize, ProofError> {
        let p = self.poset;
        if !p.grade_leq(a, b) {
            return Err(ProofError::OrderDoesNotHold {
                lower: p.render(a),
                upper: p.render(b),
            });
        }
        if let Some(&n) = self.orders.get(&(a.clone(), b.clone())) {
            return Ok(n);
        }
        let ea = self.expr(a);
        let eb = self.expr(b);
        let target = Formula::implies(p0(eb.clone()), p0(ea.clone()));
        let n = if a == b {
            self.taut(target)
        } else {
            let mut folded: Option<(GradeExpr, usize)> = None;
            for ai in a.clauses() {
                let bj = b
                    .clauses()
                    .iter()
                    .find(|bj| p.meet_set_leq(ai, bj))
                    .expect("grade order guarantees a covering clause");
                let eai = self.clause_expr(ai);
                let to_bj = self.project(b, bj);
                let to_ai = self.meet_sets(ai, bj);
                let lemma = self.compose(to_bj, to_ai, &eb, &eai);
                let line = self.materialize(lemma, &eb, &eai);
                folded = Some(match folded {
                    None => (eai, line),
                    Some((acc, acc_line)) => {
                        let j = GradeExpr::join(acc.clone(), eai.clone());
                        let a1 = self.axiom(
                            Formula::implies(Formula::and(p0(acc), p0(eai)), p0(j.clone())),
                            Justification::A1,
                        );
                        let f = Formula::implies(p0(eb.clone()), p0(j.clone()));
                        (j, self.glue(&[acc_line, line, a1], f))
                    }
                });
            }
            let last = folded.expect("normal forms are non-empty").1;
            if self.known[&last] == target {
                last
            } else {
                self.glue(&[last], target)
            }
        };
        self.orders.insert((a.clone(), b.clone()), n);
        Ok(n)
    }

    /// Derives `([a]A & [b](A -> B)) -> [c]B` for `c ≡ a & b`, stated as
    /// `target`.
    pub fn ag(&mut self, a: &GradeExpr, b: &GradeExpr, body_a: &Formula, body_b: &Formula, target: Formula) -> Result<usize, ProofError> {
        let p = self.poset;
        let na = p.normalize(a)?;
        let nb = p.normalize(b)?;
        let m = p.meet(&na, &nb);
        let em = self.expr(&m);
        let imp = Formula::implies(body_a.clone(), body_b.clone());
        let oa = self.order(&m, &na)?;
        let ga = self.gen(oa, self.expr(&na), em.clone(), body_a.clone());
        let ob = self.order(&m, &nb)?;
        let gb = self.gen(ob, self.expr(&nb), em.clone(), imp);
        let k = self.k(em, body_a.clone(), body_b.clone());
        Ok(self.glue(&[ga, gb, k], target))
    }
}

fn shape(just: Justification, expected: &str) -> String {
    format!("line does not have the shape required by {just}: expected `{expected}`")
}

/// Expands one derived line into core steps numbered from `first`. The last
/// step states `target` exactly. `lookup` resolves cited line numbers.
pub(crate) fn expand_line(
    p: &GeneratorPoset,
    target: &Formula,
    just: Justification,
    lookup: &dyn Fn(usize) -> Option<Formula>,
    first: usize,
) -> Result<Vec<ProofLine>, String> {
    let canon = |f: &Formula| f.canonical(p).map_err(|e| e.to_string());
    let cited = |n: usize| lookup(n).ok_or_else(|| format!("cites unknown line {n}"));
    let nf = |g: &GradeExpr| p.normalize(g).map_err(|e| e.to_string());
    let mut b = ProofBuilder::new(p, first);
    match just {
        Justification::Ag => {
            let expected = "([a]A & [b](A -> B)) -> [a & b]B";
            let parts = match target {
                Formula::Implies(l, r) => match (&**l, &**r) {
                    (Formula::And(x, y), Formula::Boxed(c, z)) => match (&**x, &**y) {
                        (Formula::Boxed(a, fa), Formula::Boxed(bg, imp)) => match &**imp {
                            Formula::Implies(fa2, fb) => Some((a, fa, bg, fa2, fb, c, z)),
                            _ => None,
                        },
                        _ => None,
                    },
                    _ => None,
                },
                _ => None,
            };
            let (a, fa, bg, fa2, fb, c, z) = parts.ok_or_else(|| shape(just, expected))?;
            if canon(fa)? != canon(fa2)? || canon(fb)? != canon(z)? {
                return Err(shape(just, expected));
            }
            if nf(c)? != p.meet(&nf(a)?, &nf(bg)?) {
                return Err(format!("grade `{c}` is not the meet of `{a}` and `{bg}`"));
            }
            b.ag(a, bg, fa, fb, target.clone()).map_err(|e| e.to_string())?;
        }
        Justification::Gmp(i, j) => {
            let fi = cited(i)?;
            let fj = cited(j)?;
            let (a, fa) = match &fi {
                Formula::Boxed(a, fa) => (a, &**fa),
                _ => return Err(format!("gmp: line {i} is not of the form `[a]A`")),
            };
            let (bg, fa2, fb) = match &fj {
                Formula::Boxed(bg, imp) => match &**imp {
                    Formula::Implies(x, y) => (bg, &**x, &**y),
                    _ => return Err(format!("gmp: line {j} is not of the form `[b](A -> B)`")),
                },
                _ => return Err(format!("gmp: line {j} is not of the form `[b](A -> B)`")),
            };
            let (c, z) = match target {
                Formula::Boxed(c, z) => (c, &**z),
                _ => return Err(shape(just, "[a & b]B")),
            };
            if canon(fa)? != canon(fa2)? {
                return Err(format!("gmp: the antecedent in line {j} differs from line {i}"));
            }
            if canon(fb)? != canon(z)? {
                return Err(format!("gmp: the consequent in line {j} differs from this line"));
            }
            if nf(c)? != p.meet(&nf(a)?, &nf(bg)?) {
                return Err(format!("gmp: grade `{c}` is not the meet of `{a}` and `{bg}`"));
            }
            b.seed(i, fi.clone());
            b.seed(j, fj.clone());
            let ag_target = Formula::implies(Formula::and(fi.clone(), fj.clone()), target.clone());
            let ag = b.ag(a, bg, fa, fb, ag_target).map_err(|e| e.to_string())?;
            b.glue(&[i, j, ag], target.clone());
        }
        Justification::Weak(i) => {
            let fi = cited(i)?;
            let (a, fa) = match &fi {
                Formula::Boxed(a, fa) => (a, &**fa),
                _ => return Err(format!("weak: line {i} is not of the form `[a]A`")),
            };
            let (bg, fb) = match target {
                Formula::Boxed(bg, fb) => (bg, &**fb),
                _ => return Err(shape(just, "[b]A")),
            };
            if canon(fa)? != canon(fb)? {
                return Err(format!("weak: the body differs from line {i}"));
            }
            b.seed(i, fi.clone());
            let o = b.order(&nf(bg)?, &nf(a)?).map_err(|e| e.to_string())?;
            let g = b.gen(o, a.clone(), bg.clone(), fb.clone());
            b.mp(i, g);
        }
        other => return Err(format!("{other} is not a derived rule")),
    }
    Ok(b.into_lines())
}

/// Expands the derived line numbered `number` into core steps, numbered after
/// the last line of `proof`.
pub fn expand_derived(proof: &Proof, number: usize) -> Result<Vec<ProofLine>, ProofError> {
    let pos = proof
        .lines
        .iter()
        .position(|l| l.number == number)
        .ok_or_else(|| ProofError::Shape {
            line: number,
            message: "no such line".into(),
        })?;
    let line = &proof.lines[pos];
    let earlier: HashMap<usize, &Formula> = proof.lines[..pos].iter().map(|l| (l.number, &l.formula)).collect();
    let lookup = |n: usize| earlier.get(&n).map(|f| (*f).clone());
    let first = proof.lines.iter().map(|l| l.number).max().unwrap_or(0) + 1;
    expand_line(&proof.poset, &line.formula, line.justification, &lookup, first)
        .map_err(|message| ProofError::Shape { line: number, message })
}

/// Replaces every derived line by its core expansion and renumbers the
/// result from 1.
pub fn expand_proof(proof: &Proof) -> Result<Proof, ProofError> {
    let mut out: Vec<ProofLine> = Vec::new();
    let mut renumber: HashMap<usize, usize> = HashMap::new();
    for line in &proof.lines {
        if renumber.contains_key(&line.number) {
            return Err(ProofError::Shape {
                line: line.number,
                message: format!("duplicate line number {}", line.number),
            });
        }
        // Unknown citations map to 0, which no line carries.
        let just = line.justification.map_refs(|r| renumber.get(&r).copied().unwrap_or(0));
        if just.is_derived() {
            let lookup = |n: usize| out.get(n.wrapping_sub(1)).map(|l| l.formula.clone());
            let steps = expand_line(&proof.poset, &line.formula, just, &lookup, out.len() + 1)
                .map_err(|message| ProofError::Shape {
                    line: line.number,
                    message,
                })?;
            out.extend(steps);
        } else {
            out.push(ProofLine {
                number: out.len() + 1,
                formula: line.formula.clone(),
                justification: just,
            });
        }
        renumber.insert(line.number, out.len());
    }
    Ok(Proof::new(proof.poset.clone(), out))
}

/// A proof of `[b]p0 -> [a]p0`, defined when `a <= b`.
pub fn prove_order(p: &GeneratorPoset, a: &GradeNF, b: &GradeNF) -> Result<Proof, ProofError> {
    let mut builder = ProofBuilder::new(p, 1);
    builder.order(a, b)?;
    Ok(builder.into_proof())
}
