//! Forward chaining over graded Horn knowledge: graded atomic facts and
//! graded implications from a conjunction of atoms to an atom.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::formulas::{parse_formula, Formula, FormulaError, RESERVED_ATOM};
use crate::grades::{GeneratorPoset, GradeExpr, GradeNF};
use crate::proofs::{Justification, Proof, ProofBuilder, ProofError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Formula { line: usize, source: FormulaError },
    #[error("line {line}: outside the graded Horn fragment: {message}")]
    Fragment { line: usize, message: String },
    #[error("line {line}: the reserved atom {RESERVED_ATOM} may not appear in knowledge")]
    ReservedAtom { line: usize },
    #[error("atom `{0}` is not derivable")]
    Underivable(String),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// `[grade] atom`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub grade: GradeNF,
    pub expr: GradeExpr,
    pub atom: String,
}

/// `[grade] (body_1 & ... & body_n -> head)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub grade: GradeNF,
    pub expr: GradeExpr,
    pub body: Vec<String>,
    pub head: String,
    body_formula: Formula,
}

impl Fact {
    pub fn new(p: &GeneratorPoset, expr: GradeExpr, atom: impl Into<String>) -> Result<Self, EngineError> {
        let grade = p.normalize(&expr).map_err(ProofError::from)?;
        Ok(Fact {
            grade,
            expr,
            atom: atom.into(),
        })
    }

    pub fn formula(&self) -> Formula {
        Formula::boxed(self.expr.clone(), Formula::atom(&self.atom))
    }
}

impl Rule {
    pub fn new(
        p: &GeneratorPoset,
        expr: GradeExpr,
        body: Vec<String>,
        head: impl Into<String>,
    ) -> Result<Self, EngineError> {
        let grade = p.normalize(&expr).map_err(ProofError::from)?;
        let body_formula = Formula::and_all(body.iter().map(Formula::atom)).ok_or(EngineError::Fragment {
            line: 0,
            message: "rule body is empty".into(),
        })?;
        Ok(Rule {
            grade,
            expr,
            body,
            head: head.into(),
            body_formula,
        })
    }

    pub fn formula(&self) -> Formula {
        Formula::boxed(
            self.expr.clone(),
            Formula::implies(self.body_formula.clone(), Formula::atom(&self.head)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub poset: GeneratorPoset,
    pub facts: Vec<Fact>,
    pub rules: Vec<Rule>,
}

/// Best known grade per derivable atom.
pub type GradeMap = BTreeMap<String, GradeNF>;

fn conjunction_atoms(f: &Formula, out: &mut Vec<String>) -> Result<(), String> {
    match f {
        Formula::Atom(a) => {
            out.push(a.clone());
            Ok(())
        }
        Formula::And(a, b) => {
            conjunction_atoms(a, out)?;
            conjunction_atoms(b, out)
        }
        other => Err(format!("rule body `{other}` is not a conjunction of atoms")),
    }
}

/// Parses a KB file body against `p`. The `poset:` header is skipped.
pub fn load_kb(text: &str, p: &GeneratorPoset) -> Result<KnowledgeBase, EngineError> {
    let mut facts = Vec::new();
    let mut rules = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("poset:") {
            continue;
        }
        let Some(rest) = line.strip_prefix("assert:") else {
            return Err(EngineError::Parse {
                line: line_no,
                message: format!("unrecognized line `{line}`"),
            });
        };
        let f = parse_formula(rest.trim(), p).map_err(|source| EngineError::Formula {
            line: line_no,
            source,
        })?;
        if f.mentions_reserved() {
            return Err(EngineError::ReservedAtom { line: line_no });
        }
        let fragment = |message: String| EngineError::Fragment {
            line: line_no,
            message,
        };
        let Formula::Boxed(g, body) = f else {
            return Err(fragment(format!("`{f}` is not a graded formula")));
        };
        match *body {
            Formula::Atom(a) => facts.push(Fact::new(p, g, a)?),
            Formula::Implies(lhs, rhs) => {
                let Formula::Atom(head) = *rhs else {
                    return Err(fragment(format!("rule head `{rhs}` is not an atom")));
                };
                let mut atoms = Vec::new();
                conjunction_atoms(&lhs, &mut atoms).map_err(fragment)?;
                let distinct: BTreeSet<&String> = atoms.iter().collect();
                if distinct.len() != atoms.len() {
                    return Err(fragment(format!("rule body `{lhs}` repeats an atom")));
                }
                let mut rule = Rule::new(p, g, atoms, head)?;
                rule.body_formula = *lhs;
                rules.push(rule);
            }
            other => return Err(fragment(format!("`{other}` is neither an atom nor an implication"))),
        }
    }
    Ok(KnowledgeBase {
        poset: p.clone(),
        facts,
        rules,
    })
}

impl KnowledgeBase {
    pub fn new(poset: GeneratorPoset) -> Self {
        KnowledgeBase {
            poset,
            facts: Vec::new(),
            rules: Vec::new(),
        }
    }

    /// Premise formulas: facts, then rules, each in file order.
    pub fn premises(&self) -> Vec<Formula> {
        self.facts
            .iter()
            .map(Fact::formula)
            .chain(self.rules.iter().map(Rule::formula))
            .collect()
    }

    pub fn to_text(&self, poset_path: &str) -> String {
        let mut out = format!("poset: {poset_path}\n");
        for f in self.premises() {
            out.push_str(&format!("assert: {f}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Source {
    Fact(usize),
    Rule { rule: usize, body: Vec<usize> },
    Previous(usize),
}

#[derive(Debug, Clone)]
struct Version {
    grade: GradeNF,
    sources: Vec<Source>,
}

/// The saturated state of a knowledge base, with enough provenance to
/// rebuild a proof of every grade.
#[derive(Debug, Clone)]
pub struct Saturation<'k> {
    kb: &'k KnowledgeBase,
    versions: BTreeMap<String, Vec<Version>>,
}

/// Computes the least fixpoint by semi-naive forward chaining.
pub fn saturate(kb: &KnowledgeBase) -> Saturation<'_> {
    let p = &kb.poset;
    let mut versions: BTreeMap<String, Vec<Version>> = BTreeMap::new();
    let mut pending: BTreeMap<String, Vec<(Source, GradeNF)>> = BTreeMap::new();
    for (i, fact) in kb.facts.iter().enumerate() {
        pending
            .entry(fact.atom.clone())
            .or_default()
            .push((Source::Fact(i), fact.grade.clone()));
    }
    let mut by_body: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, rule) in kb.rules.iter().enumerate() {
        for b in &rule.body {
            by_body.entry(b.as_str()).or_default().push(i);
        }
    }
    loop {
        let mut changed = BTreeSet::new();
        for (atom, contributions) in std::mem::take(&mut pending) {
            let history = versions.entry(atom.clone()).or_default();
            let current = history.last().map(|v| v.grade.clone());
            let fresh: Vec<(Source, GradeNF)> = contributions
                .into_iter()
                .filter(|(_, g)| current.as_ref().is_none_or(|c| !p.grade_leq(g, c)))
                .collect();
            if fresh.is_empty() {
                continue;
            }
            let mut sources = Vec::new();
            let mut grade = current.clone();
            if current.is_some() {
                sources.push(Source::Previous(history.len() - 1));
            }
            for (source, g) in fresh {
                grade = Some(match grade {
                    None => g,
                    Some(acc) => p.join(&acc, &g),
                });
                sources.push(source);
            }
            history.push(Version {
                grade: grade.expect("at least one contribution"),
                sources,
            });
            changed.insert(atom);
        }
        if changed.is_empty() {
            break;
        }
        let fired: BTreeSet<usize> = changed
            .iter()
            .flat_map(|a| by_body.get(a.as_str()).into_iter().flatten().copied())
            .collect();
        for r in fired {
            let rule = &kb.rules[r];
            let mut grade = rule.grade.clone();
            let mut body = Vec::with_capacity(rule.body.len());
            let mut complete = true;
            for b in &rule.body {
                match versions.get(b).and_then(|h| h.last().map(|v| (h.len() - 1, v))) {
                    Some((k, v)) => {
                        grade = p.meet(&grade, &v.grade);
                        body.push(k);
                    }
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete {
                pending
                    .entry(rule.head.clone())
                    .or_default()
                    .push((Source::Rule { rule: r, body }, grade));
            }
        }
    }
    Saturation { kb, versions }
}

/// How two derivable atoms compare by best grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    FirstHigher,
    SecondHigher,
    Equal,
    Incomparable,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::FirstHigher => "first-higher",
            Comparison::SecondHigher => "second-higher",
            Comparison::Equal => "equal",
            Comparison::Incomparable => "incomparable",
        })
    }
}

/// The best grade of an atom and a checkable proof of
/// `premises -> [grade] atom`.
#[derive(Debug, Clone)]
pub struct QueryResult {
    pub grade: GradeNF,
    pub premises: Vec<Formula>,
    pub proof: Proof,
}

impl<'k> Saturation<'k> {
    pub fn knowledge_base(&self) -> &KnowledgeBase {
        self.kb
    }

    pub fn grades(&self) -> GradeMap {
        self.versions
            .iter()
            .filter_map(|(a, h)| h.last().map(|v| (a.clone(), v.grade.clone())))
            .collect()
    }

    pub fn grade(&self, atom: &str) -> Option<&GradeNF> {
        self.versions.get(atom).and_then(|h| h.last()).map(|v| &v.grade)
    }

    fn require(&self, atom: &str) -> Result<&GradeNF, EngineError> {
        self.grade(atom)
            .ok_or_else(|| EngineError::Underivable(atom.to_string()))
    }

    pub fn compare(&self, first: &str, second: &str) -> Result<Comparison, EngineError> {
        let p = &self.kb.poset;
        let a = self.require(first)?;
        let b = self.require(second)?;
        Ok(match (p.grade_leq(b, a), p.grade_leq(a, b)) {
            (true, true) => Comparison::Equal,
            (true, false) => Comparison::FirstHigher,
            (false, true) => Comparison::SecondHigher,
            (false, false) => Comparison::Incomparable,
        })
    }

    fn cite(&self, atom: &str, k: usize, facts: &mut BTreeSet<usize>, rules: &mut BTreeSet<usize>) {
        for s in &self.versions[atom][k].sources {
            match s {
                Source::Fact(i) => {
                    facts.insert(*i);
                }
                Source::Previous(j) => self.cite(atom, *j, facts, rules),
                Source::Rule { rule, body } => {
                    rules.insert(*rule);
                    for (b, &j) in self.kb.rules[*rule].body.iter().zip(body) {
                        self.cite(b, j, facts, rules);
                    }
                }
            }
        }
    }

    /// The best grade of `atom` with a proof trace.
    pub fn query(&self, atom: &str) -> Result<QueryResult, EngineError> {
        let grade = self.require(atom)?.clone();
        let last = self.versions[atom].len() - 1;
        let mut facts = BTreeSet::new();
        let mut rules = BTreeSet::new();
        self.cite(atom, last, &mut facts, &mut rules);
        let premises: Vec<Formula> = facts
            .iter()
            .map(|&i| self.kb.facts[i].formula())
            .chain(rules.iter().map(|&i| self.kb.rules[i].formula()))
            .collect();
        let hyp = Formula::and_all(premises.clone()).expect("a derivable atom cites a premise");
        let mut tracer = Tracer {
            sat: self,
            b: ProofBuilder::new(&self.kb.poset, 1),
            hyp,
            lemmas: HashMap::new(),
        };
        tracer.version(atom, last)?;
        Ok(QueryResult {
            grade,
            premises,
            proof: tracer.b.into_proof(),
        })
    }
}

struct Tracer<'s, 'k> {
    sat: &'s Saturation<'k>,
    b: ProofBuilder<'s>,
    hyp: Formula,
    lemmas: HashMap<(String, usize), usize>,
}

impl Tracer<'_, '_> {
    fn given(&self, g: &GradeNF, atom: &str) -> Formula {
        let e = self.sat.kb.poset.nf_to_expr(g);
        Formula::implies(self.hyp.clone(), Formula::boxed(e, Formula::atom(atom)))
    }

    /// `H -> [g]atom` for the `k`-th version of `atom`.
    fn version(&mut self, atom: &str, k: usize) -> Result<usize, EngineError> {
        if let Some(&n) = self.lemmas.get(&(atom.to_string(), k)) {
            return Ok(n);
        }
        let p = &self.sat.kb.poset;
        let v = &self.sat.versions[atom][k];
        let mut folded: Option<(GradeNF, usize)> = None;
        for s in &v.sources {
            let (g, line) = self.source(atom, s)?;
            folded = Some(match folded {
                None => (g, line),
                Some((acc, acc_line)) => {
                    let (ea, eg) = (p.nf_to_expr(&acc), p.nf_to_expr(&g));
                    let joined = p.join(&acc, &g);
                    let body = Formula::atom(atom);
                    let a1 = self.b.axiom(
                        Formula::implies(
                            Formula::and(Formula::boxed(ea.clone(), body.clone()), Formula::boxed(eg.clone(), body.clone())),
                            Formula::boxed(GradeExpr::join(ea, eg), body),
                        ),
                        Justification::A1,
                    );
                    let target = self.given(&joined, atom);
                    (joined, self.b.glue(&[acc_line, line, a1], target))
                }
            });
        }
        let (g, line) = folded.expect("versions have sources");
        debug_assert_eq!(g, v.grade);
        self.lemmas.insert((atom.to_string(), k), line);
        Ok(line)
    }

    fn source(&mut self, atom: &str, s: &Source) -> Result<(GradeNF, usize), EngineError> {
        let kb = self.sat.kb;
        let p = &kb.poset;
        match s {
            Source::Previous(j) => {
                let g = self.sat.versions[atom][*j].grade.clone();
                Ok((g, self.version(atom, *j)?))
            }
            Source::Fact(i) => {
                let g = kb.facts[*i].grade.clone();
                let f = self.given(&g, atom);
                Ok((g, self.b.taut(f)))
            }
            Source::Rule { rule, body } => {
                let r = &kb.rules[*rule];
                let mut m: Option<GradeNF> = None;
                let mut lemmas = Vec::new();
                for (b, &j) in r.body.iter().zip(body) {
                    let g = self.sat.versions[b][j].grade.clone();
                    lemmas.push((b.clone(), g.clone(), self.version(b, j)?));
                    m = Some(match m {
                        None => g,
                        Some(acc) => p.meet(&acc, &g),
                    });
                }
                let m = m.expect("rule bodies are non-empty");
                let conj = self.conjunction(&lemmas, &m, &r.body_formula)?;
                let em = p.nf_to_expr(&m);
                let head = Formula::atom(&r.head);
                let out = p.meet(&m, &r.grade);
                let eo = p.nf_to_expr(&out);
                let ag_target = Formula::implies(
                    Formula::and(
                        Formula::boxed(em.clone(), r.body_formula.clone()),
                        Formula::boxed(r.expr.clone(), Formula::implies(r.body_formula.clone(), head.clone())),
                    ),
                    Formula::boxed(eo, head),
                );
                let ag = self.b.axiom(ag_target, Justification::Ag);
                let target = self.given(&out, &r.head);
                Ok((out, self.b.glue(&[conj, ag], target)))
            }
        }
    }

    /// `H -> [m](b_1 & ... & b_n)` from the lemmas `H -> [g_i]b_i`.
    fn conjunction(
        &mut self,
        lemmas: &[(String, GradeNF, usize)],
        m: &GradeNF,
        body: &Formula,
    ) -> Result<usize, EngineError> {
        let p = &self.sat.kb.poset;
        if let [(_, _, line)] = lemmas {
            return Ok(*line);
        }
        let em = p.nf_to_expr(m);
        let mut premises: Vec<usize> = lemmas.iter().map(|(_, _, l)| *l).collect();
        for (b, g, _) in lemmas {
            let o = self.b.order(m, g)?;
            premises.push(self.b.gen(o, p.nf_to_expr(g), em.clone(), Formula::atom(b)));
        }
        let mut chain = body.clone();
        for (b, _, _) in lemmas.iter().rev() {
            chain = Formula::implies(Formula::atom(b), chain);
        }
        let t = self.b.taut(chain.clone());
        let boxed_top = self.b.nec(t);
        let top = p.top_nf();
        let o = self.b.order(m, &top)?;
        let lift = self.b.gen(o, p.nf_to_expr(&top), em.clone(), chain.clone());
        premises.push(self.b.mp(boxed_top, lift));
        let mut rest = chain;
        while let Formula::Implies(a, r) = rest {
            premises.push(self.b.k(em.clone(), *a, (*r).clone()));
            rest = *r;
        }
        let target = Formula::implies(self.hyp.clone(), Formula::boxed(em, body.clone()));
        Ok(self.b.glue(&premises, target))
    }
}

/// Best grades of every derivable atom.
pub fn grades(kb: &KnowledgeBase) -> GradeMap {
    saturate(kb).grades()
}

pub fn query(kb: &KnowledgeBase, atom: &str) -> Result<QueryResult, EngineError> {
    saturate(kb).query(atom)
}

pub fn compare(kb: &KnowledgeBase, first: &str, second: &str) -> Result<Comparison, EngineError> {
    saturate(kb).compare(first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proofs::check_proof;

    fn antichain() -> GeneratorPoset {
        GeneratorPoset::parse("generators: alpha beta gamma delta\ntop: T\norder:").unwrap()
    }

    fn theater() -> GeneratorPoset {
        GeneratorPoset::parse("generators: alpha beta gamma delta\ntop: T\norder:\ngamma < alpha\ndelta < beta").unwrap()
    }

    const EXAMPLE1: &str = "assert: [alpha] cold\nassert: [beta] rain\nassert: [gamma] (cold -> ill)\nassert: [delta] (rain -> ill)";
    const EXAMPLE3: &str = "assert: [alpha] traffic_jams\nassert: [delta] finish_early\n\
                            assert: [beta] (traffic_jams -> late)\nassert: [gamma] (finish_early -> restaurant)";

    fn assert_trace(kb: &KnowledgeBase, atom: &str) -> QueryResult {
        let q = query(kb, atom).unwrap();
        let report = check_proof(&q.proof);
        assert!(report.accepted, "{}\n{:?}", q.proof.body_text(), report.diagnostics);
        let expected = Formula::implies(
            Formula::and_all(q.premises.clone()).unwrap(),
            Formula::boxed(kb.poset.nf_to_expr(&q.grade), Formula::atom(atom)),
        );
        assert_eq!(q.proof.conclusion(), Some(&expected));
        q
    }

    #[test]
    fn loads_facts_and_rules() {
        let kb = load_kb(EXAMPLE1, &antichain()).unwrap();
        assert_eq!(kb.facts.len(), 2);
        assert_eq!(kb.rules.len(), 2);
        assert_eq!(kb.rules[0].body, vec!["cold".to_string()]);
    }

    #[test]
    fn rejects_outside_fragment() {
        let p = antichain();
        for text in ["assert: [alpha] (p | q)", "assert: [alpha] [beta] p", "assert: [alpha] (p -> q | r)", "assert: p", "assert: [alpha] (p & p -> q)"] {
            assert!(matches!(load_kb(text, &p), Err(EngineError::Fragment { line: 1, .. })), "{text}");
        }
        assert!(matches!(load_kb("assert: [alpha] p0", &p), Err(EngineError::ReservedAtom { line: 1 })));
        assert!(matches!(load_kb("\nassert: [zeta] p", &p), Err(EngineError::Formula { line: 2, .. })));
    }

    #[test]
    fn example_one() {
        let p = antichain();
        let kb = load_kb(EXAMPLE1, &p).unwrap();
        let g = grades(&kb);
        assert_eq!(g["ill"], p.parse_grade("(alpha & gamma) | (beta & delta)").unwrap());
        assert_trace(&kb, "ill");
    }

    #[test]
    fn example_two() {
        let p = antichain();
        let kb = load_kb("assert: [alpha] cold\nassert: [beta] cold\nassert: [gamma] (cold -> ill)", &p).unwrap();
        let g = grades(&kb);
        assert_eq!(g["ill"], p.parse_grade("(alpha | beta) & gamma").unwrap());
        assert_eq!(g["ill"], p.parse_grade("(alpha & gamma) | (beta & gamma)").unwrap());
        assert_trace(&kb, "ill");
    }

    #[test]
    fn example_three() {
        let p = theater();
        let kb = load_kb(EXAMPLE3, &p).unwrap();
        let sat = saturate(&kb);
        assert_eq!(sat.grade("late"), Some(&p.parse_grade("alpha & beta").unwrap()));
        assert_eq!(sat.grade("restaurant"), Some(&p.parse_grade("delta & gamma").unwrap()));
        assert_eq!(sat.compare("late", "restaurant").unwrap(), Comparison::FirstHigher);
        assert_eq!(sat.compare("restaurant", "late").unwrap(), Comparison::SecondHigher);
        assert_eq!(sat.compare("late", "late").unwrap(), Comparison::Equal);
        assert_trace(&kb, "restaurant");
    }

    #[test]
    fn bare_fact_has_one_line_trace() {
        let p = antichain();
        let kb = load_kb("assert: [alpha] a", &p).unwrap();
        let q = assert_trace(&kb, "a");
        assert_eq!(q.proof.lines.len(), 1);
    }

    #[test]
    fn incomparable_and_underivable() {
        let p = antichain();
        let kb = load_kb(&format!("{EXAMPLE1}\nassert: [beta] x"), &p).unwrap();
        assert_eq!(compare(&kb, "ill", "x").unwrap(), Comparison::Incomparable);
        assert_eq!(query(&kb, "nothing").unwrap_err(), EngineError::Underivable("nothing".into()));
    }

    #[test]
    fn cycles_and_conjunctions() {
        let p = theater();
        let kb = load_kb(
            "assert: [alpha] a\nassert: [beta] b\nassert: [T] (a & b -> c)\nassert: [gamma] (c -> a)\nassert: [delta & alpha] (c & a -> b)\nassert: [T] (b -> d)",
            &p,
        )
        .unwrap();
        let g = grades(&kb);
        assert_eq!(g["c"], p.parse_grade("alpha & beta").unwrap());
        for atom in ["a", "b", "c", "d"] {
            assert_trace(&kb, atom);
        }
    }
}
