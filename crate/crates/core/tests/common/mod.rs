#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use gradedlogic::formulas::Formula;
use gradedlogic::grades::{GeneratorPoset, GradeExpr};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn poset(name: &str) -> GeneratorPoset {
    GeneratorPoset::parse(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

pub fn weather() -> GeneratorPoset {
    poset("weather.poset")
}

/// Random poset on generators g0..g{n-1} plus T: each forward pair is
/// ordered with probability `density`.
pub fn random_poset<R: Rng>(rng: &mut R, n: usize, density: f64) -> GeneratorPoset {
    let names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                pairs.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    GeneratorPoset::new(&names, "T", &pairs).unwrap()
}

/// Brute-force lattice order, independent of the normal-form code: `a <= b`
/// iff every order-preserving 0/1 valuation of the generators makes `a`
/// at most `b`.
pub struct Oracle {
    valuations: Vec<u64>,
    poset: GeneratorPoset,
}

impl Oracle {
    pub fn new(p: &GeneratorPoset) -> Self {
        let n = p.len();
        assert!(n <= 16);
        let valuations = (0u64..1 << n)
            .filter(|v| {
                (0..n).all(|a| (0..n).all(|b| !p.leq_idx(a, b) || (v >> a) & 1 == 0 || (v >> b) & 1 == 1))
            })
            .collect();
        Oracle {
            valuations,
            poset: p.clone(),
        }
    }

    fn eval(&self, e: &GradeExpr, v: u64) -> bool {
        match e {
            GradeExpr::Gen(g) => (v >> self.poset.index_of(g).unwrap()) & 1 == 1,
            GradeExpr::Meet(a, b) => self.eval(a, v) && self.eval(b, v),
            GradeExpr::Join(a, b) => self.eval(a, v) || self.eval(b, v),
        }
    }

    /// The truth vector of `e` over all valuations.
    pub fn vector(&self, e: &GradeExpr) -> Vec<bool> {
        self.valuations.iter().map(|&v| self.eval(e, v)).collect()
    }

    pub fn leq(&self, a: &GradeExpr, b: &GradeExpr) -> bool {
        self.valuations.iter().all(|&v| !self.eval(a, v) || self.eval(b, v))
    }

    /// Number of lattice elements: closure of the generator vectors under
    /// pointwise min and max.
    pub fn lattice_size(&self) -> usize {
        let mut set: BTreeSet<Vec<bool>> = (0..self.poset.len())
            .map(|g| self.vector(&GradeExpr::gen(self.poset.name(g))))
            .collect();
        loop {
            let items: Vec<Vec<bool>> = set.iter().cloned().collect();
            let before = set.len();
            for x in &items {
                for y in &items {
                    set.insert(x.iter().zip(y).map(|(a, b)| *a && *b).collect());
                    set.insert(x.iter().zip(y).map(|(a, b)| *a || *b).collect());
                }
            }
            if set.len() == before {
                return set.len();
            }
        }
    }
}

pub fn random_expr<R: Rng>(rng: &mut R, p: &GeneratorPoset, depth: usize) -> GradeExpr {
    if depth == 0 || rng.random_bool(0.3) {
        return GradeExpr::gen(p.names().choose(rng).unwrap());
    }
    let a = random_expr(rng, p, depth - 1);
    let b = random_expr(rng, p, depth - 1);
    if rng.random_bool(0.5) {
        GradeExpr::meet(a, b)
    } else {
        GradeExpr::join(a, b)
    }
}

/// Random formula over `atoms` with modal depth at most `modal`.
pub fn random_formula<R: Rng>(rng: &mut R, p: &GeneratorPoset, atoms: &[&str], depth: usize, modal: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(*atoms.choose(rng).unwrap()),
        };
    }
    let sub = |rng: &mut R| random_formula(rng, p, atoms, depth - 1, modal);
    match rng.random_range(0..7) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::iff(sub(rng), sub(rng)),
        _ if modal > 0 => Formula::boxed(random_expr(rng, p, 2), random_formula(rng, p, atoms, depth - 1, modal - 1)),
        _ => Formula::not(sub(rng)),
    }
}

/// Expressions of depth at most `depth`, counted and sampled uniformly.
pub struct ExprSpace {
    names: Vec<String>,
    counts: Vec<u128>,
}

impl ExprSpace {
    pub fn new(p: &GeneratorPoset, depth: usize) -> Self {
        let g = p.len() as u128;
        let mut counts = vec![g];
        for d in 1..=depth {
            let prev = counts[d - 1];
            counts.push(g + 2 * prev * prev);
        }
        ExprSpace {
            names: p.names().to_vec(),
            counts,
        }
    }

    pub fn count(&self) -> u128 {
        *self.counts.last().unwrap()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> GradeExpr {
        self.sample_at(rng, self.counts.len() - 1)
    }

    fn sample_at<R: Rng>(&self, rng: &mut R, d: usize) -> GradeExpr {
        let g = self.names.len() as u128;
        let k = rng.random_range(0..self.counts[d]);
        if k < g {
            return GradeExpr::gen(&self.names[k as usize]);
        }
        let a = self.sample_at(rng, d - 1);
        let b = self.sample_at(rng, d - 1);
        if (k - g).is_multiple_of(2) {
            GradeExpr::meet(a, b)
        } else {
            GradeExpr::join(a, b)
        }
    }

    /// Every expression of depth at most `d`, when small enough.
    pub fn all(&self, d: usize) -> Vec<GradeExpr> {
        let mut level: Vec<GradeExpr> = self.names.iter().map(GradeExpr::gen).collect();
        for _ in 0..d {
            let mut next: Vec<GradeExpr> = self.names.iter().map(GradeExpr::gen).collect();
            for a in &level {
                for b in &level {
                    next.push(GradeExpr::meet(a.clone(), b.clone()));
                    next.push(GradeExpr::join(a.clone(), b.clone()));
                }
            }
            level = next;
        }
        level
    }
}

/// Renames every occurrence of atom `from` to `to`.
pub fn rename_atom(f: &Formula, from: &str, to: &str) -> Formula {
    let r = |g: &Formula| rename_atom(g, from, to);
    match f {
        Formula::Atom(a) if a == from => Formula::atom(to),
        Formula::Atom(_) | Formula::True | Formula::False => f.clone(),
        Formula::Not(a) => Formula::not(r(a)),
        Formula::And(a, b) => Formula::and(r(a), r(b)),
        Formula::Or(a, b) => Formula::or(r(a), r(b)),
        Formula::Implies(a, b) => Formula::implies(r(a), r(b)),
        Formula::Iff(a, b) => Formula::iff(r(a), r(b)),
        Formula::Boxed(g, a) => Formula::boxed(g.clone(), r(a)),
    }
}

pub const PROOF_ATOMS: [&str; 3] = ["p", "q", "r"];

fn p0(g: GradeExpr) -> Formula {
    Formula::boxed(g, Formula::reserved())
}

fn small<R: Rng>(rng: &mut R, p: &GeneratorPoset) -> Formula {
    random_formula(rng, p, &PROOF_ATOMS, 2, 1)
}

/// A random derivation: axiom instances, order lemmas and rule applications
/// over earlier lines, with derived rules when `derived` is set. Every step
/// is built to be correct, so the result should be accepted.
pub fn random_proof<R: Rng>(rng: &mut R, p: &GeneratorPoset, steps: usize, derived: bool) -> gradedlogic::proofs::Proof {
    use gradedlogic::proofs::{Justification as J, ProofBuilder};
    let mut b = ProofBuilder::new(p, 1);
    let top = GradeExpr::gen(p.top_name());
    let strict: Vec<(usize, usize)> = p.strict_closure();
    let g = |rng: &mut R| random_expr(rng, p, 2);
    while b.lines().len() < steps {
        let lines = b.lines().to_vec();
        let pick = |rng: &mut R| lines.choose(rng).cloned();
        match rng.random_range(0..15) {
            0 => {
                let (x, y, z) = (small(rng, p), small(rng, p), small(rng, p));
                let f = match rng.random_range(0..5) {
                    0 => Formula::implies(x.clone(), Formula::implies(y, x)),
                    1 => Formula::implies(
                        Formula::implies(x.clone(), Formula::implies(y.clone(), z.clone())),
                        Formula::implies(Formula::implies(x.clone(), y), Formula::implies(x, z)),
                    ),
                    2 => Formula::implies(Formula::implies(Formula::not(x.clone()), Formula::not(y.clone())), Formula::implies(y, x)),
                    3 => Formula::or(x.clone(), Formula::not(x)),
                    _ => Formula::implies(Formula::and(x.clone(), y), x),
                };
                b.taut(f);
            }
            1 => {
                let (x, y) = (small(rng, p), small(rng, p));
                b.k(g(rng), x, y);
            }
            2 => {
                let t = if rng.random_bool(0.5) { top.clone() } else { GradeExpr::join(g(rng), top.clone()) };
                b.axiom(Formula::not(Formula::boxed(t, Formula::False)), J::Dtop);
            }
            3 => {
                let (x, y, body) = (g(rng), g(rng), small(rng, p));
                b.axiom(
                    Formula::implies(
                        Formula::and(Formula::boxed(x.clone(), body.clone()), Formula::boxed(y.clone(), body.clone())),
                        Formula::boxed(GradeExpr::join(x, y), body),
                    ),
                    J::A1,
                );
            }
            4 => {
                let (x, y) = (g(rng), g(rng));
                b.axiom(Formula::implies(Formula::or(p0(x.clone()), p0(y.clone())), p0(GradeExpr::meet(x, y))), J::A2);
            }
            5 => {
                let (x, y) = (g(rng), g(rng));
                b.axiom(Formula::implies(p0(GradeExpr::join(x.clone(), y.clone())), Formula::and(p0(x), p0(y))), J::A3);
            }
            6 => {
                let (x, y, z) = (g(rng), g(rng), g(rng));
                let l = GradeExpr::join(GradeExpr::meet(x.clone(), y.clone()), GradeExpr::meet(x.clone(), z.clone()));
                let r = GradeExpr::meet(x, GradeExpr::join(y, z));
                b.axiom(Formula::implies(p0(l), p0(r)), J::A4);
            }
            7 => {
                if let Some(&(lo, hi)) = strict.choose(rng) {
                    b.axiom(
                        Formula::implies(p0(GradeExpr::gen(p.name(hi))), p0(GradeExpr::gen(p.name(lo)))),
                        J::A5,
                    );
                }
            }
            8 => {
                if let Some(l) = pick(rng) {
                    if l.formula.modal_depth() < 2 {
                        b.nec(l.number);
                    }
                }
            }
            9 | 10 => {
                let hi = p.normalize(&g(rng)).unwrap();
                let lo = p.meet(&hi, &p.normalize(&g(rng)).unwrap());
                let n = b.order(&lo, &hi).unwrap();
                if rng.random_bool(0.6) {
                    let body = small(rng, p);
                    b.gen(n, p.nf_to_expr(&hi), p.nf_to_expr(&lo), body);
                }
            }
            11 => {
                // modus ponens on an existing pair, or a weakening tautology
                let pairs: Vec<(usize, usize)> = lines
                    .iter()
                    .flat_map(|i| {
                        lines.iter().filter_map(move |j| match &j.formula {
                            Formula::Implies(a, _) if **a == i.formula => Some((i.number, j.number)),
                            _ => None,
                        })
                    })
                    .collect();
                if let Some(&(i, j)) = pairs.choose(rng) {
                    b.mp(i, j);
                } else if let Some(l) = pick(rng) {
                    let x = small(rng, p);
                    let t = b.taut(Formula::implies(l.formula.clone(), Formula::or(x, l.formula.clone())));
                    b.mp(l.number, t);
                }
            }
            12 if derived => {
                let boxed: Vec<_> = lines.iter().filter(|l| matches!(l.formula, Formula::Boxed(..))).collect();
                if let Some(l) = boxed.choose(rng) {
                    if let Formula::Boxed(a, body) = &l.formula {
                        let lower = GradeExpr::meet(a.clone(), g(rng));
                        b.push(Formula::boxed(lower, (**body).clone()), J::Weak(l.number));
                    }
                }
            }
            13 if derived => {
                let (x, y, u, v) = (g(rng), g(rng), small(rng, p), small(rng, p));
                let f = Formula::implies(
                    Formula::and(Formula::boxed(x.clone(), u.clone()), Formula::boxed(y.clone(), Formula::implies(u, v.clone()))),
                    Formula::boxed(GradeExpr::meet(x, y), v),
                );
                b.push(f, J::Ag);
            }
            14 if derived => {
                let boxed: Vec<_> = lines.iter().filter(|l| matches!(l.formula, Formula::Boxed(..))).collect();
                let pairs: Vec<(usize, usize, GradeExpr, GradeExpr, Formula)> = boxed
                    .iter()
                    .flat_map(|i| {
                        boxed.iter().filter_map(move |j| match (&i.formula, &j.formula) {
                            (Formula::Boxed(a, x), Formula::Boxed(c, imp)) => match &**imp {
                                Formula::Implies(y, z) if y == x => Some((i.number, j.number, a.clone(), c.clone(), (**z).clone())),
                                _ => None,
                            },
                            _ => None,
                        })
                    })
                    .collect();
                if let Some((i, j, a, c, z)) = pairs.choose(rng).cloned() {
                    b.push(Formula::boxed(GradeExpr::meet(a, c), z), J::Gmp(i, j));
                } else if let Some(l) = boxed.choose(rng) {
                    // make a gmp opportunity: [T](A -> A | B) by nec of a tautology
                    if let Formula::Boxed(a, x) = &l.formula {
                        let y = Formula::or((**x).clone(), small(rng, p));
                        let t = b.taut(Formula::implies((**x).clone(), y.clone()));
                        let n = b.nec(t);
                        b.push(Formula::boxed(GradeExpr::meet(a.clone(), top.clone()), y), J::Gmp(l.number, n));
                    }
                }
            }
            _ => {}
        }
    }
    b.into_proof()
}
