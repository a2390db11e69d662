//! Finite graded interpretations: one accessibility relation per generator,
//! relations of compound grades derived by union (join) and intersection
//! (meet).

mod search;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::formulas::Formula;
use crate::grades::{GeneratorPoset, GradeError, GradeExpr};
use crate::lexer::is_identifier;

pub use search::{
    enumerate_interpretations, find_countermodel, random_interpretation, SearchMode, Verdict,
    DEFAULT_RANDOM_SAMPLES, MAX_EXHAUSTIVE_BITS, MAX_EXHAUSTIVE_WORLDS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("interpretation has no worlds")]
    NoWorlds,
    #[error("world `{0}` declared twice")]
    DuplicateWorld(String),
    #[error("undeclared world `{0}`")]
    UndeclaredWorld(String),
    #[error(
        "monotonicity violated: {lower} <= {upper} but edge {from}->{to} is in the {lower} relation and not in the {upper} relation"
    )]
    Monotonicity {
        lower: String,
        upper: String,
        from: String,
        to: String,
    },
    #[error("seriality violated: world `{world}` has no {top}-successor")]
    Seriality { world: String, top: String },
    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),
    #[error(transparent)]
    Grade(#[from] GradeError),
}

/// A binary relation over worlds `0..n`, stored as a dense bit matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    bits: Vec<bool>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation {
            n,
            bits: vec![false; n * n],
        }
    }

    pub fn full(n: usize) -> Self {
        Relation {
            n,
            bits: vec![true; n * n],
        }
    }

    pub fn world_count(&self) -> usize {
        self.n
    }

    pub fn contains(&self, from: usize, to: usize) -> bool {
        self.bits[from * self.n + to]
    }

    pub fn insert(&mut self, from: usize, to: usize) {
        self.bits[from * self.n + to] = true;
    }

    pub fn remove(&mut self, from: usize, to: usize) {
        self.bits[from * self.n + to] = false;
    }

    pub fn union(&self, other: &Relation) -> Relation {
        Relation {
            n: self.n,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        Relation {
            n: self.n,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (i / n, i % n))
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&to| self.contains(from, to))
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// The first world with no successor, if any.
    pub fn first_dead_end(&self) -> Option<usize> {
        (0..self.n).find(|&w| self.successors(w).next().is_none())
    }
}

/// Unvalidated interpretation data, as read from a file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawInterpretation {
    pub worlds: Vec<String>,
    /// generator → edges `(from, to)`
    pub relations: BTreeMap<String, Vec<(String, String)>>,
    /// atom → worlds where it is true
    pub valuation: BTreeMap<String, Vec<String>>,
}

/// A validated finite interpretation over a generator poset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    poset: GeneratorPoset,
    worlds: Vec<String>,
    world_index: HashMap<String, usize>,
    /// Indexed by generator index of `poset`.
    relations: Vec<Relation>,
    valuation: BTreeMap<String, Vec<bool>>,
}

/// Outcome of checking a formula at every world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub valid: bool,
    pub failing_world: Option<String>,
}

pub fn validate_interpretation(
    raw: &RawInterpretation,
    p: &GeneratorPoset,
) -> Result<Interpretation, ModelError> {
    if raw.worlds.is_empty() {
        return Err(ModelError::NoWorlds);
    }
    let mut world_index = HashMap::new();
    for (i, w) in raw.worlds.iter().enumerate() {
        if world_index.insert(w.clone(), i).is_some() {
            return Err(ModelError::DuplicateWorld(w.clone()));
        }
    }
    let n = raw.worlds.len();
    let lookup = |w: &String| {
        world_index
            .get(w)
            .copied()
            .ok_or_else(|| ModelError::UndeclaredWorld(w.clone()))
    };
    let mut relations = vec![Relation::empty(n); p.len()];
    for (g, edges) in &raw.relations {
        let gi = p.index_of(g)?;
        for (a, b) in edges {
            relations[gi].insert(lookup(a)?, lookup(b)?);
        }
    }
    let mut valuation = BTreeMap::new();
    for (atom, ws) in &raw.valuation {
        let mut truth = vec![false; n];
        for w in ws {
            truth[lookup(w)?] = true;
        }
        valuation.insert(atom.clone(), truth);
    }
    Interpretation::from_parts(p.clone(), raw.worlds.clone(), relations, valuation)
}

impl Interpretation {
    /// Validates relations indexed by generator and a valuation indexed by
    /// world.
    pub fn from_parts(
        poset: GeneratorPoset,
        worlds: Vec<String>,
        relations: Vec<Relation>,
        mut valuation: BTreeMap<String, Vec<bool>>,
    ) -> Result<Self, ModelError> {
        valuation.retain(|_, truth| truth.iter().any(|t| *t));
        let world_index = worlds
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let interp = Interpretation {
            poset,
            worlds,
            world_index,
            relations,
            valuation,
        };
        interp.check()?;
        Ok(interp)
    }

    fn check(&self) -> Result<(), ModelError> {
        let p = &self.poset;
        for (lower, upper) in p.covers() {
            let (rl, ru) = (&self.relations[lower], &self.relations[upper]);
            if let Some((a, b)) = rl.pairs().find(|&(a, b)| !ru.contains(a, b)) {
                return Err(ModelError::Monotonicity {
                    lower: p.name(lower).to_string(),
                    upper: p.name(upper).to_string(),
                    from: self.worlds[a].clone(),
                    to: self.worlds[b].clone(),
                });
            }
        }
        if let Some(w) = self.relations[p.top()].first_dead_end() {
            return Err(ModelError::Seriality {
                world: self.worlds[w].clone(),
                top: p.top_name().to_string(),
            });
        }
        Ok(())
    }

    pub fn poset(&self) -> &GeneratorPoset {
        &self.poset
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn world_index(&self, w: &str) -> Result<usize, ModelError> {
        self.world_index
            .get(w)
            .copied()
            .ok_or_else(|| ModelError::UndeclaredWorld(w.to_string()))
    }

    pub fn generator_relation(&self, g: usize) -> &Relation {
        &self.relations[g]
    }

    /// The relation of a grade expression: leaves are generator relations,
    /// join is union and meet is intersection.
    pub fn derive_relation(&self, e: &GradeExpr) -> Result<Relation, ModelError> {
        Ok(match e {
            GradeExpr::Gen(g) => self.relations[self.poset.index_of(g)?].clone(),
            GradeExpr::Meet(a, b) => self.derive_relation(a)?.intersection(&self.derive_relation(b)?),
            GradeExpr::Join(a, b) => self.derive_relation(a)?.union(&self.derive_relation(b)?),
        })
    }

    /// Truth value of `f` at every world.
    pub fn truth_table(&self, f: &Formula) -> Result<Vec<bool>, ModelError> {
        let n = self.worlds.len();
        Ok(match f {
            Formula::Atom(a) => self
                .valuation
                .get(a)
                .cloned()
                .unwrap_or_else(|| vec![false; n]),
            Formula::True => vec![true; n],
            Formula::False => vec![false; n],
            Formula::Not(a) => self.truth_table(a)?.into_iter().map(|x| !x).collect(),
            Formula::And(a, b) => zip_with(self.truth_table(a)?, self.truth_table(b)?, |x, y| x && y),
            Formula::Or(a, b) => zip_with(self.truth_table(a)?, self.truth_table(b)?, |x, y| x || y),
            Formula::Implies(a, b) => {
                zip_with(self.truth_table(a)?, self.truth_table(b)?, |x, y| !x || y)
            }
            Formula::Iff(a, b) => zip_with(self.truth_table(a)?, self.truth_table(b)?, |x, y| x == y),
            Formula::Boxed(g, a) => {
                let rel = self.derive_relation(g)?;
                let inner = self.truth_table(a)?;
                (0..n)
                    .map(|w| rel.successors(w).all(|v| inner[v]))
                    .collect()
            }
        })
    }

    pub fn satisfies(&self, w: &str, f: &Formula) -> Result<bool, ModelError> {
        let i = self.world_index(w)?;
        Ok(self.truth_table(f)?[i])
    }

    pub fn valid_in(&self, f: &Formula) -> Result<ValidityReport, ModelError> {
        let table = self.truth_table(f)?;
        let failing = table.iter().position(|t| !t);
        Ok(ValidityReport {
            valid: failing.is_none(),
            failing_world: failing.map(|i| self.worlds[i].clone()),
        })
    }

    /// Back to raw data (every generator relation, every valuation entry).
    pub fn to_raw(&self) -> RawInterpretation {
        let mut raw = RawInterpretation {
            worlds: self.worlds.clone(),
            ..Default::default()
        };
        for (g, rel) in self.relations.iter().enumerate() {
            if !rel.is_empty() {
                raw.relations.insert(
                    self.poset.name(g).to_string(),
                    rel.pairs()
                        .map(|(a, b)| (self.worlds[a].clone(), self.worlds[b].clone()))
                        .collect(),
                );
            }
        }
        for (atom, truth) in &self.valuation {
            let ws: Vec<String> = truth
                .iter()
                .enumerate()
                .filter(|(_, t)| **t)
                .map(|(i, _)| self.worlds[i].clone())
                .collect();
            if !ws.is_empty() {
                raw.valuation.insert(atom.clone(), ws);
            }
        }
        raw
    }

    /// Renders the interpretation file format.
    pub fn to_text(&self, poset_path: &str) -> String {
        let raw = self.to_raw();
        let mut out = String::new();
        let _ = writeln!(out, "poset: {poset_path}");
        let _ = writeln!(out, "worlds: {}", raw.worlds.join(" "));
        for (g, edges) in &raw.relations {
            let edges: Vec<String> = edges.iter().map(|(a, b)| format!("{a}->{b}")).collect();
            let _ = writeln!(out, "rel {g}: {}", edges.join(" "));
        }
        for (atom, ws) in &raw.valuation {
            let _ = writeln!(out, "val {atom}: {}", ws.join(" "));
        }
        out
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Parses the interpretation file format. Returns the `poset:` path, if
/// present, and the raw data.
pub fn parse_interpretation(text: &str) -> Result<(Option<String>, RawInterpretation), ModelError> {
    let mut poset = None;
    let mut raw = RawInterpretation::default();
    let mut saw_worlds = false;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ModelError::Parse {
            line: lineno,
            message,
        };
        if let Some(rest) = line.strip_prefix("poset:") {
            poset = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("worlds:") {
            if saw_worlds {
                return Err(err("duplicate `worlds:` line".into()));
            }
            saw_worlds = true;
            for w in rest.split_whitespace() {
                if !is_identifier(w) {
                    return Err(err(format!("invalid world id `{w}`")));
                }
                raw.worlds.push(w.to_string());
            }
        } else if let Some(rest) = line.strip_prefix("rel ") {
            let (g, edges) = split_header(rest).ok_or_else(|| err("expected `rel <generator>: ...`".into()))?;
            let entry = raw.relations.entry(g.to_string()).or_default();
            for edge in edges.split_whitespace() {
                let (a, b) = edge
                    .split_once("->")
                    .filter(|(a, b)| is_identifier(a) && is_identifier(b))
                    .ok_or_else(|| err(format!("invalid edge `{edge}`")))?;
                entry.push((a.to_string(), b.to_string()));
            }
        } else if let Some(rest) = line.strip_prefix("val ") {
            let (atom, ws) = split_header(rest).ok_or_else(|| err("expected `val <atom>: ...`".into()))?;
            let entry = raw.valuation.entry(atom.to_string()).or_default();
            for w in ws.split_whitespace() {
                if !is_identifier(w) {
                    return Err(err(format!("invalid world id `{w}`")));
                }
                entry.push(w.to_string());
            }
        } else {
            return Err(err(format!("unrecognized line `{line}`")));
        }
    }
    if !saw_worlds {
        return Err(ModelError::Parse {
            line: 0,
            message: "missing `worlds:` line".into(),
        });
    }
    Ok((poset, raw))
}

fn split_header(rest: &str) -> Option<(&str, &str)> {
    let (name, tail) = rest.split_once(':')?;
    let name = name.trim();
    is_identifier(name).then_some((name, tail))
}
