use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::lexer::is_identifier;

use super::GradeError;

/// A finite partially ordered set of generator grades with a distinguished top.
///
/// Generators are kept in lexicographic order; a generator's index is its rank
/// in that order. The reflexive-transitive closure is computed once at
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorPoset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    top: usize,
    declared: BTreeSet<(usize, usize)>,
    leq: Vec<Vec<bool>>,
}

impl GeneratorPoset {
    /// Builds a poset from generator names, the top name and strict pairs `(a, b)`
    /// meaning `a < b`. The top is added to the generators if absent and is
    /// placed above every other generator.
    #[allow(clippy::needless_range_loop)]
    pub fn new<S: AsRef<str>>(
        generators: &[S],
        top: &str,
        strict_pairs: &[(S, S)],
    ) -> Result<Self, GradeError> {
        let mut set: BTreeSet<String> = BTreeSet::new();
        for g in generators {
            let g = g.as_ref();
            if !is_identifier(g) {
                return Err(GradeError::InvalidIdentifier(g.to_string()));
            }
            set.insert(g.to_string());
        }
        if top.is_empty() {
            return Err(GradeError::MissingTop);
        }
        if !is_identifier(top) {
            return Err(GradeError::InvalidIdentifier(top.to_string()));
        }
        set.insert(top.to_string());

        let names: Vec<String> = set.into_iter().collect();
        let index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let top = index[top];

        let mut declared = BTreeSet::new();
        for (a, b) in strict_pairs {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| GradeError::UndeclaredGenerator(a.as_ref().to_string()))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| GradeError::UndeclaredGenerator(b.as_ref().to_string()))?;
            if ia == ib {
                return Err(GradeError::Cycle(vec![names[ia].clone()]));
            }
            declared.insert((ia, ib));
        }

        let n = names.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
            row[top] = true;
        }
        for &(a, b) in &declared {
            leq[a][b] = true;
        }
        // Floyd-Warshall style closure.
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i][j] && leq[j][i] {
                    let mut cycle: Vec<String> = (0..n)
                        .filter(|&k| leq[i][k] && leq[k][i])
                        .map(|k| names[k].clone())
                        .collect();
                    cycle.sort();
                    return Err(GradeError::Cycle(cycle));
                }
            }
        }

        Ok(GeneratorPoset {
            names,
            index,
            top,
            declared,
            leq,
        })
    }

    /// Parses the poset file format.
    pub fn parse(text: &str) -> Result<Self, GradeError> {
        let mut generators: Option<Vec<String>> = None;
        let mut top: Option<String> = None;
        let mut in_order = false;
        let mut pairs: Vec<(String, String)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| GradeError::Parse {
                line: lineno,
                message,
            };
            if let Some(rest) = line.strip_prefix("generators:") {
                if generators.is_some() {
                    return Err(parse_err("duplicate `generators:` line".into()));
                }
                let ids: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if let Some(bad) = ids.iter().find(|id| !is_identifier(id)) {
                    return Err(parse_err(format!("invalid generator name `{bad}`")));
                }
                generators = Some(ids);
                in_order = false;
            } else if let Some(rest) = line.strip_prefix("top:") {
                if top.is_some() {
                    return Err(parse_err("duplicate `top:` line".into()));
                }
                let ids: Vec<&str> = rest.split_whitespace().collect();
                match ids.as_slice() {
                    [] => return Err(GradeError::MissingTop),
                    [id] if is_identifier(id) => top = Some(id.to_string()),
                    _ => return Err(parse_err(format!("invalid top `{}`", rest.trim()))),
                }
                in_order = false;
            } else if let Some(rest) = line.strip_prefix("order:") {
                in_order = true;
                if !rest.trim().is_empty() {
                    pairs.push(parse_pair(rest).map_err(parse_err)?);
                }
            } else if in_order {
                pairs.push(parse_pair(line).map_err(parse_err)?);
            } else {
                return Err(parse_err(format!("unrecognized line `{line}`")));
            }
        }

        let generators = generators.ok_or(GradeError::Parse {
            line: 0,
            message: "missing `generators:` line".into(),
        })?;
        let top = top.ok_or(GradeError::MissingTop)?;
        let pairs: Vec<(&str, &str)> = pairs
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let gens: Vec<&str> = generators.iter().map(String::as_str).collect();
        Self::new(&gens, &top, &pairs)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, GradeError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GradeError::UndeclaredGenerator(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn top_name(&self) -> &str {
        &self.names[self.top]
    }

    /// The strict pairs as declared in the input, by index.
    pub fn declared_pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.declared
    }

    pub fn leq_idx(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn lt_idx(&self, a: usize, b: usize) -> bool {
        a != b && self.leq[a][b]
    }

    /// `g1 ≤ g2` in the reflexive-transitive closure.
    pub fn poset_leq(&self, g1: &str, g2: &str) -> Result<bool, GradeError> {
        Ok(self.leq[self.index_of(g1)?][self.index_of(g2)?])
    }

    /// All strict pairs `(a, b)` with `a < b` in the closure.
    pub fn strict_closure(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.lt_idx(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Covering pairs `(a, b)`: `a < b` with nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        self.strict_closure()
            .into_iter()
            .filter(|&(a, b)| !(0..n).any(|c| self.lt_idx(a, c) && self.lt_idx(c, b)))
            .collect()
    }

    /// Generator indices ordered so that `a < b` implies `a` comes first.
    pub fn linear_extension(&self) -> Vec<usize> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        let below = |g: usize| (0..n).filter(|&h| self.leq[h][g]).count();
        order.sort_by_key(|&g| (below(g), g));
        order
    }
}

fn parse_pair(line: &str) -> Result<(String, String), String> {
    let parts: Vec<&str> = line.split('<').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] if is_identifier(a) && is_identifier(b) => Ok((a.to_string(), b.to_string())),
        _ => Err(format!("expected `<id> < <id>`, found `{line}`")),
    }
}

impl fmt::Display for GeneratorPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<&str> = self
            .names
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.top)
            .map(|(_, n)| n.as_str())
            .collect();
        writeln!(f, "generators: {}", gens.join(" "))?;
        writeln!(f, "top: {}", self.top_name())?;
        writeln!(f, "order:")?;
        for &(a, b) in &self.declared {
            writeln!(f, "{} < {}", self.names[a], self.names[b])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEATHER: &str = "generators: alpha beta gamma delta\ntop: T\norder:\ngamma < alpha\ngamma < delta\nbeta < delta";

    #[test]
    fn loads_reference_poset() {
        let p = GeneratorPoset::parse(WEATHER).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.top_name(), "T");
        assert!(p.poset_leq("gamma", "alpha").unwrap());
        assert!(p.poset_leq("alpha", "alpha").unwrap());
        assert!(!p.poset_leq("alpha", "beta").unwrap());
        assert!(p.poset_leq("beta", "T").unwrap());
    }

    #[test]
    fn minimal_chain() {
        let p = GeneratorPoset::parse("generators: a\ntop: T\norder:").unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.poset_leq("a", "T").unwrap());
        assert!(!p.poset_leq("T", "a").unwrap());
    }

    #[test]
    fn rejects_cycle() {
        let err = GeneratorPoset::parse("generators: a b\ntop: T\norder:\na < b\nb < a").unwrap_err();
        assert_eq!(err, GradeError::Cycle(vec!["a".into(), "b".into()]));
    }

    #[test]
    fn rejects_top_below_generator() {
        let err = GeneratorPoset::parse("generators: a\ntop: T\norder:\nT < a").unwrap_err();
        assert!(matches!(err, GradeError::Cycle(_)));
    }

    #[test]
    fn rejects_undeclared_and_missing_top() {
        let err = GeneratorPoset::parse("generators: a\ntop: T\norder:\na < b").unwrap_err();
        assert_eq!(err, GradeError::UndeclaredGenerator("b".into()));
        let err = GeneratorPoset::parse("generators: a\norder:").unwrap_err();
        assert_eq!(err, GradeError::MissingTop);
        let err = GeneratorPoset::parse("generators: a\ntop:\n").unwrap_err();
        assert_eq!(err, GradeError::MissingTop);
    }

    #[test]
    fn parse_error_carries_line() {
        let err = GeneratorPoset::parse("generators: a\ntop: T\norder:\na <").unwrap_err();
        assert!(matches!(err, GradeError::Parse { line: 4, .. }));
        let err = GeneratorPoset::parse("# header\ngenerators: a\nbogus").unwrap_err();
        assert!(matches!(err, GradeError::Parse { line: 3, .. }));
    }

    #[test]
    fn comments_are_ignored() {
        let p = GeneratorPoset::parse("generators: a b # two\ntop: T\norder:\n# none\na < b # edge").unwrap();
        assert!(p.poset_leq("a", "b").unwrap());
    }

    #[test]
    fn linear_extension_respects_order() {
        let p = GeneratorPoset::parse(WEATHER).unwrap();
        let ext = p.linear_extension();
        let pos = |g: usize| ext.iter().position(|&x| x == g).unwrap();
        for (a, b) in p.strict_closure() {
            assert!(pos(a) < pos(b));
        }
    }

    #[test]
    fn display_round_trips() {
        let p = GeneratorPoset::parse(WEATHER).unwrap();
        let q = GeneratorPoset::parse(&p.to_string()).unwrap();
        assert_eq!(p, q);
    }
}
