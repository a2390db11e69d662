use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Interpretation, ModelError, Relation};
use crate::formulas::Formula;
use crate::grades::GeneratorPoset;

/// Exhaustive search is refused above this many worlds.
pub const MAX_EXHAUSTIVE_WORLDS: usize = 4;
/// Exhaustive search is refused when `worlds² · generators + worlds · atoms`
/// exceeds this many free bits at the largest world count.
pub const MAX_EXHAUSTIVE_BITS: usize = 24;
/// Samples drawn by randomized search when the caller does not choose.
pub const DEFAULT_RANDOM_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Randomized { seed: u64, samples: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Verdict {
    NoCountermodel { max_worlds: usize, mode: SearchMode },
    Countermodel { interpretation: Interpretation, world: String },
}

impl Verdict {
    pub fn is_countermodel(&self) -> bool {
        matches!(self, Verdict::Countermodel { .. })
    }
}

/// Looks for a valid interpretation with at most `max_worlds` worlds and a
/// world where `f` is false.
///
/// Exhaustive mode enumerates by world count, then generator relations in
/// top-down order of the poset, then valuations. Only generators named in
/// `f` are enumerated; the others are filled in monotonically afterwards,
/// which cannot change the truth of `f`.
pub fn find_countermodel(
    f: &Formula,
    p: &GeneratorPoset,
    max_worlds: usize,
    mode: SearchMode,
) -> Result<Verdict, ModelError> {
    if max_worlds == 0 {
        return Err(ModelError::GuardExceeded("max_worlds must be at least 1".into()));
    }
    let atoms: Vec<String> = f.atoms().into_iter().collect();
    let mut found = None;
    match mode {
        SearchMode::Exhaustive => {
            let gens: Vec<usize> = f
                .generators()
                .iter()
                .map(|g| p.index_of(g))
                .collect::<Result<_, _>>()?;
            check_exhaustive_guard(max_worlds, gens.len(), atoms.len())?;
            let mut eval_error = None;
            for n in 1..=max_worlds {
                enumerate_interpretations(p, &gens, &atoms, n, &mut |interp| {
                    match interp.truth_table(f) {
                        Ok(table) => match table.iter().position(|t| !t) {
                            Some(w) => {
                                found = Some((interp.clone(), w));
                                true
                            }
                            None => false,
                        },
                        Err(e) => {
                            eval_error = Some(e);
                            true
                        }
                    }
                })?;
                if let Some(e) = eval_error {
                    return Err(e);
                }
                if found.is_some() {
                    break;
                }
            }
        }
        SearchMode::Randomized { seed, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let n = rng.random_range(1..=max_worlds);
                let interp = random_interpretation(p, &mut rng, n, &atoms);
                if let Some(w) = interp.truth_table(f)?.iter().position(|t| !t) {
                    found = Some((interp, w));
                    break;
                }
            }
        }
    }
    Ok(match found {
        Some((interpretation, w)) => {
            let world = interpretation.worlds()[w].clone();
            Verdict::Countermodel {
                interpretation,
                world,
            }
        }
        None => Verdict::NoCountermodel { max_worlds, mode },
    })
}

fn check_exhaustive_guard(n: usize, gens: usize, atoms: usize) -> Result<(), ModelError> {
    let bits = n * n * gens + n * atoms;
    if n > MAX_EXHAUSTIVE_WORLDS || bits > MAX_EXHAUSTIVE_BITS {
        return Err(ModelError::GuardExceeded(format!(
            "exhaustive search over {n} worlds, {gens} generators and {atoms} atoms needs {bits} free bits (limit {MAX_EXHAUSTIVE_BITS} bits, {MAX_EXHAUSTIVE_WORLDS} worlds)"
        )));
    }
    Ok(())
}

fn world_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

/// Calls `visit` on every valid interpretation with exactly `n` worlds whose
/// enumerated generators are `gens` and whose valuation ranges over `atoms`.
/// Stops early when `visit` returns true. Returns whether it stopped.
pub fn enumerate_interpretations(
    p: &GeneratorPoset,
    gens: &[usize],
    atoms: &[String],
    n: usize,
    visit: &mut dyn FnMut(&Interpretation) -> bool,
) -> Result<bool, ModelError> {
    let mut gens: Vec<usize> = gens.to_vec();
    gens.sort_unstable();
    gens.dedup();
    check_exhaustive_guard(n, gens.len(), atoms.len())?;
    // Top-down: larger generators are fixed before the ones below them.
    let ext = p.linear_extension();
    gens.sort_by_key(|g| std::cmp::Reverse(ext.iter().position(|x| x == g)));

    let worlds = world_names(n);
    let mut chosen: Vec<Option<Relation>> = vec![None; p.len()];
    let mut ctx = EnumCtx {
        p,
        gens: &gens,
        atoms,
        n,
        worlds: &worlds,
        visit,
    };
    ctx.relations(0, &mut chosen)
}

struct EnumCtx<'a> {
    p: &'a GeneratorPoset,
    gens: &'a [usize],
    atoms: &'a [String],
    n: usize,
    worlds: &'a [String],
    visit: &'a mut dyn FnMut(&Interpretation) -> bool,
}

impl EnumCtx<'_> {
    fn relations(&mut self, k: usize, chosen: &mut Vec<Option<Relation>>) -> Result<bool, ModelError> {
        if k == self.gens.len() {
            return self.valuations(chosen);
        }
        let g = self.gens[k];
        let mut allowed = Relation::full(self.n);
        for &b in &self.gens[..k] {
            if self.p.lt_idx(g, b) {
                allowed = allowed.intersection(chosen[b].as_ref().expect("fixed earlier"));
            }
        }
        let edges: Vec<(usize, usize)> = allowed.pairs().collect();
        for mask in 0u64..(1u64 << edges.len()) {
            let mut rel = Relation::empty(self.n);
            for (i, &(a, b)) in edges.iter().enumerate() {
                if (mask >> i) & 1 == 1 {
                    rel.insert(a, b);
                }
            }
            if g == self.p.top() && rel.first_dead_end().is_some() {
                continue;
            }
            chosen[g] = Some(rel);
            if self.relations(k + 1, chosen)? {
                return Ok(true);
            }
        }
        chosen[g] = None;
        Ok(false)
    }

    fn valuations(&mut self, chosen: &[Option<Relation>]) -> Result<bool, ModelError> {
        let p = self.p;
        let n = self.n;
        let relations: Vec<Relation> = (0..p.len())
            .map(|g| match &chosen[g] {
                Some(r) => r.clone(),
                None if g == p.top() => Relation::full(n),
                None => self
                    .gens
                    .iter()
                    .filter(|&&m| p.leq_idx(m, g))
                    .fold(Relation::empty(n), |acc, &m| {
                        acc.union(chosen[m].as_ref().expect("enumerated"))
                    }),
            })
            .collect();
        let mut interp = Interpretation::from_parts(
            p.clone(),
            self.worlds.to_vec(),
            relations,
            BTreeMap::new(),
        )?;
        let bits = n * self.atoms.len();
        for mask in 0u64..(1u64 << bits) {
            interp.valuation = self
                .atoms
                .iter()
                .enumerate()
                .map(|(ai, a)| {
                    let truth: Vec<bool> = (0..n).map(|w| (mask >> (ai * n + w)) & 1 == 1).collect();
                    (a.clone(), truth)
                })
                .filter(|(_, truth)| truth.iter().any(|t| *t))
                .collect();
            if (self.visit)(&interp) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Draws a valid interpretation with `n` worlds: a random serial top
/// relation, then for each lower generator a random subset of the
/// intersection of the relations above it, then a random valuation of
/// `atoms`.
pub fn random_interpretation<R: Rng>(
    p: &GeneratorPoset,
    rng: &mut R,
    n: usize,
    atoms: &[String],
) -> Interpretation {
    let mut relations: Vec<Option<Relation>> = vec![None; p.len()];
    let mut order = p.linear_extension();
    order.reverse();
    for &g in &order {
        let rel = if g == p.top() {
            let mut r = Relation::empty(n);
            for a in 0..n {
                for b in 0..n {
                    if rng.random_bool(0.5) {
                        r.insert(a, b);
                    }
                }
                if r.successors(a).next().is_none() {
                    r.insert(a, rng.random_range(0..n));
                }
            }
            r
        } else {
            let allowed = (0..p.len())
                .filter(|&b| p.lt_idx(g, b))
                .fold(Relation::full(n), |acc, b| {
                    acc.intersection(relations[b].as_ref().expect("upper generators first"))
                });
            let mut r = Relation::empty(n);
            for (a, b) in allowed.pairs() {
                if rng.random_bool(0.6) {
                    r.insert(a, b);
                }
            }
            r
        };
        relations[g] = Some(rel);
    }
    let valuation = atoms
        .iter()
        .map(|a| (a.clone(), (0..n).map(|_| rng.random_bool(0.5)).collect()))
        .collect();
    Interpretation::from_parts(
        p.clone(),
        world_names(n),
        relations.into_iter().map(|r| r.expect("all generators")).collect(),
        valuation,
    )
    .expect("constructed monotone and serial")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse_formula;

    fn weather() -> GeneratorPoset {
        GeneratorPoset::parse(
            "generators: alpha beta gamma delta\ntop: T\norder:\ngamma < alpha\ngamma < delta\nbeta < delta",
        )
        .unwrap()
    }

    #[test]
    fn incomparable_pair_has_countermodel() {
        let p = weather();
        let f = parse_formula("[beta] p0 -> [alpha] p0", &p).unwrap();
        match find_countermodel(&f, &p, 2, SearchMode::Exhaustive).unwrap() {
            Verdict::Countermodel { interpretation, world } => {
                assert!(interpretation.world_count() <= 2);
                assert!(!interpretation.satisfies(&world, &f).unwrap());
            }
            v => panic!("expected countermodel, got {v:?}"),
        }
    }

    #[test]
    fn top_box_is_not_reflexive() {
        let p = weather();
        let f = parse_formula("[T] p -> p", &p).unwrap();
        assert!(find_countermodel(&f, &p, 2, SearchMode::Exhaustive).unwrap().is_countermodel());
    }

    #[test]
    fn tautology_has_none() {
        let p = weather();
        let f = parse_formula("p -> p", &p).unwrap();
        for n in 1..=3 {
            assert!(!find_countermodel(&f, &p, n, SearchMode::Exhaustive).unwrap().is_countermodel());
        }
        let v = find_countermodel(&f, &p, 3, SearchMode::Randomized { seed: 7, samples: 200 }).unwrap();
        assert!(!v.is_countermodel());
    }

    #[test]
    fn guard() {
        let p = weather();
        let f = parse_formula("[alpha] p & [beta] q & [gamma] r & [delta] s", &p).unwrap();
        assert!(matches!(
            find_countermodel(&f, &p, 3, SearchMode::Exhaustive),
            Err(ModelError::GuardExceeded(_))
        ));
        assert!(find_countermodel(&f, &p, 0, SearchMode::Exhaustive).is_err());
    }

    #[test]
    fn randomized_is_reproducible() {
        let p = weather();
        let f = parse_formula("[beta] p -> [alpha] p", &p).unwrap();
        let mode = SearchMode::Randomized { seed: 42, samples: 1000 };
        let a = find_countermodel(&f, &p, 3, mode).unwrap();
        let b = find_countermodel(&f, &p, 3, mode).unwrap();
        assert!(a.is_countermodel());
        assert_eq!(a, b);
    }

    #[test]
    fn random_interpretations_are_valid() {
        let p = weather();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=4 {
            let i = random_interpretation(&p, &mut rng, n, &["p".to_string()]);
            assert_eq!(i.world_count(), n);
            let raw = i.to_raw();
            assert_eq!(super::super::validate_interpretation(&raw, &p).unwrap(), i);
        }
    }

    #[test]
    fn exhaustive_enumeration_counts_serial_relations() {
        // A single world: the top relation must be the loop.
        let p = GeneratorPoset::parse("generators: a\ntop: T\norder:").unwrap();
        let mut count = 0;
        enumerate_interpretations(&p, &[p.top()], &[], 1, &mut |_| {
            count += 1;
            false
        })
        .unwrap();
        assert_eq!(count, 1);
        // Two worlds: 3 choices of successors per world.
        let mut count = 0;
        enumerate_interpretations(&p, &[p.top()], &[], 2, &mut |_| {
            count += 1;
            false
        })
        .unwrap();
        assert_eq!(count, 9);
    }
}
