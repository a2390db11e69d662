use std::collections::BTreeSet;

use super::{GeneratorPoset, GradeError, GradeExpr, GradeNF};

/// Largest generator count accepted by [`GeneratorPoset::enumerate_lattice`].
pub const MAX_ENUMERATION_GENERATORS: usize = 8;
/// Largest lattice accepted by [`GeneratorPoset::enumerate_lattice`].
pub const MAX_LATTICE_ELEMENTS: usize = 20_000;
/// Largest generator count accepted by the brute-force oracle.
pub const MAX_ORACLE_GENERATORS: usize = 20;

/// The finite lattice generated by a poset, with its Hasse diagram.
#[derive(Debug, Clone)]
pub struct Lattice {
    /// Elements in normal-form order.
    pub elements: Vec<GradeNF>,
    /// Covering pairs `(lower, upper)` as indices into `elements`.
    pub covers: Vec<(usize, usize)>,
    /// False if the round cap stopped the closure before a fixpoint.
    pub complete: bool,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl GeneratorPoset {
    /// Every order-preserving map from the generators to `{0, 1}`, as bit masks.
    pub fn monotone_valuations(&self) -> Result<Vec<u32>, GradeError> {
        let n = self.len();
        if n > MAX_ORACLE_GENERATORS {
            return Err(GradeError::GuardExceeded(format!(
                "oracle enumeration needs at most {MAX_ORACLE_GENERATORS} generators, poset has {n}"
            )));
        }
        let pairs = self.strict_closure();
        Ok((0u32..(1u32 << n))
            .filter(|v| {
                pairs
                    .iter()
                    .all(|&(a, b)| (v >> a) & 1 == 0 || (v >> b) & 1 == 1)
            })
            .collect())
    }

    /// Brute-force order test: `e1 ≤ e2` under every monotone two-valued
    /// valuation of the generators, with meet as min and join as max.
    pub fn oracle_leq(&self, e1: &GradeExpr, e2: &GradeExpr) -> Result<bool, GradeError> {
        e1.validate(self)?;
        e2.validate(self)?;
        let vals = self.monotone_valuations()?;
        Ok(vals
            .iter()
            .all(|&v| !self.eval_bit(e1, v) || self.eval_bit(e2, v)))
    }

    fn eval_bit(&self, e: &GradeExpr, v: u32) -> bool {
        match e {
            GradeExpr::Gen(g) => {
                let i = self.index_of(g).expect("validated");
                (v >> i) & 1 == 1
            }
            GradeExpr::Meet(a, b) => self.eval_bit(a, v) && self.eval_bit(b, v),
            GradeExpr::Join(a, b) => self.eval_bit(a, v) || self.eval_bit(b, v),
        }
    }

    /// Closes the generators under meet and join for at most `depth_cap`
    /// rounds and computes the covering relation.
    pub fn enumerate_lattice(&self, depth_cap: usize) -> Result<Lattice, GradeError> {
        if self.len() > MAX_ENUMERATION_GENERATORS {
            return Err(GradeError::GuardExceeded(format!(
                "enumeration needs at most {MAX_ENUMERATION_GENERATORS} generators, poset has {}",
                self.len()
            )));
        }
        let mut set: BTreeSet<GradeNF> = (0..self.len()).map(|g| self.generator_nf(g)).collect();
        let mut frontier: Vec<GradeNF> = set.iter().cloned().collect();
        let mut complete = false;
        for _ in 0..depth_cap {
            let all: Vec<GradeNF> = set.iter().cloned().collect();
            let mut fresh = Vec::new();
            for a in &frontier {
                for b in &all {
                    for c in [self.meet(a, b), self.join(a, b)] {
                        if !set.contains(&c) {
                            set.insert(c.clone());
                            fresh.push(c);
                        }
                    }
                }
                if set.len() > MAX_LATTICE_ELEMENTS {
                    return Err(GradeError::GuardExceeded(format!(
                        "lattice exceeds {MAX_LATTICE_ELEMENTS} elements"
                    )));
                }
            }
            if fresh.is_empty() {
                complete = true;
                break;
            }
            frontier = fresh;
        }

        let elements: Vec<GradeNF> = set.into_iter().collect();
        let n = elements.len();
        let mut covers = Vec::new();
        for i in 0..n {
            let above: Vec<usize> = (0..n)
                .filter(|&j| j != i && self.grade_leq(&elements[i], &elements[j]))
                .collect();
            for &j in &above {
                let covered = !above
                    .iter()
                    .any(|&k| k != j && self.grade_leq(&elements[k], &elements[j]));
                if covered {
                    covers.push((i, j));
                }
            }
        }
        Ok(Lattice {
            elements,
            covers,
            complete,
        })
    }
}
