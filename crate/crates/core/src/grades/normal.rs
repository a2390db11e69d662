use std::collections::BTreeSet;

use super::{GeneratorPoset, GradeError, GradeExpr};

/// A meet of generators, stored as an antichain of generator indices.
pub type MeetSet = BTreeSet<usize>;

/// Canonical representative of an element of the distributive lattice
/// generated by a [`GeneratorPoset`]: a join of meet-sets.
///
/// Each meet-set is an antichain of generators and the clause set is an
/// antichain under the meet-set order, so two expressions denote the same
/// lattice element exactly when their normal forms are equal. Indices refer to
/// the poset the form was built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradeNF {
    clauses: BTreeSet<MeetSet>,
}

impl GradeNF {
    pub fn clauses(&self) -> &BTreeSet<MeetSet> {
        &self.clauses
    }

    /// True if the form is a single generator.
    pub fn as_generator(&self) -> Option<usize> {
        if self.clauses.len() != 1 {
            return None;
        }
        let clause = self.clauses.iter().next()?;
        if clause.len() == 1 {
            clause.iter().next().copied()
        } else {
            None
        }
    }
}

impl GeneratorPoset {
    /// Meet-set order: `s ≤ t` iff every member of `t` is above some member of `s`.
    pub fn meet_set_leq(&self, s: &MeetSet, t: &MeetSet) -> bool {
        t.iter().all(|&y| s.iter().any(|&x| self.leq_idx(x, y)))
    }

    fn minimize_meet_set(&self, s: MeetSet) -> MeetSet {
        s.iter()
            .copied()
            .filter(|&x| !s.iter().any(|&y| self.lt_idx(y, x)))
            .collect()
    }

    fn build_nf(&self, clauses: impl IntoIterator<Item = MeetSet>) -> GradeNF {
        let reduced: BTreeSet<MeetSet> = clauses
            .into_iter()
            .map(|c| self.minimize_meet_set(c))
            .collect();
        let clauses = reduced
            .iter()
            .filter(|c| {
                !reduced
                    .iter()
                    .any(|d| d != *c && self.meet_set_leq(c, d))
            })
            .cloned()
            .collect();
        GradeNF { clauses }
    }

    pub fn generator_nf(&self, g: usize) -> GradeNF {
        GradeNF {
            clauses: BTreeSet::from([BTreeSet::from([g])]),
        }
    }

    pub fn top_nf(&self) -> GradeNF {
        self.generator_nf(self.top())
    }

    pub fn normalize(&self, e: &GradeExpr) -> Result<GradeNF, GradeError> {
        match e {
            GradeExpr::Gen(g) => Ok(self.generator_nf(self.index_of(g)?)),
            GradeExpr::Meet(a, b) => Ok(self.meet(&self.normalize(a)?, &self.normalize(b)?)),
            GradeExpr::Join(a, b) => Ok(self.join(&self.normalize(a)?, &self.normalize(b)?)),
        }
    }

    /// Greatest lower bound, by distributing over the clauses.
    pub fn meet(&self, a: &GradeNF, b: &GradeNF) -> GradeNF {
        let mut clauses = Vec::with_capacity(a.clauses.len() * b.clauses.len());
        for s in &a.clauses {
            for t in &b.clauses {
                clauses.push(s.union(t).copied().collect());
            }
        }
        self.build_nf(clauses)
    }

    /// Least upper bound.
    pub fn join(&self, a: &GradeNF, b: &GradeNF) -> GradeNF {
        self.build_nf(a.clauses.iter().chain(&b.clauses).cloned())
    }

    /// `a ≤ b` iff every clause of `a` is below some clause of `b`.
    pub fn grade_leq(&self, a: &GradeNF, b: &GradeNF) -> bool {
        a.clauses
            .iter()
            .all(|s| b.clauses.iter().any(|t| self.meet_set_leq(s, t)))
    }

    /// The canonical expression of a normal form (left-folded joins of
    /// left-folded meets, in index order).
    pub fn nf_to_expr(&self, nf: &GradeNF) -> GradeExpr {
        GradeExpr::join_all(nf.clauses.iter().map(|c| {
            GradeExpr::meet_all(c.iter().map(|&g| GradeExpr::gen(self.name(g))))
                .expect("meet-sets are non-empty")
        }))
        .expect("normal forms are non-empty")
    }

    pub fn render(&self, nf: &GradeNF) -> String {
        self.nf_to_expr(nf).to_string()
    }

    /// Parses and normalizes a grade expression in surface syntax.
    pub fn parse_grade(&self, text: &str) -> Result<GradeNF, GradeError> {
        let e = GradeExpr::parse(text)?;
        self.normalize(&e)
    }
}
