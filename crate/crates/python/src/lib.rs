//! Python bindings: posets, knowledge bases, proofs and countermodel search.

use std::collections::BTreeMap;
use std::path::PathBuf;

use gradedlogic::engine::{load_kb, saturate, KnowledgeBase};
use gradedlogic::files::{load_kb_file, load_poset, load_proof_file};
use gradedlogic::formulas::parse_formula;
use gradedlogic::grades::{GeneratorPoset, GradeNF};
use gradedlogic::kripke::{find_countermodel, SearchMode, Verdict, DEFAULT_RANDOM_SAMPLES};
use gradedlogic::proofs::{check_proof, parse_proof, prove_order, Proof};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

type Diagnostics = Vec<(usize, String)>;

fn report(proof: &Proof) -> (bool, Diagnostics) {
    let r = check_proof(proof);
    (r.accepted, r.diagnostics.into_iter().map(|d| (d.line, d.message)).collect())
}

/// A generator poset and the distributive lattice it generates.
#[pyclass(name = "Poset", module = "pygradedlogic", frozen)]
struct PyPoset {
    inner: GeneratorPoset,
}

impl PyPoset {
    fn grade(&self, expr: &str) -> PyResult<GradeNF> {
        self.inner.parse_grade(expr).map_err(value_error)
    }
}

#[pymethods]
impl PyPoset {
    /// Parses poset text (`generators:`, `top:`, `order:` sections).
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        GeneratorPoset::parse(text).map(|inner| PyPoset { inner }).map_err(value_error)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_poset(&path).map(|inner| PyPoset { inner }).map_err(value_error)
    }

    #[getter]
    fn generators(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn top(&self) -> String {
        self.inner.top_name().to_string()
    }

    fn leq(&self, lower: &str, upper: &str) -> PyResult<bool> {
        Ok(self.inner.grade_leq(&self.grade(lower)?, &self.grade(upper)?))
    }

    /// Canonical spelling of a grade expression.
    fn normalize(&self, expr: &str) -> PyResult<String> {
        Ok(self.inner.render(&self.grade(expr)?))
    }

    /// Canonical spellings of every lattice element.
    #[pyo3(signature = (depth = 64))]
    fn elements(&self, depth: usize) -> PyResult<Vec<String>> {
        let lattice = self.inner.enumerate_lattice(depth).map_err(value_error)?;
        Ok(lattice.elements.iter().map(|e| self.inner.render(e)).collect())
    }

    /// A proof of `[upper]p0 -> [lower]p0`, as proof file lines.
    fn prove_order(&self, lower: &str, upper: &str) -> PyResult<String> {
        let proof = prove_order(&self.inner, &self.grade(lower)?, &self.grade(upper)?).map_err(value_error)?;
        Ok(proof.body_text())
    }

    /// Checks proof lines against this poset. Returns `(accepted, [(line, message)])`.
    fn check_proof(&self, text: &str) -> PyResult<(bool, Diagnostics)> {
        let proof = parse_proof(text, &self.inner).map_err(value_error)?;
        Ok(report(&proof))
    }

    /// Interpretation text of a countermodel to `formula`, or None.
    /// Exhaustive unless `seed` is given. The `poset:` header reads `poset`.
    #[pyo3(signature = (formula, worlds, seed = None, samples = DEFAULT_RANDOM_SAMPLES))]
    fn countermodel(&self, formula: &str, worlds: usize, seed: Option<u64>, samples: usize) -> PyResult<Option<String>> {
        let f = parse_formula(formula, &self.inner).map_err(value_error)?;
        let mode = match seed {
            Some(seed) => SearchMode::Randomized { seed, samples },
            None => SearchMode::Exhaustive,
        };
        match find_countermodel(&f, &self.inner, worlds, mode).map_err(value_error)? {
            Verdict::Countermodel { interpretation, .. } => Ok(Some(interpretation.to_text("poset"))),
            Verdict::NoCountermodel { .. } => Ok(None),
        }
    }

    fn __repr__(&self) -> String {
        format!("Poset({})", self.inner.names().join(", "))
    }
}

/// A graded Horn knowledge base.
#[pyclass(name = "KnowledgeBase", module = "pygradedlogic", frozen)]
struct PyKnowledgeBase {
    inner: KnowledgeBase,
}

#[pymethods]
impl PyKnowledgeBase {
    /// Parses `assert:` lines against `poset`.
    #[new]
    fn new(poset: &PyPoset, text: &str) -> PyResult<Self> {
        load_kb(text, &poset.inner).map(|inner| PyKnowledgeBase { inner }).map_err(value_error)
    }

    /// Loads a KB file, resolving its `poset:` header.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_kb_file(&path).map(|(_, inner)| PyKnowledgeBase { inner }).map_err(value_error)
    }

    /// Best grade of every derivable atom.
    fn grades(&self) -> BTreeMap<String, String> {
        let p = &self.inner.poset;
        saturate(&self.inner).grades().iter().map(|(a, g)| (a.clone(), p.render(g))).collect()
    }

    fn grade(&self, atom: &str) -> Option<String> {
        saturate(&self.inner).grade(atom).map(|g| self.inner.poset.render(g))
    }

    /// One of `first-higher`, `second-higher`, `equal`, `incomparable`.
    fn compare(&self, first: &str, second: &str) -> PyResult<String> {
        saturate(&self.inner).compare(first, second).map(|c| c.to_string()).map_err(value_error)
    }

    /// Proof lines deriving the atom's grade from the cited premises.
    fn trace(&self, atom: &str) -> PyResult<String> {
        saturate(&self.inner).query(atom).map(|q| q.proof.body_text()).map_err(value_error)
    }
}

/// Checks a proof file. Returns `(accepted, [(line, message)])`.
#[pyfunction]
fn check_proof_file(path: PathBuf) -> PyResult<(bool, Diagnostics)> {
    let (_, proof) = load_proof_file(&path).map_err(value_error)?;
    Ok(report(&proof))
}

#[pymodule]
fn pygradedlogic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoset>()?;
    m.add_class::<PyKnowledgeBase>()?;
    m.add_function(wrap_pyfunction!(check_proof_file, m)?)?;
    Ok(())
}
