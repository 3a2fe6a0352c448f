//! Python bindings for the dcfg library: the string-tuple algebra,
//! grammar parsing and printing, bounded enumeration, equivalence
//! checking, and the normal-form pipeline.
//!
//! Build with `cargo build -p dcfg-py --release`; the resulting
//! `libdcfg_py.so` imports as the module `dcfg_py` once renamed to
//! `dcfg_py.so` on `sys.path` (see `python/smoke_test.py`).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dcfg::grammar::{enumerate, equiv_up_to, EquivResult, Grammar};
use dcfg::normalization::{run_pass, PassSelect};
use dcfg::tuple_algebra::StringTuple;
use dcfg::DcfgError;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A tuple of strings with gaps between consecutive components.
#[pyclass(name = "StringTuple", module = "dcfg_py")]
#[derive(Clone)]
struct PyStringTuple {
    inner: StringTuple,
}

impl From<StringTuple> for PyStringTuple {
    fn from(inner: StringTuple) -> Self {
        PyStringTuple { inner }
    }
}

#[pymethods]
impl PyStringTuple {
    /// StringTuple(components): each component is a list of symbols.
    #[new]
    fn new(components: Vec<Vec<String>>) -> PyResult<Self> {
        if components.is_empty() {
            return Err(value_err("a tuple needs at least one component"));
        }
        Ok(StringTuple::new(components).into())
    }

    /// The empty word as a rank-0 tuple.
    #[staticmethod]
    fn epsilon() -> Self {
        StringTuple::epsilon().into()
    }

    /// A single-component word from a list of symbols.
    #[staticmethod]
    fn word(symbols: Vec<String>) -> Self {
        StringTuple::word(symbols).into()
    }

    /// The all-empty tuple of the given rank.
    #[staticmethod]
    fn all_eps(rank: usize) -> Self {
        StringTuple::all_eps(rank).into()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    /// Total number of symbols across all components.
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn components(&self) -> Vec<Vec<String>> {
        self.inner.components().to_vec()
    }

    fn is_all_eps(&self) -> bool {
        self.inner.is_all_eps()
    }

    /// Concatenation; the last component of `self` fuses with the first
    /// component of `other`.
    fn concat(&self, other: &PyStringTuple) -> Self {
        self.inner.concat(&other.inner).into()
    }

    /// Intercalation: splice `other` into gap `j` (1-based).
    fn intercalate(&self, j: usize, other: &PyStringTuple) -> PyResult<Self> {
        self.inner.intercalate(j, &other.inner).map(Into::into).map_err(value_err)
    }

    /// Close gap `j`, fusing its two neighbouring components.
    fn bridge(&self, j: usize) -> PyResult<Self> {
        self.inner.bridge(j).map(Into::into).map_err(value_err)
    }

    /// Replace gap `j` by `l` adjacent gaps.
    fn split(&self, j: usize, l: usize) -> PyResult<Self> {
        self.inner.split(j, l).map(Into::into).map_err(value_err)
    }

    /// Drop `p` trailing all-empty components, or None if undefined.
    fn strip_right(&self, p: usize) -> Option<Self> {
        self.inner.strip_right(p).map(Into::into)
    }

    /// Drop `p` leading all-empty components, or None if undefined.
    fn strip_left(&self, p: usize) -> Option<Self> {
        self.inner.strip_left(p).map(Into::into)
    }

    /// The tuple with components and symbols in reverse order.
    fn reversed(&self) -> Self {
        self.inner.reversed().into()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("StringTuple({:?})", self.inner.components())
    }

    fn __eq__(&self, other: &PyStringTuple) -> bool {
        self.inner == other.inner
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.inner.components().hash(&mut h);
        h.finish()
    }
}

fn pass_select(pass: &str) -> PyResult<PassSelect> {
    Ok(match pass {
        "wellformed" => PassSelect::WellFormed,
        "eps" => PassSelect::Eps,
        "bridges" => PassSelect::Bridges,
        "strip" => PassSelect::Strip,
        "all" => PassSelect::All,
        other => {
            return Err(value_err(format!(
                "unknown pass {other:?}; expected wellformed, eps, bridges, strip, or all"
            )))
        }
    })
}

/// A displacement context-free grammar.
#[pyclass(name = "Grammar", module = "dcfg_py")]
#[derive(Clone)]
struct PyGrammar {
    inner: Grammar,
}

#[pymethods]
impl PyGrammar {
    /// Parse the grammar text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = dcfg::parse_grammar(text).map_err(value_err)?;
        Ok(PyGrammar { inner })
    }

    /// The example grammar G_k for the language a_0^m b_0^m ... a_k^m b_k^m.
    #[staticmethod]
    fn example(k: usize) -> PyResult<Self> {
        let inner = dcfg::emit_example(k).map_err(value_err)?;
        Ok(PyGrammar { inner })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn start(&self) -> String {
        self.inner.start.clone()
    }

    #[getter]
    fn alphabet(&self) -> Vec<String> {
        self.inner.alphabet.iter().cloned().collect()
    }

    /// (name, rank) pairs in declaration order.
    #[getter]
    fn nonterminals(&self) -> Vec<(String, usize)> {
        self.inner.nonterminals.iter().map(|n| (n.name.clone(), n.rank)).collect()
    }

    /// Rules rendered in the text format, one string per rule.
    #[getter]
    fn rules(&self) -> Vec<String> {
        self.inner
            .rules
            .iter()
            .map(|r| {
                let rank = self
                    .inner
                    .nonterminals
                    .iter()
                    .find(|n| n.name == r.lhs)
                    .map(|n| n.rank)
                    .unwrap_or(0);
                dcfg::print_rule(r, rank)
            })
            .collect()
    }

    /// All violated grammar invariants (empty when the grammar is valid).
    fn validate(&self) -> Vec<String> {
        self.inner.validate()
    }

    fn is_linear(&self) -> bool {
        self.inner.is_linear()
    }

    /// All tuples of total length <= max_len derivable from the
    /// nonterminal (default: the start symbol).
    #[pyo3(signature = (max_len, nonterminal=None))]
    fn enumerate(&self, max_len: usize, nonterminal: Option<&str>) -> PyResult<Vec<PyStringTuple>> {
        self.inner.ensure_valid().map_err(value_err)?;
        let target = nonterminal.unwrap_or(&self.inner.start);
        if !self.inner.has_nonterm(target) {
            return Err(value_err(format!("unknown nonterminal {target}")));
        }
        let table = enumerate(&self.inner, max_len);
        Ok(table.entry(target).iter().cloned().map(Into::into).collect())
    }

    /// Run one normal-form pass (or the whole pipeline, pass="all").
    #[pyo3(signature = (pass="all"))]
    fn normalize(&self, pass: &str) -> PyResult<Self> {
        let (out, _) = run_pass(&self.inner, pass_select(pass)?).map_err(value_err)?;
        Ok(PyGrammar { inner: out })
    }

    /// The transformation trace of a pass, in the +/-/! line format.
    #[pyo3(signature = (pass="all"))]
    fn normalization_trace(&self, pass: &str) -> PyResult<String> {
        let (_, trace) = run_pass(&self.inner, pass_select(pass)?).map_err(value_err)?;
        Ok(trace.render())
    }

    /// None when the bounded languages agree; otherwise a
    /// (witness, derivable_from_self) pair.
    fn equiv_up_to(&self, other: &PyGrammar, bound: usize) -> Option<(PyStringTuple, bool)> {
        match equiv_up_to(&self.inner, &other.inner, bound) {
            EquivResult::Equal => None,
            EquivResult::Differs { witness, in_first } => Some((witness.into(), in_first)),
        }
    }

    fn __str__(&self) -> String {
        dcfg::print_grammar(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Grammar(k={}, start={:?}, {} nonterminals, {} rules)",
            self.inner.k,
            self.inner.start,
            self.inner.nonterminals.len(),
            self.inner.rules.len()
        )
    }
}

/// Evaluate a ground term in the expression sublanguage, e.g.
/// `'("a","b") @1 "c"'`.
#[pyfunction]
fn evaluate_term(text: &str) -> PyResult<PyStringTuple> {
    let term = dcfg::parse_term(text, 1).map_err(value_err)?;
    term.evaluate_ground().map(Into::into).map_err(|e: DcfgError| value_err(e))
}

#[pymodule]
fn dcfg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStringTuple>()?;
    m.add_class::<PyGrammar>()?;
    m.add_function(wrap_pyfunction!(evaluate_term, m)?)?;
    Ok(())
}
