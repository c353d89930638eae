//! Python bindings: a thin functional layer over the `zslen` crate.
//! Groups and sequences are passed as their text descriptors (`"C2xC4"`,
//! `"[1]^6 [5]^6"`); structured results (classification forms, suite and
//! comparison reports) come back as plain dicts/lists mirroring the
//! library's JSON schemas.

use std::collections::BTreeSet;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyNone};

use zslen::catalog::suite_ids;
use zslen::lengths::{delta_g_bounded, delta_star_bounded, enumerate_factorizations, rho_k};
use zslen::structure::classify as classify_set;
use zslen::{
    compare_systems, enumerate_atoms, set_of_lengths, system_enumerate, verify_suite, AtomSet,
    Error, GroupElement, GroupSpec, Sequence, SuiteConfig,
};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::BadGroupDescriptor(..)
        | Error::BadSequenceDescriptor(..)
        | Error::InvalidParameter(_)
        | Error::UnknownId(_)
        | Error::UnsupportedGroup(_)
        | Error::GroupMismatch(..)
        | Error::NotZeroSum(_)
        | Error::SupportNotContained(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_group(desc: &str) -> PyResult<GroupSpec> {
    desc.parse().map_err(to_py_err)
}

fn parse_seq(group: &GroupSpec, text: &str) -> PyResult<Sequence> {
    Sequence::parse(group, text).map_err(to_py_err)
}

fn nonzero_atoms(group: &GroupSpec) -> PyResult<AtomSet> {
    let support: Vec<GroupElement> = group
        .enumerate_elements()
        .map_err(to_py_err)?
        .into_iter()
        .filter(|e| !e.is_zero())
        .collect();
    enumerate_atoms(group, &support).map_err(to_py_err)
}

/// serde_json -> Python, preserving the library's stable (sorted) key order.
fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        serde_json::Value::Null => PyNone::get(py).to_owned().into_any(),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap().into_pyobject(py)?.into_any()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize_to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

/// Atoms (minimal zero-sum sequences) over a support, as canonical strings.
/// `support` is a sequence descriptor whose multiplicities are ignored;
/// default: every nonzero element of the group.
#[pyfunction]
#[pyo3(signature = (group, support = None))]
fn atoms(group: &str, support: Option<&str>) -> PyResult<Vec<String>> {
    let group = parse_group(group)?;
    let set = match support {
        None => nonzero_atoms(&group)?,
        Some(text) => {
            let elems: Vec<GroupElement> =
                parse_seq(&group, text)?.support().cloned().collect();
            enumerate_atoms(&group, &elems).map_err(to_py_err)?
        }
    };
    Ok(set.atoms().iter().map(|a| a.to_string()).collect())
}

/// The Davenport constant D(G).
#[pyfunction]
fn davenport(group: &str) -> PyResult<u64> {
    zslen::atoms::davenport(&parse_group(group)?).map_err(to_py_err)
}

/// The set of factorization lengths L(A), sorted ascending.
#[pyfunction]
fn lengths(group: &str, sequence: &str) -> PyResult<Vec<u64>> {
    let group = parse_group(group)?;
    let a = parse_seq(&group, sequence)?;
    let atoms = nonzero_atoms(&group)?;
    Ok(set_of_lengths(&a, &atoms).map_err(to_py_err)?.to_vec())
}

/// All factorizations of A into atoms, each a list of atom strings.
#[pyfunction]
#[pyo3(signature = (group, sequence, bound = 10_000))]
fn factorizations(group: &str, sequence: &str, bound: usize) -> PyResult<Vec<Vec<String>>> {
    let group = parse_group(group)?;
    let a = parse_seq(&group, sequence)?;
    let atoms = nonzero_atoms(&group)?;
    let list = enumerate_factorizations(&a, &atoms, bound).map_err(to_py_err)?;
    if list.truncated {
        return Err(PyRuntimeError::new_err(format!(
            "more than {bound} factorizations; raise the bound"
        )));
    }
    Ok(list
        .factorizations
        .iter()
        .map(|z| z.parts().iter().map(|&i| atoms.atoms()[i].to_string()).collect())
        .collect())
}

/// Classify L(A) as Singleton/AP/AMP/AAP/AAMP over candidate differences
/// `d` (default: the distances of L(A), or [1]). Returns
/// {"lengths": [...], "form": {...}} mirroring the library's JSON schema.
#[pyfunction]
#[pyo3(signature = (group, sequence, d = None))]
fn classify<'py>(
    py: Python<'py>,
    group: &str,
    sequence: &str,
    d: Option<Vec<u64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let group = parse_group(group)?;
    let a = parse_seq(&group, sequence)?;
    let atoms = nonzero_atoms(&group)?;
    let l = set_of_lengths(&a, &atoms).map_err(to_py_err)?;
    let allowed: BTreeSet<u64> = match d {
        Some(ds) => ds.into_iter().collect(),
        None => {
            let deltas = l.delta();
            if deltas.is_empty() { BTreeSet::from([1]) } else { deltas }
        }
    };
    let form = classify_set(&l, &allowed).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("lengths", l.to_vec())?;
    out.set_item("form", serialize_to_py(py, &form)?)?;
    Ok(out.into_any())
}

/// The elasticity rho_k(G).
#[pyfunction]
#[pyo3(signature = (group, k = 2))]
fn rho(group: &str, k: u64) -> PyResult<u64> {
    rho_k(&parse_group(group)?, k).map_err(to_py_err)
}

/// Distances Delta(G) realized by sequences of length <= bound
/// (default: twice the group exponent).
#[pyfunction]
#[pyo3(signature = (group, bound = None))]
fn delta(group: &str, bound: Option<u64>) -> PyResult<Vec<u64>> {
    let group = parse_group(group)?;
    let bound = bound.unwrap_or(2 * group.invariants().exponent);
    Ok(delta_g_bounded(&group, bound).map_err(to_py_err)?.into_iter().collect())
}

/// Distances Delta*(G) over cyclic supports, up to the size bound
/// (default: twice the group exponent).
#[pyfunction]
#[pyo3(signature = (group, bound = None))]
fn delta_star(group: &str, bound: Option<u64>) -> PyResult<Vec<u64>> {
    let group = parse_group(group)?;
    let bound = bound.unwrap_or(2 * group.invariants().exponent);
    Ok(delta_star_bounded(&group, bound).map_err(to_py_err)?.into_iter().collect())
}

/// The system of sets of lengths {L(A) : A zero-sum, |A| <= bound},
/// as a sorted list of sorted lists.
#[pyfunction]
#[pyo3(signature = (group, bound = 8))]
fn system(group: &str, bound: u64) -> PyResult<Vec<Vec<u64>>> {
    let sys = system_enumerate(&parse_group(group)?, bound).map_err(to_py_err)?;
    Ok(sys.iter().map(|l| l.to_vec()).collect())
}

/// Compare the bounded systems of two groups; returns
/// {"bound", "equal", "witness", "witness_in"}.
#[pyfunction]
#[pyo3(signature = (group, other, bound = 8))]
fn compare<'py>(
    py: Python<'py>,
    group: &str,
    other: &str,
    bound: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = compare_systems(&parse_group(group)?, &parse_group(other)?, bound)
        .map_err(to_py_err)?;
    serialize_to_py(py, &report)
}

/// Run a verification suite; returns the report dict
/// {"suite", "params", "cases", "pass", "budget"}.
#[pyfunction]
#[pyo3(signature = (suite, n = None, k = None, bound = None, seed = 0))]
fn verify<'py>(
    py: Python<'py>,
    suite: &str,
    n: Option<u64>,
    k: Option<u64>,
    bound: Option<u64>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SuiteConfig { n, k, bound, seed, length: Default::default() };
    let report = verify_suite(suite, &cfg).map_err(to_py_err)?;
    serialize_to_py(py, &report)
}

/// The available verification suite ids.
#[pyfunction]
fn suites() -> Vec<&'static str> {
    suite_ids()
}

#[pymodule]
fn zslen_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(atoms, m)?)?;
    m.add_function(wrap_pyfunction!(davenport, m)?)?;
    m.add_function(wrap_pyfunction!(lengths, m)?)?;
    m.add_function(wrap_pyfunction!(factorizations, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(delta_star, m)?)?;
    m.add_function(wrap_pyfunction!(system, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(suites, m)?)?;
    Ok(())
}
