//! Python bindings: `import hamsync`.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hamsync::fks::{SparseString as CoreString, Variant};
use hamsync::protocol::{self, Message as CoreMessage};
use hamsync::Error;

create_exception!(hamsync, HamsyncError, PyException);
create_exception!(hamsync, UncorrectableError, HamsyncError);
create_exception!(hamsync, MalformedMessageError, HamsyncError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Uncorrectable => UncorrectableError::new_err(e.to_string()),
        Error::BadMagic
        | Error::UnsupportedVersion(_)
        | Error::Truncated
        | Error::ChecksumMismatch
        | Error::Malformed(_) => MalformedMessageError::new_err(e.to_string()),
        Error::ParameterOverflow(_) => PyOverflowError::new_err(e.to_string()),
        Error::InvalidInput(_) | Error::OutOfRange { .. } | Error::ValueOutOfRange => {
            PyValueError::new_err(e.to_string())
        }
        other => HamsyncError::new_err(other.to_string()),
    }
}

/// Length-`u` string over `[sigma]`, given by its non-zero `(position, value)` pairs.
#[pyclass(frozen, eq, skip_from_py_object, name = "SparseString")]
#[derive(Clone, PartialEq)]
struct PySparseString(CoreString);

#[pymethods]
impl PySparseString {
    #[new]
    #[pyo3(signature = (u, sigma, pairs=Vec::new()))]
    fn new(u: u64, sigma: u64, pairs: Vec<(u64, u64)>) -> PyResult<Self> {
        CoreString::new(u, sigma, pairs).map(PySparseString).map_err(to_py)
    }

    #[getter]
    fn u(&self) -> u64 {
        self.0.u()
    }

    #[getter]
    fn sigma(&self) -> u64 {
        self.0.sigma()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.n()
    }

    /// Pairs sorted by position.
    fn pairs(&self) -> Vec<(u64, u64)> {
        self.0.pairs().to_vec()
    }

    fn value_at(&self, pos: u64) -> u64 {
        self.0.value_at(pos)
    }

    /// Dense Hamming distance.
    fn distance(&self, other: &PySparseString) -> PyResult<u64> {
        if (self.0.u(), self.0.sigma()) != (other.0.u(), other.0.sigma()) {
            return Err(PyValueError::new_err("strings have different (u, sigma)"));
        }
        Ok(self.0.distance(&other.0))
    }

    fn to_kv(&self) -> String {
        hamsync::cli::format_kv(&self.0)
    }

    #[staticmethod]
    fn from_kv(text: &str) -> PyResult<Self> {
        hamsync::cli::parse_kv(text).map(PySparseString).map_err(|e| PyValueError::new_err(e.message))
    }

    fn __len__(&self) -> usize {
        self.0.pairs().len()
    }

    fn __repr__(&self) -> String {
        format!("SparseString(u={}, sigma={}, n={})", self.0.u(), self.0.sigma(), self.0.n())
    }
}

/// The sender's message.
#[pyclass(frozen, eq, skip_from_py_object, name = "Message")]
#[derive(Clone, PartialEq)]
struct PyMessage(CoreMessage);

#[pymethods]
impl PyMessage {
    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &protocol::serialize(&self.0))
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        protocol::deserialize(data).map(PyMessage).map_err(to_py)
    }

    /// Header, descriptor and check-symbol bits, excluding framing.
    #[getter]
    fn bit_size(&self) -> u64 {
        protocol::message_bit_size(&self.0)
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.params.n
    }

    #[getter]
    fn k(&self) -> u64 {
        self.0.params.k
    }

    #[getter]
    fn variant(&self) -> &'static str {
        match self.0.params.variant {
            Variant::LargeUniverse => "large-universe",
            Variant::SmallUniverse => "small-universe",
        }
    }

    fn __repr__(&self) -> String {
        format!("Message(n={}, k={}, bits={})", self.n(), self.k(), self.bit_size())
    }
}

/// Builds the message for `s` tolerating `k` differences.
#[pyfunction]
#[pyo3(signature = (s, k, seed=0, alpha=hamsync::fks::DEFAULT_ALPHA))]
fn encode(py: Python<'_>, s: &PySparseString, k: u64, seed: u64, alpha: u64) -> PyResult<PyMessage> {
    let s = s.0.clone();
    py.detach(|| protocol::encode_with(&s, k, alpha, &mut ChaCha8Rng::seed_from_u64(seed)))
        .map(|e| PyMessage(e.message))
        .map_err(to_py)
}

/// Recovers the sender's string from `t` and `msg`.
#[pyfunction]
fn reconcile(py: Python<'_>, t: &PySparseString, msg: &PyMessage) -> PyResult<PySparseString> {
    let (t, msg) = (t.0.clone(), msg.0.clone());
    py.detach(|| protocol::receiver_reconcile(&t, &msg)).map(PySparseString).map_err(to_py)
}

/// A random string with `n` non-zeros and a copy at distance exactly `d`.
#[pyfunction]
fn generate_pair(u: u64, sigma: u64, n: u64, d: u64, seed: u64) -> PyResult<(PySparseString, PySparseString)> {
    hamsync::cli::generate_pair(u, sigma, n, d, seed)
        .map(|(s, t)| (PySparseString(s), PySparseString(t)))
        .map_err(to_py)
}

#[pymodule]
#[pyo3(name = "hamsync")]
fn hamsync_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PySparseString>()?;
    m.add_class::<PyMessage>()?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(reconcile, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pair, m)?)?;
    m.add("HamsyncError", py.get_type::<HamsyncError>())?;
    m.add("UncorrectableError", py.get_type::<UncorrectableError>())?;
    m.add("MalformedMessageError", py.get_type::<MalformedMessageError>())?;
    Ok(())
}
