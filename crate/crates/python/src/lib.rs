//! Python bindings for the QSDC simulator.
//!
//! Exposes the state-vector engine as a `StateVector` class plus module
//! functions for running whole sessions and querying the exact episode
//! oracle. Build the cdylib and import the shared object as `qsdc_py`
//! (`python/smoke_test.py` automates this).

use std::collections::BTreeMap;
use std::str::FromStr;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsdc_core::analysis::{build_report, empirical_mutual_information, exact_episode_distribution};
use qsdc_core::protocol::{Bits, ProtocolParams};
use qsdc_core::{AttackAction, AttackModel, Basis, QuantumState};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_basis(name: &str) -> PyResult<Basis> {
    match name {
        "z" | "Z" => Ok(Basis::Z),
        "x" | "X" => Ok(Basis::X),
        other => Err(value_err(format!(
            "unknown basis {other:?}, expected Z or X"
        ))),
    }
}

/// A pure state of up to eight qubits. All operations return new vectors.
#[pyclass(name = "StateVector", skip_from_py_object)]
#[derive(Clone)]
struct PyStateVector {
    inner: QuantumState,
}

#[pymethods]
impl PyStateVector {
    /// Computational basis state from a bit-string label, e.g. `"010"`.
    #[staticmethod]
    fn basis(label: &str) -> PyResult<Self> {
        let inner = QuantumState::basis_state(label.len(), label).map_err(value_err)?;
        Ok(PyStateVector { inner })
    }

    /// The shared entangled pair `(|00> + |11>)/sqrt(2)`.
    #[staticmethod]
    fn epr_pair() -> Self {
        PyStateVector {
            inner: QuantumState::epr_pair(),
        }
    }

    /// `|+>` for bit 0, `|->` for bit 1.
    #[staticmethod]
    fn x_eigenstate(bit: u8) -> PyResult<Self> {
        if bit > 1 {
            return Err(value_err("bit must be 0 or 1"));
        }
        Ok(PyStateVector {
            inner: QuantumState::x_eigenstate(bit),
        })
    }

    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    fn hadamard(&self, qubit: usize) -> PyResult<Self> {
        Ok(PyStateVector {
            inner: self.inner.hadamard(qubit).map_err(value_err)?,
        })
    }

    fn cnot(&self, control: usize, target: usize) -> PyResult<Self> {
        Ok(PyStateVector {
            inner: self.inner.cnot(control, target).map_err(value_err)?,
        })
    }

    fn tensor(&self, other: &PyStateVector) -> PyResult<Self> {
        Ok(PyStateVector {
            inner: self.inner.tensor(&other.inner).map_err(value_err)?,
        })
    }

    /// Sample one projective measurement; returns `(bit, probability,
    /// collapsed_state)`.
    fn measure(&self, qubit: usize, basis: &str, seed: u64) -> PyResult<(u8, f64, Self)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (outcome, collapsed) = self
            .inner
            .measure(qubit, parse_basis(basis)?, &mut rng)
            .map_err(value_err)?;
        Ok((
            outcome.bit,
            outcome.probability,
            PyStateVector { inner: collapsed },
        ))
    }

    /// Exact joint probabilities for an ordered plan of `(qubit, basis)`
    /// pairs, keyed by outcome bit string.
    fn outcome_distribution(&self, plan: Vec<(usize, String)>) -> PyResult<BTreeMap<String, f64>> {
        let plan: Vec<(usize, Basis)> = plan
            .into_iter()
            .map(|(q, b)| Ok((q, parse_basis(&b)?)))
            .collect::<PyResult<_>>()?;
        let dist = self.inner.outcome_distribution(&plan).map_err(value_err)?;
        Ok((0..dist.len())
            .map(|i| (dist.label(i), dist.probability(i)))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("StateVector(num_qubits={})", self.inner.num_qubits())
    }
}

/// Aggregated outcome of one session.
#[pyclass(name = "SessionSummary")]
struct PySessionSummary {
    #[pyo3(get)]
    aborted: bool,
    #[pyo3(get)]
    check_error_rate: f64,
    #[pyo3(get)]
    ci95: (f64, f64),
    #[pyo3(get)]
    recovered_message: Option<String>,
    #[pyo3(get)]
    message_bit_error_rate: Option<f64>,
    #[pyo3(get)]
    eve_mi_bits: f64,
    #[pyo3(get)]
    throughput: f64,
    #[pyo3(get)]
    transcript: Vec<String>,
}

#[pymethods]
impl PySessionSummary {
    fn __repr__(&self) -> String {
        format!(
            "SessionSummary(aborted={}, check_error_rate={:.4}, recovered={})",
            self.aborted,
            self.check_error_rate,
            self.recovered_message.as_deref().unwrap_or("None")
        )
    }
}

/// Run one full session. `message` is a bit string like `"1011"`; when
/// omitted, seeded random bits fill the whole encoding capacity. Attacks:
/// `none`, `ir-z`, `ir-x`, `ir-random`, `collective`, `collective-h`.
#[pyfunction]
#[pyo3(signature = (pairs, seed, message=None, attack="none", attack_probability=1.0,
                    hadamard_fraction=0.5, check_fraction=0.5, threshold=0.0))]
#[allow(clippy::too_many_arguments)]
fn run_session(
    pairs: usize,
    seed: u64,
    message: Option<&str>,
    attack: &str,
    attack_probability: f64,
    hadamard_fraction: f64,
    check_fraction: f64,
    threshold: f64,
) -> PyResult<PySessionSummary> {
    let attack = AttackModel::from_str(attack).map_err(value_err)?;
    let mut params = ProtocolParams {
        n_pairs: pairs,
        hadamard_fraction,
        check_fraction,
        abort_threshold: threshold,
        master_seed: seed,
        message: Bits::empty(),
    };
    params.message = match message {
        Some(bits) => Bits::from_str(bits).map_err(value_err)?,
        None => {
            params.validate().map_err(value_err)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::MAX);
            Bits::random(params.message_capacity(), &mut rng)
        }
    };
    let result = qsdc_core::protocol::run_session(&params, &attack, attack_probability)
        .map_err(value_err)?;
    let report =
        build_report(&params, &attack, attack_probability, &result, 0.0).map_err(value_err)?;
    Ok(PySessionSummary {
        aborted: result.aborted,
        check_error_rate: result.check_error_rate,
        ci95: report.ci95,
        recovered_message: result.recovered_message.map(|b| b.to_string()),
        message_bit_error_rate: report.message_bit_error_rate,
        eve_mi_bits: report.eve_mi_bits,
        throughput: report.throughput,
        transcript: result
            .transcript
            .entries()
            .iter()
            .map(|e| e.to_string())
            .collect(),
    })
}

fn parse_action(attack: &str) -> PyResult<AttackAction> {
    AttackAction::from_kind(attack).map_err(value_err)
}

/// Exact episode outcome distribution, keyed by outcome bit string.
/// Attack must be a concrete action: `none`, `ir-z`, `ir-x`, `collective`,
/// or `collective-h`.
#[pyfunction]
fn exact_distribution(
    alice_bit: u8,
    hadamard: bool,
    attack: &str,
) -> PyResult<BTreeMap<String, f64>> {
    if alice_bit > 1 {
        return Err(value_err("alice_bit must be 0 or 1"));
    }
    let dist = exact_episode_distribution(alice_bit, hadamard, parse_action(attack)?)
        .map_err(value_err)?;
    Ok(dist.table())
}

/// Exact per-episode probability that the reconstruction disagrees with the
/// encoded bit, from the enumeration oracle.
#[pyfunction]
fn exact_check_error_rate(alice_bit: u8, hadamard: bool, attack: &str) -> PyResult<f64> {
    if alice_bit > 1 {
        return Err(value_err("alice_bit must be 0 or 1"));
    }
    let dist = exact_episode_distribution(alice_bit, hadamard, parse_action(attack)?)
        .map_err(value_err)?;
    Ok(dist.check_error_rate())
}

/// Plug-in mutual information, in bits, of a list of `(x, y)` symbol pairs.
#[pyfunction]
fn mutual_information_bits(pairs: Vec<(u8, u8)>) -> f64 {
    empirical_mutual_information(&pairs)
}

#[pymodule]
fn qsdc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyStateVector>()?;
    m.add_class::<PySessionSummary>()?;
    m.add_function(wrap_pyfunction!(run_session, m)?)?;
    m.add_function(wrap_pyfunction!(exact_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(exact_check_error_rate, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information_bits, m)?)?;
    Ok(())
}
