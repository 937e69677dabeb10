use std::str::FromStr;

use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mbsp_sort::bench::{self, BenchConfig, OutputFormat};
use mbsp_sort::costmodel::{self, CostError, MachineParams as CoreParams};
use mbsp_sort::netsort::{self, SortedBlock};
use mbsp_sort::radix;
use mbsp_sort::{Algorithm, Key, Radix, SortError, SortInstance};

fn sort_err(e: SortError) -> PyErr {
    match e {
        SortError::Runtime(e) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn cost_err(e: CostError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_algorithm(name: &str) -> PyResult<Algorithm> {
    Algorithm::from_str(name).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse_radix(r: u64) -> PyResult<Radix> {
    Radix::new(r).map_err(sort_err)
}

fn parse_ratio(s: &str) -> PyResult<BigRational> {
    BigRational::from_str(s).map_err(|_| PyValueError::new_err(format!("invalid ratio {s:?}")))
}

/// Converts an exact rational to `fractions.Fraction`.
fn fraction(py: Python<'_>, r: &BigRational) -> PyResult<Py<PyAny>> {
    let text = format!("{}/{}", r.numer(), r.denom());
    Ok(py
        .import("fractions")?
        .getattr("Fraction")?
        .call1((text,))?
        .unbind())
}

/// MBSP machine with `p` cores and slow/fast gap ratio `g/G` (a decimal or
/// fraction string such as "5" or "9/2"). Costs are in units of `G`.
#[pyclass(name = "MachineParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyMachineParams {
    inner: CoreParams,
}

#[pymethods]
impl PyMachineParams {
    #[new]
    #[pyo3(signature = (p, g_over_G = "5"))]
    #[allow(non_snake_case)]
    fn new(p: u64, g_over_G: &str) -> PyResult<Self> {
        let inner = CoreParams::with_gap_ratio(p, parse_ratio(g_over_G)?);
        inner.validate().map_err(cost_err)?;
        Ok(PyMachineParams { inner })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p
    }

    #[getter]
    fn gap_ratio(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        fraction(py, &self.inner.gap_ratio())
    }

    fn with_p(&self, p: u64) -> PyMachineParams {
        PyMachineParams {
            inner: self.inner.with_p(p),
        }
    }

    /// Modeled running time of `algorithm` on `n` keys, as a `Fraction`.
    fn cost(&self, py: Python<'_>, algorithm: &str, n: u64) -> PyResult<Py<PyAny>> {
        let cost =
            costmodel::t_algorithm(parse_algorithm(algorithm)?, &costmodel::int(n), &self.inner)
                .map_err(cost_err)?;
        fraction(py, &cost.0)
    }

    /// Modeled speedup of `algorithm` over sr4 on `n` keys.
    fn predicted_speedup(&self, py: Python<'_>, algorithm: &str, n: u64) -> PyResult<Py<PyAny>> {
        let s = costmodel::predicted_speedup(
            parse_algorithm(algorithm)?,
            &costmodel::int(n),
            &self.inner,
        )
        .map_err(cost_err)?;
        fraction(py, &s)
    }

    /// Limit of the modeled speedup as `n` grows.
    fn asymptotic_speedup(&self, py: Python<'_>, algorithm: &str) -> PyResult<Py<PyAny>> {
        let s = costmodel::asymptotic_speedup(parse_algorithm(algorithm)?, &self.inner)
            .map_err(cost_err)?;
        fraction(py, &s)
    }

    fn __repr__(&self) -> String {
        format!(
            "MachineParams(p={}, g_over_G='{}')",
            self.inner.p,
            self.inner.gap_ratio()
        )
    }
}

#[pyfunction]
fn generate_uniform_keys(n: usize, seed: u64) -> Vec<Key> {
    mbsp_sort::generate_uniform_keys(n, seed)
}

#[pyfunction]
fn verify_sorted_permutation(input: Vec<Key>, output: Vec<Key>) -> bool {
    mbsp_sort::verify_sorted_permutation(&input, &output)
}

/// Sorts `keys` with one of sr4, pr4, pr2, btn, oet on `p` worker threads.
#[pyfunction]
#[pyo3(signature = (keys, algorithm = "pr4", p = 1, radix = None))]
fn sort(
    py: Python<'_>,
    keys: Vec<Key>,
    algorithm: &str,
    p: usize,
    radix: Option<u64>,
) -> PyResult<Vec<Key>> {
    let algorithm = parse_algorithm(algorithm)?;
    let instance = match radix {
        Some(r) => SortInstance::new(keys, p, algorithm, parse_radix(r)?, 0),
        None => SortInstance::with_default_radix(keys, p, algorithm),
    }
    .map_err(sort_err)?;
    py.detach(|| mbsp_sort::sort(&instance)).map_err(sort_err)
}

#[pyfunction]
#[pyo3(signature = (keys, radix = 256))]
fn serial_radix_sort(keys: Vec<Key>, radix: u64) -> PyResult<Vec<Key>> {
    Ok(radix::serial_radix_sort(&keys, parse_radix(radix)?))
}

/// Merges two sorted blocks and splits the result back into a low block of
/// `len(a)` keys and a high block of `len(b)` keys.
#[pyfunction]
fn merge_split(a: Vec<Key>, b: Vec<Key>) -> (Vec<Key>, Vec<Key>) {
    let (low, high) = netsort::merge_split(
        &SortedBlock { worker: 0, keys: a },
        &SortedBlock { worker: 1, keys: b },
    );
    (low.keys, high.keys)
}

/// Bitonic stages for `p` workers: one list per stage of `(partner, keep_low)`
/// pairs indexed by worker.
#[pyfunction]
fn bitonic_schedule(p: usize) -> PyResult<Vec<Vec<(usize, bool)>>> {
    let schedule = netsort::bitonic_schedule(p).map_err(sort_err)?;
    Ok(schedule
        .stages
        .iter()
        .map(|stage| {
            stage
                .assignments
                .iter()
                .map(|a| (a.partner, a.keep_low))
                .collect()
        })
        .collect())
}

/// Partner of worker `i` in odd-even transposition round `round` (1-based).
#[pyfunction]
fn oet_partner(i: usize, round: usize, p: usize) -> Option<usize> {
    netsort::oet_partner(i, round, p)
}

/// OET over BTN modeled cost ratio at `g = 5G`; `exact=False` uses the
/// `lg^2 p` approximation.
#[pyfunction]
#[pyo3(signature = (p, exact = false))]
fn predicted_ratio_oet_btn(py: Python<'_>, p: u64, exact: bool) -> PyResult<Py<PyAny>> {
    fraction(
        py,
        &costmodel::predicted_ratio_oet_btn(p, exact).map_err(cost_err)?,
    )
}

/// Times the requested grid and returns the report as CSV (or markdown).
#[pyfunction]
#[pyo3(signature = (
    algorithms = vec!["sr4".to_string(), "pr4".into(), "pr2".into(), "btn".into(), "oet".into()],
    sizes = vec![1_000, 8_000],
    processors = vec![2, 4],
    seed = 1,
    repetitions = 1,
    radix = 256,
    verify = true,
    model = None,
    format = "csv",
))]
#[allow(clippy::too_many_arguments)]
fn run_benchmark(
    py: Python<'_>,
    algorithms: Vec<String>,
    sizes: Vec<usize>,
    processors: Vec<usize>,
    seed: u64,
    repetitions: usize,
    radix: u64,
    verify: bool,
    model: Option<PyMachineParams>,
    format: &str,
) -> PyResult<String> {
    let config = BenchConfig {
        algorithms: algorithms
            .iter()
            .map(|a| parse_algorithm(a))
            .collect::<PyResult<_>>()?,
        sizes,
        processors,
        seed,
        repetitions,
        radix: parse_radix(radix)?,
        verify,
        model: model.map(|m| m.inner),
    };
    let format = OutputFormat::from_str(format).map_err(PyValueError::new_err)?;
    let report = py
        .detach(|| bench::run_benchmark(&config))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(bench::emit_table(&report, format))
}

#[pymodule]
#[pyo3(name = "mbsp_sort")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMachineParams>()?;
    m.add_function(wrap_pyfunction!(generate_uniform_keys, m)?)?;
    m.add_function(wrap_pyfunction!(verify_sorted_permutation, m)?)?;
    m.add_function(wrap_pyfunction!(sort, m)?)?;
    m.add_function(wrap_pyfunction!(serial_radix_sort, m)?)?;
    m.add_function(wrap_pyfunction!(merge_split, m)?)?;
    m.add_function(wrap_pyfunction!(bitonic_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(oet_partner, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_ratio_oet_btn, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    m.add("CSV_HEADER", bench::CSV_HEADER.join(","))?;
    Ok(())
}
