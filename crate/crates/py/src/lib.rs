//! Python module `perfect_partitions`.
//!
//! Big counts come back as Python `int`, exact moments as `fractions.Fraction`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use perfect_partitions::counting::{count_brute, count_dp, exists_perfect};
use perfect_partitions::harness::{label_regime, run_sweep, SweepConfig, SweepMode};
use perfect_partitions::lines::{
    enumerate_even_tuples, enumerate_star_tuples, line_aggregates, roots_of_unity_filter,
    star_aggregates, GfPoly,
};
use perfect_partitions::moments;
use perfect_partitions::{torus, Error, Instance};

create_exception!(perfect_partitions, BudgetExceededError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::BudgetExceeded { .. } | Error::MemoryBudgetExceeded { .. } => {
            BudgetExceededError::new_err(msg)
        }
        Error::Domain(_) | Error::InvalidInput(_) | Error::Config(_) => PyValueError::new_err(msg),
        Error::Io { .. } | Error::Csv { .. } | Error::Json { .. } => PyOSError::new_err(msg),
        Error::InternalMismatch(_) => PyRuntimeError::new_err(msg),
    }
}

/// Number of perfect ordered partitions; `method` is `"dp"` or `"brute"`.
#[pyfunction]
#[pyo3(signature = (values, nu, method = "dp"))]
fn count<'py>(
    py: Python<'py>,
    values: Vec<u64>,
    nu: usize,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let inst = Instance::from_values(values).map_err(to_py)?;
    let report = match method {
        "dp" => count_dp(&inst, nu),
        "brute" => count_brute(&inst, nu),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("Z", report.z)?;
    d.set_item("S", report.total)?;
    d.set_item("divisible", report.divisible)?;
    d.set_item("target", report.target)?;
    d.set_item("method", report.method.to_string())?;
    Ok(d)
}

#[pyfunction(name = "exists_perfect")]
fn py_exists_perfect(values: Vec<u64>, nu: usize) -> PyResult<bool> {
    let inst = Instance::from_values(values).map_err(to_py)?;
    exists_perfect(&inst, nu).map_err(to_py)
}

/// Values uniform on `1..=m` from PRNG stream `stream` of `seed`.
#[pyfunction]
#[pyo3(signature = (n, m, seed, stream = 0))]
fn generate_instance(n: usize, m: u64, seed: u64, stream: u64) -> PyResult<Vec<u64>> {
    Ok(Instance::generate_stream(n, m, seed, stream)
        .map_err(to_py)?
        .values()
        .to_vec())
}

#[pyfunction]
fn expected_exact(n: usize, m: u64, nu: usize) -> PyResult<f64> {
    moments::expected_exact(n, m, nu).map_err(to_py)
}

#[pyfunction]
fn expected_bruteforce(n: usize, m: u64, nu: usize) -> PyResult<BigRational> {
    moments::expected_bruteforce(n, m, nu).map_err(to_py)
}

#[pyfunction]
fn second_moment_bruteforce(n: usize, m: u64, nu: usize) -> PyResult<BigRational> {
    moments::second_moment_bruteforce(n, m, nu).map_err(to_py)
}

/// Natural log of the asymptotic mean.
#[pyfunction]
fn expected_asymptotic(n: usize, m: u64, nu: usize) -> PyResult<f64> {
    Ok(moments::expected_asymptotic(n, m, nu)
        .map_err(to_py)?
        .ln_value)
}

#[pyfunction]
#[pyo3(signature = (nu, tol = moments::ETA_TOL))]
fn eta(nu: usize, tol: f64) -> PyResult<f64> {
    moments::eta(nu, tol).map_err(to_py)
}

#[pyfunction]
fn f_nu(eta: f64, nu: usize) -> f64 {
    moments::f_nu(eta, nu)
}

#[pyfunction]
fn thresholds<'py>(py: Python<'py>, nu: usize) -> PyResult<Bound<'py, PyDict>> {
    let t = moments::thresholds(nu).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("nu", t.nu)?;
    d.set_item("kappa_exist", t.kappa_exist)?;
    d.set_item("eta", t.eta)?;
    d.set_item("kappa_mean_lo", t.kappa_mean_lo)?;
    d.set_item("kappa_excluded", t.kappa_excluded)?;
    d.set_item("kappa_second", t.kappa_second)?;
    Ok(d)
}

#[pyfunction]
fn cantelli_bound(delta: f64, nu: usize) -> PyResult<f64> {
    moments::cantelli_bound(delta, nu).map_err(to_py)
}

#[pyfunction(name = "label_regime")]
fn py_label_regime(nu: usize, kappa: f64) -> PyResult<String> {
    Ok(label_regime(nu, kappa).map_err(to_py)?.to_string())
}

#[pyfunction]
fn phi(y: f64, m: u64) -> Complex64 {
    torus::phi(y, m)
}

/// Trapezoidal value of the first-moment integral; default grid is exact.
#[pyfunction]
#[pyo3(signature = (n, m, nu, grid = None))]
fn expected_via_quadrature(n: usize, m: u64, nu: usize, grid: Option<u64>) -> PyResult<f64> {
    let r = match grid {
        Some(p) => torus::expected_via_quadrature_with_grid(n, m, nu, p),
        None => torus::expected_via_quadrature(n, m, nu),
    };
    Ok(r.map_err(to_py)?.value)
}

#[pyfunction]
#[pyo3(signature = (n, m, nu, grid = None))]
fn second_moment_via_quadrature(n: usize, m: u64, nu: usize, grid: Option<u64>) -> PyResult<f64> {
    let r = match grid {
        Some(p) => torus::second_moment_via_quadrature_with_grid(n, m, nu, p),
        None => torus::second_moment_via_quadrature(n, m, nu),
    };
    Ok(r.map_err(to_py)?.value)
}

#[pyfunction(name = "line_aggregates")]
fn py_line_aggregates<'py>(py: Python<'py>, nu: usize) -> PyResult<Bound<'py, PyDict>> {
    let a = line_aggregates(nu).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("nu", a.nu)?;
    d.set_item("tuple_count", a.tuple_count)?;
    d.set_item("m_agg", a.m_agg)?;
    d.set_item("total_length", a.total_length)?;
    d.set_item("touch_point_bound", a.touch_point_bound)?;
    Ok(d)
}

#[pyfunction(name = "star_aggregates")]
fn py_star_aggregates<'py>(py: Python<'py>, nu: usize) -> PyResult<Bound<'py, PyDict>> {
    let a = star_aggregates(nu).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("nu", a.nu)?;
    d.set_item("m1", a.m1)?;
    d.set_item("m2", a.m2)?;
    d.set_item("sum_dstar", a.sum_dstar)?;
    d.set_item("total_length", a.total_length)?;
    Ok(d)
}

type TupleRow = (Vec<i64>, i64, i64, f64);

/// Admissible tuples as `(k, r, d, length)`; `star=True` gives `(k, r, d*, length*)`.
#[pyfunction]
#[pyo3(signature = (nu, star = false))]
fn line_tuples(nu: usize, star: bool) -> PyResult<Vec<TupleRow>> {
    Ok(if star {
        enumerate_star_tuples(nu)
            .map_err(to_py)?
            .into_iter()
            .map(|t| (t.k, t.r, t.dstar, t.length))
            .collect()
    } else {
        enumerate_even_tuples(nu)
            .map_err(to_py)?
            .into_iter()
            .map(|t| (t.k, t.r, t.d, t.length))
            .collect()
    })
}

/// Sum of the coefficients of `z^j`, `nu | j`.
#[pyfunction(name = "roots_of_unity_filter")]
fn py_roots_of_unity_filter(coeffs: Vec<BigInt>, nu: usize) -> PyResult<BigInt> {
    roots_of_unity_filter(&GfPoly::new(coeffs), nu).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (nu, n_list, kappa_list, trials = 100, seed = 0, mode = "exists", condition = true))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    nu: usize,
    n_list: Vec<usize>,
    kappa_list: Vec<f64>,
    trials: u64,
    seed: u64,
    mode: &str,
    condition: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = SweepConfig::new(nu, n_list, kappa_list);
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.mode = mode.parse::<SweepMode>().map_err(to_py)?;
    cfg.condition_on_divisibility = condition;
    let records = py.detach(|| run_sweep(&cfg)).map_err(to_py)?;
    records
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("nu", r.nu)?;
            d.set_item("n", r.n)?;
            d.set_item("kappa", r.kappa)?;
            d.set_item("kappa_eff", r.kappa_eff)?;
            d.set_item("M", r.M)?;
            d.set_item("seed", r.seed)?;
            d.set_item("trials", r.trials)?;
            d.set_item("divisible_trials", r.divisible_trials)?;
            d.set_item("exists_count", r.exists_count)?;
            d.set_item("mean_Z", r.mean_Z)?;
            d.set_item("var_Z", r.var_Z)?;
            d.set_item("regime_label", r.regime_label.to_string())?;
            d.set_item("budget_flag", r.budget_flag.to_string())?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "perfect_partitions")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add(
        "BudgetExceededError",
        m.py().get_type::<BudgetExceededError>(),
    )?;
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(py_exists_perfect, m)?)?;
    m.add_function(wrap_pyfunction!(generate_instance, m)?)?;
    m.add_function(wrap_pyfunction!(expected_exact, m)?)?;
    m.add_function(wrap_pyfunction!(expected_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(second_moment_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(expected_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(f_nu, m)?)?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(cantelli_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_label_regime, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(expected_via_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(second_moment_via_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(py_line_aggregates, m)?)?;
    m.add_function(wrap_pyfunction!(py_star_aggregates, m)?)?;
    m.add_function(wrap_pyfunction!(line_tuples, m)?)?;
    m.add_function(wrap_pyfunction!(py_roots_of_unity_filter, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
