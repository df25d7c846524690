//! Python bindings for `ilspbs`.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ilspbs::experiments::{self, AlphaChoice, Method, PdeSpec};
use ilspbs::{spectral, BsKind, Error, GmresConfig, MatrixMarketError};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::MatrixMarket(MatrixMarketError::Io { .. }) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Compressed sparse row matrix.
#[pyclass(name = "SparseMatrix", module = "ilspbs", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySparseMatrix(ilspbs::SparseMatrix);

#[pymethods]
impl PySparseMatrix {
    /// Build from `(row, col, value)` triplets; duplicates are summed.
    #[staticmethod]
    fn from_triplets(nrows: usize, ncols: usize, triplets: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        ilspbs::SparseMatrix::from_triplets(nrows, ncols, &triplets)
            .map(Self)
            .map_err(to_py)
    }

    /// Build from a list of rows.
    #[staticmethod]
    fn from_dense(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(PyValueError::new_err("rows have different lengths"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        ilspbs::SparseMatrix::from_dense(nrows, ncols, &flat)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self(ilspbs::SparseMatrix::identity(n))
    }

    #[staticmethod]
    fn read_mtx(path: std::path::PathBuf) -> PyResult<Self> {
        ilspbs::sparse::read_matrix_market(path).map(Self).map_err(to_py)
    }

    fn write_mtx(&self, path: std::path::PathBuf) -> PyResult<()> {
        ilspbs::sparse::write_matrix_market(path, &self.0).map_err(to_py)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.nrows(), self.0.ncols())
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.0.nnz()
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.matvec(&x).map_err(to_py)
    }

    fn rmatvec(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.matvec_transpose(&y).map_err(to_py)
    }

    fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.0.to_triplets()
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.0.ncols().max(1);
        self.0.to_dense().chunks(n).map(<[f64]>::to_vec).collect()
    }

    fn __repr__(&self) -> String {
        format!("SparseMatrix({}x{}, nnz={})", self.0.nrows(), self.0.ncols(), self.0.nnz())
    }
}

/// Indefinite least squares problem `min (b - Ax)ᵀ J (b - Ax)` with
/// `A = [A1; A2]` and `J = diag(I, -I)`.
#[pyclass(name = "IlsProblem", module = "ilspbs", frozen)]
struct PyIlsProblem(ilspbs::IlsProblem);

#[pymethods]
impl PyIlsProblem {
    #[new]
    fn new(a1: &PySparseMatrix, a2: &PySparseMatrix, b1: Vec<f64>, b2: Vec<f64>) -> PyResult<Self> {
        ilspbs::IlsProblem::new(a1.0.clone(), a2.0.clone(), b1, b2)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn example1() -> Self {
        Self(experiments::gen_example1())
    }

    /// Convection-diffusion matrix on an `n0 × n0` grid as `A1`, `A2 = 0.7 I`.
    #[staticmethod]
    fn pde(n0: usize) -> PyResult<Self> {
        experiments::gen_pde_problem(PdeSpec::new(n0)).map(Self).map_err(to_py)
    }

    /// `A1` read from a Matrix Market file, `A2 = c I`, all-ones right-hand sides.
    #[staticmethod]
    #[pyo3(signature = (path, c = 6.0))]
    fn identity_shifted(path: std::path::PathBuf, c: f64) -> PyResult<Self> {
        experiments::gen_identity_shifted(path, c).map(Self).map_err(to_py)
    }

    /// Dense random problem with the given μ_max.
    #[staticmethod]
    fn random(seed: u64, p: usize, q: usize, n: usize, mu_max: f64) -> PyResult<Self> {
        experiments::gen_random_problem(seed, p, q, n, mu_max)
            .map(Self)
            .map_err(to_py)
    }

    /// `(p, q, n)`
    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        (self.0.p_rows(), self.0.q_rows(), self.0.n_cols())
    }

    #[getter]
    fn a1(&self) -> PySparseMatrix {
        PySparseMatrix(self.0.a1().clone())
    }

    #[getter]
    fn a2(&self) -> PySparseMatrix {
        PySparseMatrix(self.0.a2().clone())
    }

    fn hessian(&self) -> PySparseMatrix {
        PySparseMatrix(self.0.hessian())
    }

    fn hessian_is_spd(&self) -> bool {
        self.0.hessian_is_spd()
    }

    fn reference_solution(&self) -> PyResult<Vec<f64>> {
        self.0.reference_solution().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("IlsProblem({})", experiments::problem_label(&self.0))
    }
}

/// Outcome of a PBS or GMRES solve.
#[pyclass(name = "SolveResult", module = "ilspbs", frozen, get_all)]
struct PySolveResult {
    iterations: usize,
    converged: bool,
    termination: String,
    rel_residual: f64,
    history: Vec<f64>,
    /// x-block of the final iterate
    x: Vec<f64>,
    /// full iterate of the block system
    solution: Vec<f64>,
    wall_seconds: f64,
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult({}, iterations={}, rel_residual={:.3e})",
            self.termination, self.iterations, self.rel_residual
        )
    }
}

impl PySolveResult {
    fn new(report: ilspbs::SolveReport, x: Vec<f64>, solution: Vec<f64>) -> Self {
        Self {
            iterations: report.iterations,
            converged: report.converged,
            termination: report.termination.to_string(),
            rel_residual: report.final_rel_residual,
            history: report.rel_residual_history,
            x,
            solution,
            wall_seconds: report.wall_seconds,
        }
    }
}

fn parse_alpha(problem: &ilspbs::IlsProblem, alpha: &Bound<'_, PyAny>) -> PyResult<f64> {
    if let Ok(v) = alpha.extract::<f64>() {
        return Ok(v);
    }
    let s: String = alpha.extract()?;
    s.parse::<AlphaChoice>()
        .and_then(|a| a.resolve(problem))
        .map_err(to_py)
}

fn parse_method(problem: &ilspbs::IlsProblem, prec: &str, alpha: &Bound<'_, PyAny>) -> PyResult<Method> {
    Ok(match prec.to_ascii_lowercase().as_str() {
        "pbs" => Method::Pbs(parse_alpha(problem, alpha)?),
        "bs1" => Method::Bs(BsKind::Bs1),
        "bs2" => Method::Bs(BsKind::Bs2),
        "bs3" => Method::Bs(BsKind::Bs3),
        "none" => Method::NoPrec,
        other => return Err(PyValueError::new_err(format!("unknown preconditioner {other:?}"))),
    })
}

/// μ_max, convergence interval upper bound, α_opt and ρ_opt.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, problem: &PyIlsProblem) -> PyResult<Bound<'py, PyDict>> {
    let s = spectral::analyze(&problem.0).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("mu_max", s.mu_max)?;
    d.set_item("alpha_upper", s.alpha_upper)?;
    d.set_item("alpha_opt", s.alpha_opt)?;
    d.set_item("rho_opt", s.rho_opt)?;
    Ok(d)
}

/// Convergence factor of the PBS iteration from the μ spectrum.
#[pyfunction]
fn predicted_rho(problem: &PyIlsProblem, alpha: f64) -> PyResult<f64> {
    spectral::predicted_rho(&problem.0, alpha).map_err(to_py)
}

/// Stationary PBS iteration from zero; `alpha` may be a number or `"opt"`.
#[pyfunction]
#[pyo3(signature = (problem, alpha, tol = 1e-11, maxit = 1000))]
fn pbs_iterate(problem: &PyIlsProblem, alpha: &Bound<'_, PyAny>, tol: f64, maxit: usize) -> PyResult<PySolveResult> {
    let a = parse_alpha(&problem.0, alpha)?;
    let out = ilspbs::pbs_iterate(&problem.0, a, tol, maxit).map_err(to_py)?;
    let x = out.solution[..problem.0.n_cols()].to_vec();
    Ok(PySolveResult::new(out.report, x, out.solution))
}

/// Left-preconditioned GMRES; `prec` is one of pbs, bs1, bs2, bs3, none and
/// `restart=None` runs full GMRES.
#[pyfunction]
#[pyo3(signature = (problem, prec = "pbs", alpha = None, restart = None, tol = 1e-11, maxit = 1000))]
fn gmres(
    py: Python<'_>,
    problem: &PyIlsProblem,
    prec: &str,
    alpha: Option<Bound<'_, PyAny>>,
    restart: Option<usize>,
    tol: f64,
    maxit: usize,
) -> PyResult<PySolveResult> {
    let alpha = alpha.unwrap_or_else(|| 1.0f64.into_pyobject(py).unwrap().into_any());
    let method = parse_method(&problem.0, prec, &alpha)?;
    let config = GmresConfig {
        restart,
        tol,
        maxit,
        ..GmresConfig::default()
    };
    let out = experiments::solve_gmres(&problem.0, method, &config).map_err(to_py)?;
    let x = problem.0.operator(method.formulation()).x_block(&out.solution).to_vec();
    Ok(PySolveResult::new(out.report, x, out.solution))
}

/// PBS iteration counts over `alphas` as `(alpha, iterations, termination)`.
#[pyfunction]
#[pyo3(signature = (problem, alphas, tol = 1e-11, maxit = 5000))]
fn alpha_sweep(problem: &PyIlsProblem, alphas: Vec<f64>, tol: f64, maxit: usize) -> PyResult<Vec<(f64, usize, String)>> {
    let res = experiments::alpha_sweep(&problem.0, &alphas, tol, maxit).map_err(to_py)?;
    Ok(res
        .points
        .iter()
        .map(|p| (p.alpha, p.iterations, p.termination.to_string()))
        .collect())
}

/// PBS(alpha), BS1-BS3 and unpreconditioned GMRES as a list of dicts.
#[pyfunction]
#[pyo3(name = "bench", signature = (problem, alpha = 1.0, restart = None, tol = 1e-11, maxit = 1000))]
fn run_bench<'py>(
    py: Python<'py>,
    problem: &PyIlsProblem,
    alpha: f64,
    restart: Option<usize>,
    tol: f64,
    maxit: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = GmresConfig {
        restart,
        tol,
        maxit,
        ..GmresConfig::default()
    };
    let rows = experiments::run_benchmark(&problem.0, &Method::table_set(alpha), &config).map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("problem", &r.problem)?;
            d.set_item("method", &r.method)?;
            d.set_item("iter", r.iterations)?;
            d.set_item("cpu_s", r.wall_seconds)?;
            d.set_item("rel", r.rel)?;
            d.set_item("err", r.err)?;
            d.set_item("converged", r.converged)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "ilspbs")]
fn ilspbs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySparseMatrix>()?;
    m.add_class::<PyIlsProblem>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_rho, m)?)?;
    m.add_function(wrap_pyfunction!(pbs_iterate, m)?)?;
    m.add_function(wrap_pyfunction!(gmres, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    Ok(())
}
