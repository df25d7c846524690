//! Test problems and the benchmark harness behind the `ilspbs` CLI.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::krylov::{gmres, GmresConfig, GmresOutcome, Preconditioner};
use crate::pbs::{pbs_iterate, BsKind, BsPreconditioner, PbsPreconditioner};
use crate::problem::{rel_error, BlockKind, IlsProblem};
use crate::report::Termination;
use crate::sparse::{read_matrix_market, SparseMatrix};
use crate::spectral;

/// The 3x3 / 4x3 example with all-ones right-hand sides.
pub fn gen_example1() -> IlsProblem {
    let a1 = SparseMatrix::from_dense(3, 3, &[6., 1., 1., 2., 4., 5., 1., 1., 5.]).unwrap();
    let a2 = SparseMatrix::from_dense(4, 3, &[2., 1., 1., 1., 1., 1., 1., 2., 2., 0., 1., 1.]).unwrap();
    IlsProblem::new(a1, a2, vec![1.0; 3], vec![1.0; 4]).expect("example data is well posed")
}

/// `A1` as given, `A2 = c I`, all-ones `b1` and `b2`.
pub fn identity_shifted(a1: SparseMatrix, c: f64) -> Result<IlsProblem> {
    if !a1.is_square() {
        return Err(Error::NonSquare {
            nrows: a1.nrows(),
            ncols: a1.ncols(),
        });
    }
    let n = a1.nrows();
    IlsProblem::new(a1, SparseMatrix::scaled_identity(n, c), vec![1.0; n], vec![1.0; n])
}

/// Loads `A1` from a Matrix Market file and builds [`identity_shifted`].
pub fn gen_identity_shifted(path: impl AsRef<Path>, c: f64) -> Result<IlsProblem> {
    identity_shifted(read_matrix_market(path)?, c)
}

/// Convection-diffusion-reaction test problem on the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeSpec {
    /// Interior grid points per direction.
    pub n0: usize,
    /// `A2 = a2_scale · I`.
    pub a2_scale: f64,
}

impl PdeSpec {
    pub fn new(n0: usize) -> Self {
        Self { n0, a2_scale: 0.7 }
    }

    pub fn mesh_size(&self) -> f64 {
        1.0 / (self.n0 as f64 + 1.0)
    }
}

/// Central-difference matrix of
/// `−Δu + sin(x+y) u_x + cos(x−y) u_y + 50(x+y) u` with homogeneous Dirichlet
/// data, lexicographic ordering (x fastest).
pub fn pde_matrix(n0: usize) -> SparseMatrix {
    let h = 1.0 / (n0 as f64 + 1.0);
    let h2 = h * h;
    let idx = |i: usize, j: usize| j * n0 + i;
    let mut t = Vec::with_capacity(5 * n0 * n0);
    for j in 0..n0 {
        for i in 0..n0 {
            let x = (i + 1) as f64 * h;
            let y = (j + 1) as f64 * h;
            let k = idx(i, j);
            let cx = (x + y).sin() / (2.0 * h);
            let cy = (x - y).cos() / (2.0 * h);
            t.push((k, k, 4.0 / h2 + 50.0 * (x + y)));
            if i > 0 {
                t.push((k, idx(i - 1, j), -1.0 / h2 - cx));
            }
            if i + 1 < n0 {
                t.push((k, idx(i + 1, j), -1.0 / h2 + cx));
            }
            if j > 0 {
                t.push((k, idx(i, j - 1), -1.0 / h2 - cy));
            }
            if j + 1 < n0 {
                t.push((k, idx(i, j + 1), -1.0 / h2 + cy));
            }
        }
    }
    SparseMatrix::from_triplets(n0 * n0, n0 * n0, &t).expect("stencil indices are in range")
}

pub fn gen_pde_problem(spec: PdeSpec) -> Result<IlsProblem> {
    if spec.n0 == 0 {
        return Err(Error::InvalidArgument("PDE grid needs n0 >= 1".into()));
    }
    identity_shifted(pde_matrix(spec.n0), spec.a2_scale)
}

/// Dense random problem whose `A2` is rescaled so that μ_max equals
/// `target_mu` (which must lie in [0, 1), keeping the Hessian SPD).
pub fn gen_random_problem(seed: u64, p: usize, q: usize, n: usize, target_mu: f64) -> Result<IlsProblem> {
    if !(0.0..1.0).contains(&target_mu) {
        return Err(Error::Domain {
            what: "target mu_max",
            value: target_mu,
            range: "[0, 1)",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dense = |rows: usize, cols: usize| -> Vec<f64> { (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let mut a1d = dense(p, n);
    for i in 0..n.min(p) {
        a1d[i * n + i] += 2.0;
    }
    let a1 = SparseMatrix::from_dense(p, n, &a1d)?;
    let a2 = SparseMatrix::from_dense(q, n, &dense(q, n))?;
    let b1: Vec<f64> = dense(p, 1);
    let b2: Vec<f64> = dense(q, 1);
    let raw = IlsProblem::new(a1.clone(), a2.clone(), b1.clone(), b2.clone())?;
    let top = spectral::q_spectrum(&raw)?.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(raw);
    }
    let s = (target_mu / top).sqrt();
    IlsProblem::new(a1, a2.scaled(s), b1, b2)
}

/// "m×n" label of a problem.
pub fn problem_label(problem: &IlsProblem) -> String {
    format!("{}x{}", problem.m_rows(), problem.n_cols())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Converged α with the fewest iterations (first one on ties).
    pub best_alpha: Option<f64>,
}

/// PBS stationary iteration counts over a list of α values.
pub fn alpha_sweep(problem: &IlsProblem, alphas: &[f64], tol: f64, maxit: usize) -> Result<SweepResult> {
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let out = pbs_iterate(problem, alpha, tol, maxit)?;
        points.push(SweepPoint {
            alpha,
            iterations: out.report.iterations,
            termination: out.report.termination,
        });
    }
    let best_alpha = points
        .iter()
        .filter(|p| p.termination == Termination::Converged)
        .min_by_key(|p| p.iterations)
        .map(|p| p.alpha);
    Ok(SweepResult { points, best_alpha })
}

/// Parameter choice for PBS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    Value(f64),
    /// α_opt from the estimated μ_max.
    Optimal,
}

impl AlphaChoice {
    pub fn resolve(self, problem: &IlsProblem) -> Result<f64> {
        match self {
            AlphaChoice::Value(a) => Ok(a),
            AlphaChoice::Optimal => Ok(spectral::analyze(problem)?.alpha_opt),
        }
    }
}

impl FromStr for AlphaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("opt") {
            return Ok(AlphaChoice::Optimal);
        }
        s.parse::<f64>()
            .map(AlphaChoice::Value)
            .map_err(|_| Error::InvalidArgument(format!("alpha must be a number or 'opt', got {s:?}")))
    }
}

/// Preconditioner used with GMRES.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Pbs(f64),
    Bs(BsKind),
    NoPrec,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Pbs(_) => "PBS".to_string(),
            Method::Bs(k) => k.label().to_string(),
            Method::NoPrec => "No-Prec".to_string(),
        }
    }

    /// Formulation the method is applied to.
    pub fn formulation(&self) -> BlockKind {
        match self {
            Method::Bs(_) => BlockKind::XinMengB,
            Method::Pbs(_) | Method::NoPrec => BlockKind::Augmented6,
        }
    }

    /// The four preconditioned methods and the unpreconditioned baseline.
    pub fn table_set(alpha: f64) -> Vec<Method> {
        vec![
            Method::Pbs(alpha),
            Method::Bs(BsKind::Bs1),
            Method::Bs(BsKind::Bs2),
            Method::Bs(BsKind::Bs3),
            Method::NoPrec,
        ]
    }
}

/// Runs GMRES with the given method on its formulation of `problem`.
pub fn solve_gmres(problem: &IlsProblem, method: Method, config: &GmresConfig) -> Result<GmresOutcome> {
    let op = problem.operator(method.formulation());
    let rhs = op.rhs();
    let pbs;
    let bs;
    let prec: Option<&dyn Preconditioner> = match method {
        Method::Pbs(alpha) => {
            pbs = PbsPreconditioner::new(problem, alpha)?;
            Some(&pbs)
        }
        Method::Bs(kind) => {
            bs = BsPreconditioner::new(problem, kind);
            Some(&bs)
        }
        Method::NoPrec => None,
    };
    gmres(&op, prec, &rhs, config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub problem: String,
    pub method: String,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub rel: f64,
    /// Relative error of the x-block; `None` without a reference solution.
    pub err: Option<f64>,
    pub converged: bool,
}

/// One GMRES solve per method, in input order. Errors of individual solves
/// are not fatal; only a failing reference solution aborts.
pub fn run_benchmark(problem: &IlsProblem, methods: &[Method], config: &GmresConfig) -> Result<Vec<BenchRow>> {
    let label = problem_label(problem);
    let reference = problem.reference_solution().ok();
    let mut rows = Vec::with_capacity(methods.len());
    for method in methods {
        let out = solve_gmres(problem, *method, config)?;
        let op = problem.operator(method.formulation());
        let err = reference
            .as_ref()
            .and_then(|r| rel_error(op.x_block(&out.solution), r).ok());
        rows.push(BenchRow {
            problem: label.clone(),
            method: method.label(),
            iterations: out.report.iterations,
            wall_seconds: out.report.wall_seconds,
            rel: out.report.final_rel_residual,
            err,
            converged: out.report.converged,
        });
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "problem,method,iter,cpu_s,rel,err,converged";

pub fn format_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let err = r.err.map(|e| format!("{e:.3e}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{:.4},{:.3e},{},{}",
            r.problem, r.method, r.iterations, r.wall_seconds, r.rel, err, r.converged
        );
    }
    out
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<8} {:>6} {:>9} {:>11} {:>11} {:>9}",
        "problem", "method", "iter", "cpu_s", "rel", "err", "converged"
    );
    for r in rows {
        let iter = if r.converged { r.iterations.to_string() } else { format!("{}+", r.iterations) };
        let err = r.err.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<14} {:<8} {:>6} {:>9.4} {:>11.3e} {:>11} {:>9}",
            r.problem,
            r.method,
            iter,
            r.wall_seconds,
            r.rel,
            err,
            if r.converged { "yes" } else { "no" }
        );
    }
    out
}

/// Problem selector: `example1`, `mtx:<path>:<c>` or `pde:<n0>`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Example1,
    Mtx { path: PathBuf, shift: f64 },
    Pde { n0: usize },
}

impl ProblemSpec {
    pub fn build(&self) -> Result<IlsProblem> {
        match self {
            ProblemSpec::Example1 => Ok(gen_example1()),
            ProblemSpec::Mtx { path, shift } => gen_identity_shifted(path, *shift),
            ProblemSpec::Pde { n0 } => gen_pde_problem(PdeSpec::new(*n0)),
        }
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unrecognized problem {s:?}; expected example1, mtx:<path>:<c> or pde:<n0>"));
        if s == "example1" {
            return Ok(ProblemSpec::Example1);
        }
        if let Some(rest) = s.strip_prefix("pde:") {
            let n0: usize = rest.parse().map_err(|_| bad())?;
            if n0 == 0 {
                return Err(bad());
            }
            return Ok(ProblemSpec::Pde { n0 });
        }
        if let Some(rest) = s.strip_prefix("mtx:") {
            // the path may itself contain ':'; the shift is after the last one
            let (path, shift) = rest.rsplit_once(':').ok_or_else(bad)?;
            let shift: f64 = shift.parse().map_err(|_| bad())?;
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(ProblemSpec::Mtx {
                path: PathBuf::from(path),
                shift,
            });
        }
        Err(bad())
    }
}
