use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    /// Arnoldi produced an invariant subspace and the solution in it met the tolerance.
    HappyBreakdown,
    MaxIterations,
    Diverged,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::Converged => "converged",
            Termination::HappyBreakdown => "converged (happy breakdown)",
            Termination::MaxIterations => "max iterations reached",
            Termination::Diverged => "diverged",
        };
        f.write_str(s)
    }
}

/// Outcome of an iterative solve.
///
/// `rel_residual_history` holds ‖b − 𝒜x_k‖ / ‖b‖ at every point the true
/// residual was evaluated, starting with the zero initial guess (1, or 0 for
/// a zero right-hand side). Solvers that check every step record
/// `iterations + 1` entries.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub rel_residual_history: Vec<f64>,
    pub final_rel_residual: f64,
    /// Relative error of the x-block against a reference solution, when known.
    pub rel_error: Option<f64>,
    pub wall_seconds: f64,
}

impl SolveReport {
    pub(crate) fn new(termination: Termination, iterations: usize, history: Vec<f64>, wall_seconds: f64) -> Self {
        let final_rel_residual = *history.last().expect("history holds the initial residual");
        Self {
            iterations,
            converged: matches!(termination, Termination::Converged | Termination::HappyBreakdown),
            termination,
            rel_residual_history: history,
            final_rel_residual,
            rel_error: None,
            wall_seconds,
        }
    }
}
