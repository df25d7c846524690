//! Parameterized block splitting (PBS) of the augmented system and the
//! block-splitting preconditioners BS1-BS3 of the three-by-three formulation.
//!
//! With `𝒜 = M_α − N_α`,
//!
//! ```text
//! M_α = [ P     0     0 ]      N_α = [ 0          0  -I ]
//!       [ αA2   I     0 ]            [ (α-1)A2    0   0 ]
//!       [ 0    -A2ᵀ   I ]            [ 0          0   0 ]
//! ```
//!
//! one sweep `M_α v⁺ = N_α v + b` reads, componentwise,
//!
//! ```text
//! x⁺  = P⁻¹(A1ᵀb1 − δ̂1)
//! δ2⁺ = −αA2x⁺ + (α−1)A2x + b2
//! δ̂1⁺ = A2ᵀδ2⁺
//! ```

use std::time::Instant;

use crate::error::{Error, Result};
use crate::krylov::{LinearOperator, Preconditioner};
use crate::problem::{rel_residual, split_blocks, split_blocks_mut, BlockKind, IlsProblem};
use crate::report::{SolveReport, Termination};
use crate::sparse::vector::{axpy, norm2};

/// Relative residual above which the stationary iteration is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;

/// Action of `M_α⁻¹` on vectors ordered `(x; δ2; δ̂1)`.
#[derive(Debug, Clone, Copy)]
pub struct PbsPreconditioner<'a> {
    problem: &'a IlsProblem,
    alpha: f64,
}

impl<'a> PbsPreconditioner<'a> {
    /// `alpha` must be finite and non-negative. `M_α` is nonsingular for any
    /// α; the stationary iteration itself additionally needs α > 0.
    pub fn new(problem: &'a IlsProblem, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Domain {
                what: "alpha",
                value: alpha,
                range: "[0, inf)",
            });
        }
        Ok(Self { problem, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn sizes(&self) -> [usize; 3] {
        let n = self.problem.n_cols();
        [n, self.problem.q_rows(), n]
    }

    /// Checked `M_α⁻¹ w`.
    pub fn solve(&self, w: &[f64]) -> Result<Vec<f64>> {
        let dim = Preconditioner::dim(self);
        if w.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "PBS preconditioner",
                expected: dim,
                found: w.len(),
            });
        }
        let mut z = vec![0.0; dim];
        Preconditioner::apply(self, w, &mut z);
        Ok(z)
    }
}

impl Preconditioner for PbsPreconditioner<'_> {
    fn dim(&self) -> usize {
        self.sizes().iter().sum()
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let pr = self.problem;
        let sizes = self.sizes();
        let (w1, w2, w3) = split_blocks(w, sizes);
        let (z1, z2, z3) = split_blocks_mut(out, sizes);
        pr.gram_a1_factor().solve_into(w1, z1);
        pr.a2().matvec_into(z1, z2);
        for (z, &wv) in z2.iter_mut().zip(w2) {
            *z = wv - self.alpha * *z;
        }
        pr.a2().matvec_transpose_into(z2, z3);
        axpy(1.0, w3, z3);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BsKind {
    /// `diag(I, P, I)`
    Bs1,
    /// `[[I, 0, 0], [0, P, A2ᵀ], [0, 0, I]]`
    Bs2,
    /// `[[I, A1, 0], [0, P, 0], [0, 0, I]]`
    Bs3,
}

impl BsKind {
    pub fn label(self) -> &'static str {
        match self {
            BsKind::Bs1 => "BS1",
            BsKind::Bs2 => "BS2",
            BsKind::Bs3 => "BS3",
        }
    }
}

/// Action of `M_i⁻¹` on vectors ordered `(δ1; x; δ2)`.
#[derive(Debug, Clone, Copy)]
pub struct BsPreconditioner<'a> {
    problem: &'a IlsProblem,
    kind: BsKind,
}

impl<'a> BsPreconditioner<'a> {
    pub fn new(problem: &'a IlsProblem, kind: BsKind) -> Self {
        Self { problem, kind }
    }

    pub fn kind(&self) -> BsKind {
        self.kind
    }

    fn sizes(&self) -> [usize; 3] {
        [self.problem.p_rows(), self.problem.n_cols(), self.problem.q_rows()]
    }

    pub fn solve(&self, w: &[f64]) -> Result<Vec<f64>> {
        let dim = Preconditioner::dim(self);
        if w.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "BS preconditioner",
                expected: dim,
                found: w.len(),
            });
        }
        let mut z = vec![0.0; dim];
        Preconditioner::apply(self, w, &mut z);
        Ok(z)
    }
}

impl Preconditioner for BsPreconditioner<'_> {
    fn dim(&self) -> usize {
        self.sizes().iter().sum()
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let pr = self.problem;
        let factor = pr.gram_a1_factor();
        let sizes = self.sizes();
        let (w1, w2, w3) = split_blocks(w, sizes);
        let (z1, z2, z3) = split_blocks_mut(out, sizes);
        z3.copy_from_slice(w3);
        match self.kind {
            BsKind::Bs1 => {
                z1.copy_from_slice(w1);
                factor.solve_into(w2, z2);
            }
            BsKind::Bs2 => {
                z1.copy_from_slice(w1);
                let mut t = vec![0.0; w2.len()];
                pr.a2().matvec_transpose_into(w3, &mut t);
                for (ti, &wi) in t.iter_mut().zip(w2) {
                    *ti = wi - *ti;
                }
                factor.solve_into(&t, z2);
            }
            BsKind::Bs3 => {
                factor.solve_into(w2, z2);
                pr.a1().matvec_into(z2, z1);
                for (z, &wi) in z1.iter_mut().zip(w1) {
                    *z = wi - *z;
                }
            }
        }
    }
}

/// State of the stationary PBS iteration, advanced one sweep at a time.
#[derive(Debug, Clone)]
pub struct PbsIteration<'a> {
    problem: &'a IlsProblem,
    alpha: f64,
    x: Vec<f64>,
    delta2: Vec<f64>,
    delta1_hat: Vec<f64>,
    /// A2 x of the current iterate
    a2x: Vec<f64>,
    sweeps: usize,
}

impl<'a> PbsIteration<'a> {
    /// Starts from the zero vector.
    pub fn new(problem: &'a IlsProblem, alpha: f64) -> Result<Self> {
        let dim = 2 * problem.n_cols() + problem.q_rows();
        Self::from_state(problem, alpha, &vec![0.0; dim])
    }

    /// Starts from an arbitrary augmented vector `(x; δ2; δ̂1)`.
    pub fn from_state(problem: &'a IlsProblem, alpha: f64, state: &[f64]) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Domain {
                what: "alpha",
                value: alpha,
                range: "(0, inf)",
            });
        }
        let n = problem.n_cols();
        let q = problem.q_rows();
        if state.len() != 2 * n + q {
            return Err(Error::DimensionMismatch {
                context: "PBS state",
                expected: 2 * n + q,
                found: state.len(),
            });
        }
        let (x, d2, d1) = split_blocks(state, [n, q, n]);
        Ok(Self {
            problem,
            alpha,
            x: x.to_vec(),
            delta2: d2.to_vec(),
            delta1_hat: d1.to_vec(),
            a2x: problem.a2().matvec(x)?,
            sweeps: 0,
        })
    }

    pub fn step(&mut self) {
        let pr = self.problem;
        let mut rhs = pr.b1_hat().to_vec();
        axpy(-1.0, &self.delta1_hat, &mut rhs);
        pr.gram_a1_factor().solve_into(&rhs, &mut self.x);

        let mut a2x_new = vec![0.0; pr.q_rows()];
        pr.a2().matvec_into(&self.x, &mut a2x_new);
        for (((d, new), old), b) in self.delta2.iter_mut().zip(&a2x_new).zip(&self.a2x).zip(pr.b2()) {
            *d = -self.alpha * new + (self.alpha - 1.0) * old + b;
        }
        self.a2x = a2x_new;
        pr.a2().matvec_transpose_into(&self.delta2, &mut self.delta1_hat);
        self.sweeps += 1;
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// The augmented iterate `(x; δ2; δ̂1)`.
    pub fn state(&self) -> Vec<f64> {
        [self.x.as_slice(), &self.delta2, &self.delta1_hat].concat()
    }
}

#[derive(Debug, Clone)]
pub struct PbsOutcome {
    pub report: SolveReport,
    /// Final augmented iterate `(x; δ2; δ̂1)`.
    pub solution: Vec<f64>,
}

/// Runs the PBS stationary iteration from the zero vector until the true
/// relative residual of the augmented system drops to `tol`.
pub fn pbs_iterate(problem: &IlsProblem, alpha: f64, tol: f64, maxit: usize) -> Result<PbsOutcome> {
    let started = Instant::now();
    let mut it = PbsIteration::new(problem, alpha)?;
    let op = problem.operator(BlockKind::Augmented6);
    let rhs = op.rhs();

    if norm2(&rhs) == 0.0 {
        let report = SolveReport::new(Termination::Converged, 0, vec![0.0], started.elapsed().as_secs_f64());
        return Ok(PbsOutcome {
            report,
            solution: it.state(),
        });
    }

    let mut history = vec![1.0];
    let termination = loop {
        if it.sweeps() >= maxit {
            break Termination::MaxIterations;
        }
        it.step();
        let rel = rel_residual(&op as &dyn LinearOperator, &rhs, &it.state());
        history.push(rel);
        if rel <= tol {
            break Termination::Converged;
        }
        if !rel.is_finite() || rel > DIVERGENCE_THRESHOLD {
            break Termination::Diverged;
        }
    };
    let report = SolveReport::new(termination, it.sweeps(), history, started.elapsed().as_secs_f64());
    Ok(PbsOutcome {
        report,
        solution: it.state(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::gen_example1;
    use crate::SparseMatrix;

    #[test]
    fn example1_table_counts() {
        let pr = gen_example1();
        let alphas = [0.7, 0.8, 1.0, 1.1704, 1.4, 1.6, 1.8];
        let expected = [48, 44, 36, 24, 32, 42, 53];
        for (a, e) in alphas.iter().zip(expected) {
            let out = pbs_iterate(&pr, *a, 1e-11, 1000).unwrap();
            assert!(out.report.converged);
            assert!(out.report.iterations.abs_diff(e) <= 2, "alpha {a}: {}", out.report.iterations);
        }
    }

    #[test]
    fn zero_rhs_converges_immediately() {
        let pr = IlsProblem::new(
            SparseMatrix::identity(2),
            SparseMatrix::scaled_identity(2, 0.5),
            vec![0.; 2],
            vec![0.; 2],
        )
        .unwrap();
        let out = pbs_iterate(&pr, 1.0, 1e-11, 10).unwrap();
        assert_eq!(out.report.iterations, 0);
        assert!(out.report.converged);
        assert!(out.solution.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_non_positive_alpha() {
        let pr = gen_example1();
        assert!(pbs_iterate(&pr, 0.0, 1e-11, 10).is_err());
        assert!(pbs_iterate(&pr, -1.0, 1e-11, 10).is_err());
        assert!(PbsPreconditioner::new(&pr, f64::NAN).is_err());
    }

    #[test]
    fn diverges_outside_interval() {
        let pr = gen_example1();
        let out = pbs_iterate(&pr, 3.009 + 0.5, 1e-11, 5000).unwrap();
        assert_eq!(out.report.termination, Termination::Diverged);
        assert!(!out.report.converged);
    }

    #[test]
    fn pbs_with_zero_a2() {
        let a1 = SparseMatrix::from_dense(3, 2, &[2., 1., 0., 1., 1., 3.]).unwrap();
        let pr = IlsProblem::new(a1, SparseMatrix::zeros(2, 2), vec![1.; 3], vec![1.; 2]).unwrap();
        let m = PbsPreconditioner::new(&pr, 1.3).unwrap();
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let z = m.solve(&w).unwrap();
        let p_inv = pr.gram_a1_factor().solve(&w[..2]).unwrap();
        assert_eq!(&z[..2], &p_inv[..]);
        assert_eq!(&z[2..], &w[2..]);
    }

    #[test]
    fn alpha_zero_leaves_second_block() {
        let pr = gen_example1();
        let m = PbsPreconditioner::new(&pr, 0.0).unwrap();
        let w: Vec<f64> = (0..10).map(|i| i as f64 - 3.0).collect();
        let z = m.solve(&w).unwrap();
        assert_eq!(&z[3..7], &w[3..7]);
    }

    #[test]
    fn bs1_with_identity_gram_is_identity() {
        let a1 = SparseMatrix::identity(3);
        let a2 = SparseMatrix::from_dense(2, 3, &[0.1, 0.2, 0.0, 0.0, 0.1, 0.3]).unwrap();
        let pr = IlsProblem::new(a1, a2, vec![1.; 3], vec![1.; 2]).unwrap();
        let w: Vec<f64> = (0..8).map(|i| i as f64 * 0.5 - 1.0).collect();
        assert_eq!(BsPreconditioner::new(&pr, BsKind::Bs1).solve(&w).unwrap(), w);
    }

    #[test]
    fn dimension_checks() {
        let pr = gen_example1();
        assert!(PbsPreconditioner::new(&pr, 1.0).unwrap().solve(&[1.0; 3]).is_err());
        assert!(BsPreconditioner::new(&pr, BsKind::Bs2).solve(&[1.0; 3]).is_err());
    }
}
