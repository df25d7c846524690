mod common;

use common::{random_problem, random_sparse, random_vec, rel_diff};
use ilspbs::experiments::{gen_example1, solve_gmres, Method};
use ilspbs::krylov::{gmres, gmres_full};
use ilspbs::{BlockKind, BsKind, GmresConfig, LinearOperator, Preconditioner, SparseMatrix, Termination};
use nalgebra::DMatrix;

fn diagnostic_config(restart: Option<usize>) -> GmresConfig {
    GmresConfig {
        restart,
        tol: 1e-12,
        maxit: 400,
        diagnostics: true,
        ..GmresConfig::default()
    }
}

#[test]
fn givens_estimates_are_monotone_and_match_explicit_residual() {
    let pr = gen_example1();
    for method in [Method::Pbs(1.0), Method::Bs(BsKind::Bs2), Method::NoPrec] {
        for restart in [Some(3), Some(10), None] {
            let out = solve_gmres(&pr, method, &diagnostic_config(restart)).unwrap();
            assert!(out.report.converged || restart.is_some(), "{method:?} {restart:?}");
            assert!(!out.cycles.is_empty());
            // rounding in the explicit residual is relative to ‖M⁻¹b‖, the
            // first cycle's starting residual
            let scale = out.cycles[0].initial_prec_residual;
            for c in &out.cycles {
                let mut prev = c.initial_prec_residual;
                for &g in &c.givens_estimates {
                    assert!(g <= prev * (1.0 + 1e-12));
                    prev = g;
                }
                let last = *c.givens_estimates.last().unwrap();
                assert!((last - c.explicit_prec_residual).abs() <= 1e-8 * scale, "{method:?}: {last} vs {}", c.explicit_prec_residual);
                assert!(c.orthonormality_defect <= 1e-10, "defect {} steps {} ests {:?} term {:?}", c.orthonormality_defect, c.steps, c.givens_estimates, out.report.termination);
            }
        }
    }
}

#[test]
fn orthonormality_on_random_systems() {
    for i in 0..6 {
        let pr = random_problem(i, 25, 0.2, 0.9);
        let out = solve_gmres(&pr, Method::Bs(BsKind::Bs1), &diagnostic_config(None)).unwrap();
        for c in &out.cycles {
            assert!(c.orthonormality_defect <= 1e-10, "defect {} steps {} ests {:?}", c.orthonormality_defect, c.steps, c.givens_estimates);
        }
    }
}

/// Exact inverse of a sparse matrix, applied as a preconditioner.
struct DenseInverse(DMatrix<f64>);

impl Preconditioner for DenseInverse {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        out.copy_from_slice((&self.0 * common::dvec(w)).as_slice());
    }
}

#[test]
fn exact_preconditioner_converges_in_one_step() {
    let pr = gen_example1();
    let op = pr.operator(BlockKind::Augmented6);
    let inv = common::augmented6(&pr).try_inverse().unwrap();
    let out = gmres(&op, Some(&DenseInverse(inv)), &op.rhs(), &GmresConfig::default()).unwrap();
    assert!(out.report.converged);
    assert_eq!(out.report.iterations, 1);
}

#[test]
fn full_gmres_converges_within_dimension() {
    for seed in 0..10 {
        let d = 10 + 4 * seed as usize;
        let a = random_sparse(seed, d, d, 0.3).linear_combination(1.0, &SparseMatrix::scaled_identity(d, 3.0), 1.0).unwrap();
        let b = random_vec(seed, d);
        let config = GmresConfig {
            tol: 1e-10,
            maxit: d,
            ..GmresConfig::default()
        };
        let out = gmres_full(&a, None, &b, &config).unwrap();
        assert!(out.report.converged, "d={d}");
        assert!(out.report.iterations <= d);
        let ax = a.matvec(&out.solution).unwrap();
        assert!(rel_diff(&ax, &b) <= 1e-10);
    }
}

#[test]
fn history_tracks_true_residual() {
    let pr = random_problem(5, 20, 0.3, 0.7);
    let out = solve_gmres(&pr, Method::Pbs(1.0), &GmresConfig::restarted(5)).unwrap();
    let h = &out.report.rel_residual_history;
    assert_eq!(h.len(), out.report.iterations + 1);
    assert_eq!(h[0], 1.0);
    let op = pr.operator(BlockKind::Augmented6);
    let rel = ilspbs::problem::rel_residual(&op as &dyn LinearOperator, &op.rhs(), &out.solution);
    assert!((rel - out.report.final_rel_residual).abs() <= 1e-14);
    assert!(rel <= 1e-11);
}

#[test]
fn budget_exhaustion_is_reported() {
    let pr = random_problem(6, 30, 0.5, 0.9);
    let config = GmresConfig {
        restart: Some(2),
        maxit: 3,
        ..GmresConfig::default()
    };
    let out = solve_gmres(&pr, Method::NoPrec, &config).unwrap();
    assert_eq!(out.report.termination, Termination::MaxIterations);
    assert_eq!(out.report.iterations, 3);
    assert!(gmres(&pr.operator(BlockKind::Augmented6), None, &[1.0], &config).is_err());
    let bad = GmresConfig { maxit: 0, ..GmresConfig::default() };
    let op = pr.operator(BlockKind::Augmented6);
    assert!(gmres(&op, None, &op.rhs(), &bad).is_err());
}
