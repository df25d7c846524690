mod common;

use ilspbs::experiments::{
    alpha_sweep, format_csv, gen_example1, gen_identity_shifted, gen_pde_problem, run_benchmark, Method, PdeSpec,
    CSV_HEADER,
};
use ilspbs::sparse::write_matrix_market;
use ilspbs::spectral::analyze;
use ilspbs::{GmresConfig, SparseMatrix};

#[test]
fn sweep_is_unimodal_around_alpha_opt() {
    let pr = gen_example1();
    let a_opt = analyze(&pr).unwrap().alpha_opt;
    let alphas: Vec<f64> = (0..=30).map(|k| 0.5 + 0.05 * k as f64).collect();
    let res = alpha_sweep(&pr, &alphas, 1e-11, 5000).unwrap();
    let iters: Vec<usize> = res.points.iter().map(|p| p.iterations).collect();
    for (k, w) in iters.windows(2).enumerate() {
        if alphas[k] <= a_opt && a_opt <= alphas[k + 1] {
            continue;
        }
        if alphas[k + 1] < a_opt {
            assert!(w[1] <= w[0] + 1, "increase before alpha_opt at {}: {iters:?}", alphas[k + 1]);
        } else {
            assert!(w[1] + 1 >= w[0], "decrease after alpha_opt at {}: {iters:?}", alphas[k + 1]);
        }
    }
    let best = res.best_alpha.unwrap();
    assert!((best - a_opt).abs() <= 0.05 + 1e-12, "best {best}");
}

#[test]
fn pde_problems_have_spd_hessians() {
    for n0 in [2, 5, 10] {
        let pr = gen_pde_problem(PdeSpec::new(n0)).unwrap();
        assert_eq!(pr.n_cols(), n0 * n0);
        assert_eq!(pr.m_rows(), 2 * n0 * n0);
        assert!(pr.hessian_is_spd(), "n0 = {n0}");
    }
}

#[test]
fn converged_rows_meet_rel_and_err_bounds() {
    let problems = [gen_example1(), gen_pde_problem(PdeSpec::new(8)).unwrap()];
    for pr in &problems {
        let rows = run_benchmark(pr, &Method::table_set(1.0), &GmresConfig::default()).unwrap();
        assert_eq!(rows.len(), 5);
        for row in rows.iter().filter(|r| r.converged) {
            assert!(row.rel <= 1e-11, "{}: {}", row.method, row.rel);
            let err = row.err.expect("reference available");
            assert!(err.is_finite() && err <= 1e-6, "{}: {err}", row.method);
        }
        let csv = format_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 5);
    }
}

#[test]
fn identity_shifted_problem_from_file() {
    let a1 = SparseMatrix::from_triplets(
        4,
        4,
        &[(0, 0, 10.0), (1, 1, 9.0), (2, 2, 11.0), (3, 3, 8.0), (0, 3, 1.0), (2, 1, -2.0)],
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a1.mtx");
    write_matrix_market(&path, &a1).unwrap();
    let pr = gen_identity_shifted(&path, 6.0).unwrap();
    assert_eq!(pr.a2().to_triplets(), SparseMatrix::scaled_identity(4, 6.0).to_triplets());
    assert_eq!(pr.b1(), &[1.0; 4]);
    assert_eq!(pr.b2(), &[1.0; 4]);
    let rows = run_benchmark(&pr, &Method::table_set(1.0), &GmresConfig::restarted(10)).unwrap();
    assert!(rows.iter().take(4).all(|r| r.converged));
}
