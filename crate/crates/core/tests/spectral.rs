mod common;

use common::{dense, dense_pbs_radius, random_problem, symmetric_eigenvalues};
use ilspbs::experiments::gen_example1;
use ilspbs::spectral::{self, alpha_opt, max_root_modulus, mu_max, predicted_rho, quad_roots, rho_opt};
use nalgebra::DMatrix;

/// Largest eigenvalue of P⁻¹A2ᵀA2 through the symmetric pencil reduction
/// with nalgebra's own Cholesky.
fn dense_mu_max(pr: &ilspbs::IlsProblem) -> f64 {
    let a1 = dense(pr.a1());
    let a2 = dense(pr.a2());
    let l = (a1.transpose() * &a1).cholesky().unwrap().l();
    let linv = l.clone().try_inverse().unwrap();
    let k: DMatrix<f64> = &linv * a2.transpose() * &a2 * linv.transpose();
    *symmetric_eigenvalues(&((&k + k.transpose()) * 0.5)).last().unwrap()
}

#[test]
fn mu_max_matches_dense_oracle() {
    let mut problems = vec![gen_example1()];
    problems.extend((0..15).map(|i| random_problem(i, 40, 0.05, 0.95)));
    for pr in &problems {
        let got = mu_max(pr, 1e-12, 20_000);
        assert!(got.converged);
        let want = dense_mu_max(pr);
        assert!((got.value - want).abs() <= 1e-8, "{} vs {want}", got.value);
    }
}

#[test]
fn mu_max_in_unit_interval_for_spd_hessians() {
    for i in 0..100 {
        let pr = random_problem(200 + i, 25, 0.0, 0.999);
        assert!(pr.hessian_is_spd());
        let m = mu_max(&pr, spectral::MU_MAX_TOL, spectral::MU_MAX_MAXIT).value;
        assert!((0.0..1.0).contains(&m), "problem {i}: {m}");
    }
}

#[test]
fn root_moduli_below_one_iff_alpha_in_interval() {
    for i in 1..100 {
        let mu = i as f64 / 100.0;
        let upper = 1.0 + 1.0 / mu;
        for j in 1..=400 {
            let alpha = j as f64 * 0.01 * (upper + 1.0) / 4.0;
            // skip a thin band around the boundary where the modulus is 1 ± rounding
            if (alpha - upper).abs() < 1e-9 {
                continue;
            }
            let inside = alpha > 0.0 && alpha < upper;
            let lemma = ((alpha - 1.0) * mu).abs() < 1.0 && alpha * mu < 1.0 + (alpha - 1.0) * mu;
            assert_eq!(lemma, inside, "mu={mu} alpha={alpha}");
            assert_eq!(max_root_modulus(alpha, mu) < 1.0, inside, "mu={mu} alpha={alpha}");
        }
    }
}

#[test]
fn quad_roots_satisfy_the_quadratic() {
    for &(alpha, mu) in &[(0.7, 0.3), (1.0, 0.5), (1.1704, 0.4976), (2.5, 0.9), (0.1, 0.0)] {
        let (a, b) = quad_roots(alpha, mu);
        for z in [a, b] {
            let r = z * z - z * (alpha * mu) + (alpha - 1.0) * mu;
            assert!(r.norm() < 1e-14);
        }
    }
}

#[test]
fn rho_opt_is_the_minimum_over_the_interval() {
    for &mu in &[0.05, 0.3, 0.4976, 0.8, 0.97] {
        let upper = 1.0 + 1.0 / mu;
        let best = rho_opt(mu).unwrap();
        let a_opt = alpha_opt(mu).unwrap();
        assert!((max_root_modulus(a_opt, mu) - best).abs() <= 1e-7, "mu={mu}");
        let mut alpha = 1e-3;
        while alpha < upper {
            assert!(max_root_modulus(alpha, mu) >= best - 1e-12, "mu={mu} alpha={alpha}");
            alpha += 1e-3;
        }
    }
}

#[test]
fn alpha_opt_increases_with_mu() {
    let mut prev = alpha_opt(0.0).unwrap();
    assert!((prev - 1.0).abs() < 1e-15);
    for i in 1..1000 {
        let a = alpha_opt(i as f64 / 1000.0).unwrap();
        assert!(a > prev);
        prev = a;
    }
    assert!(alpha_opt(1.0).is_err());
    assert!(rho_opt(-0.1).is_err());
}

#[test]
fn predicted_rho_matches_dense_iteration_matrix() {
    for i in 0..10 {
        let pr = random_problem(400 + i, 30, 0.1, 0.9);
        assert!(2 * pr.n_cols() + pr.q_rows() <= 100);
        for &alpha in &[0.6, 1.0, 1.45] {
            let want = dense_pbs_radius(&pr, alpha);
            let got = predicted_rho(&pr, alpha).unwrap();
            assert!((got - want).abs() <= 1e-8, "problem {i} alpha {alpha}: {got} vs {want}");
        }
    }
}

#[test]
fn preconditioned_eigenvalues_lie_in_unit_disc_around_one() {
    let pr = gen_example1();
    let s = spectral::analyze(&pr).unwrap();
    for &alpha in &[0.5, 1.0, s.alpha_opt, 2.0] {
        let a = common::augmented6(&pr);
        let m = common::pbs_splitting(&pr, alpha);
        let t = m.lu().solve(&a).unwrap();
        for z in common::eigenvalues(&t) {
            assert!((nalgebra::Complex::new(1.0, 0.0) - z).norm() < 1.0, "alpha {alpha}: {z}");
        }
    }
}

#[test]
fn eigenpair_forms_on_kernel_problem() {
    // q < n gives A2 a nontrivial kernel.
    let pr = ilspbs::experiments::gen_random_problem(77, 12, 3, 7, 0.6).unwrap();
    assert!(!spectral::null_space(pr.a2()).is_empty());
    for &alpha in &[1.0, 1.3, 0.7] {
        let rep = spectral::verify_eigenpair_forms(&pr, alpha).unwrap();
        assert!(rep.max_defect() <= 1e-10, "{rep:?}");
        assert!(rep.case_i.max_defect().is_some());
        assert_eq!(rep.case_ii.max_defect().is_some(), alpha == 1.0);
        assert_eq!(rep.case_iii.max_defect().is_some(), alpha != 1.0);
    }
}
