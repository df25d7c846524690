//! Dense oracles built on nalgebra, independent of the crate's own kernels.
#![allow(dead_code)]

use ilspbs::experiments::gen_random_problem;
use ilspbs::{BsKind, IlsProblem, SparseMatrix};
use nalgebra::{DMatrix, DVector};

pub fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.nrows(), a.ncols(), &a.to_dense())
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn put(m: &mut DMatrix<f64>, r: usize, c: usize, block: &DMatrix<f64>) {
    m.view_mut((r, c), block.shape()).copy_from(block);
}

fn eye(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

pub fn gram(problem: &IlsProblem) -> DMatrix<f64> {
    let a1 = dense(problem.a1());
    a1.transpose() * a1
}

/// `[[P,0,I],[A2,I,0],[0,-A2ᵀ,I]]`
pub fn augmented6(problem: &IlsProblem) -> DMatrix<f64> {
    let (n, q) = (problem.n_cols(), problem.q_rows());
    let a2 = dense(problem.a2());
    let mut m = DMatrix::zeros(2 * n + q, 2 * n + q);
    put(&mut m, 0, 0, &gram(problem));
    put(&mut m, 0, n + q, &eye(n));
    put(&mut m, n, 0, &a2);
    put(&mut m, n, n, &eye(q));
    put(&mut m, n + q, n, &(-a2.transpose()));
    put(&mut m, n + q, n + q, &eye(n));
    m
}

/// `[[P,0,0],[αA2,I,0],[0,-A2ᵀ,I]]`
pub fn pbs_splitting(problem: &IlsProblem, alpha: f64) -> DMatrix<f64> {
    let (n, q) = (problem.n_cols(), problem.q_rows());
    let a2 = dense(problem.a2());
    let mut m = DMatrix::zeros(2 * n + q, 2 * n + q);
    put(&mut m, 0, 0, &gram(problem));
    put(&mut m, n, 0, &(&a2 * alpha));
    put(&mut m, n, n, &eye(q));
    put(&mut m, n + q, n, &(-a2.transpose()));
    put(&mut m, n + q, n + q, &eye(n));
    m
}

/// `[[I,A1,0],[0,P,A2ᵀ],[0,A2,I]]`
pub fn xin_meng(problem: &IlsProblem) -> DMatrix<f64> {
    let (p, n, q) = (problem.p_rows(), problem.n_cols(), problem.q_rows());
    let a1 = dense(problem.a1());
    let a2 = dense(problem.a2());
    let mut m = DMatrix::zeros(p + n + q, p + n + q);
    put(&mut m, 0, 0, &eye(p));
    put(&mut m, 0, p, &a1);
    put(&mut m, p, p, &gram(problem));
    put(&mut m, p, p + n, &a2.transpose());
    put(&mut m, p + n, p, &a2);
    put(&mut m, p + n, p + n, &eye(q));
    m
}

pub fn bs_matrix(problem: &IlsProblem, kind: BsKind) -> DMatrix<f64> {
    let (p, n, q) = (problem.p_rows(), problem.n_cols(), problem.q_rows());
    let mut m = DMatrix::zeros(p + n + q, p + n + q);
    put(&mut m, 0, 0, &eye(p));
    put(&mut m, p, p, &gram(problem));
    put(&mut m, p + n, p + n, &eye(q));
    match kind {
        BsKind::Bs1 => {}
        BsKind::Bs2 => put(&mut m, p, p + n, &dense(problem.a2()).transpose()),
        BsKind::Bs3 => put(&mut m, 0, p, &dense(problem.a1())),
    }
    m
}

/// Solution of the normal equations `(A1ᵀA1 − A2ᵀA2) x = A1ᵀb1 − A2ᵀb2` by LU.
pub fn normal_equations_solution(problem: &IlsProblem) -> DVector<f64> {
    let a1 = dense(problem.a1());
    let a2 = dense(problem.a2());
    let h = a1.transpose() * &a1 - a2.transpose() * &a2;
    let rhs = a1.transpose() * dvec(problem.b1()) - a2.transpose() * dvec(problem.b2());
    h.lu().solve(&rhs).expect("nonsingular Hessian")
}

/// Eigenvalues through a real Schur decomposition with a bounded sweep count.
/// Exactly structured inputs (large repeated eigenvalues) can stall the
/// shifted QR sweep, so a random orthogonal similarity is tried on failure.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<nalgebra::Complex<f64>> {
    if let Some(s) = m.clone().try_schur(f64::EPSILON, 10_000) {
        return s.complex_eigenvalues().iter().copied().collect();
    }
    let n = m.nrows();
    for seed in 0..5 {
        let q = DMatrix::from_row_slice(n, n, &random_vec(seed, n * n)).qr().q();
        let rotated = q.transpose() * m * &q;
        if let Some(s) = rotated.try_schur(f64::EPSILON, 10_000) {
            return s.complex_eigenvalues().iter().copied().collect();
        }
    }
    panic!("Schur iteration did not converge");
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// ρ(I − M_α⁻¹𝒜) from dense matrices.
pub fn dense_pbs_radius(problem: &IlsProblem, alpha: f64) -> f64 {
    let a = augmented6(problem);
    let m = pbs_splitting(problem, alpha);
    let g = DMatrix::identity(a.nrows(), a.nrows()) - m.lu().solve(&a).expect("M_alpha is nonsingular");
    spectral_radius(&g)
}

pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() / scale
}

/// Deterministic family of random problems: sizes and μ_max vary with `i`.
pub fn random_problem(i: u64, max_n: usize, mu_lo: f64, mu_hi: f64) -> IlsProblem {
    let n = 3 + (i as usize * 7) % (max_n - 2);
    let q = 1 + (i as usize * 5) % (n + 3);
    let p = n + 1 + (i as usize * 3) % 9;
    let t = ((i as f64) * 0.618_033_988_75).fract();
    gen_random_problem(1000 + i, p, q, n, mu_lo + t * (mu_hi - mu_lo)).expect("valid random problem")
}

/// Seeded uniform vector in [-1, 1).
pub fn random_vec(seed: u64, len: usize) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_sparse(seed: u64, nrows: usize, ncols: usize, density: f64) -> SparseMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    for i in 0..nrows {
        for j in 0..ncols {
            if rng.random::<f64>() < density {
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
    }
    SparseMatrix::from_triplets(nrows, ncols, &t).unwrap()
}
