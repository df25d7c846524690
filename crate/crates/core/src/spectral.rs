//! Spectral analysis of the PBS iteration.
//!
//! Every nonzero eigenvalue λ of the iteration matrix `G_α = I − M_α⁻¹𝒜`
//! solves `λ² − αμλ + (α−1)μ = 0` for some eigenvalue μ of
//! `Q = P⁻¹A2ᵀA2`. When `H` is SPD, `0 ≤ μ < 1`, the iteration converges
//! iff `0 < α < 1 + 1/μ_max`, and the spectral radius is minimized at
//! `α_opt = 2 / (1 + √(1 − μ_max))` with `ρ_opt = μ_max / (1 + √(1 − μ_max))`.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::krylov::{LinearOperator, Preconditioner};
use crate::pbs::PbsPreconditioner;
use crate::problem::{BlockKind, IlsProblem};
use crate::sparse::vector::{dot, norm2, scale};

pub const MU_MAX_TOL: f64 = 1e-8;
pub const MU_MAX_MAXIT: usize = 5000;

/// Largest order for which dense spectra are formed.
pub const DENSE_SPECTRUM_LIMIT: usize = 2048;

const START_SEED: u64 = 0x5eed_1e57;

/// Result of the power iteration for μ_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuMax {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest eigenvalue of `P⁻¹A2ᵀA2` by power iteration on the symmetric
/// similarity transform `L⁻¹A2ᵀA2L⁻ᵀ`, stopping once successive Rayleigh
/// quotients agree to `tol` relative. On hitting `maxit` the best estimate is
/// returned with `converged = false`.
pub fn mu_max(problem: &IlsProblem, tol: f64, maxit: usize) -> MuMax {
    let n = problem.n_cols();
    let factor = problem.gram_a1_factor();
    let a2 = problem.a2();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let nv = norm2(&v);
    scale(1.0 / nv, &mut v);

    let mut t = vec![0.0; a2.nrows()];
    let mut s = vec![0.0; n];
    let mut apply = |v: &[f64]| -> Vec<f64> {
        let back = factor.backward(v).expect("dimension n");
        a2.matvec_into(&back, &mut t);
        a2.matvec_transpose_into(&t, &mut s);
        factor.forward(&s).expect("dimension n")
    };

    let mut lambda = 0.0;
    for it in 1..=maxit {
        let mut w = apply(&v);
        let next = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return MuMax {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        if it > 1 && (next - lambda).abs() <= tol * next.abs() {
            return MuMax {
                value: next,
                iterations: it,
                converged: true,
            };
        }
        lambda = next;
        scale(1.0 / nw, &mut w);
        v = w;
    }
    MuMax {
        value: lambda,
        iterations: maxit,
        converged: false,
    }
}

/// Spectral quantities governing the PBS iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSummary {
    pub mu_max: f64,
    /// Upper end of the convergence interval `(0, 1 + 1/μ_max)`; infinite when μ_max = 0.
    pub alpha_upper: f64,
    pub alpha_opt: f64,
    pub rho_opt: f64,
}

impl SpectralSummary {
    pub fn from_mu_max(mu_max: f64) -> Result<Self> {
        Ok(Self {
            mu_max,
            alpha_upper: convergence_interval(mu_max)?.1,
            alpha_opt: alpha_opt(mu_max)?,
            rho_opt: rho_opt(mu_max)?,
        })
    }
}

/// μ_max with the default tolerance, followed by the closed-form quantities.
pub fn analyze(problem: &IlsProblem) -> Result<SpectralSummary> {
    let mu = mu_max(problem, MU_MAX_TOL, MU_MAX_MAXIT);
    SpectralSummary::from_mu_max(mu.value)
}

fn check_mu(mu: f64) -> Result<()> {
    if (0.0..1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "mu_max",
            value: mu,
            range: "[0, 1)",
        })
    }
}

pub fn convergence_interval(mu_max: f64) -> Result<(f64, f64)> {
    check_mu(mu_max)?;
    let upper = if mu_max == 0.0 { f64::INFINITY } else { 1.0 + 1.0 / mu_max };
    Ok((0.0, upper))
}

pub fn alpha_opt(mu_max: f64) -> Result<f64> {
    check_mu(mu_max)?;
    Ok(2.0 / (1.0 + (1.0 - mu_max).sqrt()))
}

pub fn rho_opt(mu_max: f64) -> Result<f64> {
    check_mu(mu_max)?;
    Ok(mu_max / (1.0 + (1.0 - mu_max).sqrt()))
}

/// Both roots of `λ² − αμλ + (α−1)μ = 0`.
///
/// A discriminant within `1e-14 (α²μ² + 1)` of zero is treated as a double root.
pub fn quad_roots(alpha: f64, mu: f64) -> (Complex64, Complex64) {
    let b = alpha * mu;
    let c = (alpha - 1.0) * mu;
    let disc = b * b - 4.0 * c;
    if disc.abs() <= 1e-14 * (b * b + 1.0) {
        let r = Complex64::new(b / 2.0, 0.0);
        return (r, r);
    }
    if disc > 0.0 {
        let sq = disc.sqrt();
        if b == 0.0 {
            return (Complex64::new(sq / 2.0, 0.0), Complex64::new(-sq / 2.0, 0.0));
        }
        // larger-magnitude root first, the other from the product of roots
        let r1 = (b + b.signum() * sq) / 2.0;
        let r2 = c / r1;
        (Complex64::new(r1, 0.0), Complex64::new(r2, 0.0))
    } else {
        let im = (-disc).sqrt() / 2.0;
        (Complex64::new(b / 2.0, im), Complex64::new(b / 2.0, -im))
    }
}

pub fn max_root_modulus(alpha: f64, mu: f64) -> f64 {
    let (r1, r2) = quad_roots(alpha, mu);
    r1.norm().max(r2.norm())
}

/// All eigenvalues of `Q = P⁻¹A2ᵀA2`, ascending, from a dense symmetric
/// eigensolve of `L⁻¹A2ᵀA2L⁻ᵀ`.
pub fn q_spectrum(problem: &IlsProblem) -> Result<Vec<f64>> {
    let n = problem.n_cols();
    if n > DENSE_SPECTRUM_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "dense spectrum requested for n = {n} > {DENSE_SPECTRUM_LIMIT}"
        )));
    }
    let factor = problem.gram_a1_factor();
    let a2 = problem.a2();
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut t = vec![0.0; a2.nrows()];
    let mut s = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let back = factor.backward(&e)?;
        e[j] = 0.0;
        a2.matvec_into(&back, &mut t);
        a2.matvec_transpose_into(&t, &mut s);
        let col = factor.forward(&s)?;
        k.column_mut(j).copy_from_slice(&col);
    }
    let sym = (&k + k.transpose()) * 0.5;
    let mut mus: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    mus.sort_by(f64::total_cmp);
    Ok(mus)
}

/// ρ(G_α) from the quadratic-root relation over a given μ spectrum.
/// The structural zero eigenvalues never exceed this maximum.
pub fn predicted_rho_from_spectrum(mus: &[f64], alpha: f64) -> f64 {
    mus.iter()
        .map(|&mu| max_root_modulus(alpha, mu))
        .fold(0.0, f64::max)
}

pub fn predicted_rho(problem: &IlsProblem, alpha: f64) -> Result<f64> {
    Ok(predicted_rho_from_spectrum(&q_spectrum(problem)?, alpha))
}

/// Outcome of one case of the eigenpair check.
#[derive(Debug, Clone, PartialEq)]
pub enum CaseOutcome {
    Checked { vectors: usize, max_defect: f64 },
    /// The case's hypothesis on α does not hold.
    NotApplicable,
    Skipped(String),
}

impl CaseOutcome {
    pub fn max_defect(&self) -> Option<f64> {
        match self {
            CaseOutcome::Checked { max_defect, .. } => Some(*max_defect),
            _ => None,
        }
    }
}

/// Defects ‖M_α⁻¹𝒜v − λv‖ / ‖v‖ for the three eigenvector families of the
/// preconditioned matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenpairReport {
    pub alpha: f64,
    /// λ ≠ 1: `v = ((λ−1)⁻¹P⁻¹A2ᵀy; y; A2ᵀy)` with `y` an eigenvector of `A2P⁻¹A2ᵀ`.
    pub case_i: CaseOutcome,
    /// α = λ = 1: arbitrary `(x; y; 0)`.
    pub case_ii: CaseOutcome,
    /// α ≠ 1, λ = 1: `(x; y; 0)` with `x ∈ N(A2)`.
    pub case_iii: CaseOutcome,
}

impl EigenpairReport {
    pub fn max_defect(&self) -> f64 {
        [&self.case_i, &self.case_ii, &self.case_iii]
            .iter()
            .filter_map(|c| c.max_defect())
            .fold(0.0, f64::max)
    }
}

/// Largest augmented dimension accepted by [`verify_eigenpair_forms`].
pub const EIGENPAIR_CHECK_LIMIT: usize = 200;

pub fn verify_eigenpair_forms(problem: &IlsProblem, alpha: f64) -> Result<EigenpairReport> {
    let op = problem.operator(BlockKind::Augmented6);
    let dim = op.dim();
    if dim > EIGENPAIR_CHECK_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "eigenpair check needs dimension <= {EIGENPAIR_CHECK_LIMIT}, got {dim}"
        )));
    }
    let prec = PbsPreconditioner::new(problem, alpha)?;
    let n = problem.n_cols();
    let q = problem.q_rows();
    let a2 = problem.a2();
    let factor = problem.gram_a1_factor();

    // T = M_α⁻¹𝒜
    let t_apply = |v: &[f64]| -> Vec<f64> {
        let mut av = vec![0.0; dim];
        op.apply(v, &mut av);
        let mut out = vec![0.0; dim];
        prec.apply(&av, &mut out);
        out
    };

    // case (i): eigenvectors y of W = A2 P⁻¹ A2ᵀ with eigenvalue ν > 0
    let mut w = DMatrix::<f64>::zeros(q, q);
    let mut e = vec![0.0; q];
    for j in 0..q {
        e[j] = 1.0;
        let u = factor.solve(&a2.matvec_transpose(&e)?)?;
        e[j] = 0.0;
        w.column_mut(j).copy_from_slice(&a2.matvec(&u)?);
    }
    let eig = SymmetricEigen::new((&w + w.transpose()) * 0.5);
    let nu_scale = eig.eigenvalues.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for (k, &nu) in eig.eigenvalues.iter().enumerate() {
        if nu <= 1e-10 * nu_scale {
            continue;
        }
        let y: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let a2ty = a2.matvec_transpose(&y)?;
        let u = factor.solve(&a2ty)?;
        let t_u = t_apply(&[u.as_slice(), &vec![0.0; q + n]].concat());
        let rest = [vec![0.0; n], y.clone(), a2ty.clone()].concat();
        let t_rest = t_apply(&rest);
        let (r1, r2) = quad_roots(alpha, nu);
        let mut roots = vec![r1];
        if r2 != r1 {
            roots.push(r2);
        }
        for root in roots {
            if root.norm() <= 1e-12 {
                continue; // λ = 1, not covered by case (i)
            }
            let lambda = Complex64::new(1.0, 0.0) - root;
            let c = Complex64::new(1.0, 0.0) / (lambda - 1.0);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..dim {
                let vi = if i < n { c * u[i] } else { Complex64::new(rest[i], 0.0) };
                let tvi = c * t_u[i] + t_rest[i];
                num += (tvi - lambda * vi).norm_sqr();
                den += vi.norm_sqr();
            }
            worst = worst.max((num / den).sqrt());
            checked += 1;
        }
    }
    let case_i = if checked == 0 {
        CaseOutcome::Skipped("A2 P^-1 A2^T has no positive eigenvalues".into())
    } else {
        CaseOutcome::Checked {
            vectors: checked,
            max_defect: worst,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED ^ 0x2);
    let unit_defect = |v: &[f64]| -> f64 {
        let tv = t_apply(v);
        let diff: Vec<f64> = tv.iter().zip(v).map(|(a, b)| a - b).collect();
        norm2(&diff) / norm2(v)
    };

    let alpha_is_one = (alpha - 1.0).abs() <= f64::EPSILON;
    let case_ii = if alpha_is_one {
        let mut max_defect: f64 = 0.0;
        let trials = 5;
        for _ in 0..trials {
            let mut v: Vec<f64> = (0..n + q).map(|_| rng.random_range(-1.0..1.0)).collect();
            v.extend(std::iter::repeat_n(0.0, n));
            max_defect = max_defect.max(unit_defect(&v));
        }
        CaseOutcome::Checked {
            vectors: trials,
            max_defect,
        }
    } else {
        CaseOutcome::NotApplicable
    };

    let case_iii = if alpha_is_one {
        CaseOutcome::NotApplicable
    } else {
        let kernel = null_space(a2);
        if kernel.is_empty() {
            CaseOutcome::Skipped(Error::NullSpaceEmpty.to_string())
        } else {
            let mut max_defect: f64 = 0.0;
            for x in &kernel {
                let y: Vec<f64> = (0..q).map(|_| rng.random_range(-1.0..1.0)).collect();
                let v = [x.as_slice(), &y, &vec![0.0; n]].concat();
                max_defect = max_defect.max(unit_defect(&v));
            }
            CaseOutcome::Checked {
                vectors: kernel.len(),
                max_defect,
            }
        }
    };

    Ok(EigenpairReport {
        alpha,
        case_i,
        case_ii,
        case_iii,
    })
}

/// Orthonormal basis of N(A) from a dense SVD (test-scale matrices only).
pub fn null_space(a: &crate::sparse::SparseMatrix) -> Vec<Vec<f64>> {
    let n = a.ncols();
    let rows = a.nrows().max(n);
    // zero-pad to at least n rows so the SVD returns a full right basis
    let mut dense = DMatrix::<f64>::zeros(rows, n);
    for (i, j, v) in a.to_triplets() {
        dense[(i, j)] = v;
    }
    let svd = SVD::new(dense, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    let tol = rows as f64 * f64::EPSILON * smax.max(f64::MIN_POSITIVE);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(k, _)| v_t.row(k).iter().copied().collect())
        .collect()
}
