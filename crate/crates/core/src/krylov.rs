//! Left-preconditioned GMRES, restarted or full.
//!
//! Arnoldi runs on `M⁻¹𝒜` with modified Gram-Schmidt and the small
//! least-squares problem is kept triangular with Givens rotations.
//! Convergence is declared on the true, unpreconditioned residual
//! `‖b − 𝒜x_k‖ / ‖b‖` (zero initial guess). Iterations count Arnoldi steps
//! summed over restart cycles.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::report::{SolveReport, Termination};
use crate::sparse::vector::{axpy, dot, norm2, scale};
use crate::sparse::SparseMatrix;

/// A square linear map applied matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `out = A v`; both slices have length [`dim`](Self::dim).
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

/// Action of `M⁻¹` for a preconditioner `M`.
pub trait Preconditioner {
    fn dim(&self) -> usize;
    /// `out = M⁻¹ w`.
    fn apply(&self, w: &[f64], out: &mut [f64]);
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        assert!(self.is_square(), "linear operator must be square");
        self.nrows()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.matvec_into(v, out);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        (**self).apply(v, out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresConfig {
    /// Restart length; `None` runs full GMRES.
    pub restart: Option<usize>,
    pub tol: f64,
    /// Budget of Arnoldi steps summed over all cycles.
    pub maxit: usize,
    /// Check the true residual after every step. When off, it is checked at
    /// cycle ends only (one fewer matvec and basis combination per step).
    pub track_true_residual: bool,
    /// Record per-cycle Arnoldi diagnostics in the outcome.
    pub diagnostics: bool,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            restart: None,
            tol: 1e-11,
            maxit: 1000,
            track_true_residual: true,
            diagnostics: false,
        }
    }
}

impl GmresConfig {
    pub fn restarted(restart: usize) -> Self {
        Self {
            restart: Some(restart),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.restart == Some(0) {
            return Err(Error::InvalidArgument("GMRES restart must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("GMRES tolerance must be positive, got {}", self.tol)));
        }
        if self.maxit == 0 {
            return Err(Error::InvalidArgument("GMRES maxit must be at least 1".into()));
        }
        Ok(())
    }
}

/// Arnoldi data of one restart cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleDiagnostics {
    pub steps: usize,
    /// ‖M⁻¹r‖ at the start of the cycle.
    pub initial_prec_residual: f64,
    /// Givens estimate of the preconditioned residual norm after each step.
    pub givens_estimates: Vec<f64>,
    /// ‖M⁻¹(b − 𝒜x)‖ recomputed explicitly at the end of the cycle.
    pub explicit_prec_residual: f64,
    /// max |⟨v_i, v_j⟩ − δ_ij| over the `steps` basis vectors that span the
    /// cycle's Krylov space. The trailing Arnoldi vector is left out: it never
    /// enters the iterate and is rounding noise once the cycle has converged.
    pub orthonormality_defect: f64,
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub report: SolveReport,
    pub solution: Vec<f64>,
    pub cycles: Vec<CycleDiagnostics>,
}

const REORTH_RATIO: f64 = std::f64::consts::FRAC_1_SQRT_2;

struct Identity(usize);

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        out.copy_from_slice(w);
    }
}

pub fn gmres(
    op: &dyn LinearOperator,
    prec: Option<&dyn Preconditioner>,
    rhs: &[f64],
    config: &GmresConfig,
) -> Result<GmresOutcome> {
    config.validate()?;
    let started = Instant::now();
    let dim = op.dim();
    if rhs.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "gmres rhs",
            expected: dim,
            found: rhs.len(),
        });
    }
    let identity = Identity(dim);
    let prec: &dyn Preconditioner = prec.unwrap_or(&identity);
    if prec.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "gmres preconditioner",
            expected: dim,
            found: prec.dim(),
        });
    }

    let mut x = vec![0.0; dim];
    let rhs_norm = norm2(rhs);
    let mut cycles = Vec::new();
    if rhs_norm == 0.0 {
        let report = SolveReport::new(Termination::Converged, 0, vec![0.0], started.elapsed().as_secs_f64());
        return Ok(GmresOutcome {
            report,
            solution: x,
            cycles,
        });
    }

    let mut history = vec![1.0];
    let mut total = 0usize;
    let mut ax = vec![0.0; dim];
    let mut r = vec![0.0; dim];
    let mut w = vec![0.0; dim];

    let true_rel = |x: &[f64], ax: &mut [f64]| -> f64 {
        op.apply(x, ax);
        let r: Vec<f64> = rhs.iter().zip(ax.iter()).map(|(b, a)| b - a).collect();
        norm2(&r) / rhs_norm
    };

    let mut prec_rhs = vec![0.0; dim];
    prec.apply(rhs, &mut prec_rhs);
    let breakdown_tol = 1e-14 * norm2(&prec_rhs);

    let termination = 'outer: loop {
        // r = M⁻¹(b − 𝒜x)
        op.apply(&x, &mut ax);
        for i in 0..dim {
            w[i] = rhs[i] - ax[i];
        }
        prec.apply(&w, &mut r);
        let beta = norm2(&r);
        if beta == 0.0 {
            // M⁻¹r = 0 with a nonsingular M means x is exact
            let rel = *history.last().unwrap();
            break if rel <= config.tol { Termination::Converged } else { Termination::MaxIterations };
        }

        let m = config.restart.unwrap_or(config.maxit).min(config.maxit - total).max(1);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut v0 = r.clone();
        scale(1.0 / beta, &mut v0);
        basis.push(v0);
        // upper-triangular factor of the Hessenberg matrix, column-wise
        let mut rcols: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![beta];
        let mut estimates = Vec::new();
        let mut broke_down = false;
        let mut cycle_converged = false;

        for j in 0..m {
            op.apply(&basis[j], &mut ax);
            prec.apply(&ax, &mut w);
            let mut h = vec![0.0; j + 2];
            let before = norm2(&w);
            for (i, vi) in basis.iter().enumerate() {
                h[i] = dot(&w, vi);
                axpy(-h[i], vi, &mut w);
            }
            let mut subdiag = norm2(&w);
            // second pass when cancellation was severe (DGKS criterion)
            if subdiag < REORTH_RATIO * before {
                for (i, vi) in basis.iter().enumerate() {
                    let c = dot(&w, vi);
                    h[i] += c;
                    axpy(-c, vi, &mut w);
                }
                subdiag = norm2(&w);
            }
            h[j + 1] = subdiag;

            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let denom = h[j].hypot(h[j + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[j] / denom, h[j + 1] / denom) };
            h[j] = denom;
            h.truncate(j + 1);
            cs.push(c);
            sn.push(s);
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            rcols.push(h);
            estimates.push(g[j + 1].abs());
            total += 1;

            broke_down = subdiag <= breakdown_tol;
            if !broke_down {
                let mut v = w.clone();
                scale(1.0 / subdiag, &mut v);
                basis.push(v);
            }

            let last_step = broke_down || j + 1 == m || total >= config.maxit;
            if config.track_true_residual || last_step {
                let xt = combine(&x, &basis, &rcols, &g);
                let rel = true_rel(&xt, &mut ax);
                history.push(rel);
                if rel <= config.tol {
                    x = xt;
                    cycle_converged = true;
                    break;
                }
                if last_step {
                    x = xt;
                    break;
                }
            }
        }

        if config.diagnostics {
            op.apply(&x, &mut ax);
            let res: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            prec.apply(&res, &mut w);
            cycles.push(CycleDiagnostics {
                steps: rcols.len(),
                initial_prec_residual: beta,
                givens_estimates: estimates,
                explicit_prec_residual: norm2(&w),
                orthonormality_defect: orthonormality_defect(&basis[..rcols.len()]),
            });
        }

        if cycle_converged {
            break 'outer if broke_down { Termination::HappyBreakdown } else { Termination::Converged };
        }
        if total >= config.maxit {
            break 'outer Termination::MaxIterations;
        }
    };

    let report = SolveReport::new(termination, total, history, started.elapsed().as_secs_f64());
    Ok(GmresOutcome {
        report,
        solution: x,
        cycles,
    })
}

/// Full GMRES: [`gmres`] with no restart.
pub fn gmres_full(
    op: &dyn LinearOperator,
    prec: Option<&dyn Preconditioner>,
    rhs: &[f64],
    config: &GmresConfig,
) -> Result<GmresOutcome> {
    let config = GmresConfig {
        restart: None,
        ..config.clone()
    };
    gmres(op, prec, rhs, &config)
}

/// x + V y where R y = g[..k] is the current triangular least-squares system.
fn combine(x: &[f64], basis: &[Vec<f64>], rcols: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    let k = rcols.len();
    let mut y = g[..k].to_vec();
    for i in (0..k).rev() {
        let rii = rcols[i][i];
        let yi = if rii == 0.0 { 0.0 } else { y[i] / rii };
        y[i] = yi;
        for (yl, &r) in y[..i].iter_mut().zip(&rcols[i][..i]) {
            *yl -= r * yi;
        }
    }
    let mut out = x.to_vec();
    for (yi, v) in y.iter().zip(basis) {
        axpy(*yi, v, &mut out);
    }
    out
}

fn orthonormality_defect(basis: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..basis.len() {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(&basis[i], &basis[j]) - target).abs());
        }
    }
    worst
}
