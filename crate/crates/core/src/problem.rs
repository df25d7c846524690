//! The partitioned ILS problem and its augmented block formulations.

use crate::error::{Error, Result};
use crate::krylov::LinearOperator;
use crate::sparse::vector::{axpy, norm2, sub};
use crate::sparse::{cholesky_factor, CholeskyFactor, SparseMatrix};

/// ILS data `A = [A1; A2]`, `b = [b1; b2]` with signature `J = diag(I_p, -I_q)`.
///
/// Construction caches `P = A1ᵀA1` and its Cholesky factor; a failed
/// factorization means `A1` does not have full column rank.
#[derive(Debug, Clone)]
pub struct IlsProblem {
    a1: SparseMatrix,
    a2: SparseMatrix,
    b1: Vec<f64>,
    b2: Vec<f64>,
    p: SparseMatrix,
    p_factor: CholeskyFactor,
    b1_hat: Vec<f64>,
}

impl IlsProblem {
    pub fn new(a1: SparseMatrix, a2: SparseMatrix, b1: Vec<f64>, b2: Vec<f64>) -> Result<Self> {
        let n = a1.ncols();
        if a2.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "A2 columns",
                expected: n,
                found: a2.ncols(),
            });
        }
        if b1.len() != a1.nrows() {
            return Err(Error::DimensionMismatch {
                context: "b1 length",
                expected: a1.nrows(),
                found: b1.len(),
            });
        }
        if b2.len() != a2.nrows() {
            return Err(Error::DimensionMismatch {
                context: "b2 length",
                expected: a2.nrows(),
                found: b2.len(),
            });
        }
        if let Some(v) = b1.iter().chain(&b2).find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("right-hand side entry {v} is not finite")));
        }
        if a1.nrows() < n || n == 0 {
            return Err(Error::RankDeficientA1);
        }
        let p = a1.gram();
        let p_factor = cholesky_factor(&p).map_err(|e| match e {
            Error::NotPositiveDefinite { .. } => Error::RankDeficientA1,
            other => other,
        })?;
        let b1_hat = a1.matvec_transpose(&b1)?;
        Ok(Self {
            a1,
            a2,
            b1,
            b2,
            p,
            p_factor,
            b1_hat,
        })
    }

    pub fn a1(&self) -> &SparseMatrix {
        &self.a1
    }

    pub fn a2(&self) -> &SparseMatrix {
        &self.a2
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    /// `P = A1ᵀA1`.
    pub fn gram_a1(&self) -> &SparseMatrix {
        &self.p
    }

    pub fn gram_a1_factor(&self) -> &CholeskyFactor {
        &self.p_factor
    }

    /// `A1ᵀb1`.
    pub fn b1_hat(&self) -> &[f64] {
        &self.b1_hat
    }

    /// Rows of `A1` (p).
    pub fn p_rows(&self) -> usize {
        self.a1.nrows()
    }

    /// Rows of `A2` (q).
    pub fn q_rows(&self) -> usize {
        self.a2.nrows()
    }

    /// Columns of `A` (n).
    pub fn n_cols(&self) -> usize {
        self.a1.ncols()
    }

    /// `m = p + q`.
    pub fn m_rows(&self) -> usize {
        self.p_rows() + self.q_rows()
    }

    /// Hessian `H = AᵀJA = A1ᵀA1 − A2ᵀA2`.
    pub fn hessian(&self) -> SparseMatrix {
        self.p
            .linear_combination(1.0, &self.a2.gram(), -1.0)
            .expect("both Gram matrices are n x n")
    }

    pub fn hessian_is_spd(&self) -> bool {
        cholesky_factor(&self.hessian()).is_ok()
    }

    /// Solves the normal equations `Hx = A1ᵀb1 − A2ᵀb2` directly.
    pub fn reference_solution(&self) -> Result<Vec<f64>> {
        let h = self.hessian();
        let factor = cholesky_factor(&h).map_err(|e| match e {
            Error::NotPositiveDefinite { .. } => Error::HessianNotSpd,
            other => other,
        })?;
        let mut rhs = self.b1_hat.clone();
        axpy(-1.0, &self.a2.matvec_transpose(&self.b2)?, &mut rhs);
        let mut x = factor.solve(&rhs)?;
        // one refinement step
        let r = sub(&rhs, &h.matvec(&x)?);
        let dx = factor.solve(&r)?;
        axpy(1.0, &dx, &mut x);
        Ok(x)
    }

    /// Full solution of the augmented system of the given kind.
    pub fn augmented_reference(&self, kind: BlockKind) -> Result<Vec<f64>> {
        let x = self.reference_solution()?;
        let delta2 = sub(&self.b2, &self.a2.matvec(&x)?);
        Ok(match kind {
            BlockKind::Augmented6 => {
                let delta1_hat = self.a2.matvec_transpose(&delta2)?;
                [x, delta2, delta1_hat].concat()
            }
            BlockKind::XinMengB => {
                let delta1 = sub(&self.b1, &self.a1.matvec(&x)?);
                [delta1, x, delta2].concat()
            }
        })
    }

    pub fn operator(&self, kind: BlockKind) -> BlockOperator<'_> {
        BlockOperator { problem: self, kind }
    }
}

/// Which augmented formulation a vector or operator refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// Unknowns `(x; δ2; δ̂1)`, dimension `2n + q`:
    /// `[[P, 0, I], [A2, I, 0], [0, −A2ᵀ, I]]`.
    Augmented6,
    /// Unknowns `(δ1; x; δ2)`, dimension `p + n + q`:
    /// `[[I, A1, 0], [0, P, A2ᵀ], [0, A2, I]]`.
    XinMengB,
}

/// Matrix-free three-by-three block operator over an [`IlsProblem`].
#[derive(Debug, Clone, Copy)]
pub struct BlockOperator<'a> {
    problem: &'a IlsProblem,
    kind: BlockKind,
}

impl<'a> BlockOperator<'a> {
    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn problem(&self) -> &'a IlsProblem {
        self.problem
    }

    /// Sizes of the three blocks, in unknown order.
    pub fn block_sizes(&self) -> [usize; 3] {
        let pr = self.problem;
        match self.kind {
            BlockKind::Augmented6 => [pr.n_cols(), pr.q_rows(), pr.n_cols()],
            BlockKind::XinMengB => [pr.p_rows(), pr.n_cols(), pr.q_rows()],
        }
    }

    pub fn rhs(&self) -> Vec<f64> {
        let pr = self.problem;
        match self.kind {
            BlockKind::Augmented6 => [pr.b1_hat(), pr.b2(), &vec![0.0; pr.n_cols()]].concat(),
            BlockKind::XinMengB => [pr.b1(), pr.b1_hat(), pr.b2()].concat(),
        }
    }

    /// The `x` block of an augmented vector.
    pub fn x_block<'v>(&self, v: &'v [f64]) -> &'v [f64] {
        let n = self.problem.n_cols();
        match self.kind {
            BlockKind::Augmented6 => &v[..n],
            BlockKind::XinMengB => {
                let p = self.problem.p_rows();
                &v[p..p + n]
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "block operator",
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        Ok(y)
    }
}

pub(crate) fn split_blocks(v: &[f64], sizes: [usize; 3]) -> (&[f64], &[f64], &[f64]) {
    let (a, rest) = v.split_at(sizes[0]);
    let (b, c) = rest.split_at(sizes[1]);
    (a, b, c)
}

pub(crate) fn split_blocks_mut(v: &mut [f64], sizes: [usize; 3]) -> (&mut [f64], &mut [f64], &mut [f64]) {
    let (a, rest) = v.split_at_mut(sizes[0]);
    let (b, c) = rest.split_at_mut(sizes[1]);
    (a, b, c)
}

impl LinearOperator for BlockOperator<'_> {
    fn dim(&self) -> usize {
        self.block_sizes().iter().sum()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let pr = self.problem;
        let sizes = self.block_sizes();
        let (v1, v2, v3) = split_blocks(v, sizes);
        let (o1, o2, o3) = split_blocks_mut(out, sizes);
        match self.kind {
            BlockKind::Augmented6 => {
                // (P x + δ̂1; A2 x + δ2; −A2ᵀ δ2 + δ̂1)
                pr.p.matvec_into(v1, o1);
                axpy(1.0, v3, o1);
                pr.a2.matvec_into(v1, o2);
                axpy(1.0, v2, o2);
                pr.a2.matvec_transpose_into(v2, o3);
                o3.iter_mut().zip(v3).for_each(|(o, d)| *o = d - *o);
            }
            BlockKind::XinMengB => {
                // (δ1 + A1 x; P x + A2ᵀ δ2; A2 x + δ2)
                pr.a1.matvec_into(v2, o1);
                axpy(1.0, v1, o1);
                pr.p.matvec_into(v2, o2);
                let mut t = vec![0.0; o2.len()];
                pr.a2.matvec_transpose_into(v3, &mut t);
                axpy(1.0, &t, o2);
                pr.a2.matvec_into(v2, o3);
                axpy(1.0, v3, o3);
            }
        }
    }
}

/// ‖rhs − 𝒜x‖ / ‖rhs‖ with the zero initial guess convention `r0 = rhs`.
/// For a zero right-hand side the absolute residual is returned.
pub fn rel_residual(op: &dyn LinearOperator, rhs: &[f64], x: &[f64]) -> f64 {
    let mut ax = vec![0.0; op.dim()];
    op.apply(x, &mut ax);
    let r = norm2(&sub(rhs, &ax));
    let r0 = norm2(rhs);
    if r0 == 0.0 {
        r
    } else {
        r / r0
    }
}

/// ‖x − x_ref‖ / ‖x_ref‖.
pub fn rel_error(x: &[f64], x_ref: &[f64]) -> Result<f64> {
    if x.len() != x_ref.len() {
        return Err(Error::DimensionMismatch {
            context: "rel_error",
            expected: x_ref.len(),
            found: x.len(),
        });
    }
    let denom = norm2(x_ref);
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(norm2(&sub(x, x_ref)) / denom)
}
