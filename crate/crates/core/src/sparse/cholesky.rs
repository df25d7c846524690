//! Cholesky factorization S = Πᵀ L Lᵀ Π.
//!
//! Small matrices are stored as a packed dense lower triangle. Larger ones
//! are reordered with reverse Cuthill-McKee and factored row by row inside
//! their envelope (skyline storage), which keeps fill bounded by the profile
//! of the reordered matrix.

use std::collections::VecDeque;

use super::csr::SparseMatrix;
use crate::error::{Error, Result};

/// Matrices of order up to this size use dense storage.
pub const DENSE_THRESHOLD: usize = 2048;

/// Relative pivot tolerance: a pivot at or below `PIVOT_TOL * max(diag)`
/// is reported as loss of positive definiteness.
pub const PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    /// `perm[k]` is the original index placed at position `k`.
    perm: Vec<usize>,
    /// First stored column of each row of L.
    first: Vec<usize>,
    /// Offset of `L[i][first[i]]` in `vals`; `start[n]` is the total length.
    start: Vec<usize>,
    vals: Vec<f64>,
    dense: bool,
}

pub fn cholesky_factor(s: &SparseMatrix) -> Result<CholeskyFactor> {
    cholesky_factor_with_threshold(s, DENSE_THRESHOLD)
}

/// Like [`cholesky_factor`] with an explicit dense/envelope switch point.
pub fn cholesky_factor_with_threshold(s: &SparseMatrix, dense_threshold: usize) -> Result<CholeskyFactor> {
    if !s.is_square() {
        return Err(Error::NonSquare {
            nrows: s.nrows(),
            ncols: s.ncols(),
        });
    }
    let n = s.nrows();
    let dense = n <= dense_threshold;
    let perm: Vec<usize> = if dense { (0..n).collect() } else { reverse_cuthill_mckee(s) };
    let mut inv = vec![0usize; n];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }

    // lower triangle of the permuted matrix, row by row
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        let (cols, vals) = s.row(i);
        let pi = inv[i];
        for (&j, &v) in cols.iter().zip(vals) {
            let pj = inv[j];
            if pj <= pi {
                rows[pi].push((pj, v));
            }
        }
    }

    let first: Vec<usize> = if dense {
        vec![0; n]
    } else {
        rows.iter()
            .enumerate()
            .map(|(i, r)| r.iter().map(|&(j, _)| j).min().unwrap_or(i).min(i))
            .collect()
    };
    let mut start = Vec::with_capacity(n + 1);
    start.push(0);
    for i in 0..n {
        start.push(start[i] + (i - first[i] + 1));
    }
    let mut vals = vec![0.0; start[n]];
    for (i, r) in rows.iter().enumerate() {
        for &(j, v) in r {
            vals[start[i] + (j - first[i])] += v;
        }
    }

    let max_diag = (0..n)
        .map(|i| vals[start[i] + (i - first[i])])
        .fold(0.0_f64, f64::max);
    let tol = PIVOT_TOL * max_diag;

    for i in 0..n {
        let fi = first[i];
        for j in fi..i {
            let fj = first[j];
            let lo = fi.max(fj);
            let (head, tail) = vals.split_at_mut(start[i]);
            let row_j = &head[start[j]..start[j + 1]];
            let row_i = &mut tail[..start[i + 1] - start[i]];
            let s: f64 = (lo..j)
                .map(|k| row_i[k - fi] * row_j[k - fj])
                .sum();
            let ljj = row_j[j - fj];
            row_i[j - fi] = (row_i[j - fi] - s) / ljj;
        }
        let row_i = &mut vals[start[i]..start[i + 1]];
        let d = row_i[i - fi] - row_i[..i - fi].iter().map(|v| v * v).sum::<f64>();
        if !d.is_finite() || d <= tol {
            return Err(Error::NotPositiveDefinite {
                column: perm[i],
                pivot: d,
            });
        }
        row_i[i - fi] = d.sqrt();
    }

    Ok(CholeskyFactor {
        n,
        perm,
        first,
        start,
        vals,
        dense,
    })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        self.dense
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Number of stored entries of L (envelope size).
    pub fn stored_entries(&self) -> usize {
        self.vals.len()
    }

    /// L in the permuted ordering.
    pub fn lower(&self) -> SparseMatrix {
        let mut t = Vec::with_capacity(self.vals.len());
        for i in 0..self.n {
            for j in self.first[i]..=i {
                t.push((i, j, self.vals[self.start[i] + j - self.first[i]]));
            }
        }
        SparseMatrix::from_triplets(self.n, self.n, &t).expect("indices within bounds")
    }

    pub fn solve(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check(w.len())?;
        let mut z = self.forward_unchecked(w);
        self.backward_in_place(&mut z);
        Ok(z)
    }

    /// S⁻¹ w, dimensions checked in debug builds only.
    pub fn solve_into(&self, w: &[f64], out: &mut [f64]) {
        debug_assert_eq!(w.len(), self.n);
        let z = {
            let mut z = self.forward_unchecked(w);
            self.backward_in_place(&mut z);
            z
        };
        out.copy_from_slice(&z);
    }

    /// L⁻¹ Π w.
    pub fn forward(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check(w.len())?;
        Ok(self.forward_unchecked(w))
    }

    /// Πᵀ L⁻ᵀ v. Composing with [`forward`](Self::forward) gives S⁻¹.
    pub fn backward(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check(v.len())?;
        let mut y = v.to_vec();
        self.backward_in_place(&mut y);
        Ok(y)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                context: "cholesky solve",
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }

    fn forward_unchecked(&self, w: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.perm.iter().map(|&p| w[p]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        y
    }

    /// Solves Lᵀ x = y in place, then un-permutes.
    fn backward_in_place(&self, y: &mut [f64]) {
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in (fi..i).zip(row) {
                y[k] -= l * yi;
            }
        }
        let tmp = y.to_vec();
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = tmp[k];
        }
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `s`.
pub fn reverse_cuthill_mckee(s: &SparseMatrix) -> Vec<usize> {
    let n = s.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in s.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| degree[i]);

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let root = pseudo_peripheral(seed, &adj, &degree);
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| degree[u]);
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut root = seed;
    let mut depth = 0;
    for _ in 0..8 {
        let levels = bfs_levels(root, adj);
        let max_level = *levels.iter().flatten().max().unwrap_or(&0);
        if max_level <= depth && depth > 0 {
            break;
        }
        depth = max_level;
        let candidate = levels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(max_level))
            .min_by_key(|(i, _)| degree[*i])
            .map(|(i, _)| i)
            .unwrap_or(root);
        if candidate == root {
            break;
        }
        root = candidate;
    }
    root
}

fn bfs_levels(root: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let lv = level[v].unwrap();
        for &u in &adj[v] {
            if level[u].is_none() {
                level[u] = Some(lv + 1);
                queue.push_back(u);
            }
        }
    }
    level
}
