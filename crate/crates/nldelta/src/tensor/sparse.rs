//! Minimal sparse matrices (sorted coordinate lists) used to build the
//! categorical interpretation of proofs, where intermediate maps such as
//! `1 ⊗ η ⊗ 1` are huge but almost empty.

use std::collections::HashMap;

use crate::Scalar;

/// Sparse `rows × cols` matrix; entries sorted by `(row, col)`, no zeros.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(usize, usize, T)>) -> Self {
        debug_assert!(entries.iter().all(|&(r, c, _)| r < rows && c < cols));
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        entries.retain(|&(_, _, v)| v != T::zero());
        SparseMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn identity(dim: usize) -> Self {
        SparseMatrix::new(dim, dim, (0..dim).map(|k| (k, k, T::one())).collect())
    }

    /// `η: R → V⊗V` as a `dim² × 1` column, ones on the diagonal positions.
    pub fn eta(dim: usize) -> Self {
        SparseMatrix::new(dim * dim, 1, (0..dim).map(|k| (k * dim + k, 0, T::one())).collect())
    }

    /// `ε: V⊗V → R` as a `1 × dim²` row.
    pub fn epsilon(dim: usize) -> Self {
        SparseMatrix::new(1, dim * dim, (0..dim).map(|k| (0, k * dim + k, T::one())).collect())
    }

    /// Frobenius multiplication `μ: V⊗V → V`, extracting the diagonal.
    pub fn mu(dim: usize) -> Self {
        SparseMatrix::new(dim, dim * dim, (0..dim).map(|k| (k, k * dim + k, T::one())).collect())
    }

    /// Constant column `R → V`, every entry `value`.
    pub fn column(dim: usize, value: T) -> Self {
        SparseMatrix::new(dim, 1, (0..dim).map(|k| (k, 0, value)).collect())
    }

    /// The symmetry `σ: X⊗Y → Y⊗X` for flat dimensions `dx`, `dy`.
    pub fn block_swap(dx: usize, dy: usize) -> Self {
        let mut entries = Vec::with_capacity(dx * dy);
        for i in 0..dx {
            for j in 0..dy {
                entries.push((j * dx + i, i * dy + j, T::one()));
            }
        }
        SparseMatrix::new(dx * dy, dx * dy, entries)
    }

    pub fn kron(&self, other: &SparseMatrix<T>) -> SparseMatrix<T> {
        let mut entries = Vec::with_capacity(self.entries.len() * other.entries.len());
        for &(r1, c1, v1) in &self.entries {
            for &(r2, c2, v2) in &other.entries {
                entries.push((r1 * other.rows + r2, c1 * other.cols + c2, v1 * v2));
            }
        }
        SparseMatrix::new(self.rows * other.rows, self.cols * other.cols, entries)
    }

    pub fn matmul(&self, other: &SparseMatrix<T>) -> SparseMatrix<T> {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        // Range of `other`'s entries per row; its entry list is sorted.
        let mut row_range: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut k = 0;
        while k < other.entries.len() {
            let row = other.entries[k].0;
            let start = k;
            while k < other.entries.len() && other.entries[k].0 == row {
                k += 1;
            }
            row_range.insert(row, (start, k));
        }
        // One output row at a time; `self.entries` is sorted by row, so the
        // result comes out sorted without a global pass.
        let mut entries: Vec<(usize, usize, T)> = Vec::new();
        let mut acc: HashMap<usize, T> = HashMap::new();
        let mut i = 0;
        while i < self.entries.len() {
            let r = self.entries[i].0;
            acc.clear();
            while i < self.entries.len() && self.entries[i].0 == r {
                let (_, mid, v) = self.entries[i];
                if let Some(&(start, end)) = row_range.get(&mid) {
                    for &(_, c, w) in &other.entries[start..end] {
                        *acc.entry(c).or_insert_with(T::zero) += v * w;
                    }
                }
                i += 1;
            }
            let row_start = entries.len();
            entries.extend(acc.iter().filter(|(_, &v)| v != T::zero()).map(|(&c, &v)| (r, c, v)));
            entries[row_start..].sort_unstable_by_key(|&(_, c, _)| c);
        }
        SparseMatrix { rows: self.rows, cols: other.cols, entries }
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut dense = vec![T::zero(); self.rows * self.cols];
        for &(r, c, v) in &self.entries {
            dense[r * self.cols + c] = v;
        }
        dense
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Dense oracles written with plain nested loops.
    fn dense_matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                for l in 0..k {
                    out[i * n + j] += a[i * k + l] * b[l * n + j];
                }
            }
        }
        out
    }

    fn dense_kron(a: &[f64], b: &[f64], (ra, ca): (usize, usize), (rb, cb): (usize, usize)) -> Vec<f64> {
        let mut out = vec![0.0; ra * rb * ca * cb];
        for i1 in 0..ra {
            for j1 in 0..ca {
                for i2 in 0..rb {
                    for j2 in 0..cb {
                        out[(i1 * rb + i2) * (ca * cb) + (j1 * cb + j2)] =
                            a[i1 * ca + j1] * b[i2 * cb + j2];
                    }
                }
            }
        }
        out
    }

    fn from_dense(rows: usize, cols: usize, data: &[f64]) -> SparseMatrix<f64> {
        let entries = data
            .iter()
            .enumerate()
            .map(|(k, &v)| (k / cols, k % cols, v))
            .collect();
        SparseMatrix::new(rows, cols, entries)
    }

    #[test]
    fn matmul_matches_dense_oracle() {
        let a = [1.0, 2.0, 0.0, -1.0, 3.0, 0.5];
        let b = [2.0, 0.0, 1.0, -1.0, 0.0, 4.0, 1.0, 1.0];
        let sa = from_dense(3, 2, &a);
        let sb = from_dense(2, 4, &b);
        assert_eq!(sa.matmul(&sb).to_dense(), dense_matmul(&a, &b, 3, 2, 4));
    }

    #[test]
    fn kron_matches_dense_oracle() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [0.0, 5.0, -1.0, 0.5, 2.0, 0.0];
        let sa = from_dense(2, 2, &a);
        let sb = from_dense(2, 3, &b);
        assert_eq!(
            sa.kron(&sb).to_dense(),
            dense_kron(&a, &b, (2, 2), (2, 3))
        );
    }

    #[test]
    fn eta_then_epsilon_traces_the_dimension() {
        for dim in 1..6 {
            let trace = SparseMatrix::<f64>::epsilon(dim).matmul(&SparseMatrix::eta(dim));
            assert_eq!(trace.to_dense(), vec![dim as f64]);
        }
    }

    #[test]
    fn snake_equation_holds() {
        // (ε ⊗ 1) · (1 ⊗ η) = 1 on V.
        for dim in 1..5 {
            let id = SparseMatrix::<f64>::identity(dim);
            let left = id.kron(&SparseMatrix::eta(dim));
            let right = SparseMatrix::<f64>::epsilon(dim).kron(&id);
            assert_eq!(right.matmul(&left).to_dense(), id.to_dense());
        }
    }

    #[test]
    fn block_swap_permutes_products() {
        let sigma = SparseMatrix::<f64>::block_swap(2, 3);
        // Basis vector (i=1, j=2) of X⊗Y maps to (j=2, i=1) of Y⊗X.
        let v = from_dense(6, 1, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let out = sigma.matmul(&v).to_dense();
        let mut expected = vec![0.0; 6];
        expected[2 * 2 + 1] = 1.0;
        assert_eq!(out, expected);
        // Involution.
        let sigma_back = SparseMatrix::<f64>::block_swap(3, 2);
        assert_eq!(
            sigma_back.matmul(&sigma).to_dense(),
            SparseMatrix::<f64>::identity(6).to_dense()
        );
    }

    #[test]
    fn mu_extracts_diagonals() {
        let m = SparseMatrix::<f64>::mu(2);
        let mat = from_dense(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.matmul(&mat).to_dense(), vec![1.0, 4.0]);
    }
}
