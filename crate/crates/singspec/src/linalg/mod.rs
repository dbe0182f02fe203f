//! Sparse symmetric matrices and the direct/iterative solvers used by the
//! capacity and spectrum modules.

mod cg;
mod ldl;

pub use cg::{cg_solve, CgOutcome};
pub use ldl::LdlFactor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero or near-zero pivot at column {col} (value {value:.3e})")]
    ZeroPivot { col: usize, value: f64 },
    #[error("conjugate gradient failed to reach tolerance {tol:.3e} in {iters} iterations (residual {residual:.3e})")]
    CgStalled { tol: f64, iters: usize, residual: f64 },
    #[error("matrix entry is not finite at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Triplet accumulator for assembly. Duplicate entries are summed on
/// compression, in a deterministic order independent of insertion order.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, value));
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Compress into CSR. Duplicates are summed in insertion order so that
    /// repeated assembly of the same mesh is bit-reproducible.
    pub fn to_csr(&self) -> CsrMatrix {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in &self.entries {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut order = vec![0usize; self.entries.len()];
        let mut next = counts.clone();
        for (k, &(r, _, _)) in self.entries.iter().enumerate() {
            order[next[r]] = k;
            next[r] += 1;
        }
        // Per row: stable sort by column, then sum runs (insertion order kept
        // within a run by the stable sort).
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut row_buf: Vec<(usize, usize)> = Vec::new();
        for r in 0..n {
            row_buf.clear();
            for &k in &order[counts[r]..counts[r + 1]] {
                row_buf.push((self.entries[k].1, k));
            }
            row_buf.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < row_buf.len() {
                let col = row_buf[i].0;
                let mut sum = 0.0;
                while i < row_buf.len() && row_buf[i].0 == col {
                    sum += self.entries[row_buf[i].1].2;
                    i += 1;
                }
                indices.push(col);
                data.push(sum);
            }
            indptr[r + 1] = indices.len();
        }
        CsrMatrix { n, indptr, indices, data }
    }
}

/// Compressed sparse row matrix. Symmetric matrices store both triangles so
/// that matrix-vector products need no transpose pass.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        CsrMatrix {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: diag.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        (&self.indices[lo..hi], &self.data[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn entry_sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn check_finite(&self) -> Result<(), LinalgError> {
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "mul_vec dimension mismatch");
        let mut y = vec![0.0; self.n];
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// x' A y
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        dot(x, &ay)
    }

    /// self + scale * other, identical sparsity union.
    pub fn add_scaled(&self, other: &CsrMatrix, scale: f64) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let mut t = Triplets::new(self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                t.push(r, c, v);
            }
            let (cols, vals) = other.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                t.push(r, c, scale * v);
            }
        }
        t.to_csr()
    }

    /// Extract the principal submatrix on `keep` (indices strictly
    /// increasing). Returned matrix is indexed by position in `keep`.
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let mut t = Triplets::new(keep.len());
        for (rk, &r) in keep.iter().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if pos[c] != usize::MAX {
                    t.push(rk, pos[c], v);
                }
            }
        }
        t.to_csr()
    }

    /// Rows `keep` by columns `cols` rectangular block, as a dense
    /// column-major action closure substitute: returns b = A[keep, cols] * x.
    pub fn block_mul(&self, keep: &[usize], cols: &[usize], x: &[f64]) -> Vec<f64> {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in cols.iter().enumerate() {
            pos[i] = k;
        }
        let mut y = vec![0.0; keep.len()];
        for (rk, &r) in keep.iter().enumerate() {
            let (cs, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cs.iter().zip(vals) {
                if pos[c] != usize::MAX {
                    acc += v * x[pos[c]];
                }
            }
            y[rk] = acc;
        }
        y
    }

    /// Symmetric permutation B = P A P', where `perm[new] = old`.
    pub fn permute_sym(&self, perm: &[usize]) -> CsrMatrix {
        let n = self.n;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut t = Triplets::new(n);
        for r in 0..n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                t.push(inv[r], inv[c], v);
            }
        }
        t.to_csr()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Symmetry defect: max |A_ij - A_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Reverse Cuthill-McKee ordering; returns perm with `perm[new] = old`.
/// Deterministic: ties broken by vertex index.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).0.iter().copied().filter(|&u| !visited[u]).collect();
            nbrs.sort_by_key(|&u| (degree[u], u));
            for u in nbrs {
                if !visited[u] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Triplets::new(n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
            }
        }
        t.to_csr()
    }

    #[test]
    fn triplets_sum_duplicates() {
        let mut t = Triplets::new(2);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.5);
        t.push(1, 0, -1.0);
        let a = t.to_csr();
        assert_eq!(a.get(0, 0), 3.5);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn matvec_and_bilinear() {
        let a = laplacian_1d(4);
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let y = a.mul_vec(&x);
        assert_eq!(y, vec![0.0, 0.0, 0.0, 5.0]);
        assert!((a.bilinear(&x, &x) - 13.0).abs() < 1e-14);
    }

    #[test]
    fn submatrix_extracts_block() {
        let a = laplacian_1d(5);
        let s = a.submatrix(&[1, 2, 3]);
        assert_eq!(s.n(), 3);
        assert_eq!(s.get(0, 0), 2.0);
        assert_eq!(s.get(0, 1), -1.0);
        assert_eq!(s.get(0, 2), 0.0);
    }

    #[test]
    fn permutation_conjugates() {
        let a = laplacian_1d(4);
        let perm = vec![3, 1, 0, 2];
        let b = a.permute_sym(&perm);
        for new_r in 0..4 {
            for new_c in 0..4 {
                assert_eq!(b.get(new_r, new_c), a.get(perm[new_r], perm[new_c]));
            }
        }
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(10);
        let p = reverse_cuthill_mckee(&a);
        let mut seen = vec![false; 10];
        for &i in &p {
            assert!(!seen[i]);
            seen[i] = true;
        }
    }
}
