//! Up-looking sparse LDL' factorization with elimination tree and RCM
//! fill-reducing ordering. Handles SPD matrices and mildly indefinite
//! shifted pencils (no pivoting; a vanishing pivot is reported, callers
//! retry with a perturbed shift).

use super::{reverse_cuthill_mckee, CsrMatrix, LinalgError};

pub struct LdlFactor {
    n: usize,
    perm: Vec<usize>,     // perm[new] = old
    inv_perm: Vec<usize>, // inv_perm[old] = new
    // L strictly lower triangular, CSC by column, unit diagonal implied.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    l_val: Vec<f64>,
    d: Vec<f64>,
}

impl LdlFactor {
    /// Factor P A P' = L D L'. `a` must be structurally symmetric.
    pub fn new(a: &CsrMatrix) -> Result<Self, LinalgError> {
        let perm = reverse_cuthill_mckee(a);
        Self::with_permutation(a, perm)
    }

    pub fn with_permutation(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self, LinalgError> {
        let n = a.n();
        let ap = a.permute_sym(&perm);
        let mut inv_perm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        let pivot_floor = 1e-14 * ap.max_abs().max(f64::MIN_POSITIVE);

        // Elimination tree (parents have larger index than children).
        let mut parent = vec![usize::MAX; n];
        let mut ancestor = vec![usize::MAX; n];
        for k in 0..n {
            let (cols, _) = ap.row(k);
            for &c in cols {
                if c >= k {
                    continue;
                }
                let mut i = c;
                while ancestor[i] != usize::MAX && ancestor[i] != k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    i = next;
                }
                if ancestor[i] == usize::MAX {
                    ancestor[i] = k;
                    parent[i] = k;
                }
            }
        }

        // Symbolic pass: column counts of L (row k's pattern = etree walk
        // from each below-diagonal entry of row k).
        let mut col_counts = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];
        for k in 0..n {
            flag[k] = k;
            let (cols, _) = ap.row(k);
            for &c in cols {
                if c >= k {
                    continue;
                }
                let mut i = c;
                while flag[i] != k {
                    col_counts[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + col_counts[j];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut l_val = vec![0.0f64; nnz];
        let mut col_len = vec![0usize; n];
        let mut d = vec![0.0f64; n];

        // Numeric pass (up-looking; pattern processed in ascending order,
        // which is topological for the etree).
        let mut y = vec![0.0f64; n];
        let mut pattern = vec![0usize; n];
        for f in flag.iter_mut() {
            *f = usize::MAX;
        }
        for k in 0..n {
            flag[k] = k;
            let mut plen = 0usize;
            let mut dk = 0.0;
            let (cols, vals) = ap.row(k);
            for (&c, &v) in cols.iter().zip(vals) {
                if c < k {
                    y[c] += v;
                    let mut i = c;
                    while flag[i] != k {
                        pattern[plen] = i;
                        plen += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                } else if c == k {
                    dk = v;
                }
            }
            pattern[..plen].sort_unstable();
            for s in 0..plen {
                let i = pattern[s];
                let yi = y[i];
                y[i] = 0.0;
                let lki = yi / d[i];
                let lo = col_ptr[i];
                let hi = lo + col_len[i];
                for p in lo..hi {
                    y[row_idx[p]] -= l_val[p] * yi;
                }
                dk -= lki * yi;
                row_idx[hi] = k;
                l_val[hi] = lki;
                col_len[i] += 1;
            }
            if !dk.is_finite() || dk.abs() <= pivot_floor {
                return Err(LinalgError::ZeroPivot { col: k, value: dk });
            }
            d[k] = dk;
        }

        Ok(LdlFactor { n, perm, inv_perm, col_ptr, row_idx, l_val, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Number of negative pivots (= eigenvalues below the factorization
    /// shift, by Sylvester inertia).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = vec![0.0f64; self.n];
        for new in 0..self.n {
            x[new] = b[self.perm[new]];
        }
        for j in 0..self.n {
            let xj = x[j];
            if xj != 0.0 {
                for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                    x[self.row_idx[p]] -= self.l_val[p] * xj;
                }
            }
        }
        for j in 0..self.n {
            x[j] /= self.d[j];
        }
        for j in (0..self.n).rev() {
            let mut acc = x[j];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc -= self.l_val[p] * x[self.row_idx[p]];
            }
            x[j] = acc;
        }
        let mut out = vec![0.0f64; self.n];
        for new in 0..self.n {
            out[self.perm[new]] = x[new];
        }
        out
    }

    /// Solve with one step of iterative refinement against `a`.
    pub fn solve_refined(&self, a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
        let mut x = self.solve(b);
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
        let dx = self.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        x
    }
}
