//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Columns are eliminated in a fill-reducing order (approximate minimum
//! degree on the pattern of `A + A^T`). Each column is obtained by a sparse
//! triangular solve against the partially built `L`, whose nonzero pattern
//! is found by depth-first search. Row pivoting prefers the diagonal entry
//! while it stays within [`DIAGONAL_PREFERENCE`] of the column maximum.
//!
//! The ordering depends only on the sparsity pattern, so one [`LuSymbolic`]
//! is reused for every matrix sharing that pattern.

use super::SparseMatrix;
use crate::{Error, Result};

/// A pivot smaller than this times `||A||_inf` is treated as zero.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Relative size the diagonal must keep to be chosen over the column maximum.
pub const DIAGONAL_PREFERENCE: f64 = 0.001;

const NONE: usize = usize::MAX;

/// Fill-reducing column order for one sparsity pattern.
#[derive(Debug, Clone)]
pub struct LuSymbolic {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    order: Vec<usize>,
}

impl LuSymbolic {
    pub fn analyze(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("LU needs a square matrix, got {}x{}", n, a.ncols())));
        }
        let order = if n == 0 {
            Vec::new()
        } else {
            let (perm, _, _) = amd::order::<usize>(n, a.row_ptr(), a.col_idx(), &amd::Control::default())
                .map_err(|s| Error::Ordering(format!("{s:?}")))?;
            perm
        };
        Ok(Self { n, row_ptr: a.row_ptr().to_vec(), col_idx: a.col_idx().to_vec(), order })
    }

    /// Like [`analyze`](Self::analyze), but each column in `deferred` (typically
    /// those with a zero diagonal, such as pressure or multiplier unknowns) is
    /// moved to just after the last of its non-deferred neighbours in the
    /// fill-reducing order, so that by the time it is eliminated its diagonal
    /// has been filled in and threshold pivoting can keep it. Deferred columns
    /// without such neighbours go last.
    pub fn analyze_deferred(a: &SparseMatrix, deferred: &[usize]) -> Result<Self> {
        let mut sym = Self::analyze(a)?;
        let n = sym.n;
        let mut is_deferred = vec![false; n];
        for &d in deferred {
            if d >= n {
                return Err(Error::DimensionMismatch(format!("deferred column {d} out of range")));
            }
            is_deferred[d] = true;
        }
        let mut pos = vec![0usize; n];
        for (k, &c) in sym.order.iter().enumerate() {
            pos[c] = k;
        }
        let at = a.transpose();
        let key = |j: usize| -> usize {
            if !is_deferred[j] {
                return pos[j];
            }
            a.row(j).0.iter().chain(at.row(j).0).filter(|&&i| !is_deferred[i]).map(|&i| pos[i]).max().unwrap_or(n)
        };
        let keys: Vec<usize> = (0..n).map(key).collect();
        sym.order.sort_by_key(|&c| (keys[c], is_deferred[c], pos[c]));
        Ok(sym)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn matches(&self, a: &SparseMatrix) -> bool {
        a.nrows() == self.n && a.ncols() == self.n && a.row_ptr() == self.row_ptr && a.col_idx() == self.col_idx
    }

    /// Numeric factorization of a matrix with the analyzed pattern.
    pub fn factor(&self, a: &SparseMatrix) -> Result<LuFactors> {
        if !self.matches(a) {
            return Err(Error::DimensionMismatch("matrix pattern differs from the analyzed pattern".into()));
        }
        let n = self.n;
        // CSC view of A
        let at = a.transpose();
        let (cp, ci, cx) = (at.row_ptr(), at.col_idx(), at.values());
        let threshold = PIVOT_THRESHOLD * a.norm_inf();

        let mut l_ptr = vec![0usize; n + 1];
        let mut u_ptr = vec![0usize; n + 1];
        let guess = 4 * a.nnz() + n;
        let (mut l_idx, mut l_val) = (Vec::with_capacity(guess), Vec::with_capacity(guess));
        let (mut u_idx, mut u_val) = (Vec::with_capacity(guess), Vec::with_capacity(guess));
        let mut pinv = vec![NONE; n];
        let mut x = vec![0.0; n];
        let mut work = ReachWork::new(n);

        for k in 0..n {
            l_ptr[k] = l_idx.len();
            u_ptr[k] = u_idx.len();
            let col = self.order[k];

            let top = work.reach(&l_ptr, &l_idx, &ci[cp[col]..cp[col + 1]], &pinv);
            let pattern = &work.out[top..];

            // x = L \ A(:, col)
            for p in cp[col]..cp[col + 1] {
                x[ci[p]] = cx[p];
            }
            for &j in pattern {
                let jj = pinv[j];
                if jj == NONE {
                    continue;
                }
                let xj = x[j];
                for p in l_ptr[jj] + 1..l_ptr[jj + 1] {
                    x[l_idx[p]] -= l_val[p] * xj;
                }
            }

            let mut ipiv = NONE;
            let mut amax = -1.0;
            for &i in pattern {
                if pinv[i] == NONE {
                    let t = x[i].abs();
                    if t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    u_idx.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            if ipiv == NONE || amax.is_nan() || amax <= threshold {
                return Err(Error::SingularMatrix { index: col, pivot: amax.max(0.0) });
            }
            if pinv[col] == NONE && x[col].abs() >= DIAGONAL_PREFERENCE * amax {
                ipiv = col;
            }

            let pivot = x[ipiv];
            u_idx.push(k);
            u_val.push(pivot);
            pinv[ipiv] = k;
            l_idx.push(ipiv);
            l_val.push(1.0);
            for &i in pattern {
                if pinv[i] == NONE {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        l_ptr[n] = l_idx.len();
        u_ptr[n] = u_idx.len();
        for i in l_idx.iter_mut() {
            *i = pinv[*i];
        }

        Ok(LuFactors { n, order: self.order.clone(), pinv, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val })
    }
}

struct ReachWork {
    mark: Vec<bool>,
    stack: Vec<usize>,
    pstack: Vec<usize>,
    out: Vec<usize>,
}

impl ReachWork {
    fn new(n: usize) -> Self {
        Self { mark: vec![false; n], stack: vec![0; n], pstack: vec![0; n], out: vec![0; n] }
    }

    /// Nonzero pattern of `L \ b` in topological order, stored in
    /// `out[top..]`. Returns `top`.
    fn reach(&mut self, l_ptr: &[usize], l_idx: &[usize], b_rows: &[usize], pinv: &[usize]) -> usize {
        let n = self.out.len();
        let mut top = n;
        for &start in b_rows {
            if self.mark[start] {
                continue;
            }
            let mut head = 0usize;
            self.stack[0] = start;
            loop {
                let j = self.stack[head];
                let jj = pinv[j];
                if !self.mark[j] {
                    self.mark[j] = true;
                    self.pstack[head] = if jj == NONE { 0 } else { l_ptr[jj] };
                }
                let end = if jj == NONE { 0 } else { l_ptr[jj + 1] };
                let mut done = true;
                let mut p = self.pstack[head];
                while p < end {
                    let i = l_idx[p];
                    if !self.mark[i] {
                        self.pstack[head] = p;
                        head += 1;
                        self.stack[head] = i;
                        done = false;
                        break;
                    }
                    p += 1;
                }
                if done {
                    top -= 1;
                    self.out[top] = j;
                    if head == 0 {
                        break;
                    }
                    head -= 1;
                }
            }
        }
        for &i in &self.out[top..] {
            self.mark[i] = false;
        }
        top
    }
}

/// `P A Q = L U` with unit lower `L`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    order: Vec<usize>,
    pinv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` and `U` (including the diagonals).
    pub fn fill(&self) -> usize {
        self.l_idx.len() + self.u_idx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "rhs has wrong length");
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let yj = y[j];
            for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                y[self.l_idx[p]] -= self.l_val[p] * yj;
            }
        }
        for j in (0..self.n).rev() {
            let diag = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[diag];
            let yj = y[j];
            for p in self.u_ptr[j]..diag {
                y[self.u_idx[p]] -= self.u_val[p] * yj;
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &c) in self.order.iter().enumerate() {
            x[c] = y[k];
        }
        x
    }
}

/// Analyze and factor in one go.
pub fn lu_factor(a: &SparseMatrix) -> Result<LuFactors> {
    LuSymbolic::analyze(a)?.factor(a)
}

/// `||Ax - b|| / (||A|| ||x|| + ||b||)` in the infinity norm.
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r = a.matvec(x);
    let rn = r.iter().zip(b).map(|(ri, bi)| (ri - bi).abs()).fold(0.0, f64::max);
    let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let denom = a.norm_inf() * xn + bn;
    if denom == 0.0 {
        rn
    } else {
        rn / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, per_row: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            let mut rowsum = 0.0;
            for _ in 0..per_row {
                let j = rng.gen_range(0..n);
                let v: f64 = rng.gen_range(-1.0..1.0);
                rowsum += v.abs();
                t.push((i, j, v));
            }
            t.push((i, i, rowsum + 1.0));
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identity_solve() {
        let lu = lu_factor(&SparseMatrix::identity(5)).unwrap();
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        assert_eq!(lu.solve(&b), b.to_vec());
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let x = lu_factor(&a).unwrap().solve(&[3.0, 4.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_well_conditioned() {
        let a = random_sparse(50, 4, 7);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = lu_factor(&a).unwrap().solve(&b);
        let r = a.matvec(&x);
        let err = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err / bn <= 1e-12);
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        // saddle point [[1, 1], [1, 0]]
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0)]);
        let x = lu_factor(&a).unwrap().solve(&[3.0, 1.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = SparseMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0), (2, 2, 1.0)]);
        match lu_factor(&a) {
            Err(Error::SingularMatrix { index, .. }) => assert!(index < 2),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn symbolic_reuse_matches_fresh_factorization() {
        let a = random_sparse(80, 5, 11);
        let sym = LuSymbolic::analyze(&a).unwrap();
        let mut a2 = a.clone();
        a2.values_mut().iter_mut().enumerate().for_each(|(k, v)| *v *= 1.0 + 0.01 * (k % 7) as f64);
        let b: Vec<f64> = (0..80).map(|i| 1.0 + i as f64).collect();
        let reused = sym.factor(&a2).unwrap().solve(&b);
        let fresh = lu_factor(&a2).unwrap().solve(&b);
        for (p, q) in reused.iter().zip(&fresh) {
            assert!((p - q).abs() <= 1e-14 * q.abs().max(1.0));
        }
        assert!(sym.factor(&SparseMatrix::identity(80)).is_err());
    }

    #[test]
    fn deferred_saddle_point_keeps_fill_low() {
        // 2D Laplacian-like block with a sparse constraint block of zeros
        let m = 12;
        let nu = m * m;
        let nc = m * m / 4;
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                t.push((k, k, 4.0));
                for (di, dj) in [(1i64, 0i64), (0, 1), (-1, 0), (0, -1)] {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a >= 0 && b >= 0 && a < m as i64 && b < m as i64 {
                        t.push((k, a as usize * m + b as usize, -1.0));
                    }
                }
                let c = nu + (i / 2) * (m / 2) + j / 2;
                t.push((k, c, 1.0));
                t.push((c, k, 1.0));
            }
        }
        for c in nu..nu + nc {
            t.push((c, c, 0.0));
        }
        let a = SparseMatrix::from_triplets(nu + nc, nu + nc, &t);
        let deferred: Vec<usize> = (nu..nu + nc).collect();
        let sym = LuSymbolic::analyze_deferred(&a, &deferred).unwrap();
        let mut perm = sym.order().to_vec();
        perm.sort_unstable();
        assert_eq!(perm, (0..nu + nc).collect::<Vec<_>>());
        let b: Vec<f64> = (0..nu + nc).map(|i| (i as f64).sin()).collect();
        let f = sym.factor(&a).unwrap();
        assert!(relative_residual(&a, &f.solve(&b), &b) < 1e-14);
        let plain = lu_factor(&a).unwrap();
        assert!(f.fill() <= plain.fill());
    }

    #[test]
    fn residual_is_tiny_for_nonsymmetric_systems() {
        let mut a = random_sparse(300, 6, 3);
        // break symmetry of values and shrink some diagonals
        for (k, v) in a.values_mut().iter_mut().enumerate() {
            if k % 5 == 0 {
                *v *= 0.01;
            }
        }
        let b: Vec<f64> = (0..300).map(|i| ((i * i) as f64).cos()).collect();
        let x = lu_factor(&a).unwrap().solve(&b);
        assert!(relative_residual(&a, &x, &b) < 1e-14);
    }
}
