//! Small dense least squares via Householder QR with column pivoting.
//!
//! Columns are pivoted by largest remaining 2-norm, so the diagonal of `R`
//! is non-increasing in magnitude and the numerical rank can be read off
//! against a relative threshold. Minimum-norm solutions are obtained by
//! projecting the basic solution off an orthonormal nullspace basis.

use crate::error::{MourreError, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from equally long rows. `cols` is needed for the
    /// zero-row case.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(MourreError::InvalidInput(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// The matrix with column `j` removed.
    pub fn drop_column(&self, j: usize) -> Matrix {
        let mut out = Matrix::zeros(self.rows, self.cols - 1);
        for i in 0..self.rows {
            let mut c = 0;
            for k in 0..self.cols {
                if k != j {
                    out.set(i, c, self.get(i, k));
                    c += 1;
                }
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Householder reflector `I - β v vᵀ` acting on rows `k..m`.
#[derive(Debug, Clone)]
struct Reflector {
    k: usize,
    v: Vec<f64>,
    beta: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        let s = self.beta * dot(&self.v, &x[self.k..]);
        for (xi, vi) in x[self.k..].iter_mut().zip(&self.v) {
            *xi -= s * vi;
        }
    }
}

/// `A P = Q R` with column permutation `P`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    r: Matrix,
    reflectors: Vec<Reflector>,
    perm: Vec<usize>,
    rank: usize,
}

/// Factorizes `a`; the rank counts diagonal entries of `R` whose magnitude
/// exceeds `rel_tol` times the largest one.
pub fn pivoted_qr(a: &Matrix, rel_tol: f64) -> PivotedQr {
    let (m, n) = (a.rows, a.cols);
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors = Vec::new();
    let steps = m.min(n);
    for k in 0..steps {
        let col_norm = |r: &Matrix, j: usize| -> f64 {
            (k..m).map(|i| r.get(i, j).powi(2)).sum::<f64>()
        };
        let mut best = k;
        let mut best_norm = col_norm(&r, k);
        for j in k + 1..n {
            let v = col_norm(&r, j);
            if v > best_norm {
                best = j;
                best_norm = v;
            }
        }
        if best != k {
            for i in 0..m {
                let t = r.get(i, k);
                r.set(i, k, r.get(i, best));
                r.set(i, best, t);
            }
            perm.swap(k, best);
        }
        let x: Vec<f64> = (k..m).map(|i| r.get(i, k)).collect();
        let xn = norm(&x);
        if xn == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xn } else { xn };
        let mut v = x;
        v[0] -= alpha;
        let vv = dot(&v, &v);
        if vv == 0.0 {
            continue;
        }
        let refl = Reflector {
            k,
            v,
            beta: 2.0 / vv,
        };
        for j in k..n {
            let mut col = r.column(j);
            refl.apply(&mut col);
            for i in k..m {
                r.set(i, j, col[i]);
            }
        }
        for i in k + 1..m {
            r.set(i, k, 0.0);
        }
        reflectors.push(refl);
    }
    let largest = if steps > 0 { r.get(0, 0).abs() } else { 0.0 };
    let rank = (0..steps)
        .take_while(|&k| largest > 0.0 && r.get(k, k).abs() > rel_tol * largest)
        .count();
    PivotedQr {
        r,
        reflectors,
        perm,
        rank,
    }
}

impl PivotedQr {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Magnitudes of the diagonal of `R`, non-increasing.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.r.rows.min(self.r.cols))
            .map(|k| self.r.get(k, k).abs())
            .collect()
    }

    fn back_substitute(&self, rhs: &[f64]) -> Vec<f64> {
        let r = self.rank;
        let mut z = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = rhs[i];
            for k in i + 1..r {
                s -= self.r.get(i, k) * z[k];
            }
            z[i] = s / self.r.get(i, i);
        }
        z
    }

    /// Orthonormal basis of the numerical nullspace, in original column order.
    pub fn nullspace(&self) -> Vec<Vec<f64>> {
        let n = self.r.cols;
        let r = self.rank;
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for f in r..n {
            let rhs: Vec<f64> = (0..r).map(|i| self.r.get(i, f)).collect();
            let w = self.back_substitute(&rhs);
            let mut vp = vec![0.0; n];
            for i in 0..r {
                vp[i] = -w[i];
            }
            vp[f] = 1.0;
            let mut v = vec![0.0; n];
            for (pos, &orig) in self.perm.iter().enumerate() {
                v[orig] = vp[pos];
            }
            for _ in 0..2 {
                for b in &basis {
                    let s = dot(&v, b);
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= s * bi;
                    }
                }
            }
            let vn = norm(&v);
            for vi in v.iter_mut() {
                *vi /= vn;
            }
            basis.push(v);
        }
        basis
    }

    /// Minimum-norm least-squares solution of `A x ≈ b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.r.cols;
        let mut y = b.to_vec();
        for refl in &self.reflectors {
            refl.apply(&mut y);
        }
        let z = self.back_substitute(&y);
        let mut x = vec![0.0; n];
        for (pos, &orig) in self.perm.iter().enumerate().take(self.rank) {
            x[orig] = z[pos];
        }
        for v in self.nullspace() {
            let s = dot(&x, &v);
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi -= s * vi;
            }
        }
        x
    }
}

/// Numerical rank of `a` at relative threshold `rel_tol`.
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    pivoted_qr(a, rel_tol).rank()
}
