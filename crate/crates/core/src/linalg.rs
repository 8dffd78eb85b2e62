//! Small dense row-major matrices and the factorizations the output-layer
//! solvers need: Cholesky for the normal equations and a one-sided Jacobi SVD
//! for the rank-deficient fallback.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows. An empty slice gives a 0x0 matrix.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::dim(format!("row {i} has {} entries, expected {cols}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// A single-column matrix.
    pub fn column_vector(values: &[f64]) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).take(self.rows)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Keeps the rows whose index is listed, in the listed order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Columns `from..cols` as a new matrix.
    pub fn columns_from(&self, from: usize) -> Matrix {
        let cols = self.cols - from;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in self.row_iter() {
            data.extend_from_slice(&r[from..]);
        }
        Matrix {
            rows: self.rows,
            cols,
            data,
        }
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (k, &aik) in a.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                for (oj, &bkj) in o.iter_mut().zip(other.row(k)) {
                    *oj += aik * bkj;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::dim(format!(
                "cannot form transpose product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for t in 0..self.rows {
            let a = self.row(t);
            let b = other.row(t);
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0.0 {
                    continue;
                }
                let o = out.row_mut(i);
                for (oj, &bj) in o.iter_mut().zip(b) {
                    *oj += ai * bj;
                }
            }
        }
        Ok(out)
    }

    /// Gram matrix `selfᵀ · self`, exactly symmetric.
    pub fn gram(&self) -> Matrix {
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for r in self.row_iter() {
            for i in 0..n {
                let ri = r[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    g.data[i * n + j] += ri * r[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i];
            }
        }
        g
    }

    pub fn scale(&self, a: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * a).collect(),
        }
    }

    /// Entrywise `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &Matrix, b: f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dim("axpby operands differ in shape"));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factorizes `a`; `None` when a pivot is not strictly positive.
    pub fn new(a: &Matrix) -> Option<Cholesky> {
        let n = a.rows();
        if a.cols() != n {
            return None;
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let ljj = math::sqrt(d);
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Some(Cholesky { l })
    }

    /// Cheap estimate of the 2-norm condition number of the factorized
    /// matrix, `(max Lᵢᵢ / min Lᵢᵢ)²`. It never exceeds the true value.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.l.rows();
        if n == 0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = self.l[(i, i)];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let r = hi / lo;
        r * r
    }

    /// Solves `A X = B` for every column of `b`.
    pub fn solve(&self, b: &Matrix) -> Matrix {
        let n = self.l.rows();
        let mut x = b.clone();
        for c in 0..b.cols() {
            // forward: L y = b
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.l[(i, i)];
            }
            // backward: Lᵀ x = y
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in (i + 1)..n {
                    s -= self.l[(k, i)] * x[(k, c)];
                }
                x[(i, c)] = s / self.l[(i, i)];
            }
        }
        x
    }
}

/// Thin singular value decomposition `A = U Σ Vᵀ` from one-sided Jacobi
/// rotations. Column `j` of `scaled_u` holds `σⱼ uⱼ`.
#[derive(Debug, Clone)]
pub struct JacobiSvd {
    scaled_u: Matrix,
    v: Matrix,
    sigma: Vec<f64>,
}

const JACOBI_MAX_SWEEPS: usize = 80;

impl JacobiSvd {
    pub fn new(a: &Matrix) -> JacobiSvd {
        let (m, n) = (a.rows(), a.cols());
        // column-major working copy so rotations touch contiguous memory
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut v: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();

        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (alpha, beta, gamma) = {
                        let (cp, cq) = (&cols[p], &cols[q]);
                        let mut alpha = 0.0;
                        let mut beta = 0.0;
                        let mut gamma = 0.0;
                        for i in 0..m {
                            alpha += cp[i] * cp[i];
                            beta += cq[i] * cq[i];
                            gamma += cp[i] * cq[i];
                        }
                        (alpha, beta, gamma)
                    };
                    if gamma == 0.0 || gamma.abs() <= f64::EPSILON * math::sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
                    let c = 1.0 / math::sqrt(1.0 + t * t);
                    let s = c * t;
                    rotate(&mut cols, p, q, c, s);
                    rotate(&mut v, p, q, c, s);
                }
            }
            if !rotated {
                break;
            }
        }

        let sigma: Vec<f64> = cols.iter().map(|c| math::sqrt(c.iter().map(|x| x * x).sum())).collect();
        let mut scaled_u = Matrix::zeros(m, n);
        let mut vm = Matrix::zeros(n, n);
        for j in 0..n {
            for i in 0..m {
                scaled_u[(i, j)] = cols[j][i];
            }
            for i in 0..n {
                vm[(i, j)] = v[j][i];
            }
        }
        JacobiSvd { scaled_u, v: vm, sigma }
    }

    /// Singular values, unordered, one per column of the input.
    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    /// Minimum-norm least-squares solution of `A X ≈ B`. Singular values
    /// below `max(m, n)·ε·σ_max` count as zero.
    pub fn solve_min_norm(&self, b: &Matrix) -> Matrix {
        let smax = self.sigma.iter().cloned().fold(0.0, f64::max);
        let m = self.scaled_u.rows();
        let n = self.v.rows();
        let tol = (m.max(n) as f64) * f64::EPSILON * smax;
        self.filtered_solve(b, |s| if s > tol { 1.0 / (s * s) } else { 0.0 })
    }

    /// Tikhonov solution `(AᵀA + λI)⁻¹ Aᵀ B` expressed through the SVD.
    pub fn solve_ridge(&self, b: &Matrix, lambda: f64) -> Matrix {
        if lambda == 0.0 {
            return self.solve_min_norm(b);
        }
        self.filtered_solve(b, |s| 1.0 / (s * s + lambda))
    }

    // X = Σⱼ vⱼ · w(σⱼ) · (σⱼuⱼ)ᵀ B
    fn filtered_solve(&self, b: &Matrix, weight: impl Fn(f64) -> f64) -> Matrix {
        let n = self.v.rows();
        let mut x = Matrix::zeros(n, b.cols());
        for (j, &s) in self.sigma.iter().enumerate() {
            let w = weight(s);
            if w == 0.0 || s == 0.0 {
                continue;
            }
            for c in 0..b.cols() {
                let mut proj = 0.0;
                for i in 0..b.rows() {
                    proj += self.scaled_u[(i, j)] * b[(i, c)];
                }
                let coef = proj * w;
                for k in 0..n {
                    x[(k, c)] += self.v[(k, j)] * coef;
                }
            }
        }
        x
    }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn matmul_matches_hand_product() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[[5.0], [6.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.as_slice(), &[17.0, 39.0]);
        assert_eq!(a.t_matmul(&b).unwrap().as_slice(), &[23.0, 34.0]);
        assert!(a.matmul(&a.columns_from(1).transpose()).is_err());
    }

    #[test]
    fn gram_is_symmetric_transpose_product() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 0.5], [3.0, -4.0, 1.0], [0.0, 1.0, 2.0]]).unwrap();
        let g = a.gram();
        let g2 = a.transpose().matmul(&a).unwrap();
        for (x, y) in g.as_slice().iter().zip(g2.as_slice()) {
            assert!(approx(*x, *y, 1e-12));
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]).unwrap();
        let chol = Cholesky::new(&a).unwrap();
        let x = chol.solve(&Matrix::column_vector(&[2.0, 1.0]));
        // 4x + 2y = 2, 2x + 3y = 1  =>  x = 0.5, y = 0
        assert!(approx(x[(0, 0)], 0.5, 1e-14));
        assert!(approx(x[(1, 0)], 0.0, 1e-14));
        assert!(chol.condition_estimate() >= 1.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(Cholesky::new(&a).is_none());
    }

    #[test]
    fn jacobi_min_norm_on_rank_deficient_system() {
        // two identical columns: min-norm solution splits the weight evenly
        let a = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0]]).unwrap();
        let b = Matrix::column_vector(&[2.0, 4.0]);
        let x = JacobiSvd::new(&a).solve_min_norm(&b);
        assert!(approx(x[(0, 0)], 1.0, 1e-12));
        assert!(approx(x[(1, 0)], 1.0, 1e-12));
    }

    #[test]
    fn jacobi_singular_values_of_diagonal() {
        let a = Matrix::from_rows(&[[3.0, 0.0], [0.0, -2.0], [0.0, 0.0]]).unwrap();
        let svd = JacobiSvd::new(&a);
        let mut s = svd.singular_values().to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(approx(s[0], 2.0, 1e-14) && approx(s[1], 3.0, 1e-14));
    }
}
