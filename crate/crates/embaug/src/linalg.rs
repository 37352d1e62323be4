//! Dense linear algebra for the small matrices this pipeline needs
//! (scatter matrices up to a few hundred rows, covariances in beta-space).

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        assert!(!rows.is_empty());
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols));
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[F]) {
        assert_eq!(col.len(), self.rows);
        for (i, &v) in col.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Matrix<F> {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == F::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .fold(F::zero(), |s, x| s + x)
            })
            .collect()
    }

    /// `W^T v` without materializing the transpose.
    pub fn transpose_matvec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![F::zero(); self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for j in 0..self.cols {
                out[j] = out[j] + self[(i, j)] * vi;
            }
        }
        out
    }

    pub fn trace(&self) -> F {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(F::zero(), |s, x| s + x)
    }

    pub fn add_scaled_identity(&mut self, eps: F) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] = self[(i, i)] + eps;
        }
    }

    pub fn scale(&mut self, s: F) {
        for v in &mut self.data {
            *v = *v * s;
        }
    }

    /// Rank-one update `self += s * v v^T`.
    pub fn add_outer(&mut self, v: &[F], s: F) {
        assert_eq!(self.rows, v.len());
        assert_eq!(self.cols, v.len());
        for i in 0..self.rows {
            let vi = v[i] * s;
            for j in 0..self.cols {
                self[(i, j)] = self[(i, j)] + vi * v[j];
            }
        }
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    /// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
    pub fn cholesky(&self) -> Result<Matrix<F>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if s <= F::zero() {
                        return Err(Error::Numerical(format!(
                            "cholesky pivot {i} non-positive"
                        )));
                    }
                    l[(i, i)] = s.sqrt();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Ok(l)
    }

    /// Pivot-tolerant Cholesky for positive semi-definite matrices.
    ///
    /// Pivots at or below `tol` zero out their column instead of failing,
    /// so rank-deficient covariances (few context vectors, identical
    /// vectors) still factor. Returns the factor and the numerical rank.
    pub fn cholesky_semidefinite(&self, tol: F) -> (Matrix<F>, usize) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        let mut rank = 0;
        for i in 0..n {
            for j in 0..=i {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if s <= tol {
                        l[(i, i)] = F::zero();
                    } else {
                        l[(i, i)] = s.sqrt();
                        rank += 1;
                    }
                } else if l[(j, j)] == F::zero() {
                    l[(i, j)] = F::zero();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        (l, rank)
    }

    /// Solve `L x = b` for lower-triangular `L` (zero pivots map to zero).
    pub fn forward_solve(&self, b: &[F]) -> Vec<F> {
        let n = self.rows;
        assert_eq!(b.len(), n);
        let mut x = vec![F::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - self[(i, k)] * x[k];
            }
            x[i] = if self[(i, i)] == F::zero() {
                F::zero()
            } else {
                s / self[(i, i)]
            };
        }
        x
    }

    /// Solve `L^T x = b` for lower-triangular `L`.
    pub fn back_solve_transposed(&self, b: &[F]) -> Vec<F> {
        let n = self.rows;
        assert_eq!(b.len(), n);
        let mut x = vec![F::zero(); n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s = s - self[(k, i)] * x[k];
            }
            x[i] = if self[(i, i)] == F::zero() {
                F::zero()
            } else {
                s / self[(i, i)]
            };
        }
        x
    }

    /// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
    ///
    /// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns,
    /// unordered. Deterministic for a given input.
    pub fn jacobi_eigen(&self) -> Result<(Vec<F>, Matrix<F>)> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut v = Matrix::identity(n);
        if n == 1 {
            return Ok((vec![a[(0, 0)]], v));
        }
        let eps = lit::<F>(1e-30);
        let max_sweeps = 100;
        for _ in 0..max_sweeps {
            let mut off = F::zero();
            for i in 0..n {
                for j in i + 1..n {
                    off = off + a[(i, j)] * a[(i, j)];
                }
            }
            let diag_sq = (0..n)
                .map(|i| a[(i, i)] * a[(i, i)])
                .fold(F::zero(), |s, x| s + x);
            if off <= eps * (diag_sq + F::one()) {
                let vals = (0..n).map(|i| a[(i, i)]).collect();
                return Ok((vals, v));
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == F::zero() {
                        continue;
                    }
                    let diff = a[(q, q)] - a[(p, p)];
                    let two = lit::<F>(2.0);
                    let t = if diff.abs() < eps {
                        F::one()
                    } else {
                        let theta = diff / (two * apq);
                        let sign = if theta >= F::zero() {
                            F::one()
                        } else {
                            -F::one()
                        };
                        sign / (theta.abs() + (theta * theta + F::one()).sqrt())
                    };
                    let c = F::one() / (t * t + F::one()).sqrt();
                    let s = t * c;
                    // rotate rows/columns p and q
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        Err(Error::Numerical(
            "jacobi eigensolver did not converge".into(),
        ))
    }
}

impl<F: Scalar> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F: Scalar> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x * y)
        .fold(F::zero(), |s, v| s + v)
}

pub fn norm<F: Scalar>(v: &[F]) -> F {
    dot(v, v).sqrt()
}

pub fn sub<F: Scalar>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Mean of a set of equal-length vectors.
pub fn mean_vector<F: Scalar>(vectors: &[&[F]]) -> Vec<F> {
    assert!(!vectors.is_empty());
    let dim = vectors[0].len();
    let mut m = vec![F::zero(); dim];
    for v in vectors {
        for (mj, &vj) in m.iter_mut().zip(v.iter()) {
            *mj = *mj + vj;
        }
    }
    let n = lit::<F>(vectors.len() as f64);
    for mj in &mut m {
        *mj = *mj / n;
    }
    m
}

/// Sample covariance (divisor n-1) of a set of vectors.
pub fn sample_covariance<F: Scalar>(vectors: &[&[F]], mean: &[F]) -> Matrix<F> {
    assert!(vectors.len() >= 2);
    let dim = mean.len();
    let mut cov = Matrix::zeros(dim, dim);
    for v in vectors {
        let d = sub(v, mean);
        cov.add_outer(&d, F::one());
    }
    cov.scale(F::one() / lit::<F>((vectors.len() - 1) as f64));
    cov
}
