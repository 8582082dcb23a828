//! Minimal dense linear algebra used by the linear-quadratic machinery.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix data length {got} does not match {rows}x{cols}")]
    Shape { rows: usize, cols: usize, got: usize },
    #[error("ragged matrix rows: row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("singular linear system (pivot ratio {pivot_ratio:.3e})")]
    Singular { pivot_ratio: f64 },
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Real> Mat<R> {
    pub fn new(rows: usize, cols: usize, data: Vec<R>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape { rows, cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![R::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, R::one());
        }
        m
    }

    /// Build from nested rows, rejecting ragged input.
    pub fn from_nested(rows: &[Vec<R>]) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(LinalgError::Ragged { row: i, got: row.len(), expected: ncols });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: nrows, cols: ncols, data })
    }

    pub fn scalar(value: R) -> Self {
        Self { rows: 1, cols: 1, data: vec![value] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> R {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: R) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul_vec(&self, v: &[R]) -> Vec<R> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = R::zero();
                for c in 0..self.cols {
                    acc = acc + self.at(r, c) * v[c];
                }
                acc
            })
            .collect()
    }

    pub fn mul_mat(&self, other: &Mat<R>) -> Mat<R> {
        assert_eq!(self.cols, other.rows, "mul_mat dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a == R::zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out.set(r, c, out.at(r, c) + a * other.at(k, c));
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat<R> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.at(r, c));
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &Mat<R>) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + *b;
        }
    }

    /// v' M v
    pub fn quad_form(&self, v: &[R]) -> R {
        assert_eq!(self.rows, self.cols, "quad_form requires a square matrix");
        assert_eq!(v.len(), self.cols, "quad_form dimension mismatch");
        let mv = self.mul_vec(v);
        v.iter().zip(mv.iter()).fold(R::zero(), |acc, (a, b)| acc + *a * *b)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                if self.at(r, c) != self.at(c, r) {
                    return false;
                }
            }
        }
        true
    }

    /// Lower Cholesky factor; `None` when the matrix is not positive definite.
    pub fn cholesky(&self) -> Option<Mat<R>> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut l = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.at(i, j);
                for k in 0..j {
                    sum = sum - l.at(i, k) * l.at(j, k);
                }
                if i == j {
                    if sum <= R::zero() {
                        return None;
                    }
                    l.set(i, j, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.at(j, j));
                }
            }
        }
        Some(l)
    }
}

/// Solve `a x = rhs` by Gaussian elimination with partial pivoting.
pub fn solve<R: Real>(a: &Mat<R>, rhs: &[R]) -> Result<Vec<R>, LinalgError> {
    assert!(a.is_square(), "solve requires a square matrix");
    assert_eq!(rhs.len(), a.rows(), "solve rhs dimension mismatch");
    let n = a.rows();
    let mut m = a.clone();
    let mut b = rhs.to_vec();
    let mut max_pivot = R::zero();
    let mut min_pivot = R::infinity();

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = m.at(col, col).abs();
        for r in (col + 1)..n {
            let cand = m.at(r, col).abs();
            if cand > pivot_abs {
                pivot_abs = cand;
                pivot_row = r;
            }
        }
        max_pivot = max_pivot.max(pivot_abs);
        min_pivot = min_pivot.min(pivot_abs);
        if pivot_abs == R::zero() || !pivot_abs.is_finite() {
            return Err(LinalgError::Singular {
                pivot_ratio: if max_pivot > R::zero() {
                    (min_pivot / max_pivot).as_f64()
                } else {
                    0.0
                },
            });
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = m.at(col, c);
                m.set(col, c, m.at(pivot_row, c));
                m.set(pivot_row, c, tmp);
            }
            b.swap(col, pivot_row);
        }
        let pivot = m.at(col, col);
        for r in (col + 1)..n {
            let factor = m.at(r, col) / pivot;
            if factor == R::zero() {
                continue;
            }
            for c in col..n {
                m.set(r, c, m.at(r, c) - factor * m.at(col, c));
            }
            b[r] = b[r] - factor * b[col];
        }
    }

    let ratio = (min_pivot / max_pivot).as_f64();
    if !ratio.is_finite() || ratio < 1e-14 {
        return Err(LinalgError::Singular { pivot_ratio: ratio });
    }

    let mut x = vec![R::zero(); n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in (col + 1)..n {
            acc = acc - m.at(col, c) * x[c];
        }
        x[col] = acc / m.at(col, col);
    }
    Ok(x)
}
