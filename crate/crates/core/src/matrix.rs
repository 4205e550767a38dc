//! Small dense square/rectangular matrices over a [`Field`].
//!
//! Sizes here never exceed (n+1)×(n+1) with n ≤ a handful, so everything is
//! row-major `Vec` storage and textbook elimination.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Matrix<F> {
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
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

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, s: &F) -> Self {
        self.map(|a| a.clone() * s.clone())
    }

    /// `self - s·I`
    pub fn shift_diagonal(&self, s: &F) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] = m[(i, i)].clone() - s.clone();
        }
        m
    }

    fn zip(&self, other: &Self, f: impl Fn(&F, &F) -> F) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(F::zero(), |acc, k| {
                acc + self[(i, k)].clone() * other[(k, j)].clone()
            })
        })
    }

    pub fn trace(&self) -> F {
        (0..self.rows.min(self.cols)).fold(F::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn diagonal(&self) -> Vec<F> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    pub fn is_upper_triangular(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (0..i.min(self.cols)).all(|j| self[(i, j)].is_negligible(tol)))
    }

    pub fn is_lower_triangular(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| ((i + 1)..self.cols).all(|j| self[(i, j)].is_negligible(tol)))
    }

    /// Solve `U x = b` for upper-triangular `U` by back substitution.
    pub fn solve_upper(&self, b: &[F], tol: f64) -> Result<Vec<F>> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        assert_eq!(b.len(), n);
        let mut x = vec![F::zero(); n];
        for i in (0..n).rev() {
            let mut acc = b[i].clone();
            for j in (i + 1)..n {
                acc = acc - self[(i, j)].clone() * x[j].clone();
            }
            let pivot = &self[(i, i)];
            if pivot.is_negligible(tol) {
                return Err(Error::Resonance(format!("zero pivot in row {i} of triangular solve")));
            }
            x[i] = acc / pivot.clone();
        }
        Ok(x)
    }

    /// Row echelon form by Gaussian elimination with partial pivoting.
    /// Returns (rank, determinant-if-square).
    fn eliminate(&self, tol: f64) -> (usize, F) {
        let mut a = self.clone();
        let (m, n) = (a.rows, a.cols);
        let mut rank = 0;
        let mut det = F::one();
        for col in 0..n {
            if rank == m {
                break;
            }
            let pivot_row = (rank..m)
                .max_by(|&i, &j| a[(i, col)].magnitude().total_cmp(&a[(j, col)].magnitude()))
                .unwrap();
            if a[(pivot_row, col)].is_negligible(tol) {
                det = F::zero();
                continue;
            }
            if pivot_row != rank {
                for j in 0..n {
                    a.data.swap(pivot_row * n + j, rank * n + j);
                }
                det = -det;
            }
            let p = a[(rank, col)].clone();
            det = det * p.clone();
            for i in (rank + 1)..m {
                let factor = a[(i, col)].clone() / p.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(rank, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - factor.clone() * v;
                }
            }
            rank += 1;
        }
        if rank < m.min(n) {
            det = F::zero();
        }
        (rank, det)
    }

    /// Numerical rank; entries below `tol` (after elimination) count as zero.
    pub fn rank(&self, tol: f64) -> usize {
        self.eliminate(tol).0
    }

    pub fn determinant(&self) -> F {
        assert_eq!(self.rows, self.cols);
        self.eliminate(0.0).1
    }
}

impl Matrix<C64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// Infinity norm of a complex vector.
pub fn norm_inf(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
