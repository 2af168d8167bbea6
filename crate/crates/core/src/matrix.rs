//! Dense square/rectangular matrices over a [`Scalar`].
//!
//! Vectors are plain `Vec<S>`; whether they act as rows or columns is decided
//! by the method (`row_mul` is `x·M`, `mul_col` is `M·x`).

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::SizeMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Every row equal to `row`.
    pub fn stacked(row: &[S], rows: usize) -> Self {
        Self::from_fn(rows, row.len(), |_, j| row[j].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() * b.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix<S> {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn add(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, k: &S) -> Matrix<S> {
        self.map(|a| a.clone() * k.clone())
    }

    pub fn mul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, exp: usize) -> Matrix<S> {
        assert!(self.is_square());
        let mut acc = Self::identity(self.rows);
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    /// Row vector times matrix.
    pub fn row_mul(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![S::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o += xi.clone() * a.clone();
                }
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn mul_col(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn row_sums(&self) -> Vec<S> {
        (0..self.rows).map(|i| self.row(i).iter().cloned().fold(S::zero(), |a, b| a + b)).collect()
    }

    /// Solve `self · X = rhs` by Gauss–Jordan elimination.
    ///
    /// Exact backends use full pivoting on the entry with the smallest
    /// representation; floats use partial pivoting on magnitude.
    pub fn solve(&self, rhs: &Matrix<S>) -> Result<Matrix<S>> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::SizeMismatch(format!(
                "solve {}x{} against {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        // col_of[k] = original column eliminated at step k (full pivoting permutes unknowns)
        let mut col_perm: Vec<usize> = (0..n).collect();
        let scale = self.data.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max).max(1.0);

        for k in 0..n {
            let mut best: Option<(usize, usize, f64)> = None;
            let col_range = if S::EXACT { k..n } else { k..k + 1 };
            for i in k..n {
                for j in col_range.clone() {
                    if let Some(rank) = a[(i, j)].pivot_rank() {
                        if best.is_none_or(|(_, _, r)| rank > r) {
                            best = Some((i, j, rank));
                        }
                    }
                }
            }
            let (pi, pj, _) = best.ok_or(Error::Singular)?;
            if !S::EXACT && a[(pi, pj)].to_f64().abs() <= 1e-13 * scale {
                return Err(Error::Singular);
            }
            a.swap_rows(k, pi);
            b.swap_rows(k, pi);
            if pj != k {
                a.swap_cols(k, pj);
                col_perm.swap(k, pj);
            }

            let pivot = a[(k, k)].clone();
            for j in k..n {
                let v = a[(k, j)].clone() / pivot.clone();
                a[(k, j)] = v;
            }
            for j in 0..m {
                let v = b[(k, j)].clone() / pivot.clone();
                b[(k, j)] = v;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let factor = a[(i, k)].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[(k, j)].clone();
                    if !v.is_zero() {
                        a[(i, j)] -= factor.clone() * v;
                    }
                }
                for j in 0..m {
                    let v = b[(k, j)].clone();
                    if !v.is_zero() {
                        b[(i, j)] -= factor.clone() * v;
                    }
                }
            }
        }

        // Undo the column permutation: row k of b holds unknown col_perm[k].
        let mut x = Self::zeros(n, m);
        for (k, &orig) in col_perm.iter().enumerate() {
            for j in 0..m {
                x[(orig, j)] = b[(k, j)].clone();
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix<S>> {
        self.solve(&Self::identity(self.rows))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).fold(
        S::zero(),
        |acc, (a, b)| {
            if a.is_zero() || b.is_zero() {
                acc
            } else {
                acc + a.clone() * b.clone()
            }
        },
    )
}

pub fn sum<S: Scalar>(x: &[S]) -> S {
    x.iter().cloned().fold(S::zero(), |a, b| a + b)
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self.cols.max(1);
        f.debug_list().entries(self.data.chunks(cols).take(self.rows)).finish()
    }
}
