use std::ops::{Index, IndexMut};

use super::field::{Elem, Field};
use crate::error::{Error, Result};

/// Dense row-major matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Elem::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Elem::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Elem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from raw integers, reduced into `f`.
    pub fn from_u64(f: &Field, rows: &[&[u64]]) -> Result<Self> {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| f.elem(v)).collect())
                .collect(),
        )
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    /// Columns `0..n` of `self`.
    pub fn first_cols(&self, n: usize) -> Mat {
        let n = n.min(self.cols);
        let mut out = Mat::zeros(self.rows, n);
        for i in 0..self.rows {
            for j in 0..n {
                out[(i, j)] = self[(i, j)];
            }
        }
        out
    }

    /// Concatenates matrices with equal row counts left to right.
    pub fn hcat(parts: &[Mat]) -> Result<Mat> {
        let rows = parts.first().map_or(0, Mat::rows);
        if parts.iter().any(|m| m.rows != rows) {
            return Err(Error::DimensionMismatch("hcat row counts differ".into()));
        }
        let cols = parts.iter().map(Mat::cols).sum();
        let mut out = Mat::zeros(rows, cols);
        let mut off = 0;
        for m in parts {
            for i in 0..rows {
                for j in 0..m.cols {
                    out[(i, off + j)] = m[(i, j)];
                }
            }
            off += m.cols;
        }
        Ok(out)
    }

    pub fn mul(&self, f: &Field, rhs: &Mat) -> Result<Mat> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, rhs.cols);
        let t = rhs.transpose();
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                out[(i, j)] = f.dot(self.row(i), t.row(j));
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v · self`.
    pub fn left_mul_vec(&self, f: &Field, v: &[Elem]) -> Result<Vec<Elem>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        Ok((0..self.cols)
            .map(|j| {
                v.iter().enumerate().fold(Elem::ZERO, |acc, (i, &x)| {
                    f.add(acc, f.mul(x, self[(i, j)]))
                })
            })
            .collect())
    }

    /// Gauss–Jordan inverse with first-nonzero pivoting.
    pub fn inverse(&self, f: &Field) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(
                "inverse of non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or(Error::Singular)?;
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            let scale = f.inv(a[(col, col)])?;
            a.scale_row(f, col, scale);
            inv.scale_row(f, col, scale);
            for r in 0..n {
                if r != col {
                    let factor = a[(r, col)];
                    if !factor.is_zero() {
                        a.axpy_row(f, r, col, factor);
                        inv.axpy_row(f, r, col, factor);
                    }
                }
            }
        }
        Ok(inv)
    }

    pub fn rank(&self, f: &Field) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..a.cols {
            if rank == a.rows {
                break;
            }
            let Some(pivot) = (rank..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(pivot, rank);
            let scale = f.inv(a[(rank, col)]).expect("pivot is nonzero");
            a.scale_row(f, rank, scale);
            for r in 0..a.rows {
                if r != rank {
                    let factor = a[(r, col)];
                    if !factor.is_zero() {
                        a.axpy_row(f, r, rank, factor);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, f: &Field, r: usize, s: Elem) {
        for j in 0..self.cols {
            self[(r, j)] = f.mul(self[(r, j)], s);
        }
    }

    // row[dst] -= factor * row[src]
    fn axpy_row(&mut self, f: &Field, dst: usize, src: usize, factor: Elem) {
        for j in 0..self.cols {
            let v = f.mul(factor, self[(src, j)]);
            self[(dst, j)] = f.sub(self[(dst, j)], v);
        }
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Elem;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Elem {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Elem {
        &mut self.data[i * self.cols + j]
    }
}

/// Row `i` is `[points[i]^0, ..., points[i]^(cols-1)]`.
pub fn vandermonde(f: &Field, points: &[Elem], cols: usize) -> Result<Mat> {
    for (i, p) in points.iter().enumerate() {
        if p.is_zero() {
            return Err(Error::ZeroPoint);
        }
        if points[..i].contains(p) {
            return Err(Error::DuplicatePoint(p.value()));
        }
    }
    let mut m = Mat::zeros(points.len(), cols);
    for (i, &p) in points.iter().enumerate() {
        let mut acc = Elem::ONE;
        for j in 0..cols {
            m[(i, j)] = acc;
            acc = f.mul(acc, p);
        }
    }
    Ok(m)
}

/// Solves `x · a = y` for the row vector `x`.
pub fn solve_right(f: &Field, y: &[Elem], a: &Mat) -> Result<Vec<Elem>> {
    if a.rows() != a.cols() || y.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "solve x·A = y with A {}x{} and y of {}",
            a.rows(),
            a.cols(),
            y.len()
        )));
    }
    // x·A = y  <=>  Aᵀ·xᵀ = yᵀ; eliminate on the augmented transpose
    let n = a.rows();
    let mut aug = Mat::zeros(n, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(j, i)];
        }
        aug[(i, n)] = y[i];
    }
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !aug[(r, col)].is_zero())
            .ok_or(Error::Singular)?;
        aug.swap_rows(pivot, col);
        let scale = f.inv(aug[(col, col)])?;
        aug.scale_row(f, col, scale);
        for r in 0..n {
            if r != col {
                let factor = aug[(r, col)];
                if !factor.is_zero() {
                    aug.axpy_row(f, r, col, factor);
                }
            }
        }
    }
    Ok((0..n).map(|i| aug[(i, n)]).collect())
}
