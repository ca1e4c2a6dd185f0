//! Dense exact-rational matrices with the elimination routines the linear
//! symplectic layer needs.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{shape, Result};
use crate::jetalg::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    /// A matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(rows: usize, cols: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rational>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(shape(format!(
                "matrix product {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
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
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(shape("matrix-vector dimension"));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape("matrix sum dimension"));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(shape("hstack row count"));
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        }))
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(shape("vstack column count"));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Rows `start..end`.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        Self::from_fn(end - start, self.cols, |i, j| self[(start + i, j)].clone())
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self::from_fn(self.rows + other.rows, self.cols + other.cols, |i, j| {
            match (i < self.rows, j < self.cols) {
                (true, true) => self[(i, j)].clone(),
                (false, false) => other[(i - self.rows, j - self.cols)].clone(),
                _ => Rational::zero(),
            }
        })
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(pr, r);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    let v = &m[(r, j)] * &f;
                    m[(i, j)] -= v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the kernel, as columns.
    pub fn nullspace(&self) -> Self {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Self::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            out[(f, k)] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                out[(pc, k)] = -r[(row, f)].clone();
            }
        }
        out
    }

    /// A basis of the column space, taken from the original columns.
    pub fn column_basis(&self) -> Self {
        let (_, pivots) = self.rref();
        let cols: Vec<Vec<Rational>> = pivots.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.rows, &cols)
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(n)).ok()?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || (n > 0 && pivots[n - 1] != n - 1) {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| r[(i, n + j)].clone()))
    }

    pub fn determinant(&self) -> Option<Rational> {
        if self.rows != self.cols {
            return None;
        }
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Rational::one();
        for c in 0..n {
            let pr = (c..n).find(|&i| !m[(i, c)].is_zero())?;
            if pr != c {
                m.swap_rows(pr, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det *= &piv;
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] / &piv;
                for j in c..n {
                    let v = &m[(c, j)] * &f;
                    m[(i, j)] -= v;
                }
            }
        }
        Some(det)
    }

    /// One solution of `self * a = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &[Rational]) -> Result<Option<Vec<Rational>>> {
        if b.len() != self.rows {
            return Err(shape("solve: right-hand side length"));
        }
        let rhs = Self::from_columns(self.rows, &[b.to_vec()]);
        let (r, pivots) = self.hstack(&rhs)?.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut a = vec![Rational::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            a[pc] = r[(row, self.cols)].clone();
        }
        Ok(Some(a))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Matrix text format: rows separated by `;`, entries by `,`.
impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                f.write_str("; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            f.write_str(&row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetalg::rat;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect())
    }

    #[test]
    fn rank_and_nullspace() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(a.rank(), 2);
        let k = a.nullspace();
        assert_eq!(k.cols(), 1);
        assert!(a.mul(&k).unwrap().is_zero());
    }

    #[test]
    fn inverse_and_determinant() {
        let a = m(&[&[2, 1], &[5, 3]]);
        assert_eq!(a.determinant(), Some(rat(1)));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(2));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
        assert_eq!(m(&[&[0, 1], &[1, 0]]).determinant(), Some(rat(-1)));
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(&[&[1, 1], &[2, 2]]);
        let sol = a.solve(&[rat(3), rat(6)]).unwrap().unwrap();
        assert_eq!(a.mul_vec(&sol).unwrap(), vec![rat(3), rat(6)]);
        assert!(a.solve(&[rat(3), rat(5)]).unwrap().is_none());
    }

    #[test]
    fn display_format() {
        assert_eq!(m(&[&[1, -2], &[0, 3]]).to_string(), "1, -2; 0, 3");
    }
}
