//! Small dense rectangular complex matrices: products, determinants,
//! rank and kernels by Gauss-Jordan elimination with full pivoting.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{Cx, Mat2};

/// Default relative pivot threshold for rank decisions.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CxMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Cx>,
}

/// Result of row reduction: the reduced matrix and its pivot positions.
#[derive(Debug, Clone)]
pub struct RowReduction {
    pub reduced: CxMatrix,
    /// `(row, column)` of every pivot, in elimination order.
    pub pivots: Vec<(usize, usize)>,
}

impl CxMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Cx>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix given {} entries",
                data.len()
            )));
        }
        Ok(CxMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CxMatrix {
            rows,
            cols,
            data: vec![Cx::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CxMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Cx>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(CxMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Cx>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Cx::new(x, 0.0)).collect())
            .collect();
        CxMatrix::from_rows(&rows)
    }

    /// Builds a block matrix whose blocks are 2x2.
    pub fn from_blocks(blocks: &[Vec<Mat2>]) -> Result<Self> {
        let block_cols = blocks.first().map_or(0, Vec::len);
        if blocks.iter().any(|r| r.len() != block_cols) {
            return Err(Error::DimensionMismatch("ragged block rows".into()));
        }
        let mut m = CxMatrix::zeros(2 * blocks.len(), 2 * block_cols);
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, b) in row.iter().enumerate() {
                m[(2 * bi, 2 * bj)] = b.a11;
                m[(2 * bi, 2 * bj + 1)] = b.a12;
                m[(2 * bi + 1, 2 * bj)] = b.a21;
                m[(2 * bi + 1, 2 * bj + 1)] = b.a22;
            }
        }
        Ok(m)
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Cx>]) -> Result<Self> {
        let mut m = CxMatrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
            for (i, z) in c.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Cx] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Cx> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Cx>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> CxMatrix {
        let mut m = CxMatrix::zeros(self.rows, idx.len());
        for (k, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                m[(i, k)] = self[(i, j)];
            }
        }
        m
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &CxMatrix) -> Result<CxMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut m = CxMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)];
            }
        }
        Ok(m)
    }

    pub fn transpose(&self) -> CxMatrix {
        let mut m = CxMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, k: Cx) -> CxMatrix {
        CxMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn add(&self, other: &CxMatrix) -> Result<CxMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CxMatrix) -> Result<CxMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CxMatrix, f: impl Fn(Cx, Cx) -> Cx) -> Result<CxMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "elementwise op on {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(CxMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &CxMatrix) -> Result<CxMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut m = CxMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Cx::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(m)
    }

    /// Determinant by LU with partial pivoting; the empty matrix has determinant 1.
    pub fn det(&self) -> Result<Cx> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "determinant of {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Cx::new(1.0, 0.0);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
                .expect("non-empty range");
            if a[(p, k)].norm() == 0.0 {
                return Ok(Cx::new(0.0, 0.0));
            }
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let pivot = a[(k, k)];
            det *= pivot;
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                if f == Cx::new(0.0, 0.0) {
                    continue;
                }
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        Ok(det)
    }

    /// Solves `self * X = rhs` for square, nonsingular `self`.
    pub fn solve(&self, rhs: &CxMatrix) -> Result<CxMatrix> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::DimensionMismatch(
                "solve needs square lhs and matching rhs".into(),
            ));
        }
        let n = self.rows;
        let mut a = self.hstack(rhs)?;
        let scale = self.max_abs();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
                .expect("non-empty range");
            if a[(p, k)].norm() <= 1e-14 * scale || scale == 0.0 {
                return Err(Error::SingularMatrix(a[(p, k)].norm()));
            }
            a.swap_rows(p, k);
            let inv = a[(k, k)].inv();
            for j in 0..a.cols {
                a[(k, j)] *= inv;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f == Cx::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..a.cols {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        let idx: Vec<usize> = (n..a.cols).collect();
        Ok(a.select_columns(&idx))
    }

    pub fn inverse(&self) -> Result<CxMatrix> {
        self.solve(&CxMatrix::identity(self.rows))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Gauss-Jordan elimination with full pivoting.
    ///
    /// A candidate pivot is treated as zero when its magnitude is at most
    /// `tol * max|entry|` of the input.
    pub fn row_reduce(&self, tol: f64) -> RowReduction {
        let mut a = self.clone();
        let threshold = tol * self.max_abs();
        let mut used = vec![false; self.cols];
        let mut pivots = Vec::new();
        let mut row = 0;
        while row < self.rows {
            let mut best: Option<(usize, usize, f64)> = None;
            for i in row..self.rows {
                for (j, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
                    let v = a[(i, j)].norm();
                    if best.is_none_or(|(_, _, b)| v > b) {
                        best = Some((i, j, v));
                    }
                }
            }
            let Some((pi, pj, pv)) = best else { break };
            if pv <= threshold || pv == 0.0 {
                break;
            }
            a.swap_rows(pi, row);
            let inv = a[(row, pj)].inv();
            for j in 0..self.cols {
                a[(row, j)] *= inv;
            }
            for i in 0..self.rows {
                if i == row {
                    continue;
                }
                let f = a[(i, pj)];
                if f == Cx::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..self.cols {
                    let v = a[(row, j)];
                    a[(i, j)] -= f * v;
                }
            }
            used[pj] = true;
            pivots.push((row, pj));
            row += 1;
        }
        RowReduction { reduced: a, pivots }
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.row_reduce(tol).pivots.len()
    }

    /// Indices of a maximal independent set of columns, chosen greedily by
    /// largest remaining pivot and returned in increasing order.
    pub fn pivot_columns(&self, tol: f64) -> Vec<usize> {
        let mut cols: Vec<usize> = self.row_reduce(tol).pivots.iter().map(|p| p.1).collect();
        cols.sort_unstable();
        cols
    }

    /// Basis of the kernel as the columns of a `cols x (cols - rank)` matrix.
    pub fn nullspace(&self, tol: f64) -> CxMatrix {
        let rr = self.row_reduce(tol);
        let mut is_pivot = vec![None; self.cols];
        for &(r, c) in &rr.pivots {
            is_pivot[c] = Some(r);
        }
        let free: Vec<usize> = (0..self.cols).filter(|&j| is_pivot[j].is_none()).collect();
        let mut basis = CxMatrix::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            basis[(f, k)] = Cx::new(1.0, 0.0);
            for &(r, c) in &rr.pivots {
                basis[(c, k)] = -rr.reduced[(r, f)];
            }
        }
        basis
    }
}

impl std::ops::Index<(usize, usize)> for CxMatrix {
    type Output = Cx;
    fn index(&self, (i, j): (usize, usize)) -> &Cx {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CxMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for CxMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
