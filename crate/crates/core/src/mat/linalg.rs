//! Small dense real linear algebra: LU with partial pivoting, Cholesky, and
//! real matrix inversion for the setting-transform matrices.

use crate::error::{Error, Result};

/// Row-major real matrix, minimal surface for internal use.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        RealMatrix { rows, cols, data }
    }

    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = RealMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let base = r * self.cols;
            let mut acc = 0.0;
            for c in 0..self.cols {
                acc += self.data[base + c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn transpose(&self) -> RealMatrix {
        let mut out = RealMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &RealMatrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// LU factorization with partial pivoting; solves A x = b.
pub struct LuFactors {
    lu: RealMatrix,
    piv: Vec<usize>,
}

pub fn lu_factor(a: &RealMatrix) -> Result<LuFactors> {
    assert_eq!(a.rows, a.cols, "LU requires a square matrix");
    let n = a.rows;
    let mut lu = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut max_val = lu[(k, k)].abs();
        let mut max_row = k;
        for r in k + 1..n {
            let v = lu[(r, k)].abs();
            if v > max_val {
                max_val = v;
                max_row = r;
            }
        }
        if max_val < 1e-13 {
            return Err(Error::Singular(format!(
                "pivot {:.3e} at column {} below threshold",
                max_val, k
            )));
        }
        if max_row != k {
            for c in 0..n {
                let tmp = lu[(k, c)];
                lu[(k, c)] = lu[(max_row, c)];
                lu[(max_row, c)] = tmp;
            }
            piv.swap(k, max_row);
        }
        let pivot = lu[(k, k)];
        for r in k + 1..n {
            let f = lu[(r, k)] / pivot;
            lu[(r, k)] = f;
            for c in k + 1..n {
                let v = lu[(k, c)];
                lu[(r, c)] -= f * v;
            }
        }
    }
    Ok(LuFactors { lu, piv })
}

impl LuFactors {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for k in 1..n {
            for j in 0..k {
                x[k] -= self.lu[(k, j)] * x[j];
            }
        }
        for k in (0..n).rev() {
            for j in k + 1..n {
                x[k] -= self.lu[(k, j)] * x[j];
            }
            x[k] /= self.lu[(k, k)];
        }
        x
    }
}

/// Dense inverse via LU.
pub fn invert(a: &RealMatrix) -> Result<RealMatrix> {
    let n = a.rows;
    let lu = lu_factor(a)?;
    let mut out = RealMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for c in 0..n {
        e[c] = 1.0;
        let col = lu.solve(&e);
        e[c] = 0.0;
        for r in 0..n {
            out[(r, c)] = col[r];
        }
    }
    Ok(out)
}

/// Cholesky factorization of a symmetric positive-definite matrix (lower
/// triangular factor). A small ridge keeps numerically rank-deficient Gram
/// matrices factorable; the caller controls it.
pub struct CholeskyFactor {
    l: RealMatrix,
}

pub fn cholesky(a: &RealMatrix, ridge: f64) -> Result<CholeskyFactor> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut l = RealMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)] + ridge;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 {
            return Err(Error::Singular(format!(
                "Cholesky pivot {:.3e} at row {} not positive",
                d, j
            )));
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(CholeskyFactor { l })
}

impl CholeskyFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[(i, k)] * y[k];
            }
            y[i] /= self.l[(i, i)];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l[(k, i)] * y[k];
            }
            y[i] /= self.l[(i, i)];
        }
        y
    }
}
