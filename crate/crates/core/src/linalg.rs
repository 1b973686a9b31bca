//! Small dense complex matrices and the linear solve behind zero forcing.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs.row(l)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `self * self^H`.
    pub fn gram(&self) -> Self {
        let n = self.rows;
        let mut g = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: Complex64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| a * b.conj())
                    .sum();
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Pivot magnitude at or below `tol` during elimination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular;

/// Solves `a * x = b` by Gaussian elimination with partial pivoting.
///
/// Fails when the largest available pivot magnitude is `<= tol`.
pub fn solve(mut a: CMatrix, mut b: CMatrix, tol: f64) -> Result<CMatrix, Singular> {
    let n = a.rows;
    assert_eq!(a.cols, n, "coefficient matrix must be square");
    assert_eq!(b.rows, n, "right-hand side has wrong row count");
    let m = b.cols;

    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(mag > tol) {
            return Err(Singular);
        }
        if piv != col {
            for j in 0..n {
                a.data.swap(piv * n + j, col * n + j);
            }
            for j in 0..m {
                b.data.swap(piv * m + j, col * m + j);
            }
        }
        let inv = a[(col, col)].inv();
        for r in col + 1..n {
            let f = a[(r, col)] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = a[(col, j)];
                a[(r, j)] -= f * v;
            }
            for j in 0..m {
                let v = b[(col, j)];
                b[(r, j)] -= f * v;
            }
        }
    }

    for col in (0..n).rev() {
        let inv = a[(col, col)].inv();
        for j in 0..m {
            let mut acc = b[(col, j)];
            for l in col + 1..n {
                acc -= a[(col, l)] * b[(l, j)];
            }
            b[(col, j)] = acc * inv;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_small_system() {
        let a = CMatrix::from_rows(2, 2, vec![c(0.0, 0.0), c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)]);
        let b = CMatrix::from_rows(2, 1, vec![c(4.0, 0.0), c(2.0, 0.0)]);
        let x = solve(a.clone(), b.clone(), 1e-12).unwrap();
        let r = a.matmul(&x);
        for i in 0..2 {
            assert!((r[(i, 0)] - b[(i, 0)]).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_detected() {
        let a = CMatrix::from_rows(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(solve(a, CMatrix::identity(2), 1e-12), Err(Singular));
        assert_eq!(solve(CMatrix::zeros(3, 3), CMatrix::identity(3), 0.0), Err(Singular));
    }

    #[test]
    fn gram_is_hermitian() {
        let h = CMatrix::from_fn(3, 5, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.3));
        let g = h.gram();
        assert_eq!(g, h.matmul(&h.adjoint()));
        for i in 0..3 {
            assert_eq!(g[(i, i)].im, 0.0);
        }
    }
}
