//! Small dense kernels: complex matrices, Hermitian log-determinants and
//! real Gaussian elimination. Sizes here are at most a few dozen.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(Self {
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

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Submatrix keeping the listed rows and columns, in the order given.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out[(i, j)] = self[(r, c)];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// `I + scale * self * self^H`.
    pub fn gram_rows(&self, scale: T) -> Self {
        let n = self.rows;
        let mut out = Self::identity(n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..self.cols {
                    acc += self[(i, k)] * self[(j, k)].conj();
                }
                out[(i, j)] += acc * scale;
                if i != j {
                    out[(j, i)] = out[(i, j)].conj();
                }
            }
        }
        out
    }

    /// `I + scale * self^H * self`.
    pub fn gram_cols(&self, scale: T) -> Self {
        let n = self.cols;
        let mut out = Self::identity(n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..self.rows {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                out[(i, j)] += acc * scale;
                if i != j {
                    out[(j, i)] = out[(i, j)].conj();
                }
            }
        }
        out
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// `log2 det(M)` for Hermitian positive definite `M` via Cholesky.
pub fn hermitian_logdet2<T: Scalar>(m: &CMatrix<T>) -> Result<T> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::InvalidInput("log-det of a non-square matrix".into()));
    }
    let mut l = CMatrix::<T>::zeros(n, n);
    let mut logdet = T::zero();
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return Err(Error::Numerical(format!(
                "matrix not positive definite at pivot {j}"
            )));
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        logdet += djj.ln();
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(logdet * T::of(2.0) / T::ln2())
}

/// `log2 det(I + scale * G G^H)`, factoring whichever Gram matrix is smaller.
pub fn log2_det_i_plus_gram<T: Scalar>(g: &CMatrix<T>, scale: T) -> Result<T> {
    if g.rows() == 0 || g.cols() == 0 {
        return Ok(T::zero());
    }
    let m = if g.rows() <= g.cols() {
        g.gram_rows(scale)
    } else {
        g.gram_cols(scale)
    };
    hermitian_logdet2(&m)
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `pivot_tol`.
pub fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>, pivot_tol: T) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[p][col].abs() < pivot_tol {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            if f == T::zero() {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let bv = b[col];
            b[r] -= f * bv;
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

/// Basis of the right null space of `a` (rows x cols), by reduced row echelon
/// form with entries below `tol` treated as zero.
pub fn null_space<T: Scalar>(a: &[Vec<T>], cols: usize, tol: T) -> Vec<Vec<T>> {
    let mut m: Vec<Vec<T>> = a.to_vec();
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let p = (r..rows)
            .max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())
            .unwrap();
        if m[p][c].abs() <= tol {
            continue;
        }
        m.swap(r, p);
        let inv = T::one() / m[r][c];
        for v in m[r].iter_mut() {
            *v *= inv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[i][c];
                if f != T::zero() {
                    for k in 0..cols {
                        let v = m[r][k];
                        m[i][k] -= f * v;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f];
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn scalar_channel_log_det() {
        let g = CMatrix::from_rows(vec![vec![c(1.0, 1.0)]]).unwrap();
        let v = log2_det_i_plus_gram(&g, 1.0).unwrap();
        assert!((v - 3f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn both_gram_routes_agree() {
        let g = CMatrix::from_rows(vec![
            vec![c(0.3, -1.2), c(0.7, 0.1), c(-0.4, 0.9)],
            vec![c(1.1, 0.2), c(-0.6, -0.5), c(0.2, 0.3)],
        ])
        .unwrap();
        let a = hermitian_logdet2(&g.gram_rows(1.0)).unwrap();
        let b = hermitian_logdet2(&g.gram_cols(1.0)).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn two_by_two_determinant_by_hand() {
        // [[2, i], [-i, 3]] has determinant 6 - 1 = 5.
        let m = CMatrix::from_rows(vec![vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(3.0, 0.0)]])
            .unwrap();
        assert!((hermitian_logdet2(&m).unwrap() - 5f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = CMatrix::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(1.0, 0.0)]])
            .unwrap();
        assert!(hermitian_logdet2(&m).is_err());
    }

    #[test]
    fn dense_solve_and_null_space() {
        let x: Vec<f64> = solve_dense(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0], 1e-12).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        let ns = null_space(&[vec![1.0, 1.0, 1.0]], 3, 1e-12);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(v.iter().sum::<f64>().abs() < 1e-14);
        }
    }
}
