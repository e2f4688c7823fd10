//! Small dense complex matrices.
//!
//! Sizes in this crate stay below a few hundred rows, so everything here is
//! plain row-major storage with naive kernels.

// Float math for no_std builds; std's inherent methods shadow it under test.
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Mul};
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        CMatrix { rows, cols, data }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().map(|z| z.norm()).sum())
            .fold(0.0, f64::max)
    }

    /// Leading `n x n` block.
    pub fn leading_block(&self, n: usize) -> Self {
        Self::from_fn(n, n, |i, j| self[(i, j)])
    }

    /// `max |A - A^dagger|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Matrix exponential by scaling and squaring of a Taylor series.
    pub fn expm(&self) -> Self {
        assert_eq!(self.rows, self.cols, "expm needs a square matrix");
        let norm = self.norm_inf();
        let mut squarings = 0u32;
        let mut scale = 1.0;
        while norm * scale > 0.25 {
            scale *= 0.5;
            squarings += 1;
        }
        let a = self.scale(C64::new(scale, 0.0));
        let mut result = Self::identity(self.rows);
        let mut term = Self::identity(self.rows);
        for k in 1..=30 {
            term = term.matmul(&a).scale(C64::new(1.0 / k as f64, 0.0));
            let size = term.norm_inf();
            result = result.add(&term);
            if size < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// The matrix `A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`,
    /// whose spectrum is that of the original with every value doubled; cyclic
    /// Jacobi sweeps diagonalize the embedding.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let m = 2 * n;
        let mut s = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                s[i * m + j] = z.re;
                s[(i + n) * m + (j + n)] = z.re;
                s[i * m + (j + n)] = -z.im;
                s[(i + n) * m + j] = z.im;
            }
        }
        jacobi_symmetric(&mut s, m);
        let mut eig: Vec<f64> = (0..m).map(|i| s[i * m + i]).collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        eig.into_iter().step_by(2).collect()
    }
}

fn jacobi_symmetric(a: &mut [f64], n: usize) {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let total: f64 = a.iter().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(1e-300) {
            return;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// `sum_i conj(a_i) b_i`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_pauli_y_rotation() {
        // exp(-i theta Y) for real theta is a real rotation.
        let theta = 0.7;
        let gen = CMatrix::from_row_major(2, 2, vec![ZERO, C64::new(-theta, 0.0), C64::new(theta, 0.0), ZERO]);
        let u = gen.expm();
        assert!((u[(0, 0)].re - theta.cos()).abs() < 1e-14);
        assert!((u[(1, 0)].re - theta.sin()).abs() < 1e-14);
        assert!((u[(0, 1)].re + theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn hermitian_spectrum() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let h = CMatrix::from_row_major(
            2,
            2,
            vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        );
        let e = h.hermitian_eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12, "{e:?}");
    }

    #[test]
    fn matmul_identity() {
        let a = CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(a.matmul(&CMatrix::identity(3)), a);
        assert!((a.trace() - C64::new(3.0, 3.0)).norm() < 1e-15);
    }
}
