//! Small dense row-major `f64` matrix used for weight and feature blocks.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::math;

/// Dense row-major matrix. Indexed as `m[(row, col)]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds a matrix from row-major data. Panics if the length is not `rows * cols`.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Estimates the spectral radius of a square non-negative matrix by
    /// renormalized power iteration, averaging growth over the tail of the
    /// run so periodic structures (pure cycles) still converge.
    pub fn spectral_radius_estimate(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "spectral radius needs a square matrix");
        let k = self.rows;
        if k == 0 {
            return 0.0;
        }
        let mut x = vec![1.0 / k as f64; k];
        let mut growths = Vec::new();
        for _ in 0..120 {
            let mut y = vec![0.0; k];
            for (r, yr) in y.iter_mut().enumerate() {
                let row = self.row(r);
                // Note: growth of x under repeated application of M^T and M
                // share the same dominant eigenvalue; row-major accumulate.
                for (c, &xc) in x.iter().enumerate() {
                    *yr += row[c] * xc;
                }
            }
            let norm: f64 = y.iter().map(|v| math::abs(*v)).sum();
            if norm == 0.0 {
                return 0.0;
            }
            for v in y.iter_mut() {
                *v /= norm;
            }
            growths.push(norm);
            x = y;
        }
        let tail = &growths[growths.len() - 24..];
        let log_mean: f64 = tail.iter().map(|g| math::ln(*g)).sum::<f64>() / tail.len() as f64;
        math::exp(log_mean)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let mut m = Matrix::zeros(2, 3);
        m[(1, 2)] = 5.0;
        assert_eq!(m.as_slice()[5], 5.0);
        assert_eq!(m.row(1), &[0.0, 0.0, 5.0]);
    }

    #[test]
    fn spectral_radius_of_diagonal() {
        let m = Matrix::from_rows(2, 2, vec![0.7, 0.0, 0.0, 0.2]);
        let rho = m.spectral_radius_estimate();
        assert!((rho - 0.7).abs() < 1e-6, "rho = {rho}");
    }

    #[test]
    fn spectral_radius_of_cycle() {
        // Pure 3-cycle with gains 0.6, 0.3, 0.3: rho = (0.6*0.3*0.3)^(1/3).
        let m = Matrix::from_rows(
            3,
            3,
            vec![0.0, 0.6, 0.0, 0.0, 0.0, 0.3, 0.3, 0.0, 0.0],
        );
        let expected = (0.6f64 * 0.3 * 0.3).powf(1.0 / 3.0);
        let rho = m.spectral_radius_estimate();
        assert!((rho - expected).abs() < 1e-3, "rho = {rho}, want {expected}");
    }

    #[test]
    fn spectral_radius_of_zero() {
        let m = Matrix::zeros(3, 3);
        assert_eq!(m.spectral_radius_estimate(), 0.0);
    }
}
