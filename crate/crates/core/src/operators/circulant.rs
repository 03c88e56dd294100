use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{DeblurError, Result};
use crate::fft::fft_columns;
use crate::scalar::Real;

/// Square circulant matrix stored by its first row; row `k` is the first row
/// cyclically shifted right by `k`, so `(C)_{kl} = c_{(l−k) mod n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantMatrix<T: Real> {
    row: Vec<T>,
}

impl<T: Real> CirculantMatrix<T> {
    pub fn new(first_row: Vec<T>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(DeblurError::BadSize("empty circulant".into()));
        }
        Ok(Self { row: first_row })
    }

    pub fn from_first_column(col: &[T]) -> Result<Self> {
        let n = col.len();
        Self::new((0..n).map(|l| col[(n - l) % n]).collect())
    }

    /// Periodic boundary conditions: the kernel center lands on the diagonal
    /// and mass leaving one edge re-enters at the other.
    pub fn from_kernel(kernel: &[T], n: usize) -> Result<Self> {
        if kernel.len() % 2 == 0 || n == 0 {
            return Err(DeblurError::BadSize(format!(
                "kernel length must be odd, got {}",
                kernel.len()
            )));
        }
        if kernel.len() > n {
            return Err(DeblurError::KernelTooWide {
                kernel: kernel.len(),
                dim: n,
            });
        }
        let half = (kernel.len() / 2) as isize;
        let mut col = vec![T::zero(); n];
        for (k, v) in kernel.iter().enumerate() {
            let d = k as isize - half;
            col[d.rem_euclid(n as isize) as usize] = *v;
        }
        Self::from_first_column(&col)
    }

    pub fn dim(&self) -> usize {
        self.row.len()
    }

    pub fn first_row(&self) -> &[T] {
        &self.row
    }

    pub fn first_column(&self) -> Vec<T> {
        let n = self.dim();
        (0..n).map(|k| self.row[(n - k) % n]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            row: self.first_column(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |k, l| self.row[(l + n - k) % n])
    }

    /// Eigenvalues: the unnormalized DFT of the first column.
    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        let col: Vec<Complex<T>> = self
            .first_column()
            .into_iter()
            .map(|v| Complex::new(v, T::zero()))
            .collect();
        fft_columns(&DMatrix::from_vec(self.dim(), 1, col), false)
            .as_slice()
            .to_vec()
    }

    pub fn apply_columns(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let n = self.dim();
        assert_eq!(x.nrows(), n, "circulant dimension mismatch");
        let eig = self.eigenvalues();
        let mut spec = fft_columns(&x.map(|v| Complex::new(v, T::zero())), false);
        for j in 0..spec.ncols() {
            for i in 0..n {
                spec[(i, j)] *= eig[i];
            }
        }
        fft_columns(&spec, true).map(|c| c.re)
    }
}
