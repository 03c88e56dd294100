use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{DeblurError, Result};
use crate::fft::fft_columns;
use crate::scalar::Real;

/// Square Toeplitz matrix `(T)_{kl} = t_{k−l}` stored by its Toeplitz vector
/// `(t_{−(n−1)}, …, t_{n−1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzMatrix<T: Real> {
    n: usize,
    t: Vec<T>,
}

impl<T: Real> ToeplitzMatrix<T> {
    /// `t` must have odd length `2n − 1`.
    pub fn new(t: Vec<T>) -> Result<Self> {
        if t.is_empty() || t.len() % 2 == 0 {
            return Err(DeblurError::BadSize(format!(
                "Toeplitz vector length must be odd, got {}",
                t.len()
            )));
        }
        Ok(Self {
            n: t.len().div_ceil(2),
            t,
        })
    }

    /// Zero boundary conditions: mass the kernel pushes past the edge is dropped.
    pub fn from_kernel(kernel: &[T], n: usize) -> Result<Self> {
        if kernel.len() % 2 == 0 || n == 0 {
            return Err(DeblurError::BadSize(format!(
                "kernel length must be odd, got {}",
                kernel.len()
            )));
        }
        if kernel.len() > 2 * n - 1 {
            return Err(DeblurError::KernelTooWide {
                kernel: kernel.len(),
                dim: n,
            });
        }
        let half = kernel.len() / 2;
        let mut t = vec![T::zero(); 2 * n - 1];
        for (k, v) in kernel.iter().enumerate() {
            // kernel index k sits at offset k − half
            t[n - 1 + k - half] = *v;
        }
        Self::new(t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vector(&self) -> &[T] {
        &self.t
    }

    pub fn coeff(&self, offset: isize) -> T {
        let idx = offset + self.n as isize - 1;
        if idx < 0 || idx as usize >= self.t.len() {
            T::zero()
        } else {
            self.t[idx as usize]
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = self.t.clone();
        t.reverse();
        Self { n: self.n, t }
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.n, self.n, |k, l| self.coeff(k as isize - l as isize))
    }

    /// First column of the `2n` circulant that embeds this matrix in its
    /// leading block.
    fn embedding_column(&self) -> Vec<Complex<T>> {
        let n = self.n;
        let mut c = vec![Complex::new(T::zero(), T::zero()); 2 * n];
        for d in 0..n {
            c[d].re = self.coeff(d as isize);
        }
        for d in 1..n {
            c[2 * n - d].re = self.coeff(-(d as isize));
        }
        c
    }

    /// `T·X` for every column of `x`, through the circulant embedding.
    pub fn apply_columns(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let n = self.n;
        assert_eq!(x.nrows(), n, "Toeplitz dimension mismatch");
        let big = 2 * n;
        let col = DMatrix::from_vec(big, 1, self.embedding_column());
        let symbol = fft_columns(&col, false);
        let padded = DMatrix::from_fn(big, x.ncols(), |i, j| {
            if i < n {
                Complex::new(x[(i, j)], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        let mut spec = fft_columns(&padded, false);
        for j in 0..spec.ncols() {
            for i in 0..big {
                spec[(i, j)] *= symbol[(i, 0)];
            }
        }
        let out = fft_columns(&spec, true);
        DMatrix::from_fn(n, x.ncols(), |i, j| out[(i, j)].re)
    }

    /// First column of the circulant obtained by wrapping every diagonal
    /// modulo `n`; equals the periodic-boundary version of the same blur.
    pub fn wrapped_column(&self) -> Vec<T> {
        let n = self.n as isize;
        let mut c = vec![T::zero(); self.n];
        for d in -(n - 1)..n {
            c[d.rem_euclid(n) as usize] += self.coeff(d);
        }
        c
    }
}
