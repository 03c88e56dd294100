use nalgebra::DMatrix;

use crate::error::{DeblurError, Result};
use crate::linalg::kron;
use crate::scalar::Real;

/// Regularization matrix `L` of a general-form Tikhonov problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularizerL {
    Identity,
    /// `[I ⊗ L₁ ; L₁ ⊗ I]` with forward differences `L₁` and zero boundary,
    /// applied without forming it: vertical differences first, then horizontal.
    FirstDerivative {
        rows: usize,
        cols: usize,
    },
}

/// First-difference regularizer for `p × p` images.
pub fn derivative_operator(p: usize) -> Result<RegularizerL> {
    RegularizerL::first_derivative(p, p)
}

/// The `(n−1) × n` forward-difference matrix.
pub fn forward_difference<T: Real>(n: usize) -> DMatrix<T> {
    DMatrix::from_fn(n.saturating_sub(1), n, |i, j| {
        if j == i {
            -T::one()
        } else if j == i + 1 {
            T::one()
        } else {
            T::zero()
        }
    })
}

impl RegularizerL {
    pub fn first_derivative(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(DeblurError::BadSize(format!(
                "derivative operator needs at least 2×2 images, got {rows}×{cols}"
            )));
        }
        Ok(RegularizerL::FirstDerivative { rows, cols })
    }

    /// Length of `L·vec(X)` for `rows × cols` images.
    pub fn output_len(&self, rows: usize, cols: usize) -> usize {
        match self {
            RegularizerL::Identity => rows * cols,
            RegularizerL::FirstDerivative { .. } => (rows - 1) * cols + rows * (cols - 1),
        }
    }

    pub fn check(&self, rows: usize, cols: usize) -> Result<()> {
        match *self {
            RegularizerL::FirstDerivative { rows: r, cols: c } if (r, c) != (rows, cols) => {
                Err(DeblurError::DimensionMismatch {
                    expected: (r, c),
                    actual: (rows, cols),
                })
            }
            _ => Ok(()),
        }
    }

    /// `L·vec(X)`.
    pub fn apply<T: Real>(&self, x: &DMatrix<T>) -> Vec<T> {
        match self {
            RegularizerL::Identity => x.as_slice().to_vec(),
            RegularizerL::FirstDerivative { .. } => {
                let (p, q) = x.shape();
                let mut out = Vec::with_capacity(self.output_len(p, q));
                for j in 0..q {
                    for i in 0..p - 1 {
                        out.push(x[(i + 1, j)] - x[(i, j)]);
                    }
                }
                for j in 0..q - 1 {
                    for i in 0..p {
                        out.push(x[(i, j + 1)] - x[(i, j)]);
                    }
                }
                out
            }
        }
    }

    /// `Lᵀ z` reshaped to `rows × cols`.
    pub fn adjoint<T: Real>(&self, z: &[T], rows: usize, cols: usize) -> DMatrix<T> {
        match self {
            RegularizerL::Identity => DMatrix::from_column_slice(rows, cols, z),
            RegularizerL::FirstDerivative { .. } => {
                let (p, q) = (rows, cols);
                let mut out = DMatrix::zeros(p, q);
                let mut k = 0;
                for j in 0..q {
                    for i in 0..p - 1 {
                        out[(i + 1, j)] += z[k];
                        out[(i, j)] -= z[k];
                        k += 1;
                    }
                }
                for j in 0..q - 1 {
                    for i in 0..p {
                        out[(i, j + 1)] += z[k];
                        out[(i, j)] -= z[k];
                        k += 1;
                    }
                }
                out
            }
        }
    }

    /// `Lᵀ W L x` with diagonal weights `w` (unit when `None`).
    pub fn gram_apply<T: Real>(&self, x: &DMatrix<T>, weights: Option<&[T]>) -> DMatrix<T> {
        let mut z = self.apply(x);
        if let Some(w) = weights {
            z.iter_mut().zip(w).for_each(|(v, w)| *v *= *w);
        }
        self.adjoint(&z, x.nrows(), x.ncols())
    }

    /// Explicit matrix for `rows × cols` images.
    pub fn to_dense<T: Real>(&self, rows: usize, cols: usize) -> DMatrix<T> {
        match self {
            RegularizerL::Identity => DMatrix::identity(rows * cols, rows * cols),
            RegularizerL::FirstDerivative { .. } => {
                let top = kron(&DMatrix::identity(cols, cols), &forward_difference::<T>(rows));
                let bottom = kron(&forward_difference::<T>(cols), &DMatrix::identity(rows, rows));
                let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), rows * cols);
                out.rows_mut(0, top.nrows()).copy_from(&top);
                out.rows_mut(top.nrows(), bottom.nrows()).copy_from(&bottom);
                out
            }
        }
    }

    /// Upper bound on `‖L‖₂²`.
    pub fn norm_sq_bound<T: Real>(&self) -> T {
        match self {
            RegularizerL::Identity => T::one(),
            RegularizerL::FirstDerivative { .. } => T::lit(8.0),
        }
    }

    /// Eigenvalues of the periodic analogue of `LᵀL` in 2-D DFT layout.
    pub fn periodic_symbol<T: Real>(&self, rows: usize, cols: usize) -> DMatrix<T> {
        match self {
            RegularizerL::Identity => DMatrix::from_element(rows, cols, T::one()),
            RegularizerL::FirstDerivative { .. } => {
                let two_pi = T::two_pi();
                let d = |k: usize, n: usize| {
                    let t = two_pi * T::from_usize_lossy(k) / T::from_usize_lossy(n);
                    T::lit(2.0) - T::lit(2.0) * t.cos()
                };
                DMatrix::from_fn(rows, cols, |k, l| d(k, rows) + d(l, cols))
            }
        }
    }
}
