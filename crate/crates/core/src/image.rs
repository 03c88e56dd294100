//! Grayscale images and their column-stacked vector form.

use nalgebra::{DMatrix, DVector};

use crate::error::{DeblurError, Result};
use crate::scalar::{norm2, Real};

/// A `p × q` grid of finite real intensities.
///
/// Storage is column-major, so the backing slice is exactly `vec(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T: Real> {
    data: DMatrix<T>,
}

impl<T: Real> Image<T> {
    pub fn new(data: DMatrix<T>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(DeblurError::EmptyImage);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(DeblurError::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "image must be non-empty");
        Self {
            data: DMatrix::zeros(rows, cols),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        Self::new(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds an image from row-major nested rows, mostly for literals in tests.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let p = rows.len();
        let q = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != q) {
            return Err(DeblurError::BadSize("ragged rows".into()));
        }
        Self::from_fn(p, q, |i, j| rows[i][j])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    /// Number of pixels `m = pq`.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.data
    }

    /// Column-stacked pixels, `(X₁₁, …, X_p1, X₁₂, …, X_pq)`.
    pub fn as_slice(&self) -> &[T] {
        self.data.as_slice()
    }

    pub fn vec(&self) -> DVector<T> {
        DVector::from_column_slice(self.data.as_slice())
    }

    pub fn unvec(x: &[T], rows: usize, cols: usize) -> Result<Self> {
        if x.len() != rows * cols {
            return Err(DeblurError::LengthMismatch {
                expected: rows * cols,
                actual: x.len(),
            });
        }
        Self::new(DMatrix::from_column_slice(rows, cols, x))
    }

    pub fn norm(&self) -> T {
        norm2(self.as_slice())
    }

    pub fn min(&self) -> T {
        self.data.iter().copied().fold(self.data[0], |a, b| a.min(b))
    }

    pub fn max(&self) -> T {
        self.data.iter().copied().fold(self.data[0], |a, b| a.max(b))
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().fold(T::zero(), |a, b| a + b)
    }

    pub fn map(&self, f: impl FnMut(T) -> T) -> Result<Self> {
        Self::new(self.data.map(f))
    }

    pub fn scale(&self, factor: T) -> Result<Self> {
        self.map(|v| v * factor)
    }

    /// Mirror image about the vertical axis.
    pub fn flip_lr(&self) -> Self {
        let q = self.cols();
        Self {
            data: DMatrix::from_fn(self.rows(), q, |i, j| self.data[(i, q - 1 - j)]),
        }
    }

    pub fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.shape() != (rows, cols) {
            return Err(DeblurError::DimensionMismatch {
                expected: (rows, cols),
                actual: self.shape(),
            });
        }
        Ok(())
    }

    /// Converts to another scalar type through `f64`.
    pub fn cast<U: Real>(&self) -> Image<U> {
        Image {
            data: self.data.map(|v| U::lit(v.as_f64())),
        }
    }
}

/// Column-stacking map `X ↦ vec(X)`.
pub fn vec<T: Real>(image: &Image<T>) -> DVector<T> {
    image.vec()
}

/// Inverse of [`vec`].
pub fn unvec<T: Real>(x: &[T], rows: usize, cols: usize) -> Result<Image<T>> {
    Image::unvec(x, rows, cols)
}

/// `‖x − x_ref‖₂ / ‖x_ref‖₂`.
pub fn relative_error<T: Real>(x: &[T], x_ref: &[T]) -> Result<T> {
    if x.len() != x_ref.len() {
        return Err(DeblurError::LengthMismatch {
            expected: x_ref.len(),
            actual: x.len(),
        });
    }
    let denom = norm2(x_ref);
    if denom == T::zero() {
        return Err(DeblurError::ZeroReference);
    }
    let diff: Vec<T> = x.iter().zip(x_ref).map(|(a, b)| *a - *b).collect();
    Ok(norm2(&diff) / denom)
}

/// Reported quality figures for a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport<T> {
    pub relative_error: T,
    pub residual_norm: T,
    pub solution_norm: T,
}

impl<T: Real> ErrorReport<T> {
    /// `blurred` is `A·x` for the reconstruction `x`; `b` is the data it should match.
    pub fn new(x: &Image<T>, x_ref: &Image<T>, blurred: &Image<T>, b: &Image<T>) -> Result<Self> {
        let relative_error = relative_error(x.as_slice(), x_ref.as_slice())?;
        let r: Vec<T> = blurred
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(a, c)| *a - *c)
            .collect();
        if blurred.len() != b.len() {
            return Err(DeblurError::LengthMismatch {
                expected: b.len(),
                actual: blurred.len(),
            });
        }
        Ok(Self {
            relative_error,
            residual_norm: norm2(&r),
            solution_norm: x.norm(),
        })
    }
}
