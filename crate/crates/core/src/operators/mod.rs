//! Blur operators under zero, periodic and reflexive boundary conditions.
//!
//! Every representation acts on column-stacked images, so for a separable
//! operator `A = A_r ⊗ A_c` the product `A·vec(X)` is computed as
//! `vec(A_c X A_rᵀ)`, with `A_c` acting down columns (`p × p`) and `A_r`
//! across rows (`q × q`).

mod circulant;
mod descriptor;
mod toeplitz;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;

pub use circulant::CirculantMatrix;
pub use descriptor::{parse_key_values, OperatorDescriptor};
pub use toeplitz::ToeplitzMatrix;

use crate::error::{DeblurError, Result};
use crate::fft::{fft2_real, ifft2, real_part};
use crate::image::Image;
use crate::linalg::kron;
use crate::psf::GaussianPsf;
use crate::scalar::Real;

/// Largest `m = pq` for which dense `m × m` matrices are formed.
pub const DENSE_LIMIT: usize = 4096;

/// Assumption about the scene outside the field of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Pixels outside are black; blurred mass leaving the image is lost.
    Zero,
    /// The scene repeats; mass leaving one edge re-enters at the opposite one.
    Periodic,
    /// The scene is mirrored across each edge.
    Reflexive,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Zero => "zero",
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::Reflexive => "reflexive",
        })
    }
}

impl FromStr for BoundaryCondition {
    type Err = DeblurError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(Self::Zero),
            "periodic" => Ok(Self::Periodic),
            "reflexive" | "reflective" => Ok(Self::Reflexive),
            other => Err(DeblurError::InvalidParameter(format!(
                "unknown boundary condition {other:?}"
            ))),
        }
    }
}

/// Requested storage for [`build_operator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Dense,
    SeparableToeplitz,
    SeparableCirculant,
    Bccb,
    /// Matrix-free symmetric-padding convolution (reflexive only).
    Padded,
}

impl OperatorKind {
    /// Storage used when the caller has no preference.
    pub fn natural_for(bc: BoundaryCondition) -> Self {
        match bc {
            BoundaryCondition::Zero => Self::SeparableToeplitz,
            BoundaryCondition::Periodic => Self::SeparableCirculant,
            BoundaryCondition::Reflexive => Self::Padded,
        }
    }

    fn compatible(self, bc: BoundaryCondition) -> bool {
        use BoundaryCondition::*;
        matches!(
            (self, bc),
            (Self::Dense, _)
                | (Self::SeparableToeplitz, Zero)
                | (Self::SeparableCirculant | Self::Bccb, Periodic)
                | (Self::Padded, Reflexive)
        )
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Dense => "dense",
            OperatorKind::SeparableToeplitz => "separable-toeplitz",
            OperatorKind::SeparableCirculant => "separable-circulant",
            OperatorKind::Bccb => "bccb",
            OperatorKind::Padded => "padded",
        })
    }
}

impl FromStr for OperatorKind {
    type Err = DeblurError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(Self::Dense),
            "separable-toeplitz" | "toeplitz" | "bttb" => Ok(Self::SeparableToeplitz),
            "separable-circulant" | "circulant" => Ok(Self::SeparableCirculant),
            "bccb" | "fft" => Ok(Self::Bccb),
            "padded" => Ok(Self::Padded),
            other => Err(DeblurError::InvalidParameter(format!(
                "unknown operator kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Representation<T: Real> {
    Dense(DMatrix<T>),
    SeparableToeplitz {
        row: ToeplitzMatrix<T>,
        col: ToeplitzMatrix<T>,
    },
    SeparableCirculant {
        row: CirculantMatrix<T>,
        col: CirculantMatrix<T>,
    },
    Bccb {
        /// `DFT2(a_s)`, the eigenvalues of the BCCB matrix.
        eig: DMatrix<Complex<T>>,
        /// The PSF embedded in a `p × q` array, center moved to `(0, 0)`.
        psf_shifted: DMatrix<T>,
    },
    Padded {
        row_kernel: Vec<T>,
        col_kernel: Vec<T>,
    },
}

/// Linear blur map on `p × q` images.
#[derive(Debug, Clone)]
pub struct BlurOperator<T: Real> {
    rows: usize,
    cols: usize,
    bc: BoundaryCondition,
    repr: Representation<T>,
}

/// Builds the blur for `psf` on `rows × cols` images.
pub fn build_operator<T: Real>(
    psf: &GaussianPsf<T>,
    bc: BoundaryCondition,
    rows: usize,
    cols: usize,
    kind: OperatorKind,
) -> Result<BlurOperator<T>> {
    BlurOperator::from_psf(psf, bc, rows, cols, kind)
}

impl<T: Real> BlurOperator<T> {
    pub fn from_psf(
        psf: &GaussianPsf<T>,
        bc: BoundaryCondition,
        rows: usize,
        cols: usize,
        kind: OperatorKind,
    ) -> Result<Self> {
        if !kind.compatible(bc) {
            return Err(DeblurError::IncompatibleVariant {
                variant: kind.to_string(),
                bc: bc.to_string(),
            });
        }
        if rows == 0 || cols == 0 {
            return Err(DeblurError::BadSize("operator dimensions must be positive".into()));
        }
        let k = psf.normalized_kernel1d();
        match kind {
            OperatorKind::SeparableToeplitz => Ok(Self::separable_toeplitz(
                ToeplitzMatrix::from_kernel(&k, cols)?,
                ToeplitzMatrix::from_kernel(&k, rows)?,
            )),
            OperatorKind::SeparableCirculant => Ok(Self::separable_circulant(
                CirculantMatrix::from_kernel(&k, cols)?,
                CirculantMatrix::from_kernel(&k, rows)?,
            )),
            OperatorKind::Bccb => {
                let c = psf.half_width();
                Self::bccb_from_kernel(psf.kernel2d(), (c, c), rows, cols)
            }
            OperatorKind::Padded => Ok(Self::padded(k.clone(), k, rows, cols)),
            OperatorKind::Dense => {
                let structured = Self::from_psf(psf, bc, rows, cols, OperatorKind::natural_for(bc))?;
                Ok(Self::dense(structured.assemble_dense()?, rows, cols, bc)?)
            }
        }
    }

    /// `A_r ⊗ A_c` with Toeplitz factors (BTTB).
    pub fn separable_toeplitz(row: ToeplitzMatrix<T>, col: ToeplitzMatrix<T>) -> Self {
        Self {
            rows: col.dim(),
            cols: row.dim(),
            bc: BoundaryCondition::Zero,
            repr: Representation::SeparableToeplitz { row, col },
        }
    }

    /// `A_r ⊗ A_c` with circulant factors (BCCB).
    pub fn separable_circulant(row: CirculantMatrix<T>, col: CirculantMatrix<T>) -> Self {
        Self {
            rows: col.dim(),
            cols: row.dim(),
            bc: BoundaryCondition::Periodic,
            repr: Representation::SeparableCirculant { row, col },
        }
    }

    /// BCCB operator from an arbitrary 2-D kernel whose center sits at `center`.
    pub fn bccb_from_kernel(kernel: &DMatrix<T>, center: (usize, usize), rows: usize, cols: usize) -> Result<Self> {
        let (kr, kc) = kernel.shape();
        if kr > rows || kc > cols {
            return Err(DeblurError::KernelTooWide {
                kernel: kr.max(kc),
                dim: rows.min(cols),
            });
        }
        let mut shifted = DMatrix::zeros(rows, cols);
        for i in 0..kr {
            for j in 0..kc {
                let di = (i as isize - center.0 as isize).rem_euclid(rows as isize) as usize;
                let dj = (j as isize - center.1 as isize).rem_euclid(cols as isize) as usize;
                shifted[(di, dj)] += kernel[(i, j)];
            }
        }
        Ok(Self {
            rows,
            cols,
            bc: BoundaryCondition::Periodic,
            repr: Representation::Bccb {
                eig: fft2_real(&shifted),
                psf_shifted: shifted,
            },
        })
    }

    pub fn dense(matrix: DMatrix<T>, rows: usize, cols: usize, bc: BoundaryCondition) -> Result<Self> {
        let m = rows * cols;
        if matrix.shape() != (m, m) {
            return Err(DeblurError::DimensionMismatch {
                expected: (m, m),
                actual: matrix.shape(),
            });
        }
        Ok(Self {
            rows,
            cols,
            bc,
            repr: Representation::Dense(matrix),
        })
    }

    /// Reflexive boundary conditions applied by symmetric padding.
    pub fn padded(row_kernel: Vec<T>, col_kernel: Vec<T>, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bc: BoundaryCondition::Reflexive,
            repr: Representation::Padded { row_kernel, col_kernel },
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of unknowns `m = pq`.
    pub fn size(&self) -> usize {
        self.rows * self.cols
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn representation(&self) -> &Representation<T> {
        &self.repr
    }

    pub fn kind(&self) -> OperatorKind {
        match self.repr {
            Representation::Dense(_) => OperatorKind::Dense,
            Representation::SeparableToeplitz { .. } => OperatorKind::SeparableToeplitz,
            Representation::SeparableCirculant { .. } => OperatorKind::SeparableCirculant,
            Representation::Bccb { .. } => OperatorKind::Bccb,
            Representation::Padded { .. } => OperatorKind::Padded,
        }
    }

    pub fn is_separable(&self) -> bool {
        matches!(
            self.repr,
            Representation::SeparableToeplitz { .. } | Representation::SeparableCirculant { .. }
        )
    }

    /// Dense `(A_r, A_c)` factors of a separable operator.
    pub fn dense_factors(&self) -> Result<(DMatrix<T>, DMatrix<T>)> {
        match &self.repr {
            Representation::SeparableToeplitz { row, col } => Ok((row.to_dense(), col.to_dense())),
            Representation::SeparableCirculant { row, col } => Ok((row.to_dense(), col.to_dense())),
            _ => Err(DeblurError::NotSeparable),
        }
    }

    /// Same operator held as a BCCB eigenvalue array.
    pub fn to_bccb(&self) -> Result<Self> {
        match &self.repr {
            Representation::Bccb { .. } => Ok(self.clone()),
            Representation::SeparableCirculant { row, col } => {
                let cc = col.first_column();
                let rc = row.first_column();
                let shifted = DMatrix::from_fn(self.rows, self.cols, |i, j| cc[i] * rc[j]);
                Ok(Self {
                    rows: self.rows,
                    cols: self.cols,
                    bc: self.bc,
                    repr: Representation::Bccb {
                        eig: fft2_real(&shifted),
                        psf_shifted: shifted,
                    },
                })
            }
            _ => Err(DeblurError::WrongVariant(format!(
                "{} operator has no BCCB form",
                self.kind()
            ))),
        }
    }

    /// Applies `A` (or `Aᵀ`) to an image.
    pub fn apply(&self, x: &Image<T>, adjoint: bool) -> Result<Image<T>> {
        x.check_shape(self.rows, self.cols)?;
        Image::new(self.apply_matrix(x.matrix(), adjoint))
    }

    /// Unchecked kernel of [`apply`](Self::apply) on raw matrices.
    pub(crate) fn apply_matrix(&self, x: &DMatrix<T>, adjoint: bool) -> DMatrix<T> {
        debug_assert_eq!(x.shape(), (self.rows, self.cols));
        match &self.repr {
            Representation::Dense(a) => {
                let v = nalgebra::DVector::from_column_slice(x.as_slice());
                let y = if adjoint { a.tr_mul(&v) } else { a * v };
                DMatrix::from_column_slice(self.rows, self.cols, y.as_slice())
            }
            Representation::SeparableToeplitz { row, col } => {
                if adjoint {
                    separable(&col.transpose(), &row.transpose(), x, |m, v| m.apply_columns(v))
                } else {
                    separable(col, row, x, |m, v| m.apply_columns(v))
                }
            }
            Representation::SeparableCirculant { row, col } => {
                if adjoint {
                    separable(&col.transpose(), &row.transpose(), x, |m, v| m.apply_columns(v))
                } else {
                    separable(col, row, x, |m, v| m.apply_columns(v))
                }
            }
            Representation::Bccb { eig, .. } => {
                let mut spec = fft2_real(x);
                spec.zip_apply(eig, |s, e| *s *= if adjoint { e.conj() } else { e });
                real_part(&ifft2(&spec)).0
            }
            Representation::Padded { row_kernel, col_kernel } => {
                let y = reflect_columns(col_kernel, x, adjoint);
                reflect_columns(row_kernel, &y.transpose(), adjoint).transpose()
            }
        }
    }

    /// Explicit `m × m` matrix; column `ℓ` is the blur of the `ℓ`-th single pixel.
    pub fn assemble_dense(&self) -> Result<DMatrix<T>> {
        let m = self.size();
        if m > DENSE_LIMIT {
            return Err(DeblurError::TooLarge(m, DENSE_LIMIT));
        }
        Ok(match &self.repr {
            Representation::Dense(a) => a.clone(),
            Representation::SeparableToeplitz { row, col } => kron(&row.to_dense(), &col.to_dense()),
            Representation::SeparableCirculant { row, col } => kron(&row.to_dense(), &col.to_dense()),
            Representation::Bccb { psf_shifted, .. } => {
                let (p, q) = (self.rows, self.cols);
                DMatrix::from_fn(m, m, |r, c| {
                    let (i, j) = (r % p, r / p);
                    let (k, l) = (c % p, c / p);
                    psf_shifted[((i + p - k) % p, (j + q - l) % q)]
                })
            }
            Representation::Padded { .. } => {
                let mut out = DMatrix::zeros(m, m);
                let mut e = DMatrix::zeros(self.rows, self.cols);
                for c in 0..m {
                    e[c] = T::one();
                    let col = self.apply_matrix(&e, false);
                    out.column_mut(c).copy_from_slice(col.as_slice());
                    e[c] = T::zero();
                }
                out
            }
        })
    }

    /// Eigenvalues of a BCCB matrix close to this operator, in 2-D DFT
    /// layout, when one is cheaply available. Used for preconditioning.
    pub fn circulant_symbol(&self) -> Option<DMatrix<Complex<T>>> {
        let outer = |c: Vec<Complex<T>>, r: Vec<Complex<T>>| DMatrix::from_fn(self.rows, self.cols, |i, j| c[i] * r[j]);
        match &self.repr {
            Representation::Bccb { eig, .. } => Some(eig.clone()),
            Representation::SeparableCirculant { row, col } => Some(outer(col.eigenvalues(), row.eigenvalues())),
            Representation::SeparableToeplitz { row, col } => {
                let c = CirculantMatrix::from_first_column(&col.wrapped_column()).ok()?;
                let r = CirculantMatrix::from_first_column(&row.wrapped_column()).ok()?;
                Some(outer(c.eigenvalues(), r.eigenvalues()))
            }
            Representation::Padded { row_kernel, col_kernel } => {
                let c = CirculantMatrix::from_kernel(col_kernel, self.rows).ok()?;
                let r = CirculantMatrix::from_kernel(row_kernel, self.cols).ok()?;
                Some(outer(c.eigenvalues(), r.eigenvalues()))
            }
            Representation::Dense(_) => None,
        }
    }
}

/// `A_c X A_rᵀ` given a routine that multiplies a factor into columns.
fn separable<T: Real, M>(
    col: &M,
    row: &M,
    x: &DMatrix<T>,
    apply: impl Fn(&M, &DMatrix<T>) -> DMatrix<T>,
) -> DMatrix<T> {
    let y = apply(col, x);
    apply(row, &y.transpose()).transpose()
}

/// Index into the half-sample symmetric extension of `0..n`.
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let r = i.rem_euclid(period) as usize;
    if r < n {
        r
    } else {
        2 * n - 1 - r
    }
}

/// Convolves every column with `kernel` over the mirrored extension, or
/// applies the transpose of that map.
fn reflect_columns<T: Real>(kernel: &[T], x: &DMatrix<T>, adjoint: bool) -> DMatrix<T> {
    let n = x.nrows();
    let half = (kernel.len() / 2) as isize;
    let mut out = DMatrix::zeros(n, x.ncols());
    for j in 0..x.ncols() {
        for k in 0..n {
            for (idx, w) in kernel.iter().enumerate() {
                let d = idx as isize - half;
                let src = reflect(k as isize - d, n);
                if adjoint {
                    out[(src, j)] += *w * x[(k, j)];
                } else {
                    out[(k, j)] += *w * x[(src, j)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
