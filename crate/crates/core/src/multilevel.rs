//! Haar-wavelet restriction and structure-preserving operator coarsening.
//!
//! With `W₁` the low-pass half of the Haar transform, `R = W₁ ⊗ W₁` and
//! `P = Rᵀ`, the coarse operator `R (A_r ⊗ A_c) P` equals
//! `(W₁ A_r W₁ᵀ) ⊗ (W₁ A_c W₁ᵀ)`, and each factor keeps its Toeplitz or
//! circulant structure, so a hierarchy only ever stores factor vectors.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{DeblurError, Result};
use crate::image::Image;
use crate::operators::{BlurOperator, CirculantMatrix, OperatorKind, Representation, ToeplitzMatrix};
use crate::param::{discrepancy_lambda, select_tv_lambda};
use crate::regularization::{derivative_operator, tikhonov_separable_solve, tv_irls_solve, IrlsOptions};
use crate::scalar::Real;
use crate::svd::kron_svd;

/// Low-pass Haar block `W₁` for dimension `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarRestriction<T: Real> {
    pub p: usize,
    pub w1: DMatrix<T>,
}

/// `(p/2) × p` matrix with rows `(…, 1/√2, 1/√2, …)` on adjacent column pairs.
pub fn haar_w1<T: Real>(p: usize) -> Result<HaarRestriction<T>> {
    if p < 2 || p % 2 == 1 {
        return Err(DeblurError::OddDimension(p));
    }
    let h = T::one() / T::lit(2.0).sqrt();
    let w1 = DMatrix::from_fn(p / 2, p, |i, j| if j / 2 == i { h } else { T::zero() });
    Ok(HaarRestriction { p, w1 })
}

/// Full orthogonal transform `[W₁; W₂]`, with `W₂` the high-pass block.
pub fn haar_transform<T: Real>(p: usize) -> Result<DMatrix<T>> {
    let w1 = haar_w1::<T>(p)?.w1;
    let h = T::one() / T::lit(2.0).sqrt();
    Ok(DMatrix::from_fn(p, p, |i, j| {
        if i < p / 2 {
            w1[(i, j)]
        } else if j / 2 == i - p / 2 {
            if j % 2 == 0 {
                h
            } else {
                -h
            }
        } else {
            T::zero()
        }
    }))
}

/// `W₁ X W₁ᵀ`: every 2×2 block replaced by half its sum.
pub fn restrict_image<T: Real>(x: &Image<T>) -> Result<Image<T>> {
    let (p, q) = x.shape();
    for n in [p, q] {
        if n % 2 == 1 {
            return Err(DeblurError::OddDimension(n));
        }
    }
    let m = x.matrix();
    let half = T::lit(0.5);
    Image::from_fn(p / 2, q / 2, |i, j| {
        half * (m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j)] + m[(2 * i, 2 * j + 1)] + m[(2 * i + 1, 2 * j + 1)])
    })
}

/// `W₁ᵀ Y W₁`, the adjoint of [`restrict_image`].
pub fn prolong_image<T: Real>(y: &Image<T>) -> Result<Image<T>> {
    let m = y.matrix();
    let half = T::lit(0.5);
    Image::from_fn(2 * y.rows(), 2 * y.cols(), |i, j| half * m[(i / 2, j / 2)])
}

fn check_power_of_two(p: usize) -> Result<()> {
    if p < 2 || !p.is_power_of_two() {
        Err(DeblurError::NotPowerOfTwo(p))
    } else {
        Ok(())
    }
}

/// Toeplitz vector of `W₁ T W₁ᵀ` from the vector `t` (offsets `−(p−1)..p−1`) of `T`.
///
/// Filters `t` with `(½, 1, ½)` and keeps every other entry starting at the first.
pub fn coarsen_toeplitz<T: Real>(t: &[T], p: usize) -> Result<Vec<T>> {
    check_power_of_two(p)?;
    if t.len() != 2 * p - 1 {
        return Err(DeblurError::LengthMismatch {
            expected: 2 * p - 1,
            actual: t.len(),
        });
    }
    let at = |k: usize| t.get(k).copied().unwrap_or_else(T::zero);
    let half = T::lit(0.5);
    let filtered: Vec<T> = (0..t.len())
        .map(|k| half * at(k) + at(k + 1) + half * at(k + 2))
        .collect();
    Ok(filtered.into_iter().step_by(2).take(p - 1).collect())
}

/// First row of `W₁ C W₁ᵀ` from the first row of the circulant `C`.
pub fn coarsen_circulant<T: Real>(row: &[T], p: usize) -> Result<Vec<T>> {
    check_power_of_two(p)?;
    if row.len() != p {
        return Err(DeblurError::LengthMismatch {
            expected: p,
            actual: row.len(),
        });
    }
    let half = T::lit(0.5);
    Ok((0..p / 2)
        .map(|e| half * row[(2 * e + p - 1) % p] + row[2 * e] + half * row[(2 * e + 1) % p])
        .collect())
}

/// One level of a hierarchy.
#[derive(Debug, Clone)]
pub struct Level<T: Real> {
    pub op: BlurOperator<T>,
    pub b: Image<T>,
}

impl<T: Real> Level<T> {
    pub fn size(&self) -> usize {
        self.op.rows()
    }
}

/// Operators and data `A⁽ⁿ⁾, b⁽ⁿ⁾` for `n = 0..=depth`.
#[derive(Debug, Clone)]
pub struct LevelHierarchy<T: Real> {
    levels: Vec<Level<T>>,
}

/// Coarsens both Kronecker factors of a separable operator.
pub fn coarsen_operator<T: Real>(op: &BlurOperator<T>) -> Result<BlurOperator<T>> {
    match op.representation() {
        Representation::SeparableToeplitz { row, col } => Ok(BlurOperator::separable_toeplitz(
            ToeplitzMatrix::new(coarsen_toeplitz(row.vector(), row.dim())?)?,
            ToeplitzMatrix::new(coarsen_toeplitz(col.vector(), col.dim())?)?,
        )),
        Representation::SeparableCirculant { row, col } => Ok(BlurOperator::separable_circulant(
            CirculantMatrix::new(coarsen_circulant(row.first_row(), row.dim())?)?,
            CirculantMatrix::new(coarsen_circulant(col.first_row(), col.dim())?)?,
        )),
        _ => Err(DeblurError::NotSeparable),
    }
}

/// Builds `depth` coarse levels below `(op, b)`; the coarsest grid is at least 4×4.
pub fn build_hierarchy<T: Real>(op: &BlurOperator<T>, b: &Image<T>, depth: usize) -> Result<LevelHierarchy<T>> {
    if !op.is_separable() {
        return Err(DeblurError::NotSeparable);
    }
    b.check_shape(op.rows(), op.cols())?;
    let p = op.rows();
    if op.cols() != p {
        return Err(DeblurError::UnsupportedSize(format!(
            "hierarchies need square images, got {p}×{}",
            op.cols()
        )));
    }
    check_power_of_two(p)?;
    let s = p.trailing_zeros() as usize;
    if depth + 2 > s {
        return Err(DeblurError::TooDeep { depth, size: p });
    }
    let mut levels = vec![Level {
        op: op.clone(),
        b: b.clone(),
    }];
    for _ in 0..depth {
        let last = levels.last().expect("nonempty");
        let next = Level {
            op: coarsen_operator(&last.op)?,
            b: restrict_image(&last.b)?,
        };
        levels.push(next);
    }
    Ok(LevelHierarchy { levels })
}

/// 64-bit FNV-1a over the big-endian `f64` bits of `values`.
pub fn fnv1a<T: Real>(values: &[T]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for byte in v.as_f64().to_bits().to_be_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

impl<T: Real> LevelHierarchy<T> {
    /// Number of coarse levels below the original.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> Result<&Level<T>> {
        self.levels.get(n).ok_or(DeblurError::TooDeep {
            depth: n,
            size: self.levels[0].size(),
        })
    }

    pub fn levels(&self) -> &[Level<T>] {
        &self.levels
    }

    /// Structure tag per level.
    pub fn tags(&self) -> Vec<OperatorKind> {
        self.levels.iter().map(|l| l.op.kind()).collect()
    }

    /// `key=value` text recording size, structure and factor checksums per level.
    pub fn manifest(&self) -> String {
        let mut s = format!("depth={}\ncoarsening_offset=0\n", self.depth());
        for (n, l) in self.levels.iter().enumerate() {
            let (row, col) = match l.op.representation() {
                Representation::SeparableToeplitz { row, col } => (fnv1a(row.vector()), fnv1a(col.vector())),
                Representation::SeparableCirculant { row, col } => (fnv1a(row.first_row()), fnv1a(col.first_row())),
                _ => (0, 0),
            };
            let _ = write!(
                s,
                "level{n}.p={}\nlevel{n}.q={}\nlevel{n}.structure={}\nlevel{n}.row_checksum={row:016x}\nlevel{n}.col_checksum={col:016x}\n",
                l.op.rows(),
                l.op.cols(),
                l.op.kind(),
            );
        }
        s
    }
}

/// Regularization used on a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseMethod {
    /// Standard-form Tikhonov through the Kronecker SVD.
    Tikhonov,
    /// Total variation by IRLS.
    Tv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoarseSelector<T> {
    /// Noise norm at the solved level (see [`coarse_noise_norm`]).
    Discrepancy { delta: T, tau: T },
    /// `μ` for Tikhonov, `λ` for TV.
    Fixed(T),
}

/// Noise norm at level `n`: `‖Rⁿe‖` when `e` is known, else `delta / 2ⁿ`.
pub fn coarse_noise_norm<T: Real>(e: Option<&Image<T>>, delta: T, n: usize) -> Result<T> {
    match e {
        Some(e) => {
            let mut e = e.clone();
            for _ in 0..n {
                e = restrict_image(&e)?;
            }
            Ok(e.norm())
        }
        None => Ok(delta / T::lit(2f64.powi(n as i32))),
    }
}

#[derive(Debug, Clone)]
pub struct MultilevelSolution<T: Real> {
    /// Reconstruction on the solved level.
    pub x: Image<T>,
    /// `μ` (Tikhonov) or `λ` (TV) actually used.
    pub parameter: T,
    /// `Pⁿ x` on the finest grid; a visualization aid only.
    pub prolonged: Option<Image<T>>,
}

/// Solves `A⁽ⁿ⁾ x = b⁽ⁿ⁾` with the chosen regularization.
pub fn multilevel_solve<T: Real>(
    h: &LevelHierarchy<T>,
    n: usize,
    method: CoarseMethod,
    selector: CoarseSelector<T>,
    prolong: bool,
    irls: &IrlsOptions<T>,
) -> Result<MultilevelSolution<T>> {
    let level = h.level(n)?;
    let (x, parameter) = match method {
        CoarseMethod::Tikhonov => {
            let svd = kron_svd(&level.op)?;
            let mu = match selector {
                CoarseSelector::Fixed(mu) => mu,
                CoarseSelector::Discrepancy { delta, tau } => {
                    let l = discrepancy_lambda(&svd, &level.b, delta, tau)?;
                    l * l
                }
            };
            (tikhonov_separable_solve(&svd, &level.b, mu)?, mu)
        }
        CoarseMethod::Tv => {
            let reg = derivative_operator(level.op.rows())?;
            match selector {
                CoarseSelector::Fixed(lambda) => (tv_irls_solve(&level.op, &level.b, reg, lambda, irls)?.x, lambda),
                CoarseSelector::Discrepancy { delta, tau } => {
                    let (lambda, sol) = select_tv_lambda(&level.op, &level.b, reg, delta * tau, irls)?;
                    (sol.x, lambda)
                }
            }
        }
    };
    let prolonged = if prolong {
        let mut y = x.clone();
        for _ in 0..n {
            y = prolong_image(&y)?;
        }
        Some(y)
    } else {
        None
    };
    Ok(MultilevelSolution {
        x,
        parameter,
        prolonged,
    })
}
