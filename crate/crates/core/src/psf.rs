//! Gaussian point-spread functions and synthetic test scenes.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{DeblurError, Result};
use crate::image::Image;
use crate::scalar::Real;

/// Unnormalized Gaussian factor `exp(−½(d/s)²)` for `d = −half_width..=half_width`.
pub fn gaussian_kernel_1d<T: Real>(half_width: usize, spread: T) -> Result<Vec<T>> {
    if !(spread > T::zero()) || !spread.is_finite() {
        return Err(DeblurError::InvalidSpread(spread.as_f64()));
    }
    let h = half_width as isize;
    Ok((-h..=h)
        .map(|d| {
            let r = T::lit(d as f64) / spread;
            (-T::lit(0.5) * r * r).exp()
        })
        .collect())
}

/// Truncation radius used when none is given: `⌈4s⌉`.
pub fn default_half_width(spread: f64) -> usize {
    (4.0 * spread).ceil().max(0.0) as usize
}

/// Truncated, normalized, separable Gaussian blur kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPsf<T: Real> {
    spread: T,
    half_width: usize,
    kernel1d: Vec<T>,
    kernel2d: DMatrix<T>,
    normalization: T,
}

impl<T: Real> GaussianPsf<T> {
    pub fn new(half_width: usize, spread: T) -> Result<Self> {
        let kernel1d = gaussian_kernel_1d(half_width, spread)?;
        let total: T = kernel1d.iter().copied().fold(T::zero(), |a, b| a + b);
        let normalization = total * total;
        let n = kernel1d.len();
        let kernel2d = DMatrix::from_fn(n, n, |i, j| kernel1d[i] * kernel1d[j] / normalization);
        Ok(Self {
            spread,
            half_width,
            kernel1d,
            kernel2d,
            normalization,
        })
    }

    /// Gaussian truncated at the default radius `⌈4s⌉`.
    pub fn with_default_width(spread: T) -> Result<Self> {
        Self::new(default_half_width(spread.as_f64()), spread)
    }

    pub fn spread(&self) -> T {
        self.spread
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Width `2·half_width + 1` of the kernel support.
    pub fn width(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Unnormalized 1-D factor.
    pub fn kernel1d(&self) -> &[T] {
        &self.kernel1d
    }

    /// 1-D factor scaled to unit sum; its outer product with itself is `kernel2d`.
    pub fn normalized_kernel1d(&self) -> Vec<T> {
        let root = self.normalization.sqrt();
        self.kernel1d.iter().map(|v| *v / root).collect()
    }

    pub fn kernel2d(&self) -> &DMatrix<T> {
        &self.kernel2d
    }

    /// The constant `N` making the 2-D kernel sum to one.
    pub fn normalization(&self) -> T {
        self.normalization
    }
}

/// Synthetic scenes used by the demos and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    /// Block letter H, binary and mirror-symmetric.
    H,
    /// Single illuminated pixel at the center.
    SinglePixel,
}

impl fmt::Display for SceneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SceneKind::H => "H",
            SceneKind::SinglePixel => "single_pixel",
        })
    }
}

impl FromStr for SceneKind {
    type Err = DeblurError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(SceneKind::H),
            "single_pixel" | "single-pixel" | "pixel" => Ok(SceneKind::SinglePixel),
            other => Err(DeblurError::InvalidParameter(format!("unknown scene {other:?}"))),
        }
    }
}

/// Generates a `p × p` test scene.
pub fn generate_test_image<T: Real>(kind: SceneKind, p: usize) -> Result<Image<T>> {
    match kind {
        SceneKind::SinglePixel => {
            if p == 0 {
                return Err(DeblurError::UnsupportedSize("p must be positive".into()));
            }
            let c = p / 2;
            Image::from_fn(p, p, |i, j| if i == c && j == c { T::one() } else { T::zero() })
        }
        SceneKind::H => {
            if p < 8 {
                return Err(DeblurError::UnsupportedSize(format!("H scene needs p >= 8, got {p}")));
            }
            let stroke = p / 8;
            let margin = p / 4;
            let bar_top = margin;
            let bar_bottom = p - margin;
            let cross_top = p / 2 - stroke / 2;
            Image::from_fn(p, p, |i, j| {
                let in_rows = i >= bar_top && i < bar_bottom;
                let left = j >= margin && j < margin + stroke;
                let right = j >= p - margin - stroke && j < p - margin;
                let cross = i >= cross_top && i < cross_top + stroke && j >= margin && j < p - margin;
                if (in_rows && (left || right)) || cross {
                    T::one()
                } else {
                    T::zero()
                }
            })
        }
    }
}
