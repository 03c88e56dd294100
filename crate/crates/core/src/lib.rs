//! Image deblurring toolkit: structured blur operators, spectral filtering,
//! Tikhonov and total-variation solvers, regularization-parameter selection
//! and Haar-wavelet multilevel coarsening.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are what most callers want.

pub mod error;
pub mod export;
pub mod fft;
pub mod image;
pub mod linalg;
pub mod multilevel;
pub mod noise;
pub mod operators;
pub mod param;
pub mod pgm;
pub mod psf;
pub mod regularization;
pub mod scalar;
pub mod svd;

pub use error::{DeblurError, Result};
pub use image::{relative_error, unvec, vec, ErrorReport, Image};
pub use multilevel::{build_hierarchy, haar_w1, multilevel_solve, restrict_image, LevelHierarchy};
pub use noise::{NoiseKind, NoiseSpec};
pub use operators::{
    build_operator, BlurOperator, BoundaryCondition, CirculantMatrix, OperatorDescriptor, OperatorKind, ToeplitzMatrix,
};
pub use param::{discrepancy_lambda, lcurve_corner, lcurve_scan, LCurvePoint};
pub use psf::{gaussian_kernel_1d, generate_test_image, GaussianPsf, SceneKind};
pub use regularization::{
    derivative_operator, general_tikhonov_solve, tikhonov_fft_solve, tikhonov_separable_solve, tv_irls_solve,
    IrlsOptions, RegularizerL, TvSolution,
};
pub use scalar::Real;
pub use svd::{filtered_solve, picard_coefficients, svd_of, FilterSpec, PicardData, SvdFactorization};

pub type Image64 = Image<f64>;
pub type Image32 = Image<f32>;
pub type BlurOperator64 = BlurOperator<f64>;
pub type BlurOperator32 = BlurOperator<f32>;
pub type GaussianPsf64 = GaussianPsf<f64>;
