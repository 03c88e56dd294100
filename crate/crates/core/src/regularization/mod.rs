//! General-form Tikhonov, structured fast Tikhonov and total-variation solvers.
//!
//! All solvers use a single penalty multiplier `μ`; standard-form Tikhonov
//! with parameter `λ` corresponds to `μ = λ²`.

mod derivative;
mod tv;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub use derivative::{derivative_operator, forward_difference, RegularizerL};
pub use tv::{tv_irls_solve, tv_irls_with_system, tv_objective, IrlsOptions, TraceRow, TvSolution, TV_CG_MARGIN};

use crate::error::{DeblurError, Result};
use crate::fft::{fft2_real, ifft2, real_part};
use crate::image::Image;
use crate::operators::{BlurOperator, Representation};
use crate::scalar::{norm2, Real};
use crate::svd::{SvdFactorization, SvdFactors};

/// Largest `m` solved by dense Cholesky; bigger systems use preconditioned CG.
pub const DENSE_SOLVE_LIMIT: usize = 1024;

const MAX_CG_ITERATIONS: usize = 20_000;
const STALL_ITERATIONS: usize = 200;

/// Normal equations `(AᵀA + μ LᵀWL) x = Aᵀb` for a fixed operator and data.
///
/// Caches what does not depend on `μ` or `W`, so parameter searches and
/// reweighting loops pay for it once.
pub struct TikhonovSystem<'a, T: Real> {
    op: &'a BlurOperator<T>,
    reg: RegularizerL,
    atb: DMatrix<T>,
    ata: Option<DMatrix<T>>,
    ltl: Option<DMatrix<T>>,
    l_dense: Option<DMatrix<T>>,
    precond: Preconditioner<T>,
    op_norm_sq: T,
    cg_margin: T,
}

/// Approximate inverse of the normal matrix used inside CG.
enum Preconditioner<T: Real> {
    /// Exact on `AᵀA = (V_r Σ_r² V_rᵀ) ⊗ (V_c Σ_c² V_cᵀ)`; `LᵀL` replaced by
    /// its diagonal in the same basis.
    Kron {
        v_r: DMatrix<T>,
        v_c: DMatrix<T>,
        /// `σ_c,i² σ_r,j²`
        gram: DMatrix<T>,
        /// Diagonal of `(V_r ⊗ V_c)ᵀ LᵀL (V_r ⊗ V_c)`.
        penalty: DMatrix<T>,
    },
    /// `|â|² + μ w̄ |l̂|²` of the nearest BCCB system.
    Fourier {
        a2: DMatrix<T>,
        l2: DMatrix<T>,
    },
    Identity,
}

impl<T: Real> Preconditioner<T> {
    fn new(op: &BlurOperator<T>, reg: &RegularizerL) -> Result<Self> {
        let (p, q) = (op.rows(), op.cols());
        if op.is_separable() {
            let (a_r, a_c) = op.dense_factors()?;
            let svd = SvdFactorization::from_factors(&a_r, &a_c);
            let SvdFactors::Kron {
                sigma_r,
                v_r,
                sigma_c,
                v_c,
                ..
            } = svd.factors()
            else {
                unreachable!("from_factors always yields Kronecker factors")
            };
            let diag = |v: &DMatrix<T>| -> Vec<T> {
                let dv = forward_difference::<T>(v.nrows()) * v;
                dv.column_iter().map(|c| c.norm_squared()).collect()
            };
            let penalty = match reg {
                RegularizerL::Identity => DMatrix::from_element(p, q, T::one()),
                RegularizerL::FirstDerivative { .. } => {
                    let (dc, dr) = (diag(v_c), diag(v_r));
                    DMatrix::from_fn(p, q, |i, j| dc[i] + dr[j])
                }
            };
            let gram = DMatrix::from_fn(p, q, |i, j| {
                let s = sigma_c[i] * sigma_r[j];
                s * s
            });
            return Ok(Preconditioner::Kron {
                v_r: v_r.clone(),
                v_c: v_c.clone(),
                gram,
                penalty,
            });
        }
        Ok(match op.circulant_symbol() {
            Some(sym) => Preconditioner::Fourier {
                a2: sym.map(|c| c.norm_sqr()),
                l2: reg.periodic_symbol(p, q),
            },
            None => Preconditioner::Identity,
        })
    }

    fn apply(&self, r: &DMatrix<T>, shift: T) -> DMatrix<T> {
        let guard = |d: T| if d > T::zero() { d } else { T::one() };
        match self {
            Preconditioner::Kron {
                v_r,
                v_c,
                gram,
                penalty,
            } => {
                let mut y = v_c.tr_mul(r) * v_r;
                y.zip_zip_apply(gram, penalty, |y, g, l| *y = *y / guard(g + shift * l));
                v_c * y * v_r.transpose()
            }
            Preconditioner::Fourier { a2, l2 } => {
                let mut s = fft2_real(r);
                s.zip_zip_apply(a2, l2, |c, a, l| *c = *c / guard(a + shift * l));
                real_part(&ifft2(&s)).0
            }
            Preconditioner::Identity => r.clone(),
        }
    }
}

/// Estimates `‖A‖₂²` by power iteration on `AᵀA`.
fn operator_norm_sq<T: Real>(op: &BlurOperator<T>) -> T {
    let (p, q) = (op.rows(), op.cols());
    let mut x = DMatrix::from_fn(p, q, |i, j| T::one() + T::lit(((i * 7 + j * 13) % 5) as f64 * 0.1));
    let mut est = T::zero();
    for _ in 0..30 {
        let n = x.norm();
        if n == T::zero() {
            return T::zero();
        }
        x /= n;
        let y = op.apply_matrix(&op.apply_matrix(&x, false), true);
        est = y.norm();
        x = y;
    }
    est
}

impl<'a, T: Real> TikhonovSystem<'a, T> {
    pub fn new(op: &'a BlurOperator<T>, b: &Image<T>, reg: RegularizerL) -> Result<Self> {
        b.check_shape(op.rows(), op.cols())?;
        reg.check(op.rows(), op.cols())?;
        check_null_space(op, &reg)?;
        let (p, q) = (op.rows(), op.cols());
        let atb = op.apply_matrix(b.matrix(), true);
        let (ata, ltl, l_dense) = if op.size() <= DENSE_SOLVE_LIMIT {
            let a = op.assemble_dense()?;
            let l = reg.to_dense::<T>(p, q);
            (Some(a.tr_mul(&a)), Some(l.tr_mul(&l)), Some(l))
        } else {
            (None, None, None)
        };
        let precond = Preconditioner::new(op, &reg)?;
        Ok(Self {
            op,
            reg,
            atb,
            ata,
            ltl,
            l_dense,
            precond,
            cg_margin: T::lit(1e-3),
            op_norm_sq: operator_norm_sq(op),
        })
    }

    /// CG stops at `margin` times the accepted backward error. Smaller values
    /// give smoother residuals as functions of `μ`; larger ones are faster.
    pub fn with_cg_margin(mut self, margin: T) -> Self {
        self.cg_margin = margin;
        self
    }

    pub fn operator(&self) -> &BlurOperator<T> {
        self.op
    }

    pub fn regularizer(&self) -> RegularizerL {
        self.reg
    }

    fn apply_normal(&self, x: &DMatrix<T>, mu: T, weights: Option<&[T]>) -> DMatrix<T> {
        let ax = self.op.apply_matrix(x, false);
        let mut y = self.op.apply_matrix(&ax, true);
        y += self.reg.gram_apply(x, weights) * mu;
        y
    }

    fn normal_norm(&self, mu: T, weights: Option<&[T]>) -> T {
        let wmax = weights
            .map(|w| w.iter().fold(T::zero(), |m, v| m.max(*v)))
            .unwrap_or_else(T::one);
        self.op_norm_sq + mu * wmax * self.reg.norm_sq_bound::<T>()
    }

    /// Solves the weighted normal equations, starting from `x0` when iterative.
    pub fn solve(&self, mu: T, weights: Option<&[T]>, x0: Option<&DMatrix<T>>) -> Result<DMatrix<T>> {
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(DeblurError::InvalidParameter(format!("penalty must be > 0, got {mu}")));
        }
        let (p, q) = (self.op.rows(), self.op.cols());
        let x = match (&self.ata, &self.ltl, &self.l_dense) {
            (Some(ata), Some(ltl), Some(l)) => {
                let mut m = ata.clone();
                match weights {
                    None => m += ltl * mu,
                    Some(w) => {
                        let wl = DMatrix::from_fn(l.nrows(), l.ncols(), |i, j| w[i] * l[(i, j)]);
                        m += l.tr_mul(&wl) * mu;
                    }
                }
                let rhs = DVector::from_column_slice(self.atb.as_slice());
                let chol = m
                    .cholesky()
                    .ok_or_else(|| DeblurError::NotConverged("normal matrix is not positive definite".into()))?;
                let x = chol.solve(&rhs);
                DMatrix::from_column_slice(p, q, x.as_slice())
            }
            _ => self.pcg(mu, weights, x0)?,
        };
        let r = &self.atb - self.apply_normal(&x, mu, weights);
        let scale = self.normal_norm(mu, weights) * x.norm() + self.atb.norm();
        if !(r.norm() <= T::solver_tol() * scale) {
            return Err(DeblurError::NotConverged(format!(
                "normal-equation backward error {} above {}",
                r.norm() / scale,
                T::solver_tol()
            )));
        }
        Ok(x)
    }

    /// Preconditioned CG on the normal equations.
    fn pcg(&self, mu: T, weights: Option<&[T]>, x0: Option<&DMatrix<T>>) -> Result<DMatrix<T>> {
        let (p, q) = (self.op.rows(), self.op.cols());
        let wbar = weights
            .map(|w| w.iter().fold(T::zero(), |a, v| a + *v) / T::from_usize_lossy(w.len().max(1)))
            .unwrap_or_else(T::one);
        let apply_precond = |r: &DMatrix<T>| self.precond.apply(r, mu * wbar);
        let bnorm = self.atb.norm();
        let mnorm = self.normal_norm(mu, weights);
        let target = |x: &DMatrix<T>| T::solver_tol() * self.cg_margin * (mnorm * x.norm() + bnorm);
        let mut x = x0.cloned().unwrap_or_else(|| DMatrix::zeros(p, q));
        let mut r = &self.atb - self.apply_normal(&x, mu, weights);
        let mut z = apply_precond(&r);
        let mut d = z.clone();
        let mut rz = r.dot(&z);
        let mut best = (r.norm(), 0usize);
        for it in 0..MAX_CG_ITERATIONS {
            let rn = r.norm();
            if rn <= target(&x) {
                break;
            }
            if rn < best.0 {
                best = (rn, it);
            } else if it - best.1 > STALL_ITERATIONS {
                break;
            }
            let md = self.apply_normal(&d, mu, weights);
            let curv = d.dot(&md);
            if !(curv > T::zero()) {
                break;
            }
            let alpha = rz / curv;
            x += &d * alpha;
            r -= &md * alpha;
            z = apply_precond(&r);
            let rz_new = r.dot(&z);
            let beta = rz_new / rz;
            rz = rz_new;
            d = &z + d * beta;
        }
        // the caller applies the backward-error acceptance test
        Ok(x)
    }
}

/// Rejects `L` whose null space meets that of `A`.
fn check_null_space<T: Real>(op: &BlurOperator<T>, reg: &RegularizerL) -> Result<()> {
    match reg {
        RegularizerL::Identity => Ok(()),
        RegularizerL::FirstDerivative { .. } => {
            // N(L) is the constants, so the condition reduces to A·1 ≠ 0
            let ones = DMatrix::from_element(op.rows(), op.cols(), T::one());
            let a1 = op.apply_matrix(&ones, false);
            if a1.norm() <= T::eps().sqrt() * ones.norm() {
                Err(DeblurError::NullSpaceOverlap)
            } else {
                Ok(())
            }
        }
    }
}

/// Solves `(AᵀA + μ LᵀL) x = Aᵀb`.
pub fn general_tikhonov_solve<T: Real>(
    op: &BlurOperator<T>,
    b: &Image<T>,
    reg: RegularizerL,
    mu: T,
) -> Result<Image<T>> {
    let sys = TikhonovSystem::new(op, b, reg)?;
    Image::new(sys.solve(mu, None, None)?)
}

/// Tikhonov solution for a BCCB operator by pointwise division in Fourier space.
pub fn tikhonov_fft_solve<T: Real>(op: &BlurOperator<T>, b: &Image<T>, mu: T) -> Result<Image<T>> {
    let Representation::Bccb { eig, .. } = op.representation() else {
        return Err(DeblurError::WrongVariant(format!(
            "FFT Tikhonov needs a BCCB operator, got {}",
            op.kind()
        )));
    };
    if !(mu > T::zero()) {
        return Err(DeblurError::InvalidParameter(format!("penalty must be > 0, got {mu}")));
    }
    b.check_shape(op.rows(), op.cols())?;
    let mut spec = fft2_real(b.matrix());
    spec.zip_apply(eig, |s, a| {
        *s = a.conj() * *s / Complex::new(a.norm_sqr() + mu, T::zero());
    });
    let (x, _imag) = real_part(&ifft2(&spec));
    Image::new(x)
}

/// Tikhonov solution through the Kronecker SVD: `V_c (D ⊙ Uᵀ_c B U_r / (D² + μ)) V_rᵀ`.
pub fn tikhonov_separable_solve<T: Real>(svd: &SvdFactorization<T>, b: &Image<T>, mu: T) -> Result<Image<T>> {
    let SvdFactors::Kron {
        u_r,
        sigma_r,
        v_r,
        u_c,
        sigma_c,
        v_c,
        ..
    } = svd.factors()
    else {
        return Err(DeblurError::WrongVariant(
            "separable Tikhonov needs a Kronecker SVD".into(),
        ));
    };
    if !(mu > T::zero()) {
        return Err(DeblurError::InvalidParameter(format!("penalty must be > 0, got {mu}")));
    }
    b.check_shape(svd.rows(), svd.cols())?;
    let mut beta = u_c.tr_mul(b.matrix()) * u_r;
    for j in 0..beta.ncols() {
        for i in 0..beta.nrows() {
            let d = sigma_c[i] * sigma_r[j];
            beta[(i, j)] = d * beta[(i, j)] / (d * d + mu);
        }
    }
    Image::new(v_c * beta * v_r.transpose())
}

/// `‖Ax − b‖₂`.
pub fn residual_norm<T: Real>(op: &BlurOperator<T>, x: &Image<T>, b: &Image<T>) -> Result<T> {
    let ax = op.apply(x, false)?;
    Ok((ax.matrix() - b.matrix()).norm())
}

/// `‖Lx‖₂`.
pub fn penalty_norm<T: Real>(reg: &RegularizerL, x: &Image<T>) -> T {
    norm2(&reg.apply(x.matrix()))
}
