//! Total variation by iteratively reweighted least squares.
//!
//! Minimizes `‖Ax − b‖² + λ Σᵢ √((Lx)ᵢ² + ε²)`. Each outer step minimizes the
//! quadratic majorizer `‖Ax − b‖² + (λ/2) Σᵢ wᵢ (Lx)ᵢ²` with
//! `wᵢ = ((Lx_k)ᵢ² + ε²)^(−1/2)`, so the smoothed objective never increases.

use nalgebra::DMatrix;

use super::{RegularizerL, TikhonovSystem};
use crate::error::{DeblurError, Result};
use crate::image::Image;
use crate::operators::BlurOperator;
use crate::scalar::{norm2, Real};

/// Inner solves only need to keep the majorizer decreasing, not exact residuals.
pub const TV_CG_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrlsOptions<T> {
    /// Smoothing `ε`; `None` picks `1e-4·max|b|`.
    pub epsilon: Option<T>,
    pub max_outer: usize,
    /// Stop once `‖x_{k+1} − x_k‖ ≤ tol·‖x_{k+1}‖`.
    pub tol: T,
}

impl<T: Real> Default for IrlsOptions<T> {
    fn default() -> Self {
        Self {
            epsilon: None,
            max_outer: 30,
            tol: T::lit(1e-4),
        }
    }
}

/// One row of the IRLS history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<T> {
    pub iteration: usize,
    /// Smoothed objective.
    pub objective: T,
    pub residual_norm: T,
    /// Smoothed total variation `Σ √((Lx)ᵢ² + ε²)`.
    pub penalty_norm: T,
}

#[derive(Debug, Clone)]
pub struct TvSolution<T: Real> {
    pub x: Image<T>,
    pub trace: Vec<TraceRow<T>>,
    /// False when `max_outer` ran out; `x` is then the best iterate seen.
    pub converged: bool,
    pub epsilon: T,
}

/// `(objective, residual, smoothed TV)` at `x`.
pub fn tv_objective<T: Real>(
    op: &BlurOperator<T>,
    reg: &RegularizerL,
    x: &DMatrix<T>,
    b: &DMatrix<T>,
    lambda: T,
    epsilon: T,
) -> (T, T, T) {
    let res = (op.apply_matrix(x, false) - b).norm();
    let e2 = epsilon * epsilon;
    let tv = reg
        .apply(x)
        .into_iter()
        .fold(T::zero(), |acc, z| acc + (z * z + e2).sqrt());
    (res * res + lambda * tv, res, tv)
}

/// Solves the smoothed TV problem for `b` with `L` the first-difference operator.
pub fn tv_irls_solve<T: Real>(
    op: &BlurOperator<T>,
    b: &Image<T>,
    reg: RegularizerL,
    lambda: T,
    opts: &IrlsOptions<T>,
) -> Result<TvSolution<T>> {
    let sys = TikhonovSystem::new(op, b, reg)?.with_cg_margin(T::lit(TV_CG_MARGIN));
    tv_irls_with_system(&sys, b, lambda, opts)
}

/// [`tv_irls_solve`] reusing a prepared system, for parameter searches.
pub fn tv_irls_with_system<T: Real>(
    sys: &TikhonovSystem<'_, T>,
    b: &Image<T>,
    lambda: T,
    opts: &IrlsOptions<T>,
) -> Result<TvSolution<T>> {
    let reg = sys.regularizer();
    if !matches!(reg, RegularizerL::FirstDerivative { .. }) {
        return Err(DeblurError::InvalidParameter(
            "TV needs the first-derivative regularizer".into(),
        ));
    }
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(DeblurError::InvalidParameter(format!(
            "TV weight must be > 0, got {lambda}"
        )));
    }
    if opts.max_outer == 0 || !(opts.tol > T::zero()) {
        return Err(DeblurError::InvalidParameter(
            "IRLS needs max_outer >= 1 and tol > 0".into(),
        ));
    }
    let bmax = b.as_slice().iter().fold(T::zero(), |m, v| m.max(v.magnitude()));
    let epsilon = match opts.epsilon {
        Some(e) if e > T::zero() => e,
        Some(e) => return Err(DeblurError::InvalidParameter(format!("epsilon must be > 0, got {e}"))),
        None if bmax > T::zero() => T::lit(1e-4) * bmax,
        None => T::lit(1e-4),
    };
    let op = sys.operator();
    let half = lambda * T::lit(0.5);
    let row = |iteration: usize, x: &DMatrix<T>| {
        let (objective, residual_norm, penalty_norm) = tv_objective(op, &reg, x, b.matrix(), lambda, epsilon);
        TraceRow {
            iteration,
            objective,
            residual_norm,
            penalty_norm,
        }
    };

    let mut x = sys.solve(half, None, None)?;
    let mut trace = vec![row(0, &x)];
    let mut best = (trace[0].objective, x.clone());
    let mut converged = false;
    let e2 = epsilon * epsilon;
    for k in 1..=opts.max_outer {
        let w: Vec<T> = reg
            .apply(&x)
            .into_iter()
            .map(|z| T::one() / (z * z + e2).sqrt())
            .collect();
        let next = sys.solve(half, Some(&w), Some(&x))?;
        let diff = norm2((&next - &x).as_slice());
        let size = next.norm();
        x = next;
        let r = row(k, &x);
        if r.objective < best.0 {
            best = (r.objective, x.clone());
        }
        trace.push(r);
        if diff <= opts.tol * size {
            converged = true;
            break;
        }
    }
    let x = if converged { x } else { best.1 };
    Ok(TvSolution {
        x: Image::new(x)?,
        trace,
        converged,
        epsilon,
    })
}
