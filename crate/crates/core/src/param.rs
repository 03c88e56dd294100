//! Regularization-parameter selection: L-curve corner and discrepancy principle.

use crate::error::{DeblurError, Result};
use crate::image::Image;
use crate::operators::BlurOperator;
use crate::regularization::{tv_irls_with_system, IrlsOptions, RegularizerL, TikhonovSystem, TvSolution, TV_CG_MARGIN};
use crate::scalar::Real;
use crate::svd::{spectral_norms, FilterSpec, SvdFactorization};

/// Iteration cap for every bisection in this module.
pub const MAX_BISECTION_STEPS: usize = 60;

/// Relative accuracy the discrepancy principle is solved to.
pub const DISCREPANCY_TOL: f64 = 1e-6;

/// Looser accuracy for TV, whose residual is itself only as accurate as the
/// IRLS stopping rule.
pub const TV_DISCREPANCY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LCurvePoint<T> {
    pub lambda: T,
    pub residual: T,
    pub solution_norm: T,
    pub log_residual: T,
    pub log_solution_norm: T,
}

/// `n` logarithmically spaced values from `1e-8·σ₁` to `σ₁`.
pub fn default_grid<T: Real>(sigma1: T, n: usize) -> Vec<T> {
    log_grid(sigma1 * T::lit(1e-8), sigma1, n)
}

pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            let t = if n > 1 {
                T::from_usize_lossy(k) / T::from_usize_lossy(n - 1)
            } else {
                T::zero()
            };
            (a + (b - a) * t).exp()
        })
        .collect()
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.len() < 3 {
        return Err(DeblurError::BadGrid(format!(
            "need at least 3 values, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|l| !(*l > T::zero()) || !l.is_finite()) {
        return Err(DeblurError::BadGrid("values must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DeblurError::BadGrid("values must be strictly increasing".into()));
    }
    Ok(())
}

/// Residual and solution norms of the Tikhonov solution at every `λ` of `grid`.
pub fn lcurve_scan<T: Real>(svd: &SvdFactorization<T>, b: &Image<T>, grid: &[T]) -> Result<Vec<LCurvePoint<T>>> {
    check_grid(grid)?;
    let beta = svd.coefficients(b)?;
    let bn2 = b.norm() * b.norm();
    grid.iter()
        .map(|&lambda| {
            let (residual, solution_norm) = spectral_norms(svd.sigma(), &beta, bn2, &FilterSpec::Tikhonov(lambda))?;
            Ok(LCurvePoint {
                lambda,
                residual,
                solution_norm,
                log_residual: residual.max(T::min_positive()).ln(),
                log_solution_norm: solution_norm.max(T::min_positive()).ln(),
            })
        })
        .collect()
}

/// Selected corner of an L-curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner<T> {
    pub index: usize,
    pub lambda: T,
    /// Signed curvature per point; `None` at the two endpoints.
    pub curvature: Vec<Option<T>>,
    /// Corner curvature is below ten times the median curvature.
    pub weak: bool,
}

/// First and second derivatives at `i` from a three-point stencil on a non-uniform grid.
fn derivatives<T: Real>(t: &[T], f: &[T], i: usize) -> (T, T) {
    let h1 = t[i] - t[i - 1];
    let h2 = t[i + 1] - t[i];
    let s = h1 + h2;
    let d1 = -h2 / (h1 * s) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * s) * f[i + 1];
    let d2 = T::lit(2.0) * (f[i - 1] / (h1 * s) - f[i] / (h1 * h2) + f[i + 1] / (h2 * s));
    (d1, d2)
}

/// Grid point of maximal signed curvature of `(log residual, log norm)` against `log λ`.
pub fn lcurve_corner<T: Real>(points: &[LCurvePoint<T>]) -> Result<Corner<T>> {
    if points.len() < 5 {
        return Err(DeblurError::TooFewPoints(format!(
            "need at least 5 points, got {}",
            points.len()
        )));
    }
    let lambdas: Vec<T> = points.iter().map(|p| p.lambda).collect();
    check_grid(&lambdas).map_err(|e| DeblurError::TooFewPoints(e.to_string()))?;
    let span = (lambdas[lambdas.len() - 1] / lambdas[0]).log10();
    if span < T::lit(4.0) - T::lit(1e-9) {
        return Err(DeblurError::TooFewPoints(format!("grid spans {span} decades, need 4")));
    }
    let t: Vec<T> = lambdas.iter().map(|l| l.ln()).collect();
    let x: Vec<T> = points.iter().map(|p| p.log_residual).collect();
    let y: Vec<T> = points.iter().map(|p| p.log_solution_norm).collect();
    let n = points.len();
    let mut curvature = vec![None; n];
    for i in 1..n - 1 {
        let (x1, x2) = derivatives(&t, &x, i);
        let (y1, y2) = derivatives(&t, &y, i);
        let speed = (x1 * x1 + y1 * y1).sqrt();
        let k = if speed > T::zero() {
            (x1 * y2 - x2 * y1) / (speed * speed * speed)
        } else {
            T::zero()
        };
        curvature[i] = Some(k);
    }
    let (index, kmax) = (1..n - 1).map(|i| (i, curvature[i].expect("interior"))).fold(
        (1, T::min_value().unwrap_or_else(|| -T::one())),
        |best, c| if c.1 > best.1 { c } else { best },
    );
    if !(kmax > T::eps().sqrt()) {
        return Err(DeblurError::FlatCurve);
    }
    let mut mags: Vec<T> = curvature.iter().flatten().map(|k| k.magnitude()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = mags[mags.len() / 2];
    Ok(Corner {
        index,
        lambda: lambdas[index],
        curvature,
        weak: kmax < T::lit(10.0) * median,
    })
}

/// Result of a monotone root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSearch<T> {
    pub parameter: T,
    pub value: T,
    pub iterations: usize,
}

/// Finds `x` with `f(x) = target` for nondecreasing `f`, bisecting `ln x`.
///
/// The bracket `[lo, hi]` is widened by decades until it contains the
/// target; `floor` and `ceiling` bound the widening. Stops when
/// `|f(x) − target| ≤ rel_tol·target`.
pub fn log_bisect<T: Real>(
    mut f: impl FnMut(T) -> Result<T>,
    mut lo: T,
    mut hi: T,
    (floor, ceiling): (T, T),
    target: T,
    rel_tol: T,
) -> Result<RootSearch<T>> {
    let ten = T::lit(10.0);
    let mut f_lo = f(lo)?;
    while f_lo > target && lo > floor {
        hi = lo;
        lo = (lo / ten).max(floor);
        f_lo = f(lo)?;
    }
    let mut f_hi = f(hi)?;
    while f_hi < target && hi < ceiling {
        lo = hi;
        f_lo = f_hi;
        hi = (hi * ten).min(ceiling);
        f_hi = f(hi)?;
    }
    if f_lo > target || f_hi < target {
        return Err(DeblurError::NotBracketed {
            target: target.as_f64(),
            low: f_lo.as_f64(),
            high: f_hi.as_f64(),
        });
    }
    let tol = rel_tol * target;
    for (x, v) in [(lo, f_lo), (hi, f_hi)] {
        if (v - target).magnitude() <= tol {
            return Ok(RootSearch {
                parameter: x,
                value: v,
                iterations: 0,
            });
        }
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut best = if (f_lo - target).magnitude() < (f_hi - target).magnitude() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    for it in 1..=MAX_BISECTION_STEPS {
        let mid = (a + b) * T::lit(0.5);
        let x = mid.exp();
        let v = f(x)?;
        if (v - target).magnitude() < (best.1 - target).magnitude() {
            best = (x, v);
        }
        if (v - target).magnitude() <= tol {
            return Ok(RootSearch {
                parameter: x,
                value: v,
                iterations: it,
            });
        }
        if v < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Err(DeblurError::NotConverged(format!(
        "bisection stopped at relative mismatch {}",
        ((best.1 - target) / target).magnitude()
    )))
}

/// Standard-form `λ` whose Tikhonov residual equals `tau·delta`.
pub fn discrepancy_lambda<T: Real>(svd: &SvdFactorization<T>, b: &Image<T>, delta: T, tau: T) -> Result<T> {
    if !(delta > T::zero()) || tau < T::one() {
        return Err(DeblurError::InvalidParameter(format!(
            "need delta > 0 and tau >= 1, got delta={delta}, tau={tau}"
        )));
    }
    let beta = svd.coefficients(b)?;
    let bn2 = b.norm() * b.norm();
    let sigma = svd.sigma();
    let s1 = sigma[0];
    let target = tau * delta;
    let bnorm = b.norm();
    if target >= bnorm {
        return Err(DeblurError::NotBracketed {
            target: target.as_f64(),
            low: 0.0,
            high: bnorm.as_f64(),
        });
    }
    let residual = |lambda: T| spectral_norms(sigma, &beta, bn2, &FilterSpec::Tikhonov(lambda)).map(|r| r.0);
    let search = log_bisect(
        residual,
        s1 * T::lit(1e-8),
        s1,
        (T::min_positive().sqrt(), s1 * T::lit(1e12)),
        target,
        T::lit(DISCREPANCY_TOL),
    )?;
    Ok(search.parameter)
}

/// General-form Tikhonov `μ` whose residual `‖Ax_μ − b‖` equals `target`.
pub fn select_gtik_mu<T: Real>(
    op: &BlurOperator<T>,
    b: &Image<T>,
    reg: RegularizerL,
    target: T,
) -> Result<(T, Image<T>)> {
    let sys = TikhonovSystem::new(op, b, reg)?;
    let mut last: Option<nalgebra::DMatrix<T>> = None;
    let residual = |mu: T| -> Result<T> {
        let x = sys.solve(mu, None, last.as_ref())?;
        let r = (op.apply_matrix(&x, false) - b.matrix()).norm();
        last = Some(x);
        Ok(r)
    };
    let search = log_bisect(
        residual,
        T::lit(1e-8),
        T::lit(1e-4),
        (T::lit(1e-30), T::lit(1e12)),
        target,
        T::lit(DISCREPANCY_TOL),
    )?;
    let x = sys.solve(search.parameter, None, None)?;
    Ok((search.parameter, Image::new(x)?))
}

/// TV weight `λ` whose IRLS reconstruction has residual `target`.
pub fn select_tv_lambda<T: Real>(
    op: &BlurOperator<T>,
    b: &Image<T>,
    reg: RegularizerL,
    target: T,
    opts: &IrlsOptions<T>,
) -> Result<(T, TvSolution<T>)> {
    let sys = TikhonovSystem::new(op, b, reg)?.with_cg_margin(T::lit(TV_CG_MARGIN));
    let mut best: Option<(T, TvSolution<T>)> = None;
    let residual = |lambda: T| -> Result<T> {
        let sol = tv_irls_with_system(&sys, b, lambda, opts)?;
        let r = (op.apply_matrix(sol.x.matrix(), false) - b.matrix()).norm();
        let better = match &best {
            Some((rb, _)) => (r - target).magnitude() < (*rb - target).magnitude(),
            None => true,
        };
        if better {
            best = Some((r, sol));
        }
        Ok(r)
    };
    let scale = b.norm() * b.norm() / T::from_usize_lossy(op.size());
    let search = log_bisect(
        residual,
        scale * T::lit(1e-6),
        scale * T::lit(1e-2),
        (scale * T::lit(1e-30), scale * T::lit(1e10)),
        target,
        T::lit(TV_DISCREPANCY_TOL),
    )?;
    let (_, sol) = best.expect("at least one evaluation");
    Ok((search.parameter, sol))
}
