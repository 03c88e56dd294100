//! Singular value decompositions of blur operators and spectral filtering.
//!
//! Separable operators `A = A_r ⊗ A_c` are factored through their small
//! factors; the singular triple with natural index `ℓ = i + p·j` is
//! `(σ_c,i σ_r,j, u_r,j ⊗ u_c,i, v_r,j ⊗ v_c,i)`. Every vector-valued result
//! is reported in the order of nonincreasing singular values.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{DeblurError, Result};
use crate::image::Image;
use crate::operators::BlurOperator;
use crate::scalar::Real;

/// Factors of an SVD `A = U Σ Vᵀ`.
#[derive(Debug, Clone)]
pub enum SvdFactors<T: Real> {
    /// Columns of `u` and `v` already sorted.
    Dense { u: DMatrix<T>, v: DMatrix<T> },
    /// Factor SVDs of `A_r` (`q × q`) and `A_c` (`p × p`).
    Kron {
        u_r: DMatrix<T>,
        sigma_r: Vec<T>,
        v_r: DMatrix<T>,
        u_c: DMatrix<T>,
        sigma_c: Vec<T>,
        v_c: DMatrix<T>,
        /// `perm[ℓ]` is the natural index `i + p·j` of the `ℓ`-th largest product.
        perm: Vec<usize>,
    },
}

#[derive(Debug, Clone)]
pub struct SvdFactorization<T: Real> {
    rows: usize,
    cols: usize,
    sigma: Vec<T>,
    factors: SvdFactors<T>,
}

/// SVD with singular values sorted nonincreasing and columns permuted to match.
fn sorted_svd<T: Real>(a: DMatrix<T>) -> (DMatrix<T>, Vec<T>, DMatrix<T>) {
    let svd = a.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").transpose();
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let pick = |m: &DMatrix<T>| DMatrix::from_fn(m.nrows(), order.len(), |r, c| m[(r, order[c])]);
    (pick(&u), order.iter().map(|&k| s[k]).collect(), pick(&v))
}

/// Factorization of `op`: Kronecker form when separable, dense otherwise.
pub fn svd_of<T: Real>(op: &BlurOperator<T>) -> Result<SvdFactorization<T>> {
    if op.is_separable() {
        kron_svd(op)
    } else {
        dense_svd(op)
    }
}

/// Dense SVD of the assembled matrix, limited to the dense size guard.
pub fn dense_svd<T: Real>(op: &BlurOperator<T>) -> Result<SvdFactorization<T>> {
    let a = op.assemble_dense()?;
    let (u, sigma, v) = sorted_svd(a);
    Ok(SvdFactorization {
        rows: op.rows(),
        cols: op.cols(),
        sigma,
        factors: SvdFactors::Dense { u, v },
    })
}

/// SVD through the Kronecker factors of a separable operator.
pub fn kron_svd<T: Real>(op: &BlurOperator<T>) -> Result<SvdFactorization<T>> {
    let (a_r, a_c) = op.dense_factors()?;
    Ok(SvdFactorization::from_factors(&a_r, &a_c))
}

impl<T: Real> SvdFactorization<T> {
    /// SVD of `A_r ⊗ A_c` from the two dense factors.
    pub fn from_factors(a_r: &DMatrix<T>, a_c: &DMatrix<T>) -> Self {
        let (u_r, sigma_r, v_r) = sorted_svd(a_r.clone());
        let (u_c, sigma_c, v_c) = sorted_svd(a_c.clone());
        let (p, q) = (sigma_c.len(), sigma_r.len());
        let product = |l: usize| sigma_c[l % p] * sigma_r[l / p];
        let mut perm: Vec<usize> = (0..p * q).collect();
        perm.sort_by(|&a, &b| {
            product(b)
                .partial_cmp(&product(a))
                .unwrap_or(Ordering::Equal)
                .then((a % p, a / p).cmp(&(b % p, b / p)))
        });
        let sigma = perm.iter().map(|&l| product(l)).collect();
        Self {
            rows: p,
            cols: q,
            sigma,
            factors: SvdFactors::Kron {
                u_r,
                sigma_r,
                v_r,
                u_c,
                sigma_c,
                v_c,
                perm,
            },
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Singular values, nonincreasing.
    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn factors(&self) -> &SvdFactors<T> {
        &self.factors
    }

    pub fn is_kron(&self) -> bool {
        matches!(self.factors, SvdFactors::Kron { .. })
    }

    /// `σ₁ / σ_m`, infinite when the operator is singular.
    pub fn condition_number(&self) -> T {
        let last = *self.sigma.last().expect("nonempty");
        if last > T::zero() {
            self.sigma[0] / last
        } else {
            T::max_value().unwrap_or_else(T::one)
        }
    }

    fn check(&self, b: &Image<T>) -> Result<()> {
        b.check_shape(self.rows, self.cols)
    }

    /// The `ℓ`-th left or right singular vector as a `p × q` image.
    fn vector(&self, l: usize, left: bool) -> Result<Image<T>> {
        if l >= self.len() {
            return Err(DeblurError::InvalidParameter(format!(
                "singular index {l} out of range 0..{}",
                self.len()
            )));
        }
        match &self.factors {
            SvdFactors::Dense { u, v } => {
                let m = if left { u } else { v };
                Image::unvec(m.column(l).as_slice(), self.rows, self.cols)
            }
            SvdFactors::Kron {
                u_r,
                v_r,
                u_c,
                v_c,
                perm,
                ..
            } => {
                let (i, j) = (perm[l] % self.rows, perm[l] / self.rows);
                let (r, c) = if left { (u_r, u_c) } else { (v_r, v_c) };
                Image::new(c.column(i) * r.column(j).transpose())
            }
        }
    }

    pub fn left_vector(&self, l: usize) -> Result<Image<T>> {
        self.vector(l, true)
    }

    pub fn right_vector(&self, l: usize) -> Result<Image<T>> {
        self.vector(l, false)
    }

    /// `u_ℓᵀ b` for every `ℓ`, in sorted order.
    pub fn coefficients(&self, b: &Image<T>) -> Result<Vec<T>> {
        self.check(b)?;
        Ok(self.project(b.matrix(), true))
    }

    /// `v_ℓᵀ x` for every `ℓ`, in sorted order.
    pub fn right_coefficients(&self, x: &Image<T>) -> Result<Vec<T>> {
        self.check(x)?;
        Ok(self.project(x.matrix(), false))
    }

    fn project(&self, b: &DMatrix<T>, left: bool) -> Vec<T> {
        match &self.factors {
            SvdFactors::Dense { u, v } => {
                let m = if left { u } else { v };
                let bv = DVector::from_column_slice(b.as_slice());
                m.tr_mul(&bv).as_slice().to_vec()
            }
            SvdFactors::Kron {
                u_r,
                v_r,
                u_c,
                v_c,
                perm,
                ..
            } => {
                let (r, c) = if left { (u_r, u_c) } else { (v_r, v_c) };
                let beta = c.tr_mul(b) * r;
                perm.iter().map(|&l| beta[l]).collect()
            }
        }
    }

    /// `Σ c_ℓ v_ℓ` for coefficients given in sorted order.
    pub fn synthesize(&self, coeffs: &[T]) -> Result<Image<T>> {
        if coeffs.len() != self.len() {
            return Err(DeblurError::LengthMismatch {
                expected: self.len(),
                actual: coeffs.len(),
            });
        }
        let x = match &self.factors {
            SvdFactors::Dense { v, .. } => {
                let x = v * DVector::from_column_slice(coeffs);
                DMatrix::from_column_slice(self.rows, self.cols, x.as_slice())
            }
            SvdFactors::Kron { v_r, v_c, perm, .. } => {
                let mut c = DMatrix::zeros(self.rows, self.cols);
                for (k, &l) in perm.iter().enumerate() {
                    c[l] = coeffs[k];
                }
                v_c * c * v_r.transpose()
            }
        };
        Image::new(x)
    }
}

/// Discrete Picard plot data in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardData<T: Real> {
    pub sigma: Vec<T>,
    /// `|u_ℓᵀ b|`
    pub coeffs: Vec<T>,
    /// `|u_ℓᵀ b| / σ_ℓ`
    pub ratio: Vec<T>,
}

pub fn picard_coefficients<T: Real>(svd: &SvdFactorization<T>, b: &Image<T>) -> Result<PicardData<T>> {
    let coeffs: Vec<T> = svd.coefficients(b)?.into_iter().map(|c| c.magnitude()).collect();
    let ratio = coeffs
        .iter()
        .zip(svd.sigma())
        .map(|(c, s)| {
            if *s > T::zero() {
                *c / *s
            } else if *c == T::zero() {
                T::zero()
            } else {
                T::max_value().unwrap_or_else(T::one)
            }
        })
        .collect();
    Ok(PicardData {
        sigma: svd.sigma().to_vec(),
        coeffs,
        ratio,
    })
}

/// Spectral filter applied to the naive solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterSpec<T> {
    Naive,
    /// Keep the `k` largest singular values.
    Tsvd(usize),
    /// Standard-form Tikhonov with `φ = σ²/(σ²+λ²)`.
    Tikhonov(T),
}

impl<T: Real> FilterSpec<T> {
    /// Tikhonov filter for the penalty multiplier `μ = λ²`.
    pub fn tikhonov_mu(mu: T) -> Self {
        FilterSpec::Tikhonov(mu.sqrt())
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        match *self {
            FilterSpec::Tsvd(k) if k == 0 || k > m => Err(DeblurError::InvalidFilter(format!(
                "truncation index {k} outside 1..={m}"
            ))),
            FilterSpec::Tikhonov(l) if !(l > T::zero()) || !l.is_finite() => Err(DeblurError::InvalidFilter(format!(
                "tikhonov lambda must be > 0, got {l}"
            ))),
            _ => Ok(()),
        }
    }

    /// Filter factor `φ_ℓ` for the `ℓ`-th (0-based) singular value.
    pub fn factor(&self, l: usize, sigma: T) -> T {
        match *self {
            FilterSpec::Naive => T::one(),
            FilterSpec::Tsvd(k) => {
                if l < k {
                    T::one()
                } else {
                    T::zero()
                }
            }
            FilterSpec::Tikhonov(lambda) => {
                let s2 = sigma * sigma;
                s2 / (s2 + lambda * lambda)
            }
        }
    }

    /// `φ_ℓ β_ℓ / σ_ℓ`, written so Tikhonov never divides by `σ`.
    fn solution_coeff(&self, l: usize, sigma: T, beta: T) -> Option<T> {
        match *self {
            FilterSpec::Tikhonov(lambda) => Some(sigma * beta / (sigma * sigma + lambda * lambda)),
            _ => {
                let phi = self.factor(l, sigma);
                if phi == T::zero() {
                    Some(T::zero())
                } else if sigma == T::zero() {
                    None
                } else {
                    Some(phi * beta / sigma)
                }
            }
        }
    }
}

impl<T: Real> fmt::Display for FilterSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterSpec::Naive => f.write_str("naive"),
            FilterSpec::Tsvd(k) => write!(f, "tsvd:{k}"),
            FilterSpec::Tikhonov(l) => write!(f, "tikhonov:{l}"),
        }
    }
}

impl<T: Real> FromStr for FilterSpec<T> {
    type Err = DeblurError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || DeblurError::InvalidFilter(format!("cannot parse filter {s:?}"));
        match s.split_once(':') {
            None if s == "naive" => Ok(FilterSpec::Naive),
            Some(("tsvd", k)) => Ok(FilterSpec::Tsvd(k.parse().map_err(|_| bad())?)),
            Some(("tikhonov", l)) => Ok(FilterSpec::Tikhonov(T::lit(l.parse().map_err(|_| bad())?))),
            _ => Err(bad()),
        }
    }
}

/// Coefficients `φ_ℓ β_ℓ / σ_ℓ` of the filtered solution in the right singular basis.
pub fn filtered_coefficients<T: Real>(sigma: &[T], beta: &[T], spec: &FilterSpec<T>) -> Result<Vec<T>> {
    spec.validate(sigma.len())?;
    sigma
        .iter()
        .zip(beta)
        .enumerate()
        .map(|(l, (s, b))| spec.solution_coeff(l, *s, *b).ok_or(DeblurError::SingularOperator))
        .collect()
}

/// `x = Σ φ_ℓ (u_ℓᵀ b / σ_ℓ) v_ℓ`.
pub fn filtered_solve<T: Real>(svd: &SvdFactorization<T>, b: &Image<T>, spec: &FilterSpec<T>) -> Result<Image<T>> {
    let beta = svd.coefficients(b)?;
    svd.synthesize(&filtered_coefficients(svd.sigma(), &beta, spec)?)
}

/// Residual and solution norms of a filtered solution, computed spectrally.
///
/// `b_norm_sq` accounts for any component of `b` outside the range of `U`.
pub fn spectral_norms<T: Real>(sigma: &[T], beta: &[T], b_norm_sq: T, spec: &FilterSpec<T>) -> Result<(T, T)> {
    let coeffs = filtered_coefficients(sigma, beta, spec)?;
    let mut res = T::zero();
    let mut sol = T::zero();
    let mut captured = T::zero();
    for (l, ((s, b), c)) in sigma.iter().zip(beta).zip(&coeffs).enumerate() {
        let keep = match spec {
            FilterSpec::Tikhonov(lambda) => {
                let l2 = *lambda * *lambda;
                l2 / (*s * *s + l2)
            }
            _ => T::one() - spec.factor(l, *s),
        };
        let r = keep * *b;
        res += r * r;
        sol += *c * *c;
        captured += *b * *b;
    }
    let outside = (b_norm_sq - captured).max(T::zero());
    Ok(((res + outside).sqrt(), sol.sqrt()))
}
