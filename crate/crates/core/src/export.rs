//! CSV tables behind the diagnostic plots.
//!
//! Every table has a header row and CRLF-terminated records (RFC 4180 via
//! the `csv` crate). Numbers use Rust's shortest round-trip formatting, so files
//! are byte-identical across runs.

use std::path::Path;

use crate::error::{DeblurError, Result};
use crate::param::{Corner, LCurvePoint};
use crate::pgm::atomic_write;
use crate::regularization::TraceRow;
use crate::scalar::Real;
use crate::svd::PicardData;

/// Serializes `rows` under `header`.
pub fn table<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        let row: Vec<String> = row.into_iter().collect();
        if row.len() != header.len() {
            return Err(DeblurError::LengthMismatch {
                expected: header.len(),
                actual: row.len(),
            });
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| DeblurError::Io(e.into_error()))
}

/// Writes a table atomically.
pub fn write_table(path: &Path, bytes: &[u8]) -> Result<()> {
    atomic_write(path, bytes)
}

/// Underflowed singular values become the smallest positive normal so log plots stay finite.
fn plottable<T: Real>(s: T) -> T {
    s.max(T::min_positive())
}

/// `l, sigma` over the full sorted spectrum; `l` counts from 1.
pub fn sigma_table<T: Real>(sigma: &[T]) -> Result<Vec<u8>> {
    table(
        &["l", "sigma"],
        sigma
            .iter()
            .enumerate()
            .map(|(l, s)| [(l + 1).to_string(), plottable(*s).to_string()]),
    )
}

/// `l, sigma, coeff, ratio`.
pub fn picard_table<T: Real>(data: &PicardData<T>) -> Result<Vec<u8>> {
    table(
        &["l", "sigma", "coeff", "ratio"],
        (0..data.sigma.len()).map(|l| {
            [
                (l + 1).to_string(),
                plottable(data.sigma[l]).to_string(),
                data.coeffs[l].to_string(),
                data.ratio[l].to_string(),
            ]
        }),
    )
}

/// `lambda, residual, solution_norm, curvature, is_corner`; curvature is
/// empty at the endpoints.
pub fn lcurve_table<T: Real>(points: &[LCurvePoint<T>], corner: Option<&Corner<T>>) -> Result<Vec<u8>> {
    table(
        &["lambda", "residual", "solution_norm", "curvature", "is_corner"],
        points.iter().enumerate().map(|(i, pt)| {
            let curvature = corner
                .and_then(|c| c.curvature.get(i).copied().flatten())
                .map(|k| k.to_string())
                .unwrap_or_default();
            let is_corner = corner.is_some_and(|c| c.index == i);
            [
                pt.lambda.to_string(),
                pt.residual.to_string(),
                pt.solution_norm.to_string(),
                curvature,
                u8::from(is_corner).to_string(),
            ]
        }),
    )
}

/// `iteration, objective, residual_norm, penalty_norm`.
pub fn trace_table<T: Real>(trace: &[TraceRow<T>]) -> Result<Vec<u8>> {
    table(
        &["iteration", "objective", "residual_norm", "penalty_norm"],
        trace.iter().map(|r| {
            [
                r.iteration.to_string(),
                r.objective.to_string(),
                r.residual_norm.to_string(),
                r.penalty_norm.to_string(),
            ]
        }),
    )
}

/// `l, sigma, true_coeff, naive_coeff`: `|v_ℓᵀ x_true|` against `|v_ℓᵀ x_LS|`.
pub fn coefficient_table<T: Real>(sigma: &[T], true_coeffs: &[T], naive_coeffs: &[T]) -> Result<Vec<u8>> {
    if true_coeffs.len() != sigma.len() || naive_coeffs.len() != sigma.len() {
        return Err(DeblurError::LengthMismatch {
            expected: sigma.len(),
            actual: true_coeffs.len().min(naive_coeffs.len()),
        });
    }
    table(
        &["l", "sigma", "true_coeff", "naive_coeff"],
        (0..sigma.len()).map(|l| {
            [
                (l + 1).to_string(),
                plottable(sigma[l]).to_string(),
                true_coeffs[l].magnitude().to_string(),
                naive_coeffs[l].magnitude().to_string(),
            ]
        }),
    )
}
