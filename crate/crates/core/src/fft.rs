//! Unnormalized 2-D DFT on column-major matrices.
//!
//! Forward transforms carry no scale factor; the inverse divides by `pq`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::scalar::Real;

fn transform_columns<T: Real>(data: &mut DMatrix<Complex<T>>, direction: FftDirection) {
    let rows = data.nrows();
    if rows <= 1 {
        return;
    }
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft(rows, direction);
    // columns are contiguous, so one call processes all of them
    fft.process(data.as_mut_slice());
}

fn transform_2d<T: Real>(data: &DMatrix<Complex<T>>, direction: FftDirection) -> DMatrix<Complex<T>> {
    let mut work = data.clone();
    transform_columns(&mut work, direction);
    let mut t = work.transpose();
    transform_columns(&mut t, direction);
    t.transpose()
}

pub fn fft2<T: Real>(data: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    transform_2d(data, FftDirection::Forward)
}

pub fn ifft2<T: Real>(data: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let scale = T::from_usize_lossy(data.len()).recip();
    transform_2d(data, FftDirection::Inverse).map(|c| c * scale)
}

pub fn fft2_real<T: Real>(data: &DMatrix<T>) -> DMatrix<Complex<T>> {
    fft2(&data.map(|v| Complex::new(v, T::zero())))
}

/// 1-D transforms applied independently to every column.
pub fn fft_columns<T: Real>(data: &DMatrix<Complex<T>>, inverse: bool) -> DMatrix<Complex<T>> {
    let mut work = data.clone();
    if inverse {
        transform_columns(&mut work, FftDirection::Inverse);
        let scale = T::from_usize_lossy(work.nrows()).recip();
        work.apply(|c| *c *= scale);
    } else {
        transform_columns(&mut work, FftDirection::Forward);
    }
    work
}

/// Real part of an inverse transform together with `‖Im‖ / ‖Re‖`.
pub fn real_part<T: Real>(data: &DMatrix<Complex<T>>) -> (DMatrix<T>, T) {
    let re = data.map(|c| c.re);
    let im = data.map(|c| c.im);
    let re_norm = re.norm();
    let ratio = if re_norm > T::zero() {
        im.norm() / re_norm
    } else {
        im.norm()
    };
    (re, ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft2(x: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
        let (p, q) = x.shape();
        DMatrix::from_fn(p, q, |k, l| {
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..p {
                for j in 0..q {
                    let ang = -2.0 * std::f64::consts::PI * ((k * i) as f64 / p as f64 + (l * j) as f64 / q as f64);
                    acc += Complex::from_polar(x[(i, j)], ang);
                }
            }
            acc
        })
    }

    #[test]
    fn matches_direct_sum_and_inverts() {
        let x = DMatrix::from_fn(5, 6, |i, j| ((i * 7 + j * 3) % 11) as f64 - 4.0);
        let f = fft2_real(&x);
        let g = naive_dft2(&x);
        assert!((f - g).norm() < 1e-10);
        let (back, ratio) = real_part(&ifft2(&fft2_real(&x)));
        assert!((back - x).norm() < 1e-12);
        assert!(ratio < 1e-14);
    }

    #[test]
    fn constant_array_is_dc_only() {
        let x = DMatrix::from_element(4, 4, 1.0f64 / 16.0);
        let f = fft2_real(&x);
        assert!((f[(0, 0)].re - 1.0).abs() < 1e-15);
        let rest: f64 = f.iter().skip(1).map(|c| c.norm()).sum();
        assert!(rest < 1e-15);
    }
}
