//! Seeded noise generators: Gaussian white, Poisson and salt-and-pepper.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{DeblurError, Result};
use crate::image::Image;
use crate::scalar::{norm2, Real};

/// Fraction of pixels corrupted when a salt-and-pepper spec gives none.
pub const DEFAULT_SALT_PEPPER_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// `‖e‖₂ = level·‖b‖₂` exactly.
    GaussianWhite {
        level: f64,
    },
    /// Counts with the brightest pixel expecting `peak` photons.
    Poisson {
        peak: f64,
    },
    SaltPepper {
        fraction: f64,
    },
}

impl NoiseKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseKind::GaussianWhite { level } if !(level > 0.0 && level.is_finite()) => Err(
                DeblurError::InvalidNoise(format!("gaussian level must be > 0, got {level}")),
            ),
            NoiseKind::Poisson { peak } if !(peak > 0.0 && peak.is_finite()) => Err(DeblurError::InvalidNoise(
                format!("poisson peak must be > 0, got {peak}"),
            )),
            NoiseKind::SaltPepper { fraction } if !(fraction > 0.0 && fraction < 1.0) => {
                Err(DeblurError::BadFraction(fraction))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::GaussianWhite { level } => write!(f, "gaussian:{level:?}"),
            NoiseKind::Poisson { peak } => write!(f, "poisson:{peak:?}"),
            NoiseKind::SaltPepper { fraction } => write!(f, "saltpepper:{fraction:?}"),
        }
    }
}

impl FromStr for NoiseKind {
    type Err = DeblurError;

    /// Parses `gaussian:0.001`, `poisson:1e5` or `saltpepper:0.05`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, value) = match s.split_once(':') {
            Some((n, v)) => (n, Some(v)),
            None => (s, None),
        };
        let parse = |v: Option<&str>| -> Result<f64> {
            v.ok_or_else(|| DeblurError::InvalidNoise(format!("{s:?} needs a value")))?
                .parse::<f64>()
                .map_err(|_| DeblurError::InvalidNoise(format!("bad number in {s:?}")))
        };
        let kind = match name.to_ascii_lowercase().as_str() {
            "gaussian" | "white" => NoiseKind::GaussianWhite { level: parse(value)? },
            "poisson" => NoiseKind::Poisson { peak: parse(value)? },
            "saltpepper" | "salt-pepper" | "sp" => NoiseKind::SaltPepper {
                fraction: match value {
                    Some(_) => parse(value)?,
                    None => DEFAULT_SALT_PEPPER_FRACTION,
                },
            },
            other => return Err(DeblurError::InvalidNoise(format!("unknown noise kind {other:?}"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, seed })
    }

    /// Returns the noisy image; the noise itself is `noisy − b`.
    pub fn apply<T: Real>(&self, b: &Image<T>) -> Result<Image<T>> {
        match self.kind {
            NoiseKind::GaussianWhite { level } => Ok(add_gaussian_white(b, T::lit(level), self.seed)?.0),
            NoiseKind::Poisson { peak } => add_poisson(b, T::lit(peak), self.seed),
            NoiseKind::SaltPepper { fraction } => add_salt_pepper(b, fraction, self.seed),
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Adds white noise rescaled so that `‖e‖₂ = level·‖b‖₂`. Returns `(b + e, e)`.
pub fn add_gaussian_white<T: Real>(b: &Image<T>, level: T, seed: u64) -> Result<(Image<T>, Image<T>)> {
    if !(level > T::zero()) {
        return Err(DeblurError::InvalidNoise(format!(
            "gaussian level must be > 0, got {level}"
        )));
    }
    let bnorm = b.norm();
    if bnorm == T::zero() {
        return Err(DeblurError::ZeroSignal);
    }
    let mut r = rng(seed);
    let g: Vec<f64> = (0..b.len()).map(|_| StandardNormal.sample(&mut r)).collect();
    let gnorm = norm2(&g);
    let target = (level * bnorm).as_f64();
    let e: Vec<T> = g.iter().map(|v| T::lit(v * target / gnorm)).collect();
    let e = Image::unvec(&e, b.rows(), b.cols())?;
    let noisy = Image::new(b.matrix() + e.matrix())?;
    Ok((noisy, e))
}

/// Poisson counts at scale `c = peak / max(b)`, mapped back by `1/c`.
pub fn add_poisson<T: Real>(b: &Image<T>, peak: T, seed: u64) -> Result<Image<T>> {
    if !(peak > T::zero()) {
        return Err(DeblurError::InvalidNoise(format!(
            "poisson peak must be > 0, got {peak}"
        )));
    }
    let max = b.max().as_f64();
    // FFT-based blurs leave negatives at roundoff level; those count as zero
    let floor = -1e-12 * max.max(0.0);
    if let Some(v) = b.as_slice().iter().find(|v| v.as_f64() < floor) {
        return Err(DeblurError::NegativeIntensity(v.as_f64()));
    }
    if max == 0.0 {
        return Ok(b.clone());
    }
    let scale = peak.as_f64() / max;
    let mut r = rng(seed);
    b.map(|v| {
        let mean = v.as_f64() * scale;
        if mean <= 0.0 {
            return T::zero();
        }
        let count: f64 = Poisson::new(mean).expect("positive mean").sample(&mut r);
        T::lit(count / scale)
    })
}

/// Sets `⌊fraction·m⌋` distinct pixels to `min(b)` or `max(b)` with equal odds.
pub fn add_salt_pepper<T: Real>(b: &Image<T>, fraction: f64, seed: u64) -> Result<Image<T>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DeblurError::BadFraction(fraction));
    }
    let m = b.len();
    let count = (fraction * m as f64).floor() as usize;
    let (lo, hi) = (b.min(), b.max());
    let mut data = b.clone().into_matrix();
    let mut r = rng(seed);
    for idx in index::sample(&mut r, m, count) {
        data[idx] = if r.random_bool(0.5) { hi } else { lo };
    }
    Image::new(data)
}

/// Indices where `noisy` differs from `clean`.
pub fn corrupted_pixels<T: Real>(clean: &Image<T>, noisy: &Image<T>) -> Vec<usize> {
    clean
        .as_slice()
        .iter()
        .zip(noisy.as_slice())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(p: usize, q: usize) -> Image<f64> {
        Image::from_fn(p, q, |i, j| 0.1 + (i * q + j) as f64 / (p * q) as f64).unwrap()
    }

    #[test]
    fn white_noise_has_exact_norm() {
        let b = ramp(16, 12);
        for seed in [0, 1, 99] {
            let (noisy, e) = add_gaussian_white(&b, 0.001, seed).unwrap();
            assert!((e.norm() / b.norm() - 0.001).abs() < 1e-12 * 0.001);
            assert!((noisy.matrix() - b.matrix() - e.matrix()).amax() < 1e-15);
        }
        let (_, e1) = add_gaussian_white(&b, 0.01, 5).unwrap();
        let (_, e2) = add_gaussian_white(&b, 0.01, 5).unwrap();
        let (_, e3) = add_gaussian_white(&b, 0.01, 6).unwrap();
        assert_eq!(e1, e2);
        assert_ne!(e1, e3);
        assert!((e1.norm() - e3.norm()).abs() < 1e-14);
        assert!(matches!(
            add_gaussian_white(&Image::<f64>::zeros(3, 3), 0.1, 0),
            Err(DeblurError::ZeroSignal)
        ));
    }

    #[test]
    fn white_noise_is_mean_zero() {
        let b = ramp(8, 8);
        let eta = 0.01;
        let mut mean = nalgebra::DMatrix::zeros(8, 8);
        for seed in 0..100 {
            mean += add_gaussian_white(&b, eta, seed).unwrap().1.into_matrix();
        }
        mean /= 100.0;
        assert!(mean.norm() <= 0.2 * eta * b.norm());
    }

    #[test]
    fn poisson_cases() {
        let z = Image::<f64>::zeros(4, 4);
        assert_eq!(add_poisson(&z, 100.0, 1).unwrap(), z);

        let b = ramp(8, 8);
        let peak = 50.0;
        let noisy = add_poisson(&b, peak, 2).unwrap();
        let c = peak / b.max();
        for v in noisy.as_slice() {
            let k = v * c;
            assert!(*v >= 0.0 && (k - k.round()).abs() < 1e-9);
        }

        // law of large numbers: relative error shrinks like 1/√peak
        for seed in 0..5 {
            let big = add_poisson(&b, 1e8, seed).unwrap();
            let rel = crate::relative_error(big.as_slice(), b.as_slice()).unwrap();
            assert!(rel < 0.01, "{rel}");
        }

        let neg = Image::from_rows(&[vec![1.0, -0.5]]).unwrap();
        assert!(matches!(
            add_poisson(&neg, 10.0, 0),
            Err(DeblurError::NegativeIntensity(_))
        ));
        let roundoff = Image::from_rows(&[vec![1.0, -1e-20]]).unwrap();
        assert_eq!(add_poisson(&roundoff, 10.0, 0).unwrap().get(0, 1), 0.0);
    }

    #[test]
    fn salt_pepper_counts() {
        let b = ramp(10, 10);
        let noisy = add_salt_pepper(&b, 0.005, 3).unwrap();
        assert_eq!(noisy, b);

        let noisy = add_salt_pepper(&b, 0.137, 3).unwrap();
        let changed = corrupted_pixels(&b, &noisy);
        // ramp has distinct values so every pick except the extremes shows up
        let picked_extremes = [0usize, 99]
            .iter()
            .filter(|&&i| noisy.as_slice()[i] != b.as_slice()[i])
            .count();
        assert!(changed.len() <= 13 && changed.len() + 2 - picked_extremes >= 13);
        for i in 0..100 {
            let v = noisy.as_slice()[i];
            if !changed.contains(&i) {
                assert_eq!(v.to_bits(), b.as_slice()[i].to_bits());
            } else {
                assert!(v == b.min() || v == b.max());
            }
        }
        assert!(matches!(add_salt_pepper(&b, 1.0, 0), Err(DeblurError::BadFraction(_))));
        assert!(matches!(add_salt_pepper(&b, 0.0, 0), Err(DeblurError::BadFraction(_))));
    }

    #[test]
    fn salt_pepper_exact_count_on_interior_values() {
        // strictly interior values so every corrupted pixel is visible
        let mut b = ramp(10, 10).into_matrix();
        b[0] = -1.0;
        b[1] = 5.0;
        let b = Image::new(b).unwrap();
        let noisy = add_salt_pepper(&b, 0.25, 11).unwrap();
        let changed = corrupted_pixels(&b, &noisy).into_iter().filter(|&i| i > 1).count();
        let extremes_hit = (0..2).filter(|&i| noisy.as_slice()[i] != b.as_slice()[i]).count();
        assert!(changed + extremes_hit <= 25 && changed >= 23);
    }

    #[test]
    fn spec_strings() {
        assert_eq!(
            "gaussian:0.001".parse::<NoiseKind>().unwrap(),
            NoiseKind::GaussianWhite { level: 0.001 }
        );
        assert_eq!(
            "poisson:1e5".parse::<NoiseKind>().unwrap(),
            NoiseKind::Poisson { peak: 1e5 }
        );
        assert_eq!(
            "saltpepper:0.05".parse::<NoiseKind>().unwrap(),
            NoiseKind::SaltPepper { fraction: 0.05 }
        );
        assert_eq!(
            "saltpepper".parse::<NoiseKind>().unwrap(),
            NoiseKind::SaltPepper {
                fraction: DEFAULT_SALT_PEPPER_FRACTION
            }
        );
        assert!("gaussian:0".parse::<NoiseKind>().is_err());
        assert!("gaussian:-1".parse::<NoiseKind>().is_err());
        assert!("poisson".parse::<NoiseKind>().is_err());
        assert!("speckle:0.1".parse::<NoiseKind>().is_err());
        let k = NoiseKind::GaussianWhite { level: 0.001 };
        assert_eq!(k.to_string().parse::<NoiseKind>().unwrap(), k);
    }
}
