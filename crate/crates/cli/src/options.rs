//! Method and parameter-selector flag values.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Naive,
    Tsvd(usize),
    /// Standard-form Tikhonov through the SVD.
    Tikhonov,
    /// General-form Tikhonov with the first-derivative penalty.
    Gtik,
    Tv,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            Some(("tsvd", k)) => match k.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(Method::Tsvd(k)),
                _ => Err(format!("tsvd cutoff must be a positive integer, got {k:?}")),
            },
            Some(_) => Err(format!("unknown method {s:?}")),
            None => match s {
                "naive" => Ok(Method::Naive),
                "tikhonov" => Ok(Method::Tikhonov),
                "gtik" => Ok(Method::Gtik),
                "tv" => Ok(Method::Tv),
                _ => Err(format!("unknown method {s:?} (naive, tsvd:k, tikhonov, gtik, tv)")),
            },
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Naive => f.write_str("naive"),
            Method::Tsvd(k) => write!(f, "tsvd:{k}"),
            Method::Tikhonov => f.write_str("tikhonov"),
            Method::Gtik => f.write_str("gtik"),
            Method::Tv => f.write_str("tv"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selector {
    LCurve,
    /// Noise norm; `None` reads the simulated `‖e‖₂` from the scene manifest.
    Discrepancy(Option<f64>),
    Fixed(f64),
}

fn positive(s: &str, what: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("{what} must be a positive number, got {s:?}")),
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "lcurve" => Ok(Selector::LCurve),
            None if s == "discrepancy" => Ok(Selector::Discrepancy(None)),
            Some(("discrepancy", "auto")) => Ok(Selector::Discrepancy(None)),
            Some(("discrepancy", d)) => Ok(Selector::Discrepancy(Some(positive(d, "noise norm")?))),
            Some(("fixed", v)) => Ok(Selector::Fixed(positive(v, "parameter")?)),
            _ => Err(format!(
                "unknown selector {s:?} (lcurve, discrepancy:auto, discrepancy:<delta>, fixed:<value>)"
            )),
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::LCurve => f.write_str("lcurve"),
            Selector::Discrepancy(None) => f.write_str("discrepancy:auto"),
            Selector::Discrepancy(Some(d)) => write!(f, "discrepancy:{d:?}"),
            Selector::Fixed(v) => write!(f, "fixed:{v:?}"),
        }
    }
}
