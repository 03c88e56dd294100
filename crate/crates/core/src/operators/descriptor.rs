use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{BlurOperator, BoundaryCondition, OperatorKind};
use crate::error::{DeblurError, Result};
use crate::psf::GaussianPsf;
use crate::scalar::Real;

/// Everything needed to rebuild a Gaussian blur operator, written as
/// `key=value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorDescriptor {
    pub kind: OperatorKind,
    pub bc: BoundaryCondition,
    pub spread: f64,
    pub half_width: usize,
    pub rows: usize,
    pub cols: usize,
}

impl OperatorDescriptor {
    pub fn build<T: Real>(&self) -> Result<BlurOperator<T>> {
        let psf = GaussianPsf::new(self.half_width, T::lit(self.spread))?;
        BlurOperator::from_psf(&psf, self.bc, self.rows, self.cols, self.kind)
    }

    /// Reads the descriptor keys out of a larger key/value map.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        fn get<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
            map.get(key)
                .map(String::as_str)
                .ok_or_else(|| DeblurError::MalformedFile(format!("missing key {key}")))
        }
        fn num<V: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<V> {
            get(map, key)?
                .parse()
                .map_err(|_| DeblurError::MalformedFile(format!("bad value for {key}")))
        }
        Ok(Self {
            kind: get(map, "variant")?.parse()?,
            bc: get(map, "bc")?.parse()?,
            spread: num(map, "s")?,
            half_width: num(map, "half_width")?,
            rows: num(map, "p")?,
            cols: num(map, "q")?,
        })
    }
}

impl fmt::Display for OperatorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "variant={}", self.kind)?;
        writeln!(f, "bc={}", self.bc)?;
        writeln!(f, "s={:?}", self.spread)?;
        writeln!(f, "half_width={}", self.half_width)?;
        writeln!(f, "p={}", self.rows)?;
        writeln!(f, "q={}", self.cols)
    }
}

impl FromStr for OperatorDescriptor {
    type Err = DeblurError;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_map(&parse_key_values(s)?)
    }
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| DeblurError::MalformedFile(format!("expected key=value, got {line:?}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}
