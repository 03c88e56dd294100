//! 16-bit binary PGM (P5) files with a sidecar holding the intensity range.
//!
//! Pixels are scaled linearly so that `min ↦ 0` and `max ↦ 65535`; the
//! sidecar `<file>.meta` records `min`, `max`, `p`, `q` and `seed` so a
//! reader can map quantized values back onto the original scale.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{DeblurError, Result};
use crate::image::Image;
use crate::operators::parse_key_values;
use crate::scalar::Real;

pub const MAXVAL: u16 = 65535;

/// Contents of the `.meta` sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmMeta {
    pub min: f64,
    pub max: f64,
    pub rows: usize,
    pub cols: usize,
    pub seed: Option<u64>,
}

impl PgmMeta {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "min={:?}\nmax={:?}\np={}\nq={}\n",
            self.min, self.max, self.rows, self.cols
        );
        if let Some(seed) = self.seed {
            s.push_str(&format!("seed={seed}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_key_values(text)?;
        let get = |k: &str| {
            map.get(k)
                .ok_or_else(|| DeblurError::MalformedFile(format!("sidecar lacks {k:?}")))
        };
        let bad = |k: &str| DeblurError::MalformedFile(format!("sidecar has a bad {k:?} value"));
        Ok(Self {
            min: get("min")?.parse().map_err(|_| bad("min"))?,
            max: get("max")?.parse().map_err(|_| bad("max"))?,
            rows: get("p")?.parse().map_err(|_| bad("p"))?,
            cols: get("q")?.parse().map_err(|_| bad("q"))?,
            seed: match map.get("seed") {
                Some(v) => Some(v.parse().map_err(|_| bad("seed"))?),
                None => None,
            },
        })
    }
}

/// Path of the sidecar belonging to `path`.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Quantizes an image to 16-bit levels.
pub fn quantize<T: Real>(image: &Image<T>) -> (Vec<u16>, f64, f64) {
    let (min, max) = (image.min().as_f64(), image.max().as_f64());
    let range = max - min;
    let levels = image
        .as_slice()
        .iter()
        .map(|v| {
            if range > 0.0 {
                let t = (v.as_f64() - min) / range * MAXVAL as f64;
                t.round().clamp(0.0, MAXVAL as f64) as u16
            } else {
                0
            }
        })
        .collect();
    (levels, min, max)
}

/// Inverse of [`quantize`]; the end points map back exactly.
pub fn dequantize(level: u16, min: f64, max: f64) -> f64 {
    match level {
        0 => min,
        MAXVAL => max,
        l => min + (max - min) * (l as f64 / MAXVAL as f64),
    }
}

/// Encodes column-major `levels` of a `rows × cols` image as P5 bytes (row-major, big-endian).
pub fn encode(levels: &[u16], rows: usize, cols: usize) -> Vec<u8> {
    let mut out = format!("P5\n{cols} {rows}\n{MAXVAL}\n").into_bytes();
    out.reserve(2 * rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.extend_from_slice(&levels[i + j * rows].to_be_bytes());
        }
    }
    out
}

/// Decoded raster: column-major levels with the declared maxval.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub rows: usize,
    pub cols: usize,
    pub maxval: u16,
    pub levels: Vec<u16>,
}

fn header_tokens(bytes: &[u8]) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    while tokens.len() < 4 {
        let Some(&c) = bytes.get(pos) else {
            return Err(DeblurError::MalformedFile("truncated header".into()));
        };
        if c == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else if c.is_ascii_whitespace() {
            pos += 1;
        } else {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                pos += 1;
            }
            tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => Ok((tokens, pos + 1)),
        _ => Err(DeblurError::MalformedFile("missing raster separator".into())),
    }
}

pub fn decode(bytes: &[u8]) -> Result<Raster> {
    let (tokens, start) = header_tokens(bytes)?;
    if tokens[0] != "P5" {
        return Err(DeblurError::MalformedFile(format!("unsupported magic {:?}", tokens[0])));
    }
    let num = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| DeblurError::MalformedFile(format!("bad {what} {s:?}")))
    };
    let cols = num(&tokens[1], "width")?;
    let rows = num(&tokens[2], "height")?;
    let maxval = num(&tokens[3], "maxval")?;
    if rows == 0 || cols == 0 || maxval == 0 || maxval > MAXVAL as usize {
        return Err(DeblurError::MalformedFile("header values out of range".into()));
    }
    let wide = maxval > 255;
    let bpp = if wide { 2 } else { 1 };
    let raster = &bytes[start..];
    let need = rows * cols * bpp;
    if raster.len() < need {
        return Err(DeblurError::MalformedFile(format!(
            "raster has {} bytes, expected {need}",
            raster.len()
        )));
    }
    let mut levels = vec![0u16; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let k = (i * cols + j) * bpp;
            let v = if wide {
                u16::from_be_bytes([raster[k], raster[k + 1]])
            } else {
                raster[k] as u16
            };
            if v as usize > maxval {
                return Err(DeblurError::MalformedFile("sample exceeds maxval".into()));
            }
            levels[i + j * rows] = v;
        }
    }
    Ok(Raster {
        rows,
        cols,
        maxval: maxval as u16,
        levels,
    })
}

/// Writes `image` and its sidecar. Returns the sidecar contents.
pub fn write_pgm<T: Real>(path: &Path, image: &Image<T>, seed: Option<u64>) -> Result<PgmMeta> {
    let (levels, min, max) = quantize(image);
    let meta = PgmMeta {
        min,
        max,
        rows: image.rows(),
        cols: image.cols(),
        seed,
    };
    atomic_write(path, &encode(&levels, image.rows(), image.cols()))?;
    atomic_write(&meta_path(path), meta.to_text().as_bytes())?;
    Ok(meta)
}

/// Reads a PGM file. With a sidecar the original range is restored,
/// otherwise intensities are scaled to `[0, 1]`.
pub fn read_pgm<T: Real>(path: &Path) -> Result<Image<T>> {
    let raster = decode(&fs::read(path)?)?;
    let mp = meta_path(path);
    let (min, max) = if mp.exists() {
        let meta = PgmMeta::parse(&fs::read_to_string(&mp)?)?;
        if (meta.rows, meta.cols) != (raster.rows, raster.cols) {
            return Err(DeblurError::MalformedFile("sidecar size disagrees with image".into()));
        }
        (meta.min, meta.max)
    } else {
        (0.0, 1.0)
    };
    let scale = MAXVAL as f64 / raster.maxval as f64;
    let data = DMatrix::from_fn(raster.rows, raster.cols, |i, j| {
        let l = raster.levels[i + j * raster.rows] as f64 * scale;
        T::lit(dequantize(l.round() as u16, min, max))
    });
    Image::new(data)
}
