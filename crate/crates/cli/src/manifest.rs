//! Ordered `key=value` manifests.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;

use deblur::operators::parse_key_values;
use deblur::pgm::atomic_write;

use crate::failure::{CliError, CliResult};

/// Keys keep insertion order so manifests diff cleanly between runs.
#[derive(Debug, Default, Clone)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    /// Floats use the shortest repr that parses back to the same bits.
    pub fn set_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, format!("{value:?}"))
    }

    pub fn extend_from_text(&mut self, text: &str) -> CliResult<&mut Self> {
        for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::io(format!("bad manifest line {line:?}")))?;
            self.set(k.trim(), v.trim());
        }
        Ok(self)
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        atomic_write(path, self.to_text().as_bytes())?;
        Ok(())
    }
}

pub fn read_map(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_key_values(&text)?)
}
