//! Plain-text writers. Numbers are written with nine significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use spinguide_core::{Error as CoreError, Grid1D};

use crate::config::RunConfig;
use crate::error::CliError;

pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

fn ensure_finite(what: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Numerical(CoreError::Numerical {
            t: f64::NAN,
            reason: format!("{what} is {v}"),
        }))
    }
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.display().to_string(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(path)
    }
}

/// One row per snapshot, one column per grid point, space separated.
pub fn density_text(densities: &[Vec<f64>]) -> Result<String, CliError> {
    let mut out = String::new();
    for row in densities {
        let mut first = true;
        for &v in row {
            ensure_finite("density", v)?;
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&num(v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// `key = value` lines readable as TOML.
#[derive(Default)]
pub struct KeyValues {
    text: String,
}

impl KeyValues {
    pub fn number(&mut self, key: &str, v: f64) -> Result<(), CliError> {
        ensure_finite(key, v)?;
        self.text.push_str(&format!("{key} = {}\n", num(v)));
        Ok(())
    }

    pub fn maybe(&mut self, key: &str, v: Option<f64>) -> Result<(), CliError> {
        match v {
            Some(v) => self.number(key, v),
            None => Ok(()),
        }
    }

    pub fn text(&mut self, key: &str, v: &str) {
        self.text
            .push_str(&format!("{key} = {}\n", toml::Value::String(v.into())));
    }

    pub fn list(&mut self, key: &str, items: &[String]) {
        let quoted: Vec<String> = items
            .iter()
            .map(|s| toml::Value::String(s.clone()).to_string())
            .collect();
        self.text
            .push_str(&format!("{key} = [{}]\n", quoted.join(", ")));
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Tab-separated table with a header row and a trailing status column.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub const MISSING: &str = "-";

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let mut header: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
        header.push("status".into());
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn with_header(mut header: Vec<String>) -> Self {
        header.push("status".into());
        Self {
            header,
            rows: Vec::new(),
        }
    }

    /// Adds a row; `Err` fills the value columns with `-`.
    pub fn push(&mut self, keys: &[f64], values: Result<Vec<f64>, String>) -> Result<(), CliError> {
        let mut row: Vec<String> = keys.iter().map(|k| num(*k)).collect();
        let value_columns = self.header.len() - 1 - keys.len();
        match values {
            Ok(vals) => {
                debug_assert_eq!(vals.len(), value_columns);
                for v in &vals {
                    ensure_finite("table value", *v)?;
                }
                row.extend(vals.into_iter().map(num));
                row.push("ok".into());
            }
            Err(msg) => {
                row.extend(std::iter::repeat_n(MISSING.to_string(), value_columns));
                row.push(format!("error: {}", msg.replace(['\t', '\n'], " ")));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn text(&self) -> String {
        let mut out = self.header.join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

pub fn checksum(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Extra metadata entries beyond the fixed ones.
#[derive(Default)]
pub struct MetadataExtras {
    pub times: Option<Vec<f64>>,
    pub grid: Option<Grid1D>,
    /// Wall-clock measurements; not reproducible between runs.
    pub timing: Vec<(String, f64)>,
}

pub fn metadata_text(command: &str, config: &RunConfig, extras: MetadataExtras) -> String {
    let canonical = config.canonical();
    let mut table = toml::Table::new();
    table.insert("tool".into(), "spinguide".into());
    table.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    table.insert("command".into(), command.into());
    table.insert("config_sha256".into(), checksum(&canonical).into());
    if let Some(times) = extras.times {
        table.insert("snapshot_count".into(), (times.len() as i64).into());
        table.insert(
            "times".into(),
            toml::Value::Array(times.into_iter().map(toml::Value::Float).collect()),
        );
    }
    if let Some(g) = extras.grid {
        let mut grid = toml::Table::new();
        grid.insert("x_min".into(), g.x_min().into());
        grid.insert("x_max".into(), g.x_max().into());
        grid.insert("n_points".into(), (g.n_points() as i64).into());
        grid.insert("dx".into(), g.dx().into());
        table.insert("grid".into(), toml::Value::Table(grid));
    }
    if !extras.timing.is_empty() {
        let mut timing = toml::Table::new();
        timing.insert(
            "note".into(),
            "wall-clock seconds; these values differ between runs".into(),
        );
        for (k, v) in extras.timing {
            timing.insert(k, v.into());
        }
        table.insert("timing".into(), toml::Value::Table(timing));
    }
    let embedded: toml::Table = canonical.parse().expect("canonical config is valid TOML");
    table.insert("config".into(), toml::Value::Table(embedded));
    toml::to_string(&table).expect("metadata serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(0.1234567891234), "1.23456789e-1");
        assert_eq!(num(0.0), "0.00000000e0");
    }

    #[test]
    fn table_marks_failed_rows() {
        let mut t = Table::new(&["theta", "r"]);
        t.push(&[0.5], Ok(vec![0.25])).unwrap();
        t.push(&[4.0], Err("no crossing".into())).unwrap();
        let text = t.text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta\tr\tstatus");
        assert!(lines[1].ends_with("\tok"));
        assert!(lines[2].contains("\t-\terror: no crossing"));
    }

    #[test]
    fn non_finite_values_are_refused() {
        assert!(density_text(&[vec![1.0, f64::NAN]]).is_err());
        let mut kv = KeyValues::default();
        assert!(kv.number("x", f64::INFINITY).is_err());
    }
}
