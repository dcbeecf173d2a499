use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One named pass/fail check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub key: String,
    pub description: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Criterion {
    pub fn at_most(key: &str, description: &str, value: f64, threshold: f64) -> Self {
        Criterion {
            key: key.into(),
            description: description.into(),
            value,
            relation: Relation::AtMost,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn at_least(key: &str, description: &str, value: f64, threshold: f64) -> Self {
        Criterion {
            key: key.into(),
            description: description.into(),
            value,
            relation: Relation::AtLeast,
            threshold,
            pass: value >= threshold,
        }
    }

    /// A yes/no check reported as `1 >= 1` or `0 >= 1`.
    pub fn holds(key: &str, description: &str, ok: bool) -> Self {
        Self::at_least(key, description, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn line(&self) -> String {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        format!(
            "{} {}: {:.6e} {rel} {:.6e} ({})",
            if self.pass { "PASS" } else { "FAIL" },
            self.key,
            self.value,
            self.threshold,
            self.description
        )
    }
}

/// A table written as `<stem>.csv` or `<stem>.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub stem: String,
    pub csv: String,
    pub json: serde_json::Value,
}

impl Table {
    pub fn new<T: Serialize + ?Sized>(stem: &str, csv: String, rows: &T) -> Result<Self> {
        Ok(Table {
            stem: stem.into(),
            csv,
            json: serde_json::to_value(rows)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub title: String,
    pub config: serde_json::Value,
    pub summary: serde_json::Value,
    pub criteria: Vec<Criterion>,
    pub pass: bool,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Writes the tables and `manifest.json` into `dir`; returns the manifest path.
pub(crate) fn write_outputs(dir: &Path, format: OutputFormat, tables: &[Table], mut manifest: Manifest) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(tables.len());
    for t in tables {
        let (name, bytes) = match format {
            OutputFormat::Csv => (format!("{}.csv", t.stem), t.csv.clone().into_bytes()),
            OutputFormat::Json => {
                let mut b = serde_json::to_vec_pretty(&t.json)?;
                b.push(b'\n');
                (format!("{}.json", t.stem), b)
            }
        };
        std::fs::write(dir.join(&name), &bytes)?;
        files.push(FileEntry {
            sha256: sha256_hex(&bytes),
            path: name,
        });
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    manifest.files = files;
    let p = dir.join("manifest.json");
    let mut b = serde_json::to_vec_pretty(&manifest)?;
    b.push(b'\n');
    std::fs::write(&p, b)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn criterion_lines() {
        let c = Criterion::at_most("k", "d", 0.5, 1.0);
        assert!(c.pass && c.line().starts_with("PASS k:"));
        assert!(!Criterion::at_least("k", "d", 0.5, 1.0).pass);
        assert!(!Criterion::holds("k", "d", false).pass);
    }
}
