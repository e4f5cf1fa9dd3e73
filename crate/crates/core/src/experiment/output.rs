use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Writes run outputs into one directory and remembers what it wrote so a
/// failed run can be rolled back.
pub(crate) struct OutputDir {
    root: PathBuf,
    created_root: bool,
    records: Vec<OutputRecord>,
}

impl OutputDir {
    pub(crate) fn create(root: &Path) -> Result<Self> {
        let created_root = !root.exists();
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), created_root, records: Vec::new() })
    }

    pub(crate) fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        fs::write(self.root.join(name), contents)?;
        self.records.push(OutputRecord {
            file: name.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len() as u64,
        });
        Ok(())
    }

    pub(crate) fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub(crate) fn records(&self) -> &[OutputRecord] {
        &self.records
    }

    pub(crate) fn root(&self) -> &Path {
        &self.root
    }

    /// Removes everything written so far.
    pub(crate) fn discard(self) {
        for r in &self.records {
            let _ = fs::remove_file(self.root.join(&r.file));
        }
        let _ = fs::remove_file(self.root.join(super::MANIFEST_FILE));
        if self.created_root {
            let _ = fs::remove_dir(&self.root);
        }
    }
}

/// CSV with a header row and one line per record.
pub(crate) fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.into_iter().collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Matrix CSV: first row holds `corner` then the column coordinates, each
/// following row starts with its row coordinate.
pub(crate) fn grid_csv(corner: &str, rows: &[f64], cols: &[f64], values: &DMatrix<f64>) -> String {
    let mut out = String::from(corner);
    for c in cols {
        let _ = write!(out, ",{c}");
    }
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(out, "{r}");
        for j in 0..cols.len() {
            let _ = write!(out, ",{}", values[(i, j)]);
        }
        out.push('\n');
    }
    out
}
