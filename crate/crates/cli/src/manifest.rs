//! JSON-lines dataset manifests: `{"image": ..., "label": 0|1, "mask": ...}`.
//!
//! Relative paths resolve against the manifest's directory. The dataset
//! name is the manifest file stem.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use lssal::model::Label;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, io_err, CliResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub image: PathBuf,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
}

impl Record {
    /// File stem used to name caches and predictions.
    pub fn stem(&self) -> String {
        self.image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub name: String,
    pub base: PathBuf,
    pub records: Vec<Record>,
}

impl Manifest {
    pub fn new(name: impl Into<String>, base: impl Into<PathBuf>, records: Vec<Record>) -> Self {
        Self {
            name: name.into(),
            base: base.into(),
            records,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
        let mut records = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| io_err(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(&line)
                .map_err(|e| invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
            if rec.label > 1 {
                return Err(invalid(format!(
                    "{}:{}: label must be 0 or 1",
                    path.display(),
                    i + 1
                )));
            }
            records.push(rec);
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let m = Self::new(name, base, records);
        m.check_paths()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut out = Vec::new();
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(|e| invalid(e.to_string()))?;
            out.push(b'\n');
        }
        fs::File::create(path)
            .and_then(|mut f| f.write_all(&out))
            .map_err(|e| io_err(path, e))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    pub fn image_path(&self, r: &Record) -> PathBuf {
        self.resolve(&r.image)
    }

    pub fn mask_path(&self, r: &Record) -> Option<PathBuf> {
        r.mask.as_deref().map(|m| self.resolve(m))
    }

    /// Every referenced file must exist and image stems must be unique.
    fn check_paths(&self) -> CliResult<()> {
        let mut stems = std::collections::BTreeSet::new();
        for r in &self.records {
            let img = self.image_path(r);
            if !img.is_file() {
                return Err(invalid(format!("image {} not found", img.display())));
            }
            if let Some(m) = self.mask_path(r) {
                if !m.is_file() {
                    return Err(invalid(format!("mask {} not found", m.display())));
                }
            }
            if !stems.insert(r.stem()) {
                return Err(invalid(format!("duplicate image name {}", r.stem())));
            }
        }
        Ok(())
    }
}
