//! Labelled sample registry built from a grading manifest.
//!
//! The manifest is a CSV with an id column (`id_code` or `id`) and a grade
//! column (`diagnosis` or `grade`). Images live next to each other in one
//! directory as `<id>.png`, `<id>.jpg` or `<id>.jpeg`, tried in that order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_GRADE: u8 = 4;
const EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Label scheme derived from the 0–4 severity grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    /// Grade 0 is class 0, grades 1–4 are class 1.
    Binary,
    /// The grade itself is the class.
    FiveClass,
}

impl Task {
    pub fn n_classes(self) -> usize {
        match self {
            Task::Binary => 2,
            Task::FiveClass => 5,
        }
    }

    pub fn label(self, grade: u8) -> usize {
        match self {
            Task::Binary => usize::from(grade > 0),
            Task::FiveClass => grade as usize,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Binary => "binary",
            Task::FiveClass => "five",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "2" => Ok(Task::Binary),
            "five" | "five_class" | "five-class" | "multiclass" | "5" => Ok(Task::FiveClass),
            other => Err(Error::InvalidArgument(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub id: String,
    pub path: PathBuf,
    pub grade: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub entries: Vec<Entry>,
}

impl DatasetIndex {
    pub fn new(entries: Vec<Entry>) -> Result<Self> {
        for e in &entries {
            if e.grade > MAX_GRADE {
                return Err(Error::GradeOutOfRange {
                    id: e.id.clone(),
                    grade: e.grade as i64,
                });
            }
        }
        Ok(DatasetIndex { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn grade_counts(&self) -> [usize; 5] {
        let mut counts = [0; 5];
        for e in &self.entries {
            counts[e.grade as usize] += 1;
        }
        counts
    }

    pub fn class_counts(&self, task: Task) -> Vec<usize> {
        let mut counts = vec![0; task.n_classes()];
        for e in &self.entries {
            counts[task.label(e.grade)] += 1;
        }
        counts
    }

    pub fn labels(&self, task: Task) -> Vec<usize> {
        self.entries.iter().map(|e| task.label(e.grade)).collect()
    }

    /// Writes the resolved index as `id,path,grade`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id", "path", "grade"])?;
        for e in &self.entries {
            w.write_record([
                e.id.as_str(),
                &e.path.to_string_lossy(),
                &e.grade.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// First existing `<dir>/<id>.<ext>` in extension priority order.
pub fn resolve_image(dir: &Path, id: &str) -> Option<PathBuf> {
    EXTENSIONS
        .iter()
        .map(|ext| dir.join(format!("{id}.{ext}")))
        .find(|p| p.is_file())
}

fn column(headers: &csv::StringRecord, names: &[&str]) -> Result<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
        .ok_or_else(|| Error::Manifest(format!("missing column, expected one of {names:?}")))
}

/// Reads the manifest and resolves every image. All unresolvable ids are
/// reported together.
pub fn ingest(manifest: impl AsRef<Path>, images_dir: impl AsRef<Path>) -> Result<DatasetIndex> {
    let manifest = manifest.as_ref();
    let images_dir = images_dir.as_ref();
    if !manifest.is_file() {
        return Err(Error::FileNotFound(manifest.to_path_buf()));
    }
    let mut reader = csv::Reader::from_path(manifest)?;
    let headers = reader.headers()?.clone();
    let id_col = column(&headers, &["id_code", "id"])?;
    let grade_col = column(&headers, &["diagnosis", "grade"])?;

    let mut entries = Vec::new();
    let mut missing = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").trim().to_string();
        if id.is_empty() {
            return Err(Error::Manifest(format!(
                "empty id on line {}",
                record.position().map_or(0, |p| p.line())
            )));
        }
        let raw = record.get(grade_col).unwrap_or("").trim();
        let grade: i64 = raw.parse().map_err(|_| {
            Error::Manifest(format!("sample {id}: grade {raw:?} is not an integer"))
        })?;
        if !(0..=MAX_GRADE as i64).contains(&grade) {
            return Err(Error::GradeOutOfRange { id, grade });
        }
        match resolve_image(images_dir, &id) {
            Some(path) => entries.push(Entry {
                id,
                path,
                grade: grade as u8,
            }),
            None => missing.push(id),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingImage {
            id: missing.join(", "),
            dir: images_dir.to_path_buf(),
        });
    }
    if entries.is_empty() {
        log::warn!("manifest {} has no entries", manifest.display());
    }
    Ok(DatasetIndex { entries })
}
