//! Feature extraction settings and the on-disk feature table.
//!
//! A feature file looks like
//!
//! ```text
//! # kind=tda
//! # version=1
//! # fingerprint=3f1c…
//! id,label,f0000,f0001,…
//! 000c1434d8d7,2,1,0,…
//! ```
//!
//! `label` holds the 0–4 grade so one file serves both tasks. Values are
//! written in shortest round-trip form, so reading and rewriting a file
//! reproduces it byte for byte.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::betti::{channel_curves, ThresholdGrid};
use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::hog::{hog_features, HogParams};
use crate::imageio::{resize, split_channels, to_grayscale, Image};
use crate::ml::{Dataset, Matrix};

/// Bumped whenever extractor output changes for identical parameters.
pub const EXTRACTOR_VERSION: u32 = 1;
pub const DEFAULT_SIZE: usize = 224;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    Tda,
    Hog,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Tda => "tda",
            FeatureKind::Hog => "hog",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tda" | "betti" => Ok(FeatureKind::Tda),
            "hog" => Ok(FeatureKind::Hog),
            other => Err(Error::InvalidArgument(format!(
                "unknown feature kind {other:?}"
            ))),
        }
    }
}

/// Everything that determines the feature values of an image.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorConfig {
    pub kind: FeatureKind,
    /// Images are resized to `size × size` first.
    pub size: usize,
    pub grid: ThresholdGrid,
    pub hog: HogParams,
}

impl ExtractorConfig {
    pub fn new(kind: FeatureKind) -> Self {
        ExtractorConfig {
            kind,
            size: DEFAULT_SIZE,
            grid: ThresholdGrid::default(),
            hog: HogParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidArgument(
                "resize target must be positive".into(),
            ));
        }
        if self.kind == FeatureKind::Hog {
            self.hog.validate()?;
            if self.hog.descriptor_len(self.size, self.size).is_none() {
                return Err(Error::InvalidDimensions(format!(
                    "{0}×{0} does not fit HOG parameters {1:?}",
                    self.size, self.hog
                )));
            }
        }
        Ok(())
    }

    pub fn feature_len(&self) -> usize {
        match self.kind {
            FeatureKind::Tda => 8 * self.grid.len(),
            FeatureKind::Hog => self.hog.descriptor_len(self.size, self.size).unwrap_or(0),
        }
    }

    /// Canonical text of every parameter that affects output.
    pub fn parameter_string(&self) -> String {
        match self.kind {
            FeatureKind::Tda => {
                let grid: Vec<String> = self.grid.points().iter().map(|t| t.to_string()).collect();
                format!(
                    "kind=tda;version={EXTRACTOR_VERSION};size={};channels=gray,red,green,blue;dims=0,1;grid={}",
                    self.size,
                    grid.join(",")
                )
            }
            FeatureKind::Hog => {
                let h = &self.hog;
                format!(
                    "kind=hog;version={EXTRACTOR_VERSION};size={};orientations={};cell={};block={};clip={:e};epsilon={:e}",
                    self.size, h.orientations, h.cell_size, h.block_size, h.clip, h.epsilon
                )
            }
        }
    }

    /// Hex SHA-256 of [`parameter_string`](Self::parameter_string).
    pub fn fingerprint(&self) -> String {
        Sha256::digest(self.parameter_string().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Resizes and runs the configured extractor on one decoded image.
    pub fn extract(&self, img: &Image) -> Result<Vec<f64>> {
        let img = resize(img, self.size, self.size)?;
        match self.kind {
            FeatureKind::Tda => {
                let channels = split_channels(&img)?;
                Ok(channel_curves(&channels, &self.grid)?
                    .iter()
                    .flat_map(|c| c.values.iter().map(|&v| v as f64))
                    .collect())
            }
            FeatureKind::Hog => hog_features(&to_grayscale(&img)?, &self.hog),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: String,
    pub label: u8,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub kind: FeatureKind,
    pub version: u32,
    pub fingerprint: String,
    pub width: usize,
    pub rows: Vec<FeatureRow>,
}

pub fn column_name(i: usize) -> String {
    format!("f{i:04}")
}

impl FeatureFile {
    pub fn new(config: &ExtractorConfig) -> Self {
        FeatureFile {
            kind: config.kind,
            version: EXTRACTOR_VERSION,
            fingerprint: config.fingerprint(),
            width: config.feature_len(),
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.id.as_str()).collect()
    }

    pub fn push(&mut self, row: FeatureRow) -> Result<()> {
        if row.values.len() != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                actual: row.values.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn sort_by_id(&mut self) {
        self.rows.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = BufWriter::new(writer);
        writeln!(out, "# kind={}", self.kind)?;
        writeln!(out, "# version={}", self.version)?;
        writeln!(out, "# fingerprint={}", self.fingerprint)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend((0..self.width).map(column_name));
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.width + 2);
        for row in &self.rows {
            record.clear();
            record.push(row.id.clone());
            record.push(row.label.to_string());
            record.extend(row.values.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn write_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = std::path::PathBuf::from(tmp);
        self.write_to(File::create(&tmp)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Self> {
        let mut input = BufReader::new(reader);
        let (mut kind, mut version, mut fingerprint) = (None, None, None);
        loop {
            let starts_with_hash = input.fill_buf()?.first() == Some(&b'#');
            if !starts_with_hash {
                break;
            }
            let mut line = String::new();
            input.read_line(&mut line)?;
            let body = line.trim_start_matches('#').trim();
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::FeatureFile(format!("malformed metadata line {line:?}")))?;
            match key.trim() {
                "kind" => kind = Some(value.trim().parse::<FeatureKind>()?),
                "version" => {
                    version = Some(value.trim().parse::<u32>().map_err(|_| {
                        Error::FeatureFile(format!("bad version {:?}", value.trim()))
                    })?)
                }
                "fingerprint" => fingerprint = Some(value.trim().to_string()),
                _ => {}
            }
        }
        let (Some(kind), Some(version), Some(fingerprint)) = (kind, version, fingerprint) else {
            return Err(Error::FeatureFile(
                "missing kind, version or fingerprint metadata".into(),
            ));
        };

        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = r.headers()?.clone();
        if header.len() < 2 || &header[0] != "id" || &header[1] != "label" {
            return Err(Error::FeatureFile("header must start with id,label".into()));
        }
        let width = header.len() - 2;
        for (i, name) in header.iter().skip(2).enumerate() {
            if name != column_name(i) {
                return Err(Error::FeatureFile(format!(
                    "column {} is {name:?}, expected {}",
                    i + 2,
                    column_name(i)
                )));
            }
        }
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            if record.len() != width + 2 {
                return Err(Error::FeatureFile(format!(
                    "row {} has {} fields, expected {}",
                    rows.len() + 1,
                    record.len(),
                    width + 2
                )));
            }
            let id = record[0].to_string();
            let label: u8 = record[1].parse().map_err(|_| {
                Error::FeatureFile(format!("sample {id}: bad label {:?}", &record[1]))
            })?;
            let values = record
                .iter()
                .skip(2)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::FeatureFile(format!("sample {id}: bad value {v:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(FeatureRow { id, label, values });
        }
        Ok(FeatureFile {
            kind,
            version,
            fingerprint,
            width,
            rows,
        })
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.is_file() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        Self::read_from(File::open(path)?)
    }

    /// Feature matrix and task labels, in row order.
    pub fn to_dataset(&self, task: Task) -> Result<Dataset> {
        let mut data = Vec::with_capacity(self.rows.len() * self.width);
        let mut labels = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            if row.label > crate::dataset::MAX_GRADE {
                return Err(Error::GradeOutOfRange {
                    id: row.id.clone(),
                    grade: row.label as i64,
                });
            }
            data.extend_from_slice(&row.values);
            labels.push(task.label(row.label));
        }
        Dataset::new(
            Matrix::new(self.rows.len(), self.width, data)?,
            labels,
            task.n_classes(),
        )
    }
}
