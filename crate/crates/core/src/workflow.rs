//! File-level workflows: feature extraction into a resumable cache,
//! cross-validated benchmarks, and per-class Betti-curve bands.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::betti::{median_band_values, ThresholdGrid, CHANNEL_NAMES};
use crate::dataset::{DatasetIndex, Task};
use crate::error::{Error, Result};
use crate::eval::{self, stratified_folds, MetricsReport};
use crate::features::{ExtractorConfig, FeatureFile, FeatureKind, FeatureRow};
use crate::imageio::load_image;
use crate::ml::{ModelKind, ModelSpec};
use crate::svg::{LinePlot, Series};

/// Environment variable naming the feature cache directory.
pub const CACHE_ENV: &str = "TOPOHOG_CACHE_DIR";
const DEFAULT_CACHE: &str = ".topohog-cache";

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE))
}

/// `<cache>/<kind>_features.csv`.
pub fn default_feature_path(kind: FeatureKind) -> PathBuf {
    cache_dir().join(format!("{kind}_features.csv"))
}

/// `<features>.errors.csv` next to the feature file.
pub fn error_manifest_path(out_path: &Path) -> PathBuf {
    let mut name = out_path.as_os_str().to_owned();
    name.push(".errors.csv");
    PathBuf::from(name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractFailure {
    pub id: String,
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ExtractReport {
    pub file: FeatureFile,
    pub extracted: usize,
    pub skipped: usize,
    pub failures: Vec<ExtractFailure>,
}

/// Extracts features for every index entry not already in `out_path`.
///
/// An existing file must carry the same kind and fingerprint. Images that
/// fail to decode are listed in the error manifest and left out; the rest
/// are merged with any existing rows, sorted by id and written atomically.
pub fn extract(
    index: &DatasetIndex,
    config: &ExtractorConfig,
    out_path: &Path,
) -> Result<ExtractReport> {
    config.validate()?;
    let mut file = if out_path.is_file() {
        let existing = FeatureFile::read_path(out_path)?;
        let expected = config.fingerprint();
        if existing.kind != config.kind
            || existing.fingerprint != expected
            || existing.width != config.feature_len()
        {
            return Err(Error::IncompatibleFeatureFile {
                path: out_path.to_path_buf(),
                expected,
                found: existing.fingerprint,
            });
        }
        existing
    } else {
        FeatureFile::new(config)
    };

    let todo: Vec<_> = {
        let present = file.ids();
        index
            .entries
            .iter()
            .filter(|e| !present.contains(e.id.as_str()))
            .collect()
    };
    let skipped = index.len() - todo.len();
    log::info!(
        "extracting {} {} features ({} cached)",
        todo.len(),
        config.kind,
        skipped
    );

    let results: Vec<std::result::Result<FeatureRow, ExtractFailure>> = todo
        .par_iter()
        .map(|e| {
            load_image(&e.path)
                .and_then(|img| config.extract(&img))
                .map(|values| FeatureRow {
                    id: e.id.clone(),
                    label: e.grade,
                    values,
                })
                .map_err(|err| ExtractFailure {
                    id: e.id.clone(),
                    path: e.path.clone(),
                    reason: err.to_string(),
                })
        })
        .collect();

    let mut failures = Vec::new();
    let mut extracted = 0;
    for r in results {
        match r {
            Ok(row) => {
                file.push(row)?;
                extracted += 1;
            }
            Err(f) => failures.push(f),
        }
    }
    file.sort_by_id();
    if let Some(parent) = out_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    file.write_path(out_path)?;

    let errors_path = error_manifest_path(out_path);
    if failures.is_empty() {
        if errors_path.is_file() {
            fs::remove_file(&errors_path)?;
        }
    } else {
        failures.sort_by(|a, b| a.id.cmp(&b.id));
        let mut w = csv::Writer::from_path(&errors_path)?;
        w.write_record(["id", "path", "error"])?;
        for f in &failures {
            w.write_record([f.id.as_str(), &f.path.to_string_lossy(), &f.reason])?;
        }
        w.flush()?;
        log::warn!(
            "{} images failed, see {}",
            failures.len(),
            errors_path.display()
        );
    }
    Ok(ExtractReport {
        file,
        extracted,
        skipped,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOptions {
    pub task: Task,
    pub models: Vec<ModelKind>,
    pub seed: u64,
    pub folds: usize,
    pub svg: bool,
}

impl BenchmarkOptions {
    pub fn new(task: Task) -> Self {
        BenchmarkOptions {
            task,
            models: ModelKind::ALL.to_vec(),
            seed: 0,
            folds: 10,
            svg: false,
        }
    }
}

/// Parses a comma-separated model list; `all` selects every model.
pub fn parse_models(list: &str) -> Result<Vec<ModelKind>> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name.eq_ignore_ascii_case("all") {
            return Ok(ModelKind::ALL.to_vec());
        }
        let kind: ModelKind = name.parse()?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no models selected".into()));
    }
    Ok(out)
}

/// Cross-validates each model on one shared fold split and writes
/// `metrics.csv`, `fold_metrics.csv`, `confusion_matrices.csv`,
/// `roc_points.csv`, `radar.csv` and `summary.txt` into `out_dir`.
pub fn run_benchmark(
    features: &FeatureFile,
    opts: &BenchmarkOptions,
    out_dir: &Path,
) -> Result<Vec<MetricsReport>> {
    if opts.models.is_empty() {
        return Err(Error::InvalidArgument("no models selected".into()));
    }
    let data = features.to_dataset(opts.task)?;
    let folds = stratified_folds(&data.labels, opts.folds, opts.seed)?;
    let mut reports = Vec::with_capacity(opts.models.len());
    for &kind in &opts.models {
        log::info!("cross-validating {kind}");
        reports.push(eval::cross_validate(
            &ModelSpec::new(kind, opts.seed),
            &data,
            &folds,
        )?);
    }

    fs::create_dir_all(out_dir)?;
    eval::write_metrics_csv(&reports, fs::File::create(out_dir.join("metrics.csv"))?)?;
    eval::write_fold_metrics_csv(
        &reports,
        fs::File::create(out_dir.join("fold_metrics.csv"))?,
    )?;
    eval::write_confusion_csv(
        &reports,
        fs::File::create(out_dir.join("confusion_matrices.csv"))?,
    )?;
    eval::write_roc_csv(&reports, fs::File::create(out_dir.join("roc_points.csv"))?)?;
    eval::write_radar_csv(&reports, fs::File::create(out_dir.join("radar.csv"))?)?;

    let counts = data.class_counts();
    let mut summary = format!(
        "features: {} ({} samples × {} features)\ntask: {}\nclass counts: {:?}\nfolds: {}\nseed: {}\n\n",
        features.kind,
        data.len(),
        data.n_features(),
        opts.task,
        counts,
        opts.folds,
        opts.seed
    );
    summary.push_str(&eval::format_summary(&reports));
    summary.push_str("\npooled confusion matrices (rows = true class):\n");
    for r in &reports {
        let cm = r.pooled_confusion();
        summary.push_str(&format!("{}\n", r.model));
        for t in 0..cm.n_classes() {
            let row: Vec<String> = (0..cm.n_classes())
                .map(|p| format!("{:>6}", cm.get(t, p)))
                .collect();
            summary.push_str(&row.join(""));
            summary.push('\n');
        }
    }
    fs::write(out_dir.join("summary.txt"), summary)?;

    if opts.svg && opts.task == Task::Binary {
        for r in &reports {
            let series = r
                .folds
                .iter()
                .map(|f| {
                    Series::line(
                        format!("fold {}", f.fold),
                        f.roc.iter().map(|p| (p.fpr, p.tpr)).collect(),
                    )
                })
                .collect();
            let plot = LinePlot {
                title: format!("ROC: {}", r.model),
                x_label: "false positive rate".into(),
                y_label: "true positive rate".into(),
                series,
                diagonal: true,
            };
            fs::write(out_dir.join(format!("roc_{}.svg", r.model)), plot.render())?;
        }
    }
    Ok(reports)
}

/// Median and band of one (class, channel, dimension) block.
#[derive(Debug, Clone, PartialEq)]
pub struct BandRecord {
    pub class: usize,
    pub channel: usize,
    pub dim: usize,
    pub grid: Vec<i32>,
    pub median: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Per class and per block median Betti curves with a central band of the
/// given coverage. Writes `betti_bands.csv` and `betti_summary.txt`.
pub fn analyze_betti(
    features: &FeatureFile,
    task: Task,
    coverage: f64,
    out_dir: &Path,
    svg: bool,
) -> Result<Vec<BandRecord>> {
    if features.kind != FeatureKind::Tda {
        return Err(Error::FeatureFile(format!(
            "Betti analysis needs tda features, got {}",
            features.kind
        )));
    }
    if features.width == 0 || !features.width.is_multiple_of(8) {
        return Err(Error::FeatureFile(format!(
            "tda width {} is not 8 curves",
            features.width
        )));
    }
    let len = features.width / 8;
    let grid = ThresholdGrid::uniform(len)?;

    let mut by_class: BTreeMap<usize, Vec<&[f64]>> = BTreeMap::new();
    for row in &features.rows {
        if row.label > crate::dataset::MAX_GRADE {
            return Err(Error::GradeOutOfRange {
                id: row.id.clone(),
                grade: row.label as i64,
            });
        }
        by_class
            .entry(task.label(row.label))
            .or_default()
            .push(&row.values);
    }

    let mut records = Vec::new();
    for (&class, rows) in &by_class {
        for block in 0..8 {
            let curves: Vec<&[f64]> = rows
                .iter()
                .map(|r| &r[block * len..(block + 1) * len])
                .collect();
            let band = median_band_values(&curves, coverage)?;
            records.push(BandRecord {
                class,
                channel: block / 2,
                dim: block % 2,
                grid: grid.points().to_vec(),
                median: band.median,
                lower: band.lower,
                upper: band.upper,
            });
        }
    }

    fs::create_dir_all(out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("betti_bands.csv"))?;
    w.write_record([
        "class",
        "channel",
        "dim",
        "threshold",
        "median",
        "lower",
        "upper",
    ])?;
    for r in &records {
        for i in 0..r.grid.len() {
            w.write_record([
                r.class.to_string(),
                CHANNEL_NAMES[r.channel].to_string(),
                r.dim.to_string(),
                r.grid[i].to_string(),
                r.median[i].to_string(),
                r.lower[i].to_string(),
                r.upper[i].to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut summary = format!(
        "Betti bands: task {task}, coverage {coverage}, {} samples\n\n{:<8}{:<8}{:<6}{:>14}{:>14}{:>14}\n",
        features.len(),
        "class",
        "channel",
        "dim",
        "mean median",
        "peak median",
        "mean width"
    );
    for r in &records {
        let n = r.median.len() as f64;
        let mean = r.median.iter().sum::<f64>() / n;
        let peak = r.median.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = r
            .upper
            .iter()
            .zip(&r.lower)
            .map(|(u, l)| u - l)
            .sum::<f64>()
            / n;
        summary.push_str(&format!(
            "{:<8}{:<8}{:<6}{:>14.3}{:>14.3}{:>14.3}\n",
            r.class, CHANNEL_NAMES[r.channel], r.dim, mean, peak, width
        ));
    }
    fs::write(out_dir.join("betti_summary.txt"), summary)?;

    if svg {
        for block in 0..8 {
            let (channel, dim) = (block / 2, block % 2);
            let series = records
                .iter()
                .filter(|r| r.channel == channel && r.dim == dim)
                .map(|r| {
                    let xs = r.grid.iter().map(|&t| t as f64);
                    Series {
                        name: format!("class {}", r.class),
                        points: xs.clone().zip(r.median.iter().copied()).collect(),
                        band: Some(
                            xs.zip(r.lower.iter().zip(&r.upper))
                                .map(|(x, (&l, &u))| (x, l, u))
                                .collect(),
                        ),
                    }
                })
                .collect();
            let plot = LinePlot {
                title: format!("{} channel, β{dim}", CHANNEL_NAMES[channel]),
                x_label: "threshold".into(),
                y_label: format!("β{dim}"),
                series,
                diagonal: false,
            };
            fs::write(
                out_dir.join(format!("betti_{}_b{dim}.svg", CHANNEL_NAMES[channel])),
                plot.render(),
            )?;
        }
    }
    Ok(records)
}
