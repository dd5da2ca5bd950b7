use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use topohog::dataset::{ingest, Task};
use topohog::features::{ExtractorConfig, FeatureFile, FeatureKind};
use topohog::workflow::{self, BenchmarkOptions};

/// Betti-curve and HOG features with classical classifiers.
///
/// Feature files default to $TOPOHOG_CACHE_DIR (or ./.topohog-cache).
#[derive(Parser)]
#[command(name = "topohog", version)]
struct Cli {
    /// Worker threads (default: all hardware threads).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve a grading manifest against an image directory.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        images: PathBuf,
        /// Where to write the resolved index (id,path,grade).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract TDA or HOG features for every manifest entry.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long, value_parser = ["tda", "hog"])]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stratified 10-fold cross-validation of the selected models.
    Benchmark {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_parser = ["binary", "five"])]
        task: String,
        /// Comma-separated model names, or `all`.
        #[arg(long, default_value = "all")]
        models: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Also write ROC curves as SVG.
        #[arg(long)]
        svg: bool,
    },
    /// Per-class median Betti curves with confidence bands.
    AnalyzeBetti {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long, default_value = "binary", value_parser = ["binary", "five"])]
        task: String,
        #[arg(long, default_value_t = 0.4)]
        coverage: f64,
        #[arg(long, default_value = "betti")]
        out_dir: PathBuf,
        /// Also write band plots as SVG.
        #[arg(long)]
        svg: bool,
    },
}

fn run(cli: Cli) -> topohog::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| topohog::Error::InvalidArgument(e.to_string()))?;
    }
    match cli.command {
        Command::Ingest {
            manifest,
            images,
            out,
        } => {
            let index = ingest(&manifest, &images)?;
            let out = out.unwrap_or_else(|| workflow::cache_dir().join("index.csv"));
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            index.write_csv(std::fs::File::create(&out)?)?;
            let g = index.grade_counts();
            println!(
                "{} entries, grade counts {:?} -> {}",
                index.len(),
                g,
                out.display()
            );
        }
        Command::Extract {
            manifest,
            images,
            kind,
            out,
        } => {
            let kind: FeatureKind = kind.parse()?;
            let index = ingest(&manifest, &images)?;
            let out = out.unwrap_or_else(|| workflow::default_feature_path(kind));
            let report = workflow::extract(&index, &ExtractorConfig::new(kind), &out)?;
            println!(
                "{} extracted, {} cached, {} failed -> {}",
                report.extracted,
                report.skipped,
                report.failures.len(),
                out.display()
            );
        }
        Command::Benchmark {
            features,
            task,
            models,
            seed,
            folds,
            out_dir,
            svg,
        } => {
            let file = FeatureFile::read_path(&features)?;
            let opts = BenchmarkOptions {
                task: task.parse::<Task>()?,
                models: workflow::parse_models(&models)?,
                seed,
                folds,
                svg,
            };
            workflow::run_benchmark(&file, &opts, &out_dir)?;
            print!("{}", std::fs::read_to_string(out_dir.join("summary.txt"))?);
        }
        Command::AnalyzeBetti {
            features,
            task,
            coverage,
            out_dir,
            svg,
        } => {
            let path = features.unwrap_or_else(|| workflow::default_feature_path(FeatureKind::Tda));
            let file = FeatureFile::read_path(&path)?;
            workflow::analyze_betti(&file, task.parse()?, coverage, &out_dir, svg)?;
            print!(
                "{}",
                std::fs::read_to_string(out_dir.join("betti_summary.txt"))?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
