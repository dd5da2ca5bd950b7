//! End to end on a generated toy dataset: manifest, ingest, cached
//! feature extraction, benchmark and Betti analysis.
//!
//! cargo run --release --example full_pipeline [out_dir]

use std::fs;
use std::path::PathBuf;

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topohog::dataset::{ingest, Task};
use topohog::features::{ExtractorConfig, FeatureKind};
use topohog::ml::ModelKind;
use topohog::workflow::{analyze_betti, extract, run_benchmark, BenchmarkOptions};

fn fundus(grade: u8, rng: &mut ChaCha8Rng) -> RgbImage {
    let lesions = grade as usize * 15;
    let spots: Vec<(f64, f64)> = (0..lesions)
        .map(|_| (rng.gen_range(40.0..152.0), rng.gen_range(40.0..152.0)))
        .collect();
    let noise = rng.gen_range(0..20);
    RgbImage::from_fn(192, 192, |x, y| {
        let (dx, dy) = (x as f64 - 96.0, y as f64 - 96.0);
        let r = (dx * dx + dy * dy).sqrt();
        let mut v = if r < 90.0 { 200.0 - r * 0.8 } else { 5.0 };
        if spots
            .iter()
            .any(|&(sx, sy)| ((x as f64 - sx).powi(2) + (y as f64 - sy).powi(2)).sqrt() < 2.5)
        {
            v = 60.0;
        }
        let v = (v + ((x * 7 + y * 3) as f64 % 10.0) + noise as f64).min(255.0);
        Rgb([v as u8, (v * 0.5) as u8, (v * 0.2) as u8])
    })
}

fn main() -> topohog::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("topohog-demo"));
    let images = out.join("images");
    fs::create_dir_all(&images)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut manifest = String::from("id_code,diagnosis\n");
    for i in 0..60 {
        let grade = (i % 5) as u8;
        fundus(grade, &mut rng)
            .save(images.join(format!("case{i:03}.png")))
            .map_err(|e| topohog::Error::InvalidArgument(e.to_string()))?;
        manifest.push_str(&format!("case{i:03},{grade}\n"));
    }
    fs::write(out.join("train.csv"), manifest)?;

    let index = ingest(out.join("train.csv"), &images)?;
    println!(
        "ingested {} images, grades {:?}",
        index.len(),
        index.grade_counts()
    );

    let tda_path = out.join("tda_features.csv");
    let report = extract(&index, &ExtractorConfig::new(FeatureKind::Tda), &tda_path)?;
    println!(
        "tda: {} extracted, {} cached",
        report.extracted, report.skipped
    );

    let opts = BenchmarkOptions {
        models: vec![
            ModelKind::Logistic,
            ModelKind::RandomForest,
            ModelKind::GradientBoost,
            ModelKind::Knn,
        ],
        svg: true,
        ..BenchmarkOptions::new(Task::Binary)
    };
    run_benchmark(&report.file, &opts, &out.join("binary"))?;
    print!("{}", fs::read_to_string(out.join("binary/summary.txt"))?);

    analyze_betti(&report.file, Task::Binary, 0.4, &out.join("betti"), true)?;
    println!("outputs in {}", out.display());
    Ok(())
}
