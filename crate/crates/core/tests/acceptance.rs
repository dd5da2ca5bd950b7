//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Runs without the libtest harness so the summary lines always reach the
//! terminal. Exits non-zero when any gating criterion fails.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{base_k_image, euler_characteristic, oracle_dim0, oracle_dim1, sorted_pairs, Lcg};
use topohog::betti::{
    betti_curve, median_band, median_band_values, tda_features, BettiCurve, ThresholdGrid,
};
use topohog::cubical::{compute_persistence, persistence_of_levels};
use topohog::dataset::Task;
use topohog::eval::{metrics, roc_auc, stratified_folds, weighted_metrics, ConfusionMatrix};
use topohog::features::{ExtractorConfig, FeatureFile, FeatureKind, FeatureRow};
use topohog::hog::{hog_features, HogParams};
use topohog::imageio::{split_channels, Image};
use topohog::ml::{
    fit, logistic_gradient, logistic_objective, Dataset, Hyperparams, Matrix, ModelKind, ModelSpec,
};
use topohog::workflow::{run_benchmark, BenchmarkOptions};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn diagrams_match(w: usize, h: usize, img: &[i32]) -> Result<(), String> {
    let (d0, d1) = persistence_of_levels(w, h, img).map_err(|e| e.to_string())?;
    let (o0, o1) = (oracle_dim0(w, h, img), oracle_dim1(w, h, img));
    check(sorted_pairs(&d0) == o0, || {
        format!(
            "dim 0 differs on {w}x{h} {img:?}: {:?} vs {o0:?}",
            sorted_pairs(&d0)
        )
    })?;
    check(sorted_pairs(&d1) == o1, || {
        format!(
            "dim 1 differs on {w}x{h} {img:?}: {:?} vs {o1:?}",
            sorted_pairs(&d1)
        )
    })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    for code in 0..3u64.pow(9) {
        diagrams_match(3, 3, &base_k_image(code, 3, 9))?;
    }
    let mut rng = Lcg(1);
    for _ in 0..2000 {
        let img: Vec<i32> = (0..36).map(|_| rng.below(8) as i32).collect();
        diagrams_match(6, 6, &img)?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(120), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "19683 exhaustive 3x3 + 2000 random 6x6 images in {elapsed:.1?}"
    ))
}

const WORKED_5X5: [[u8; 5]; 5] = [
    [5, 1, 5, 5, 3],
    [3, 5, 2, 1, 4],
    [3, 3, 5, 3, 4],
    [1, 5, 2, 5, 4],
    [1, 4, 1, 5, 1],
];

fn criterion_2() -> Outcome {
    // Reference values for this 5x5 image: PD1 {(3,5),(3,5),(4,5)},
    // beta0 [5 4 2 1 1], beta1 [0 0 2 3 0]. The commonly quoted PD0 for it,
    // {(1,inf),(1,2),(1,3),(1,3),(1,4),(2,3)}, has 5 classes alive at t = 2
    // against beta0 = 4 there, so dimension 0 is checked against the
    // flood-fill oracle instead.
    let img = Image::from_rows(&WORKED_5X5).map_err(|e| e.to_string())?;
    let (d0, d1) = compute_persistence(&img).map_err(|e| e.to_string())?;
    let grid = ThresholdGrid::new((1..=5).collect()).map_err(|e| e.to_string())?;
    let b0 = betti_curve(&d0, &grid).values;
    let b1 = betti_curve(&d1, &grid).values;
    let levels: Vec<i32> = WORKED_5X5.iter().flatten().map(|&v| v as i32).collect();
    check(
        sorted_pairs(&d1) == vec![(3, Some(5)), (3, Some(5)), (4, Some(5))],
        || format!("PD1 = {:?}", sorted_pairs(&d1)),
    )?;
    check(b1 == vec![0, 0, 2, 3, 0], || format!("beta1 = {b1:?}"))?;
    let oracle_b0: Vec<u32> = (1..=5)
        .map(|t| {
            oracle_dim0(5, 5, &levels)
                .iter()
                .filter(|(b, d)| *b <= t && d.is_none_or(|d| t < d))
                .count() as u32
        })
        .collect();
    check(b0 == oracle_b0, || {
        format!("beta0 = {b0:?}, oracle {oracle_b0:?}")
    })?;
    check(sorted_pairs(&d0) == oracle_dim0(5, 5, &levels), || {
        "PD0 differs from oracle".into()
    })?;
    Ok(format!(
        "PD1 {{(3,5),(3,5),(4,5)}}, beta1 {b1:?}, beta0 {b0:?} (oracle)"
    ))
}

fn random_rgb(rng: &mut Lcg, w: usize, h: usize, levels: u64) -> Image {
    let scale = 255 / (levels - 1).max(1);
    let data = (0..w * h * 3)
        .map(|_| (rng.below(levels) * scale) as u8)
        .collect();
    Image::new(w, h, 3, data).unwrap()
}

fn criterion_3() -> Outcome {
    let mut rng = Lcg(3);
    for _ in 0..20 {
        let (w, h) = (1 + rng.below(40) as usize, 1 + rng.below(40) as usize);
        let img = random_rgb(&mut rng, w, h, 256);
        let tda = tda_features(&split_channels(&img).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        check(tda.values.len() == 800, || {
            format!("tda length {} for {w}x{h}", tda.values.len())
        })?;
    }
    let gray = Image::gray(
        224,
        224,
        (0..224 * 224).map(|i| (i * 7 % 256) as u8).collect(),
    )
    .unwrap();
    let len = hog_features(&gray, &HogParams::default())
        .map_err(|e| e.to_string())?
        .len();
    check(len == 26_244, || format!("HOG length {len}"))?;
    let mut cases = 0;
    for o in [1usize, 4, 9, 12] {
        for c in [2usize, 4, 6, 8] {
            for b in [1usize, 2, 3] {
                for (cw, ch) in [(3usize, 3usize), (4, 5), (7, 3)] {
                    if cw < b || ch < b {
                        continue;
                    }
                    let (w, h) = (cw * c, ch * c);
                    let img = Image::gray(w, h, (0..w * h).map(|i| (i * 31 % 251) as u8).collect())
                        .unwrap();
                    let params = HogParams {
                        orientations: o,
                        cell_size: c,
                        block_size: b,
                        ..HogParams::default()
                    };
                    let got = hog_features(&img, &params)
                        .map_err(|e| e.to_string())?
                        .len();
                    let expected = (cw - b + 1) * (ch - b + 1) * b * b * o;
                    check(got == expected, || {
                        format!("o={o} c={c} b={b} {w}x{h}: {got} != {expected}")
                    })?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!(
        "TDA 800 on 20 random sizes, HOG 26244 at 224x224, {cases} parameter cases"
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = Lcg(4);
    for _ in 0..100 {
        let (w, h) = (2 + rng.below(24) as usize, 2 + rng.below(24) as usize);
        let img = random_rgb(&mut rng, w, h, 6);
        let base = tda_features(&split_channels(&img).unwrap()).unwrap();
        for (name, t) in [
            ("rot90", img.rotate90()),
            ("rot180", img.rotate90().rotate90()),
            ("rot270", img.rotate90().rotate90().rotate90()),
            ("flip_h", img.flip_horizontal()),
            ("flip_v", img.flip_vertical()),
        ] {
            let other = tda_features(&split_channels(&t).unwrap()).unwrap();
            check(other == base, || {
                format!("{name} changed TDA features of a {w}x{h} image")
            })?;
        }
    }
    let mut worst = 0.0f64;
    for size in [64usize, 224] {
        for _ in 0..3 {
            let data: Vec<u8> = (0..size * size).map(|_| rng.below(64) as u8).collect();
            let img = Image::gray(size, size, data.clone()).unwrap();
            let base = hog_features(&img, &HogParams::default()).unwrap();
            for k in [2u8, 3, 4] {
                let scaled = Image::gray(size, size, data.iter().map(|v| v * k).collect()).unwrap();
                let other = hog_features(&scaled, &HogParams::default()).unwrap();
                for (a, b) in base.iter().zip(&other) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    check(worst <= 1e-6, || {
        format!("HOG moved by {worst:e} under intensity scaling")
    })?;
    Ok(format!(
        "TDA exact under 5 symmetries x 100 images; HOG max deviation {worst:.1e}"
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = Lcg(5);
    let mut images = 0u64;
    for h in 1..=6usize {
        for w in 1..=6usize {
            let n = w * h;
            let exhaustive = n <= 9;
            let count = if exhaustive { 4u64.pow(n as u32) } else { 3000 };
            for code in 0..count {
                let img = if exhaustive {
                    base_k_image(code, 4, n)
                } else {
                    (0..n).map(|_| rng.below(4) as i32).collect()
                };
                let (d0, d1) = persistence_of_levels(w, h, &img).map_err(|e| e.to_string())?;
                for t in 0..4 {
                    let mask: Vec<bool> = img.iter().map(|&v| v <= t).collect();
                    let chi = euler_characteristic(w, h, &mask);
                    let alive = d0.alive_at(t) as i64 - d1.alive_at(t) as i64;
                    check(alive == chi, || {
                        format!("{w}x{h} {img:?} t={t}: {alive} != {chi}")
                    })?;
                }
                images += 1;
            }
        }
    }
    Ok(format!(
        "{images} images (exhaustive up to 9 pixels, 3000 random per larger shape)"
    ))
}

fn separable(n: usize, classes: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = Lcg(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        // class centres 10 apart along their own axis, noise within ±1
        rows.push(
            (0..d)
                .map(|j| if j == c % d { 10.0 * c as f64 } else { 0.0 } + 2.0 * rng.unit() - 1.0)
                .collect::<Vec<f64>>(),
        );
        labels.push(c);
    }
    Dataset::new(Matrix::from_rows(&rows).unwrap(), labels, classes).unwrap()
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = Lcg(6);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (n, d) = (5 + rng.below(20) as usize, 1 + rng.below(6) as usize);
        let x = Matrix::new(n, d, (0..n * d).map(|_| 4.0 * rng.unit() - 2.0).collect()).unwrap();
        let y: Vec<f64> = (0..n).map(|_| rng.below(2) as f64).collect();
        let w: Vec<f64> = (0..d).map(|_| 2.0 * rng.unit() - 1.0).collect();
        let b = rng.unit() - 0.5;
        let lambda = 0.01 + rng.unit();
        let (gw, gb) = logistic_gradient(&x, &y, &w, b, lambda);
        let h = 1e-5;
        let mut numeric = Vec::with_capacity(d + 1);
        for j in 0..d {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[j] += h;
            wm[j] -= h;
            numeric.push(
                (logistic_objective(&x, &y, &wp, b, lambda)
                    - logistic_objective(&x, &y, &wm, b, lambda))
                    / (2.0 * h),
            );
        }
        numeric.push(
            (logistic_objective(&x, &y, &w, b + h, lambda)
                - logistic_objective(&x, &y, &w, b - h, lambda))
                / (2.0 * h),
        );
        let analytic: Vec<f64> = gw.iter().copied().chain([gb]).collect();
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-8);
        worst = worst.max(diff / norm);
    }
    check(worst < 1e-5, || {
        format!("logistic gradient relative error {worst:e}")
    })?;

    let memo = separable(60, 3, 4, 61);
    let mut spec = ModelSpec::new(ModelKind::Knn, 0);
    if let Hyperparams::Knn(p) = &mut spec.params {
        p.k = 1;
    }
    let knn = fit(&spec, &memo).map_err(|e| e.to_string())?;
    check(knn.predict(&memo.features).unwrap() == memo.labels, || {
        "1-NN does not memorise".into()
    })?;

    let data = separable(200, 2, 5, 62);
    let folds = stratified_folds(&data.labels, 10, 7).map_err(|e| e.to_string())?;
    let mut accs = vec![];
    for kind in ModelKind::ALL {
        let report = topohog::eval::cross_validate(&ModelSpec::new(kind, 7), &data, &folds)
            .map_err(|e| e.to_string())?;
        check(report.accuracy.mean >= 95.0, || {
            format!("{kind} accuracy {:.2}", report.accuracy.mean)
        })?;
        accs.push(format!("{kind} {:.1}", report.accuracy.mean));
    }

    let file = feature_file_from(&data);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let opts = BenchmarkOptions {
        seed: 11,
        ..BenchmarkOptions::new(Task::Binary)
    };
    run_benchmark(&file, &opts, a.path()).map_err(|e| e.to_string())?;
    run_benchmark(&file, &opts, b.path()).map_err(|e| e.to_string())?;
    for name in [
        "metrics.csv",
        "fold_metrics.csv",
        "confusion_matrices.csv",
        "roc_points.csv",
        "radar.csv",
        "summary.txt",
    ] {
        let (x, y) = (
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
        );
        check(x == y, || format!("{name} differs between identical runs"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "grad rel err {worst:.1e}; 10-fold acc: {}; reports byte-identical; {elapsed:.1?}",
        accs.join(", ")
    ))
}

fn feature_file_from(data: &Dataset) -> FeatureFile {
    FeatureFile {
        kind: FeatureKind::Tda,
        version: 1,
        fingerprint: ExtractorConfig::new(FeatureKind::Tda).fingerprint(),
        width: data.n_features(),
        rows: (0..data.len())
            .map(|i| FeatureRow {
                id: format!("s{i:04}"),
                label: data.labels[i] as u8,
                values: data.features.row(i).to_vec(),
            })
            .collect(),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = Lcg(7);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = 2 + rng.below(60) as usize;
        let mut labels: Vec<bool> = (0..n).map(|_| rng.below(2) == 1).collect();
        labels[0] = true;
        labels[1] = false;
        let ties = 1 + rng.below(10);
        let scores: Vec<f64> = (0..n)
            .map(|_| rng.below(ties) as f64 / ties as f64)
            .collect();
        let (auc, _) = roc_auc(&scores, &labels).map_err(|e| e.to_string())?;
        let (mut wins, mut pairs) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if labels[i] && !labels[j] {
                    pairs += 1.0;
                    wins += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        worst = worst.max((auc - wins / pairs).abs());
    }
    check(worst <= 1e-12, || format!("AUC off by {worst:e}"))?;

    for _ in 0..100 {
        let k = 3 + rng.below(4) as usize;
        let rows: Vec<Vec<u64>> = (0..k)
            .map(|_| (0..k).map(|_| rng.below(30)).collect())
            .collect();
        let mut cm = ConfusionMatrix::from_rows(&rows).unwrap();
        if cm.total() == 0 {
            cm =
                ConfusionMatrix::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        }
        let m = weighted_metrics(&cm).map_err(|e| e.to_string())?;
        check(m.recall == m.accuracy, || {
            format!("weighted recall {} != accuracy {}", m.recall, m.accuracy)
        })?;
        // independent long-hand weighted recall
        let total = cm.total() as f64;
        let longhand: f64 = (0..cm.n_classes())
            .map(|c| {
                let support: u64 = (0..cm.n_classes()).map(|p| cm.get(c, p)).sum();
                if support == 0 {
                    0.0
                } else {
                    support as f64 / total * cm.get(c, c) as f64 / support as f64
                }
            })
            .sum();
        check((100.0 * longhand - m.recall).abs() < 1e-9, || {
            "long-hand weighted recall disagrees".into()
        })?;
        check(metrics(&cm).unwrap() == m, || {
            "multi-class metrics are not the weighted ones".into()
        })?;
    }

    let labels: Vec<usize> = (0..3662).map(|i| usize::from(i >= 1805)).collect();
    let split = stratified_folds(&labels, 10, 0).map_err(|e| e.to_string())?;
    let sizes = split.fold_sizes();
    check(sizes.iter().all(|s| *s == 366 || *s == 367), || {
        format!("fold sizes {sizes:?}")
    })?;
    let counts = split.class_counts(&labels, 2);
    check(counts.iter().all(|c| c[0] == 180 || c[0] == 181), || {
        format!("class-0 counts {counts:?}")
    })?;
    check(counts.iter().all(|c| c[1] == 185 || c[1] == 186), || {
        format!("class-1 counts {counts:?}")
    })?;
    Ok(format!("AUC max error {worst:.1e} over 500 sets; recall == accuracy on 100 matrices; folds {sizes:?}"))
}

fn criterion_8() -> Outcome {
    let Some(dir) = std::env::var_os("APTOS_DIR").map(PathBuf::from) else {
        return Ok("SKIP: set APTOS_DIR (train.csv + train_images/) to run".into());
    };
    let index = topohog::dataset::ingest(dir.join("train.csv"), dir.join("train_images"))
        .map_err(|e| e.to_string())?;
    let cache = tempfile::tempdir().unwrap();
    let targets = [(FeatureKind::Tda, 94.18), (FeatureKind::Hog, 94.29)];
    let mut lines = vec![];
    for (kind, reference) in targets {
        let path = cache.path().join(format!("{kind}.csv"));
        let report = topohog::workflow::extract(&index, &ExtractorConfig::new(kind), &path)
            .map_err(|e| e.to_string())?;
        let opts = BenchmarkOptions {
            models: vec![ModelKind::GradientBoost],
            ..BenchmarkOptions::new(Task::Binary)
        };
        let r = run_benchmark(&report.file, &opts, &cache.path().join(kind.name()))
            .map_err(|e| e.to_string())?;
        let acc = r[0].accuracy.mean;
        check((acc - reference).abs() <= 3.0, || {
            format!("{kind} gradient_boost {acc:.2} vs {reference}")
        })?;
        lines.push(format!("{kind} {acc:.2}"));
    }
    Ok(lines.join(", "))
}

fn criterion_9() -> Outcome {
    let mut rng = Lcg(9);
    for _ in 0..100 {
        let n = 1 + rng.below(40) as usize;
        let len = 1 + rng.below(30) as usize;
        let coverage = 0.05 + 0.9 * rng.unit();
        let curves: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..len).map(|_| rng.below(12) as f64).collect())
            .collect();
        let views: Vec<&[f64]> = curves.iter().map(Vec::as_slice).collect();
        let band = median_band_values(&views, coverage).map_err(|e| e.to_string())?;
        for i in 0..len {
            let mut col: Vec<f64> = curves.iter().map(|c| c[i]).collect();
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let order_stat = |q: f64| {
                let pos = q * (n - 1) as f64;
                let below = pos.floor() as usize;
                let frac = pos - below as f64;
                if below + 1 < n {
                    col[below] + frac * (col[below + 1] - col[below])
                } else {
                    col[below]
                }
            };
            let tail = (1.0 - coverage) / 2.0;
            check(band.median[i] == order_stat(0.5), || {
                format!("median at {i}")
            })?;
            check(band.lower[i] == order_stat(tail), || {
                format!("lower at {i}")
            })?;
            check(band.upper[i] == order_stat(1.0 - tail), || {
                format!("upper at {i}")
            })?;
        }
    }
    let grid = ThresholdGrid::default();
    let curve = BettiCurve {
        dim: 1,
        grid: grid.clone(),
        values: (0..100).map(|i| (i % 7) as u32).collect(),
    };
    let band = median_band(&vec![curve.clone(); 9], 0.4).map_err(|e| e.to_string())?;
    check(
        band.lower == band.upper && band.median == band.upper,
        || "identical curves give a non-zero band".into(),
    )?;
    Ok("order statistics exact on 100 samples; identical curves give zero width".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, bool); 9] = [
        ("1 cubical oracle equivalence", criterion_1, true),
        ("2 worked 5x5 filtration example", criterion_2, true),
        ("3 dimensionality identities", criterion_3, true),
        ("4 transformation invariance", criterion_4, true),
        ("5 Euler characteristic consistency", criterion_5, true),
        ("6 classifier sanity suite", criterion_6, true),
        ("7 metric oracles", criterion_7, true),
        ("8 full-scale reproduction (optional)", criterion_8, false),
        ("9 Betti band correctness", criterion_9, true),
    ];
    let mut failed = 0;
    for (name, run, gating) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) if detail.starts_with("SKIP") => println!("SKIP criterion {name}: {detail}"),
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                println!("FAIL criterion {name}: {why}");
                if gating {
                    failed += 1;
                }
            }
        }
    }
    if failed > 0 {
        println!("{failed} gating criteria failed");
        std::process::exit(1);
    }
}
