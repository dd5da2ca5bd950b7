//! Median Betti curves and 40% bands for two groups of synthetic images,
//! one of which carries extra dark spots (more holes).
//!
//! cargo run --release --example betti_bands

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topohog::betti::{betti_curve, median_band, ThresholdGrid};
use topohog::cubical::compute_persistence;
use topohog::imageio::Image;

fn image(spots: usize, rng: &mut ChaCha8Rng) -> Image {
    let n = 64;
    let mut data: Vec<u8> = (0..n * n).map(|_| rng.gen_range(120..200)).collect();
    for _ in 0..spots {
        let (cx, cy) = (rng.gen_range(4..n - 4), rng.gen_range(4..n - 4));
        let level = rng.gen_range(20..110);
        // a dark ring leaves a brighter centre: one hole in the sublevel set
        for (dx, dy) in [
            (-1i32, -1i32),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ] {
            data[(cy as i32 + dy) as usize * n + (cx as i32 + dx) as usize] = level;
        }
    }
    Image::gray(n, n, data).expect("valid buffer")
}

fn main() -> topohog::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = ThresholdGrid::default();
    for (name, spots) in [("normal", 2), ("lesion", 12)] {
        let curves = (0..40)
            .map(|_| {
                let (_, d1) = compute_persistence(&image(spots, &mut rng))?;
                Ok(betti_curve(&d1, &grid))
            })
            .collect::<topohog::Result<Vec<_>>>()?;
        let band = median_band(&curves, 0.4)?;
        println!("{name}: beta1 median / band at selected thresholds");
        for i in (0..grid.len()).step_by(11) {
            println!(
                "  t={:>3}  {:>5.1}  [{:>5.1}, {:>5.1}]",
                grid.points()[i],
                band.median[i],
                band.lower[i],
                band.upper[i]
            );
        }
    }
    Ok(())
}
