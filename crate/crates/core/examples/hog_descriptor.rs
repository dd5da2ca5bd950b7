//! HOG descriptor of a grayscale image, with a look at one cell.
//!
//! cargo run --release --example hog_descriptor [image.png]

use topohog::hog::{cell_histograms, gradients, hog_features, HogParams};
use topohog::imageio::{load_image, resize, to_grayscale, Image};

fn main() -> topohog::Result<()> {
    let img = match std::env::args().nth(1) {
        Some(path) => to_grayscale(&load_image(path)?)?,
        None => {
            // diagonal stripes
            let data = (0..224 * 224)
                .map(|i| {
                    if (i % 224 + i / 224) % 16 < 8 {
                        40
                    } else {
                        200
                    }
                })
                .collect();
            Image::gray(224, 224, data)?
        }
    };
    let img = resize(&img, 224, 224)?;
    let params = HogParams::default();

    let (gx, gy) = gradients(&img)?;
    let cells = cell_histograms(&gx, &gy, &params)?;
    let bin_width = 180.0 / params.orientations as f64;
    println!("cell (10, 10) orientation histogram:");
    for (i, v) in cells.cell(10, 10).iter().enumerate() {
        println!("  {:>5.1}°  {v:>9.1}", (i as f64 + 0.5) * bin_width);
    }

    let d = hog_features(&img, &params)?;
    let nonzero = d.iter().filter(|&&v| v > 0.0).count();
    let max = d.iter().cloned().fold(0.0, f64::max);
    println!(
        "descriptor length {} (expected {:?}), {nonzero} non-zero, max {max:.4}",
        d.len(),
        params.descriptor_len(224, 224)
    );
    Ok(())
}
