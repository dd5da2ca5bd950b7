//! The 800-dimensional topological descriptor of one image.
//!
//! cargo run --release --example betti_features [image.png]
//!
//! Without an argument a synthetic "fundus" (bright disc with dark
//! vessels and spots) is used.

use topohog::betti::{tda_features, CHANNEL_NAMES, CURVE_LEN};
use topohog::imageio::{load_image, resize, split_channels, Image};

fn synthetic() -> Image {
    let (w, h) = (224usize, 224usize);
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 - 112.0, y as f64 - 112.0);
            let r = (dx * dx + dy * dy).sqrt();
            let mut v = if r < 100.0 { 180.0 - r * 0.6 } else { 10.0 };
            // vessels
            if ((dx * 0.3 + dy).abs() < 2.0 || (dx - dy * 0.5).abs() < 2.0) && r < 100.0 {
                v -= 70.0;
            }
            // lesions
            if (x * 31 + y * 17) % 997 < 3 && r < 90.0 {
                v -= 90.0;
            }
            let v = v.clamp(0.0, 255.0);
            data.extend([v as u8, (v * 0.55) as u8, (v * 0.25) as u8]);
        }
    }
    Image::new(w, h, 3, data).expect("valid buffer")
}

fn main() -> topohog::Result<()> {
    let img = match std::env::args().nth(1) {
        Some(path) => load_image(path)?,
        None => synthetic(),
    };
    let img = resize(&img, 224, 224)?;
    let features = tda_features(&split_channels(&img)?)?;
    println!("{} features", features.values.len());
    for (c, name) in CHANNEL_NAMES.iter().enumerate() {
        for dim in 0..2 {
            let block = features.block(c, dim);
            let peak = block.iter().cloned().fold(0.0, f64::max);
            let at = block.iter().position(|&v| v == peak).unwrap_or(0);
            println!(
                "{name:>5} beta{dim}: peak {peak:>5} at grid index {at:>2}/{CURVE_LEN}, final {}",
                block[CURVE_LEN - 1]
            );
        }
    }
    Ok(())
}
