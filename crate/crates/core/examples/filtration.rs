//! Sublevel filtration of a small 5×5 image: persistence diagrams and
//! Betti curves on the thresholds 1..=5.
//!
//! cargo run --example filtration

use topohog::betti::{betti_curve, ThresholdGrid};
use topohog::cubical::{binarize, compute_persistence};
use topohog::imageio::Image;

fn main() -> topohog::Result<()> {
    let img = Image::from_rows(&[
        [5u8, 1, 5, 5, 3],
        [3, 5, 2, 1, 4],
        [3, 3, 5, 3, 4],
        [1, 5, 2, 5, 4],
        [1, 4, 1, 5, 1],
    ])?;

    for t in 1..=5 {
        let mask = binarize(&img, t)?;
        println!("t = {t}");
        for y in 0..img.height() {
            let row: String = (0..img.width())
                .map(|x| if mask.is_active(x, y) { '#' } else { '.' })
                .collect();
            println!("  {row}");
        }
    }

    let (d0, d1) = compute_persistence(&img)?;
    let show = |pd: &topohog::cubical::PersistenceDiagram| {
        pd.pairs()
            .iter()
            .map(|p| format!("({}, {})", p.birth, p.death))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("PD0: {}", show(&d0));
    println!("PD1: {}", show(&d1));

    let grid = ThresholdGrid::new((1..=5).collect())?;
    println!("beta0: {:?}", betti_curve(&d0, &grid).values);
    println!("beta1: {:?}", betti_curve(&d1, &grid).values);
    Ok(())
}
