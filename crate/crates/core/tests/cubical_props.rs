mod common;

use proptest::prelude::*;

use common::{oracle_dim0, oracle_dim1, sorted_pairs};
use topohog::betti::{betti_curve, median_band_values, tda_features, ThresholdGrid};
use topohog::cubical::{binarize, compute_persistence, PersistenceDiagram, PersistencePair};
use topohog::imageio::{split_channels, Image};

fn gray_image(max: u8) -> impl Strategy<Value = Image> {
    (1usize..9, 1usize..9).prop_flat_map(move |(w, h)| {
        prop::collection::vec(0..=max, w * h).prop_map(move |data| Image::gray(w, h, data).unwrap())
    })
}

fn levels(img: &Image) -> Vec<i32> {
    img.data().iter().map(|&v| v as i32).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_flood_fill_oracle(img in gray_image(6)) {
        let (d0, d1) = compute_persistence(&img).unwrap();
        let (w, h) = (img.width(), img.height());
        prop_assert_eq!(sorted_pairs(&d0), oracle_dim0(w, h, &levels(&img)));
        prop_assert_eq!(sorted_pairs(&d1), oracle_dim1(w, h, &levels(&img)));
    }

    #[test]
    fn shift_moves_every_pair(img in gray_image(100), c in 0u8..=155) {
        let shifted = Image::gray(img.width(), img.height(), img.data().iter().map(|v| v + c).collect()).unwrap();
        let (a0, a1) = compute_persistence(&img).unwrap();
        let (b0, b1) = compute_persistence(&shifted).unwrap();
        prop_assert_eq!(a0.shifted(c as i32), b0);
        prop_assert_eq!(a1.shifted(c as i32), b1);
    }

    #[test]
    fn symmetric_images_share_diagrams(img in gray_image(8)) {
        let base = compute_persistence(&img).unwrap();
        for other in [img.rotate90(), img.flip_horizontal(), img.flip_vertical()] {
            prop_assert_eq!(compute_persistence(&other).unwrap(), base.clone());
        }
    }

    #[test]
    fn masks_are_nested(img in gray_image(20)) {
        let mut prev = binarize(&img, 0).unwrap();
        for t in 1..=20u8 {
            let next = binarize(&img, t).unwrap();
            for y in 0..img.height() {
                for x in 0..img.width() {
                    prop_assert!(!prev.is_active(x, y) || next.is_active(x, y));
                }
            }
            prop_assert!(next.count() >= prev.count());
            prev = next;
        }
        prop_assert_eq!(prev.count(), img.width() * img.height());
    }

    #[test]
    fn diagram_shape(img in gray_image(30)) {
        let (d0, d1) = compute_persistence(&img).unwrap();
        // the final mask is the whole rectangle: one component, no holes
        prop_assert_eq!(d0.essential_count(), 1);
        prop_assert_eq!(d1.essential_count(), 0);
        for p in d0.pairs().iter().chain(d1.pairs()) {
            prop_assert!(p.death.after(p.birth));
        }
        prop_assert_eq!(d0.dim(), 0);
        prop_assert_eq!(d1.dim(), 1);
    }

    #[test]
    fn curve_is_alive_count(img in gray_image(255)) {
        let grid = ThresholdGrid::default();
        let (d0, d1) = compute_persistence(&img).unwrap();
        for pd in [&d0, &d1] {
            let curve = betti_curve(pd, &grid);
            for (i, &t) in grid.points().iter().enumerate() {
                let alive = pd.pairs().iter().filter(|p| p.birth <= t && p.death.after(t)).count();
                prop_assert_eq!(curve.values[i] as usize, alive);
            }
        }
        prop_assert_eq!(*betti_curve(&d0, &grid).values.last().unwrap(), 1);
        prop_assert_eq!(*betti_curve(&d1, &grid).values.last().unwrap(), 0);
    }

    #[test]
    fn curve_ignores_pair_order(pairs in prop::collection::vec((0i32..200, 1i32..56, any::<bool>()), 0..30)) {
        let make = |v: &[(i32, i32, bool)]| {
            PersistenceDiagram::new(
                0,
                v.iter()
                    .map(|&(b, len, essential)| if essential { PersistencePair::essential(b) } else { PersistencePair::finite(b, b + len) })
                    .collect(),
            )
        };
        let mut reversed = pairs.clone();
        reversed.reverse();
        let grid = ThresholdGrid::default();
        prop_assert_eq!(betti_curve(&make(&pairs), &grid), betti_curve(&make(&reversed), &grid));
    }

    #[test]
    fn tda_vector_symmetric(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
        let mut rng = common::Lcg(seed);
        let data = (0..w * h * 3).map(|_| (rng.below(5) * 60) as u8).collect();
        let img = Image::new(w, h, 3, data).unwrap();
        let base = tda_features(&split_channels(&img).unwrap()).unwrap();
        prop_assert_eq!(base.values.len(), 800);
        for other in [img.rotate90(), img.flip_horizontal(), img.flip_vertical()] {
            prop_assert_eq!(&tda_features(&split_channels(&other).unwrap()).unwrap(), &base);
        }
    }

    #[test]
    fn wide_band_reaches_extremes(curves in prop::collection::vec(prop::collection::vec(0u32..50, 10), 1..30)) {
        let real: Vec<Vec<f64>> = curves.iter().map(|c| c.iter().map(|&v| v as f64).collect()).collect();
        let views: Vec<&[f64]> = real.iter().map(Vec::as_slice).collect();
        let band = median_band_values(&views, 1.0 - 1e-12).unwrap();
        for i in 0..10 {
            let min = real.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min);
            let max = real.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((band.lower[i] - min).abs() < 1e-9);
            prop_assert!((band.upper[i] - max).abs() < 1e-9);
            prop_assert!(band.lower[i] <= band.median[i] && band.median[i] <= band.upper[i]);
        }
    }
}

#[test]
fn single_pixel() {
    let (d0, d1) = compute_persistence(&Image::gray(1, 1, vec![42]).unwrap()).unwrap();
    assert_eq!(d0.pairs(), &[PersistencePair::essential(42)]);
    assert!(d1.is_empty());
}

#[test]
fn constant_image_masks() {
    let img = Image::filled(4, 3, 1, 100).unwrap();
    assert_eq!(binarize(&img, 99).unwrap().count(), 0);
    assert_eq!(binarize(&img, 100).unwrap().count(), 12);
}

#[test]
fn colour_input_rejected() {
    let img = Image::filled(2, 2, 3, 0).unwrap();
    assert!(binarize(&img, 0).is_err());
    assert!(compute_persistence(&img).is_err());
}
