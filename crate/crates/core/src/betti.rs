//! Betti-curve vectorization of persistence diagrams and per-class summary
//! bands.

use crate::cubical::{compute_persistence, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::imageio::ChannelSet;

/// Number of thresholds per curve in the topological feature vector.
pub const CURVE_LEN: usize = 100;
/// Four channels times two homology dimensions times [`CURVE_LEN`].
pub const TDA_FEATURE_LEN: usize = 4 * 2 * CURVE_LEN;
/// Block names in feature order.
pub const CHANNEL_NAMES: [&str; 4] = ["gray", "red", "green", "blue"];

/// A strictly increasing list of evaluation thresholds within [0, 255].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdGrid(Vec<i32>);

impl ThresholdGrid {
    pub fn new(points: Vec<i32>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "grid must be strictly increasing".into(),
            ));
        }
        if points[0] < 0 || points[points.len() - 1] > 255 {
            return Err(Error::InvalidGrid("grid must lie within [0, 255]".into()));
        }
        Ok(ThresholdGrid(points))
    }

    /// `n` integer thresholds evenly spread over [0, 255]: `round(i·255/(n−1))`.
    pub fn uniform(n: usize) -> Result<Self> {
        match n {
            0 => Err(Error::InvalidGrid("grid is empty".into())),
            1 => ThresholdGrid::new(vec![0]),
            2..=256 => ThresholdGrid::new(
                (0..n)
                    .map(|i| (i as f64 * 255.0 / (n - 1) as f64).round() as i32)
                    .collect(),
            ),
            _ => Err(Error::InvalidGrid(format!(
                "{n} integer thresholds do not fit in [0, 255]"
            ))),
        }
    }

    pub fn points(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        ThresholdGrid::uniform(CURVE_LEN).expect("static grid")
    }
}

/// Alive counts of one diagram on a threshold grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BettiCurve {
    pub dim: usize,
    pub grid: ThresholdGrid,
    pub values: Vec<u32>,
}

/// `values[i]` = number of pairs with `birth <= grid[i] < death`.
pub fn betti_curve(pd: &PersistenceDiagram, grid: &ThresholdGrid) -> BettiCurve {
    // Each pair adds +1 on [birth, death); a sweep over sorted events keeps
    // this linear in pairs + grid.
    let mut events: Vec<(i64, i32)> = Vec::with_capacity(pd.len() * 2);
    for p in pd.pairs() {
        events.push((p.birth as i64, 1));
        if let crate::cubical::Death::Finite(d) = p.death {
            events.push((d as i64, -1));
        }
    }
    events.sort_unstable();
    let mut values = Vec::with_capacity(grid.len());
    let mut alive = 0i64;
    let mut next = 0;
    for &t in grid.points() {
        while next < events.len() && events[next].0 <= t as i64 {
            alive += events[next].1 as i64;
            next += 1;
        }
        values.push(alive as u32);
    }
    BettiCurve {
        dim: pd.dim(),
        grid: grid.clone(),
        values,
    }
}

/// The eight curves of an image in feature order: (gray β0, gray β1, R β0, …).
pub fn channel_curves(channels: &ChannelSet, grid: &ThresholdGrid) -> Result<Vec<BettiCurve>> {
    let mut curves = Vec::with_capacity(8);
    for plane in channels.planes() {
        let (d0, d1) = compute_persistence(plane)?;
        curves.push(betti_curve(&d0, grid));
        curves.push(betti_curve(&d1, grid));
    }
    Ok(curves)
}

/// The 800-dimensional topological descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct TdaFeatureVector {
    pub values: Vec<f64>,
}

impl TdaFeatureVector {
    /// The 100 entries of one (channel, dimension) block.
    pub fn block(&self, channel: usize, dim: usize) -> &[f64] {
        let start = (channel * 2 + dim) * CURVE_LEN;
        &self.values[start..start + CURVE_LEN]
    }
}

pub fn tda_features(channels: &ChannelSet) -> Result<TdaFeatureVector> {
    let curves = channel_curves(channels, &ThresholdGrid::default())?;
    let values = curves
        .iter()
        .flat_map(|c| c.values.iter().map(|&v| v as f64))
        .collect();
    Ok(TdaFeatureVector { values })
}

/// Pointwise median with a central empirical quantile band.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveBand {
    pub median: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub coverage: f64,
}

/// Inclusive quantile with linear interpolation between order statistics.
/// `sorted` must be non-empty and ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Band over raw real-valued curves of equal length.
pub fn median_band_values(curves: &[&[f64]], coverage: f64) -> Result<CurveBand> {
    if curves.is_empty() {
        return Err(Error::InvalidArgument("no curves to summarise".into()));
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "coverage must lie in (0, 1), got {coverage}"
        )));
    }
    let len = curves[0].len();
    if curves.iter().any(|c| c.len() != len) {
        return Err(Error::InvalidGrid("curves have different lengths".into()));
    }
    let tail = (1.0 - coverage) / 2.0;
    let mut band = CurveBand {
        median: Vec::with_capacity(len),
        lower: Vec::with_capacity(len),
        upper: Vec::with_capacity(len),
        coverage,
    };
    let mut column = Vec::with_capacity(curves.len());
    for i in 0..len {
        column.clear();
        column.extend(curves.iter().map(|c| c[i]));
        column.sort_by(|a, b| a.total_cmp(b));
        band.median.push(quantile_sorted(&column, 0.5));
        band.lower.push(quantile_sorted(&column, tail));
        band.upper.push(quantile_sorted(&column, 1.0 - tail));
    }
    Ok(band)
}

/// Pointwise median and `coverage` band of Betti curves sharing one grid.
pub fn median_band(curves: &[BettiCurve], coverage: f64) -> Result<CurveBand> {
    let first = curves
        .first()
        .ok_or_else(|| Error::InvalidArgument("no curves to summarise".into()))?;
    if curves.iter().any(|c| c.grid != first.grid) {
        return Err(Error::InvalidGrid("curves use different grids".into()));
    }
    let real: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| c.values.iter().map(|&v| v as f64).collect())
        .collect();
    let views: Vec<&[f64]> = real.iter().map(Vec::as_slice).collect();
    median_band_values(&views, coverage)
}
