//! Histogram of Oriented Gradients.
//!
//! Gradients use the undivided `[-1, 0, 1]` kernel (one-sided at borders),
//! orientations are unsigned over [0°, 180°) and each pixel votes its
//! magnitude into the two nearest bin centres of its own cell. Blocks of
//! cells slide with a stride of one cell and are L2-Hys normalised.

use crate::error::{Error, Result};
use crate::imageio::Image;

/// Descriptor parameters. Defaults: 9 orientations, 8×8-pixel cells,
/// 2×2-cell blocks, clip 0.2, epsilon 1e-5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HogParams {
    pub orientations: usize,
    pub cell_size: usize,
    pub block_size: usize,
    pub clip: f64,
    pub epsilon: f64,
}

impl Default for HogParams {
    fn default() -> Self {
        HogParams {
            orientations: 9,
            cell_size: 8,
            block_size: 2,
            clip: 0.2,
            epsilon: 1e-5,
        }
    }
}

impl HogParams {
    pub fn validate(&self) -> Result<()> {
        if self.orientations == 0 || self.cell_size == 0 || self.block_size == 0 {
            return Err(Error::InvalidArgument(format!(
                "orientations, cell size and block size must be >= 1: {self:?}"
            )));
        }
        if !(self.clip > 0.0) || !(self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "clip must be > 0 and epsilon >= 0: {self:?}"
            )));
        }
        Ok(())
    }

    /// Descriptor length for a `width`×`height` image, or `None` if the
    /// image does not hold a single block.
    pub fn descriptor_len(&self, width: usize, height: usize) -> Option<usize> {
        let (cx, cy) = (width / self.cell_size, height / self.cell_size);
        if cx < self.block_size || cy < self.block_size {
            return None;
        }
        Some(
            (cx - self.block_size + 1)
                * (cy - self.block_size + 1)
                * self.block_size
                * self.block_size
                * self.orientations,
        )
    }

    fn block_len(&self) -> usize {
        self.block_size * self.block_size * self.orientations
    }
}

/// A real-valued plane in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn from_image(img: &Image) -> Result<Self> {
        img.require_gray()?;
        Ok(Plane {
            width: img.width(),
            height: img.height(),
            data: img.data().iter().map(|&v| v as f64).collect(),
        })
    }
}

fn derivative(at: impl Fn(usize) -> f64, i: usize, len: usize) -> f64 {
    if len < 2 {
        0.0
    } else if i == 0 {
        at(1) - at(0)
    } else if i + 1 == len {
        at(i) - at(i - 1)
    } else {
        at(i + 1) - at(i - 1)
    }
}

/// Horizontal and vertical derivatives of a real plane.
pub fn plane_gradients(p: &Plane) -> (Plane, Plane) {
    let mut gx = Plane::zeros(p.width, p.height);
    let mut gy = Plane::zeros(p.width, p.height);
    for y in 0..p.height {
        for x in 0..p.width {
            gx.data[y * p.width + x] = derivative(|i| p.at(i, y), x, p.width);
            gy.data[y * p.width + x] = derivative(|i| p.at(x, i), y, p.height);
        }
    }
    (gx, gy)
}

pub fn gradients(img: &Image) -> Result<(Plane, Plane)> {
    Ok(plane_gradients(&Plane::from_image(img)?))
}

/// Per-cell orientation histograms, indexed `[cy][cx][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    pub cells_x: usize,
    pub cells_y: usize,
    pub orientations: usize,
    pub values: Vec<f64>,
}

impl CellGrid {
    pub fn cell(&self, cx: usize, cy: usize) -> &[f64] {
        let start = (cy * self.cells_x + cx) * self.orientations;
        &self.values[start..start + self.orientations]
    }

    fn cell_mut(&mut self, cx: usize, cy: usize) -> &mut [f64] {
        let start = (cy * self.cells_x + cx) * self.orientations;
        &mut self.values[start..start + self.orientations]
    }
}

/// Unsigned orientation of a gradient in degrees, in [0, 180).
pub fn unsigned_angle(gx: f64, gy: f64) -> f64 {
    let deg = gy.atan2(gx).to_degrees().rem_euclid(180.0);
    if deg >= 180.0 {
        0.0
    } else {
        deg
    }
}

pub fn cell_histograms(gx: &Plane, gy: &Plane, params: &HogParams) -> Result<CellGrid> {
    params.validate()?;
    if gx.width != gy.width || gx.height != gy.height {
        return Err(Error::InvalidDimensions(format!(
            "gradient planes differ: {}x{} vs {}x{}",
            gx.width, gx.height, gy.width, gy.height
        )));
    }
    let c = params.cell_size;
    if !gx.width.is_multiple_of(c) || !gx.height.is_multiple_of(c) {
        return Err(Error::InvalidDimensions(format!(
            "{}x{} is not divisible by cell size {c}",
            gx.width, gx.height
        )));
    }
    let o = params.orientations;
    let bin_width = 180.0 / o as f64;
    let mut grid = CellGrid {
        cells_x: gx.width / c,
        cells_y: gx.height / c,
        orientations: o,
        values: vec![0.0; (gx.width / c) * (gx.height / c) * o],
    };
    for y in 0..gx.height {
        for x in 0..gx.width {
            let (dx, dy) = (gx.at(x, y), gy.at(x, y));
            let magnitude = dx.hypot(dy);
            if magnitude == 0.0 {
                continue;
            }
            // position relative to bin centres at (i + 0.5) * bin_width
            let pos = unsigned_angle(dx, dy) / bin_width - 0.5;
            let lo = pos.floor();
            let frac = pos - lo;
            let lo_bin = (lo as isize).rem_euclid(o as isize) as usize;
            let hi_bin = (lo_bin + 1) % o;
            let hist = grid.cell_mut(x / c, y / c);
            hist[lo_bin] += magnitude * (1.0 - frac);
            hist[hi_bin] += magnitude * frac;
        }
    }
    Ok(grid)
}

fn l2_normalize(v: &mut [f64], epsilon: f64) {
    let norm = (v.iter().map(|x| x * x).sum::<f64>() + epsilon * epsilon).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Concatenates the raw (un-normalised) values of the block whose top-left
/// cell is `(bx, by)`: cells in row-major order, bins innermost.
pub fn block_values(cells: &CellGrid, bx: usize, by: usize, block_size: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(block_size * block_size * cells.orientations);
    for cy in by..by + block_size {
        for cx in bx..bx + block_size {
            v.extend_from_slice(cells.cell(cx, cy));
        }
    }
    v
}

/// First two L2-Hys stages: normalise, then clip.
pub fn normalize_and_clip(block: &mut [f64], params: &HogParams) {
    l2_normalize(block, params.epsilon);
    block.iter_mut().for_each(|x| *x = x.min(params.clip));
}

/// L2-Hys block normalisation over all block positions, row-major.
pub fn block_normalize(cells: &CellGrid, params: &HogParams) -> Result<Vec<f64>> {
    params.validate()?;
    let b = params.block_size;
    if cells.orientations != params.orientations {
        return Err(Error::InvalidDimensions(format!(
            "histograms have {} bins, params say {}",
            cells.orientations, params.orientations
        )));
    }
    if cells.cells_x < b || cells.cells_y < b {
        return Err(Error::InvalidDimensions(format!(
            "{}x{} cell grid is smaller than one {b}x{b} block",
            cells.cells_x, cells.cells_y
        )));
    }
    let (blocks_x, blocks_y) = (cells.cells_x - b + 1, cells.cells_y - b + 1);
    let mut out = Vec::with_capacity(blocks_x * blocks_y * params.block_len());
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let mut block = block_values(cells, bx, by, b);
            normalize_and_clip(&mut block, params);
            l2_normalize(&mut block, params.epsilon);
            out.extend_from_slice(&block);
        }
    }
    Ok(out)
}

/// HOG descriptor of a real plane whose sides are multiples of the cell size.
pub fn hog_plane(plane: &Plane, params: &HogParams) -> Result<Vec<f64>> {
    let (gx, gy) = plane_gradients(plane);
    let cells = cell_histograms(&gx, &gy, params)?;
    block_normalize(&cells, params)
}

/// HOG descriptor of a single-channel image already at the working resolution.
pub fn hog_features(img: &Image, params: &HogParams) -> Result<Vec<f64>> {
    hog_plane(&Plane::from_image(img)?, params)
}
