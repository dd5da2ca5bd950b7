//! Sublevel-filtration persistent homology of 2-D images.
//!
//! Pixels are the closed 2-cells of a cubical complex (the T-construction):
//! two active pixels touching along an edge or only at a corner belong to
//! the same component, so foreground connectivity is 8-adjacency. Holes are
//! the bounded 4-connected components of the inactive pixels.
//!
//! Dimension 0 is computed with union-find over pixels in increasing
//! intensity order (elder rule: the component born first survives a merge).
//! Dimension 1 uses the dual picture: inactive pixels are added in
//! decreasing order together with an "outside" node that is attached to
//! every border pixel, and each bounded region is born when it is cut off
//! from the rest of the background and dies once its brightest pixel is
//! absorbed by the foreground.

use std::cmp::Reverse;
use std::fmt;

use crate::error::{Error, Result};
use crate::imageio::Image;

/// Death value of a persistence pair. `Infinite` sorts after every finite
/// level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Death {
    Finite(i32),
    Infinite,
}

impl Death {
    pub fn is_finite(self) -> bool {
        matches!(self, Death::Finite(_))
    }

    /// True if a feature with this death is still alive at `t`.
    pub fn after(self, t: i32) -> bool {
        match self {
            Death::Finite(d) => t < d,
            Death::Infinite => true,
        }
    }
}

impl fmt::Display for Death {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Death::Finite(d) => write!(f, "{d}"),
            Death::Infinite => f.write_str("inf"),
        }
    }
}

/// A (birth, death) pair measured in intensity units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PersistencePair {
    pub birth: i32,
    pub death: Death,
}

impl PersistencePair {
    pub fn finite(birth: i32, death: i32) -> Self {
        PersistencePair {
            birth,
            death: Death::Finite(death),
        }
    }

    pub fn essential(birth: i32) -> Self {
        PersistencePair {
            birth,
            death: Death::Infinite,
        }
    }

    /// Alive-count rule: `birth <= t < death`.
    pub fn alive_at(&self, t: i32) -> bool {
        self.birth <= t && self.death.after(t)
    }
}

/// The pairs of one homology dimension, kept sorted so that `==` is
/// multiset equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PersistenceDiagram {
    dim: usize,
    pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(dim: usize, mut pairs: Vec<PersistencePair>) -> Self {
        pairs.sort_unstable();
        PersistenceDiagram { dim, pairs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn essential_count(&self) -> usize {
        self.pairs.iter().filter(|p| !p.death.is_finite()).count()
    }

    /// Number of features alive at level `t`.
    pub fn alive_at(&self, t: i32) -> usize {
        self.pairs.iter().filter(|p| p.alive_at(t)).count()
    }

    /// Diagram with every finite value shifted by `c`.
    pub fn shifted(&self, c: i32) -> Self {
        let pairs = self
            .pairs
            .iter()
            .map(|p| PersistencePair {
                birth: p.birth + c,
                death: match p.death {
                    Death::Finite(d) => Death::Finite(d + c),
                    Death::Infinite => Death::Infinite,
                },
            })
            .collect();
        PersistenceDiagram::new(self.dim, pairs)
    }
}

/// Pixels active at one filtration level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub active: Vec<bool>,
}

impl BinaryMask {
    pub fn count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn is_active(&self, x: usize, y: usize) -> bool {
        self.active[y * self.width + x]
    }
}

/// Pixels with intensity `<= t`.
pub fn binarize(img: &Image, t: u8) -> Result<BinaryMask> {
    img.require_gray()?;
    Ok(BinaryMask {
        width: img.width(),
        height: img.height(),
        active: img.data().iter().map(|&v| v <= t).collect(),
    })
}

/// Dimension-0 and dimension-1 diagrams of the sublevel filtration of a
/// single-channel image, with births and deaths in intensity units.
pub fn compute_persistence(img: &Image) -> Result<(PersistenceDiagram, PersistenceDiagram)> {
    img.require_gray()?;
    let levels: Vec<i32> = img.data().iter().map(|&v| v as i32).collect();
    persistence_of_levels(img.width(), img.height(), &levels)
}

/// Same as [`compute_persistence`] over an arbitrary integer-valued grid.
pub fn persistence_of_levels(
    width: usize,
    height: usize,
    levels: &[i32],
) -> Result<(PersistenceDiagram, PersistenceDiagram)> {
    if width == 0 || height == 0 || levels.len() != width * height {
        return Err(Error::InvalidDimensions(format!(
            "{} levels for a {width}x{height} grid",
            levels.len()
        )));
    }
    let grid = Grid {
        width,
        height,
        levels,
    };
    Ok((grid.components(), grid.holes()))
}

struct Grid<'a> {
    width: usize,
    height: usize,
    levels: &'a [i32],
}

impl Grid<'_> {
    fn neighbours(&self, p: usize, diagonal: bool, out: &mut Vec<usize>) {
        out.clear();
        let (x, y) = ((p % self.width) as isize, (p / self.width) as isize);
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if (dx == 0 && dy == 0) || (!diagonal && dx != 0 && dy != 0) {
                    continue;
                }
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                    out.push(ny as usize * self.width + nx as usize);
                }
            }
        }
    }

    fn on_border(&self, p: usize) -> bool {
        let (x, y) = (p % self.width, p / self.width);
        x == 0 || y == 0 || x + 1 == self.width || y + 1 == self.height
    }

    fn components(&self) -> PersistenceDiagram {
        let n = self.levels.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&p| (self.levels[p], p));

        // Component key is its birth level; smaller is older.
        let mut sets = ElderSets::new(n, |p| self.levels[p] as i64);
        let mut active = vec![false; n];
        let mut pairs = Vec::new();
        let mut nbrs = Vec::with_capacity(8);
        for &p in &order {
            let level = self.levels[p];
            active[p] = true;
            self.neighbours(p, true, &mut nbrs);
            for &q in &nbrs {
                if !active[q] {
                    continue;
                }
                if let Some(young) = sets.union(p, q, |a, b| a <= b) {
                    let birth = young as i32;
                    if birth < level {
                        pairs.push(PersistencePair::finite(birth, level));
                    }
                }
            }
        }
        for root in sets.roots() {
            pairs.push(PersistencePair::essential(sets.key(root) as i32));
        }
        PersistenceDiagram::new(0, pairs)
    }

    fn holes(&self) -> PersistenceDiagram {
        let n = self.levels.len();
        let outside = n;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&p| (Reverse(self.levels[p]), p));

        // Component key is the brightest level it contains; larger is older
        // and the outside region is oldest of all.
        let mut sets = ElderSets::new(n + 1, |p| {
            if p == outside {
                i64::MAX
            } else {
                self.levels[p] as i64
            }
        });
        let mut present = vec![false; n];
        let mut pairs = Vec::new();
        let mut nbrs = Vec::with_capacity(5);
        for &p in &order {
            let level = self.levels[p];
            present[p] = true;
            self.neighbours(p, false, &mut nbrs);
            nbrs.retain(|&q| present[q]);
            if self.on_border(p) {
                nbrs.push(outside);
            }
            for &q in &nbrs {
                if let Some(young) = sets.union(p, q, |a, b| a >= b) {
                    let death = young as i32;
                    if level < death {
                        pairs.push(PersistencePair::finite(level, death));
                    }
                }
            }
        }
        PersistenceDiagram::new(1, pairs)
    }
}

/// Union-find where each set carries the key of its oldest member.
struct ElderSets {
    parent: Vec<usize>,
    key: Vec<i64>,
}

impl ElderSets {
    fn new(n: usize, key: impl Fn(usize) -> i64) -> Self {
        ElderSets {
            parent: (0..n).collect(),
            key: (0..n).map(key).collect(),
        }
    }

    fn find(&mut self, mut p: usize) -> usize {
        while self.parent[p] != p {
            self.parent[p] = self.parent[self.parent[p]];
            p = self.parent[p];
        }
        p
    }

    fn key(&self, root: usize) -> i64 {
        self.key[root]
    }

    /// Merges the sets of `a` and `b`; returns the key of the set that died,
    /// or `None` if they were already joined. `older(x, y)` decides whether
    /// key `x` survives against key `y`.
    fn union(&mut self, a: usize, b: usize, older: impl Fn(i64, i64) -> bool) -> Option<i64> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        let (keep, lose) = if older(self.key[ra], self.key[rb]) {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lose] = keep;
        Some(self.key[lose])
    }

    fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.parent.len()).filter(move |&p| self.parent[p] == p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pd(img: &Image) -> (PersistenceDiagram, PersistenceDiagram) {
        compute_persistence(img).unwrap()
    }

    #[test]
    fn binarize_threshold_is_inclusive() {
        let img = Image::filled(3, 2, 1, 100).unwrap();
        assert_eq!(binarize(&img, 99).unwrap().count(), 0);
        assert_eq!(binarize(&img, 100).unwrap().count(), 6);
    }

    #[test]
    fn binarize_rejects_rgb() {
        let img = Image::filled(2, 2, 3, 0).unwrap();
        assert!(binarize(&img, 10).is_err());
        assert!(compute_persistence(&img).is_err());
    }

    #[test]
    fn single_pixel() {
        let img = Image::gray(1, 1, vec![42]).unwrap();
        let (d0, d1) = pd(&img);
        assert_eq!(d0.pairs(), &[PersistencePair::essential(42)]);
        assert!(d1.is_empty());
    }

    #[test]
    fn diagonal_pixels_touch() {
        // corner contact joins components in the closed-cell complex
        let img = Image::from_rows(&[[0u8, 9], [9, 0]]).unwrap();
        let (d0, _) = pd(&img);
        assert_eq!(d0.pairs(), &[PersistencePair::essential(0)]);
    }

    #[test]
    fn ring_encloses_hole() {
        let img = Image::from_rows(&[[1u8, 1, 1], [1, 7, 1], [1, 1, 1]]).unwrap();
        let (d0, d1) = pd(&img);
        assert_eq!(d0.pairs(), &[PersistencePair::essential(1)]);
        assert_eq!(d1.pairs(), &[PersistencePair::finite(1, 7)]);
    }

    #[test]
    fn diagonal_gap_does_not_leak_hole() {
        // the four edge pixels touch at corners and enclose the centre until
        // the centre itself enters
        let img = Image::from_rows(&[[5u8, 1, 5], [1, 9, 1], [5, 1, 5]]).unwrap();
        let (d0, d1) = pd(&img);
        assert_eq!(d0.pairs(), &[PersistencePair::essential(1)]);
        assert_eq!(d1.pairs(), &[PersistencePair::finite(1, 9)]);
    }

    #[test]
    fn two_components_elder_rule() {
        let img = Image::from_rows(&[[0u8, 5, 3]]).unwrap();
        let (d0, d1) = pd(&img);
        assert_eq!(
            d0.pairs(),
            &[PersistencePair::essential(0), PersistencePair::finite(3, 5)]
        );
        assert!(d1.is_empty());
    }

    #[test]
    fn infinite_sorts_last() {
        assert!(Death::Infinite > Death::Finite(i32::MAX));
    }

    #[test]
    fn shift_equivariance() {
        let levels = [3, 9, 4, 8, 1, 7, 2, 6, 5, 0, 9, 2];
        let (a0, a1) = persistence_of_levels(4, 3, &levels).unwrap();
        let shifted: Vec<i32> = levels.iter().map(|v| v + 11).collect();
        let (b0, b1) = persistence_of_levels(4, 3, &shifted).unwrap();
        assert_eq!(a0.shifted(11), b0);
        assert_eq!(a1.shifted(11), b1);
    }
}
