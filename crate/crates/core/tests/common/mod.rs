//! Brute-force oracles shared by the integration tests.
//!
//! Nothing here reuses library code: components are found by flood fill at
//! every threshold and pairs are reconstructed by tracking which
//! components merge between consecutive thresholds.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use topohog::cubical::{Death, PersistenceDiagram};

/// (birth, death) with `None` for an essential class.
pub type Pair = (i32, Option<i32>);

pub fn sorted_pairs(pd: &PersistenceDiagram) -> Vec<Pair> {
    let mut v: Vec<Pair> = pd
        .pairs()
        .iter()
        .map(|p| match p.death {
            Death::Finite(d) => (p.birth, Some(d)),
            Death::Infinite => (p.birth, None),
        })
        .collect();
    v.sort();
    v
}

const N8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const N4: [(i64, i64); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

/// Labels connected components of `mask`; `None` for inactive pixels.
fn label(w: usize, h: usize, mask: &[bool], nbrs: &[(i64, i64)]) -> (Vec<Option<usize>>, usize) {
    let mut lab = vec![None; w * h];
    let mut n = 0;
    for start in 0..w * h {
        if !mask[start] || lab[start].is_some() {
            continue;
        }
        lab[start] = Some(n);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let (x, y) = ((p % w) as i64, (p / w) as i64);
            for &(dx, dy) in nbrs {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let q = ny as usize * w + nx as usize;
                if mask[q] && lab[q].is_none() {
                    lab[q] = Some(n);
                    queue.push_back(q);
                }
            }
        }
        n += 1;
    }
    (lab, n)
}

fn levels(img: &[i32]) -> Vec<i32> {
    img.iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Dimension-0 pairs of the sublevel filtration with 8-connected pixels.
pub fn oracle_dim0(w: usize, h: usize, img: &[i32]) -> Vec<Pair> {
    let mut pairs = vec![];
    // births of the components alive at the previous threshold, by label
    let mut prev_lab: Vec<Option<usize>> = vec![None; w * h];
    let mut prev_birth: Vec<i32> = vec![];
    for t in levels(img) {
        let mask: Vec<bool> = img.iter().map(|&v| v <= t).collect();
        let (lab, n) = label(w, h, &mask, &N8);
        let mut birth = vec![t; n];
        for c in 0..n {
            let olds: BTreeSet<usize> = (0..w * h)
                .filter(|&p| lab[p] == Some(c))
                .filter_map(|p| prev_lab[p])
                .collect();
            if olds.is_empty() {
                continue;
            }
            let elder = olds.iter().map(|&o| prev_birth[o]).min().unwrap();
            birth[c] = elder;
            let mut survivors_skipped = false;
            for &o in &olds {
                if prev_birth[o] == elder && !survivors_skipped {
                    survivors_skipped = true;
                } else {
                    pairs.push((prev_birth[o], Some(t)));
                }
            }
        }
        prev_lab = lab;
        prev_birth = birth;
    }
    pairs.extend(prev_birth.iter().map(|&b| (b, None)));
    pairs.sort();
    pairs
}

/// Dimension-1 pairs: holes are bounded 4-connected components of the
/// background `{v > t}`. Thresholds are walked downwards so holes appear
/// and merge; the component touching the border always survives, and
/// otherwise the one containing the largest value does.
pub fn oracle_dim1(w: usize, h: usize, img: &[i32]) -> Vec<Pair> {
    let lv = levels(img);
    let mut ts: Vec<i32> = lv.clone();
    ts.push(lv[0] - 1);
    ts.sort();
    ts.reverse();
    let mut pairs = vec![];
    let mut prev_lab: Vec<Option<usize>> = vec![None; w * h];
    // (max value, touches border) per previous component
    let mut prev_key: Vec<(i32, bool)> = vec![];
    let mut prev_t = i32::MAX;
    for t in ts {
        let mask: Vec<bool> = img.iter().map(|&v| v > t).collect();
        let (lab, n) = label(w, h, &mask, &N4);
        let mut key = vec![(i32::MIN, false); n];
        for p in 0..w * h {
            if let Some(c) = lab[p] {
                let (x, y) = (p % w, p / w);
                let border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
                key[c] = (key[c].0.max(img[p]), key[c].1 || border);
            }
        }
        for c in 0..n {
            let olds: BTreeSet<usize> = (0..w * h)
                .filter(|&p| lab[p] == Some(c))
                .filter_map(|p| prev_lab[p])
                .collect();
            let elder = if key[c].1 {
                None
            } else {
                olds.iter().map(|&o| prev_key[o].0).max()
            };
            let mut kept = false;
            for &o in &olds {
                let (m, open) = prev_key[o];
                if open {
                    continue;
                }
                if Some(m) == elder && !kept {
                    kept = true;
                } else {
                    // bounded at prev_t, absorbed at t
                    pairs.push((prev_t, Some(m)));
                }
            }
        }
        prev_lab = lab;
        prev_key = key;
        prev_t = t;
    }
    pairs.sort();
    pairs
}

/// V − E + F of the union of closed unit squares at active pixels.
pub fn euler_characteristic(w: usize, h: usize, mask: &[bool]) -> i64 {
    let mut vertices = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut faces = 0i64;
    for y in 0..h {
        for x in 0..w {
            if !mask[y * w + x] {
                continue;
            }
            faces += 1;
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                vertices.insert((x + dx, y + dy));
            }
            // horizontal edges keyed by left end, vertical by top end
            edges.insert((x, y, 'h'));
            edges.insert((x, y + 1, 'h'));
            edges.insert((x, y, 'v'));
            edges.insert((x + 1, y, 'v'));
        }
    }
    vertices.len() as i64 - edges.len() as i64 + faces
}

/// Deterministic small-alphabet image generator for property loops.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    pub fn unit(&mut self) -> f64 {
        self.next() as f64 / (1u64 << 31) as f64
    }
}

/// Decodes `code` as a base-`k` image of `n` pixels.
pub fn base_k_image(mut code: u64, k: u64, n: usize) -> Vec<i32> {
    (0..n)
        .map(|_| {
            let v = (code % k) as i32;
            code /= k;
            v
        })
        .collect()
}
