//! Skeletonization, junction removal, endpoint detection, component labels
//! and tail tracing on `{0,1}` rasters.
//!
//! Neighbors are numbered P2..P9 clockwise from north, matching
//! [`NEIGHBORS8`](crate::raster::NEIGHBORS8). Every neighborhood read is
//! zero padded.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::raster::{BinaryImage, PixelCoord};

/// Default number of tail pixels traced for tangent estimation.
pub const DEFAULT_TAIL_K: usize = 5;

/// A terminal pixel of a broken contour together with its gradient data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub pos: PixelCoord,
    pub gx: i32,
    pub gy: i32,
    /// Degrees in (-180, 180]; `None` when the gradient vanishes.
    pub direction: Option<f64>,
    /// 1 when `direction > 0`, else 0; `None` alongside an undefined direction.
    pub dir_class: Option<u8>,
    pub contour_id: u32,
}

/// Pixels walked inward from an endpoint, `pixels[0]` being the endpoint itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourTail {
    pub endpoint: PixelCoord,
    pub pixels: Vec<PixelCoord>,
}

/// Number of ink neighbors, B(P).
pub fn neighbor_sum(img: &BinaryImage, p: PixelCoord) -> u8 {
    img.neighbors(p).iter().sum()
}

/// Number of 0 -> 1 transitions in the circular sequence P2, P3, ..., P9, P2.
pub fn crossing_number(img: &BinaryImage, p: PixelCoord) -> u8 {
    transitions(&img.neighbors(p))
}

fn transitions(n: &[u8; 8]) -> u8 {
    (0..8).filter(|&i| n[i] == 0 && n[(i + 1) % 8] == 1).count() as u8
}

#[derive(Clone, Copy)]
enum SubPass {
    First,
    Second,
}

/// Zhang-Suen thinning, iterated until a full iteration deletes nothing.
pub fn zhang_suen_thin(img: &BinaryImage) -> BinaryImage {
    let mut cur = img.clone();
    loop {
        let (next, a) = thin_subpass(&cur, SubPass::First);
        let (next, b) = thin_subpass(&next, SubPass::Second);
        cur = next;
        if a + b == 0 {
            return cur;
        }
    }
}

/// One sub-iteration evaluated on a frozen snapshot. Returns the new image and
/// the number of deleted pixels.
fn thin_subpass(img: &BinaryImage, pass: SubPass) -> (BinaryImage, usize) {
    let mut out = img.clone();
    let mut deleted = 0;
    for p in img.ink_pixels() {
        let n = img.neighbors(p);
        let b: u8 = n.iter().sum();
        if !(2..=6).contains(&b) || transitions(&n) != 1 {
            continue;
        }
        let [p2, _, p4, _, p6, _, p8, _] = n;
        let erase = match pass {
            SubPass::First => p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0,
            SubPass::Second => p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0,
        };
        if erase {
            out.set(p, false);
            deleted += 1;
        }
    }
    (out, deleted)
}

/// Deletes every ink pixel whose crossing number is at least 3.
///
/// Each pass reads a frozen copy and deletes all crossed pixels at once.
/// Removing a junction center can leave its arm roots branching, so passes
/// repeat until none remain. Deleted coordinates are returned pass by pass,
/// each pass in raster order.
pub fn remove_crossed_points(img: &BinaryImage) -> (BinaryImage, Vec<PixelCoord>) {
    let mut out = img.clone();
    let mut deleted = Vec::new();
    loop {
        let crossed: Vec<PixelCoord> = out.ink_pixels().filter(|&p| crossing_number(&out, p) >= 3).collect();
        if crossed.is_empty() {
            return (out, deleted);
        }
        for &p in &crossed {
            out.set(p, false);
        }
        deleted.extend(crossed);
    }
}

/// Ink pixels with exactly one ink neighbor, scanning only interior pixels
/// (a one-pixel border is skipped). Raster order.
pub fn detect_endpoints(img: &BinaryImage) -> Vec<PixelCoord> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let p = PixelCoord::new(r, c);
            if img.get(p) && neighbor_sum(img, p) == 1 {
                out.push(p);
            }
        }
    }
    out
}

/// 8-connected component ids for every ink pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    width: usize,
    labels: Vec<Option<u32>>,
    count: u32,
}

impl ComponentLabels {
    pub fn get(&self, p: PixelCoord) -> Option<u32> {
        self.labels.get(p.row * self.width + p.col).copied().flatten()
    }

    /// Number of distinct components.
    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// All labelled pixels in raster order with their ids.
    pub fn iter(&self) -> impl Iterator<Item = (PixelCoord, u32)> + '_ {
        let w = self.width;
        self.labels
            .iter()
            .enumerate()
            .filter_map(move |(i, l)| l.map(|id| (PixelCoord::new(i / w, i % w), id)))
    }
}

/// Labels 8-connected ink components with dense ids in raster order of first encounter.
pub fn label_components(img: &BinaryImage) -> ComponentLabels {
    let (w, h) = (img.width(), img.height());
    let mut labels = vec![None; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in img.ink_pixels() {
        if labels[start.row * w + start.col].is_some() {
            continue;
        }
        labels[start.row * w + start.col] = Some(next);
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for q in img.ink_neighbors(p) {
                let slot = &mut labels[q.row * w + q.col];
                if slot.is_none() {
                    *slot = Some(next);
                    queue.push_back(q);
                }
            }
        }
        next += 1;
    }
    ComponentLabels { width: w, labels, count: next }
}

/// Walks up to `k` pixels inward from the endpoint `start`.
///
/// Each step moves to the single unvisited ink neighbor. Where a pixel sits
/// on a staircase corner two mutually adjacent candidates appear; the
/// 4-adjacent one is taken first, its partner follows on the next step.
/// Any other branching counts as a junction and ends the walk.
pub fn trace_tail(img: &BinaryImage, start: PixelCoord, k: usize) -> Result<ContourTail, GeometryError> {
    if k < 2 {
        return Err(GeometryError::TailTooShort(k));
    }
    if !img.contains(start) || !img.get(start) {
        return Err(GeometryError::NotForeground(start));
    }
    if neighbor_sum(img, start) != 1 {
        return Err(GeometryError::NotEndpoint(start));
    }
    let mut pixels = vec![start];
    while pixels.len() < k {
        let cur = *pixels.last().expect("non-empty");
        let cands: Vec<PixelCoord> = img
            .ink_neighbors(cur)
            .into_iter()
            .filter(|q| !pixels.contains(q))
            // Skip pixels already touching the walked path except through `cur`;
            // they belong to a corner we have passed.
            .filter(|q| !pixels[..pixels.len() - 1].iter().any(|v| v.is_adjacent8(*q)))
            .collect();
        let next = match cands.as_slice() {
            [] => break,
            [only] => *only,
            [a, b] if a.is_adjacent8(*b) => {
                let four = |q: &PixelCoord| q.row == cur.row || q.col == cur.col;
                match (four(a), four(b)) {
                    (true, false) => *a,
                    (false, true) => *b,
                    _ => break,
                }
            }
            _ => break,
        };
        pixels.push(next);
    }
    Ok(ContourTail { endpoint: start, pixels })
}
