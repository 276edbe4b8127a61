//! Synthetic contour maps with known ground truth, gap injection, and scoring.
//!
//! A map is a smooth height field (a sum of Gaussian bumps) whose level sets
//! are drawn as dark strokes on a light background, sprinkled with
//! salt-and-pepper noise. Ground truth is the sub-pixel level-set polyline,
//! so deviation is measured against geometry rather than against a raster.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::matcher::MatchPair;
use crate::raster::{GrayImage, PixelCoord};
use crate::reconnect::{ReconnectionPath, SubPixel};

pub const INK: u8 = 30;
pub const PAPER: u8 = 240;
pub const NOISE_DENSITY: f64 = 0.005;
/// Strokes come out two to three pixels wide, the thinnest that survive a 3x3 median.
pub const DEFAULT_STROKE_RADIUS: f64 = 1.0;
/// Curves closer than this to each other (or to themselves) would merge once inked.
const MIN_SEPARATION: f64 = 10.0;
const BORDER_MARGIN: f64 = 12.0;
const MIN_CURVE_LENGTH: f64 = 120.0;
const LEVEL_RETRIES: usize = 200;
/// Random height fields drawn before giving up.
const FIELD_RETRIES: usize = 8;

/// One isotropic Gaussian bump of the height field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: SubPixel,
    pub sigma: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub bumps: Vec<Bump>,
}

impl HeightField {
    pub fn value(&self, p: SubPixel) -> f64 {
        self.bumps
            .iter()
            .map(|b| {
                let d2 = (p - b.center).dot(p - b.center);
                b.amplitude * (-d2 / (2.0 * b.sigma * b.sigma)).exp()
            })
            .sum()
    }

    /// Two to four bumps placed around the middle of a `size`-pixel square.
    pub fn random(rng: &mut impl Rng, size: usize) -> Self {
        let s = size as f64;
        let n = rng.random_range(2..=4);
        let bumps = (0..n)
            .map(|_| Bump {
                center: SubPixel::new(rng.random_range(0.3 * s..0.7 * s), rng.random_range(0.3 * s..0.7 * s)),
                sigma: rng.random_range(0.10 * s..0.18 * s),
                amplitude: rng.random_range(0.5..1.0),
            })
            .collect();
        Self { bumps }
    }
}

/// An ordered list of points; closed curves repeat their first point at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<SubPixel>,
}

impl Polyline {
    pub fn is_closed(&self) -> bool {
        self.points.len() > 2 && self.points.first() == self.points.last()
    }

    /// Cumulative arc length at each vertex.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.points.len());
        let mut s = 0.0;
        acc.push(0.0);
        for w in self.points.windows(2) {
            s += w[0].dist(w[1]);
            acc.push(s);
        }
        acc
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Point at arc length `s`, wrapping around for closed curves and
    /// clamping for open ones.
    pub fn point_at(&self, s: f64) -> SubPixel {
        let arcs = self.arc_lengths();
        let total = *arcs.last().unwrap_or(&0.0);
        if self.points.len() < 2 || total == 0.0 {
            return self.points[0];
        }
        let s = if self.is_closed() { s.rem_euclid(total) } else { s.clamp(0.0, total) };
        let i = arcs.partition_point(|&a| a <= s).clamp(1, arcs.len() - 1);
        let seg = arcs[i] - arcs[i - 1];
        let t = if seg > 0.0 { (s - arcs[i - 1]) / seg } else { 0.0 };
        self.points[i - 1] + (self.points[i] - self.points[i - 1]) * t
    }

    /// Distance from `p` to the curve and the arc length of the closest point.
    pub fn nearest(&self, p: SubPixel) -> (f64, f64) {
        let arcs = self.arc_lengths();
        let mut best = (f64::INFINITY, 0.0);
        for (i, w) in self.points.windows(2).enumerate() {
            let d = w[1] - w[0];
            let len2 = d.dot(d);
            let t = if len2 > 0.0 { ((p - w[0]).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let dist = p.dist(w[0] + d * t);
            if dist < best.0 {
                best = (dist, arcs[i] + t * len2.sqrt());
            }
        }
        best
    }

    /// Distance from `p` to the curve.
    pub fn distance(&self, p: SubPixel) -> f64 {
        self.nearest(p).0
    }

    /// Points spaced at most `step` apart along the same curve.
    pub fn densify(&self, step: f64) -> Vec<SubPixel> {
        let mut out = Vec::new();
        for w in self.points.windows(2) {
            let n = ((w[0].dist(w[1]) / step).ceil() as usize).max(1);
            for k in 0..n {
                out.push(w[0] + (w[1] - w[0]) * (k as f64 / n as f64));
            }
        }
        if let Some(&last) = self.points.last() {
            out.push(last);
        }
        out
    }
}

/// Level-set polylines of `values` (a `width x height` grid sampled at pixel
/// centers) by marching squares. Samples at or above `level` count as inside.
pub fn level_set(values: &[f64], width: usize, height: usize, level: f64) -> Vec<Polyline> {
    // Edge ids: horizontal edge (r,c)-(r,c+1) and vertical edge (r,c)-(r+1,c).
    #[derive(Clone, Copy, PartialEq, Eq, Hash)]
    enum Edge {
        H(usize, usize),
        V(usize, usize),
    }
    let at = |r: usize, c: usize| values[r * width + c];
    let crossing = |e: Edge| -> SubPixel {
        let (p, q, va, vb) = match e {
            Edge::H(r, c) => ((r as f64, c as f64), (r as f64, c as f64 + 1.0), at(r, c), at(r, c + 1)),
            Edge::V(r, c) => ((r as f64, c as f64), (r as f64 + 1.0, c as f64), at(r, c), at(r + 1, c)),
        };
        let t = if vb != va { ((level - va) / (vb - va)).clamp(0.0, 1.0) } else { 0.5 };
        SubPixel::new(p.0 + (q.0 - p.0) * t, p.1 + (q.1 - p.1) * t)
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for r in 0..height.saturating_sub(1) {
        for c in 0..width.saturating_sub(1) {
            let inside = |v: f64| v >= level;
            let (tl, tr, br, bl) = (at(r, c), at(r, c + 1), at(r + 1, c + 1), at(r + 1, c));
            let case = u8::from(inside(tl)) << 3
                | u8::from(inside(tr)) << 2
                | u8::from(inside(br)) << 1
                | u8::from(inside(bl));
            let top = Edge::H(r, c);
            let bottom = Edge::H(r + 1, c);
            let left = Edge::V(r, c);
            let right = Edge::V(r, c + 1);
            let center_inside = inside((tl + tr + br + bl) / 4.0);
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((top, right)),
                6 | 9 => segments.push((top, bottom)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    // tr and bl inside.
                    if center_inside {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((top, right));
                        segments.push((left, bottom));
                    }
                }
                10 => {
                    // tl and br inside.
                    if center_inside {
                        segments.push((top, right));
                        segments.push((left, bottom));
                    } else {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(i);
        by_edge.entry(b).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut chain = vec![a, b];
        // Extend forward from b, then backward from a.
        for forward in [true, false] {
            loop {
                let tip = if forward { *chain.last().unwrap() } else { chain[0] };
                let next = by_edge[&tip].iter().copied().find(|&j| !used[j]);
                let Some(j) = next else { break };
                used[j] = true;
                let (x, y) = segments[j];
                let other = if x == tip { y } else { x };
                if forward {
                    chain.push(other);
                } else {
                    chain.insert(0, other);
                }
            }
        }
        let mut points: Vec<SubPixel> = chain.iter().map(|&e| crossing(e)).collect();
        if chain.len() > 2 && chain.first() == chain.last() {
            let first = points[0];
            *points.last_mut().unwrap() = first;
        }
        out.push(Polyline { points });
    }
    out
}

/// A rendered synthetic map with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMap {
    pub image: GrayImage,
    pub truth_curves: Vec<Polyline>,
    pub stroke_radius: f64,
    pub seed: u64,
}

/// Generation parameters for one synthetic map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub size: usize,
    pub n_contours: usize,
    pub noise_density: f64,
    pub stroke_radius: f64,
}

impl MapParams {
    pub fn new(n_contours: usize, size: usize) -> Self {
        Self { size, n_contours, noise_density: NOISE_DENSITY, stroke_radius: DEFAULT_STROKE_RADIUS }
    }
}

/// Renders `n_contours` level sets of a random height field.
pub fn generate_map(seed: u64, n_contours: usize, size: usize) -> Result<SyntheticMap, HarnessError> {
    generate_map_with(seed, &MapParams::new(n_contours, size), None)
}

/// Like [`generate_map`] with explicit parameters and, optionally, an
/// explicit height field instead of a random one.
pub fn generate_map_with(
    seed: u64,
    params: &MapParams,
    field: Option<&HeightField>,
) -> Result<SyntheticMap, HarnessError> {
    let size = params.size;
    if size < 128 {
        return Err(HarnessError::InvalidParams(format!("size must be at least 128, got {size}")));
    }
    if params.n_contours == 0 {
        return Err(HarnessError::InvalidParams("at least one contour is required".into()));
    }
    if !(0.0..=0.5).contains(&params.noise_density) {
        return Err(HarnessError::InvalidParams(format!("noise density {} outside [0, 0.5]", params.noise_density)));
    }
    if !(params.stroke_radius >= 0.5 && params.stroke_radius <= 4.0) {
        return Err(HarnessError::InvalidParams(format!("stroke radius {} outside [0.5, 4]", params.stroke_radius)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field_given = field.is_some();
    let mut fields = 0;
    let curves = loop {
        fields += 1;
        let random_field;
        let field = match field {
            Some(f) => f,
            None => {
                random_field = HeightField::random(&mut rng, size);
                &random_field
            }
        };
        if let Some(curves) = place_curves(field, size, params.n_contours, &mut rng) {
            break curves;
        }
        // A given field is final; a random one may simply have no room.
        if field_given || fields == FIELD_RETRIES {
            return Err(HarnessError::LevelSetExhausted(fields * LEVEL_RETRIES));
        }
    };

    let ink = ink_mask(&curves, size, size, params.stroke_radius);
    let mut data: Vec<u8> = ink.iter().map(|&on| if on { INK } else { PAPER }).collect();

    // Noise lands on paper only, so every truth pixel stays dark.
    let paper: Vec<usize> = (0..data.len()).filter(|&i| !ink[i]).collect();
    let n_noise = ((size * size) as f64 * params.noise_density).round() as usize;
    for k in sample(&mut rng, paper.len(), n_noise.min(paper.len())).into_iter() {
        data[paper[k]] = if rng.random_bool(0.5) { 0 } else { 255 };
    }
    let image = GrayImage::from_vec(size, size, data).expect("square raster");
    Ok(SyntheticMap { image, truth_curves: curves, stroke_radius: params.stroke_radius, seed })
}

/// Draws levels until `n` acceptable, mutually separated curves are found,
/// keeping the longest acceptable curve of each level.
fn place_curves(field: &HeightField, size: usize, n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Polyline>> {
    let values: Vec<f64> = (0..size * size)
        .map(|i| field.value(SubPixel::new((i / size) as f64, (i % size) as f64)))
        .collect();
    let peak = values.iter().copied().fold(f64::MIN, f64::max);
    let mut curves: Vec<Polyline> = Vec::new();
    for _ in 0..LEVEL_RETRIES {
        let level = rng.random_range(0.15..0.85) * peak;
        let candidate = level_set(&values, size, size, level)
            .into_iter()
            .filter(|c| acceptable_curve(c, size))
            .filter(|c| !curves.iter().any(|o| too_close(c, o)))
            .max_by(|a, b| a.length().total_cmp(&b.length()));
        if let Some(c) = candidate {
            curves.push(c);
            if curves.len() == n {
                return Some(curves);
            }
        }
    }
    None
}

fn acceptable_curve(c: &Polyline, size: usize) -> bool {
    let max = size as f64 - 1.0 - BORDER_MARGIN;
    c.is_closed()
        && c.length() >= MIN_CURVE_LENGTH
        && c.points.iter().all(|p| p.row >= BORDER_MARGIN && p.col >= BORDER_MARGIN && p.row <= max && p.col <= max)
        && !self_approaches(c)
}

/// Buckets points into square cells of side `MIN_SEPARATION`, so every point
/// closer than that to a query lies in the query's cell or one of its eight neighbors.
struct PointGrid {
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl PointGrid {
    fn cell(p: SubPixel) -> (i64, i64) {
        ((p.row / MIN_SEPARATION).floor() as i64, (p.col / MIN_SEPARATION).floor() as i64)
    }

    fn new(points: &[SubPixel]) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, &p) in points.iter().enumerate() {
            cells.entry(Self::cell(p)).or_default().push(i);
        }
        Self { cells }
    }

    fn near(&self, p: SubPixel) -> impl Iterator<Item = usize> + '_ {
        let (r, c) = Self::cell(p);
        (-1..=1)
            .flat_map(move |dr| (-1..=1).map(move |dc| (r + dr, c + dc)))
            .filter_map(|k| self.cells.get(&k))
            .flatten()
            .copied()
    }
}

/// True when two parts of the curve far apart along the arc come close in the plane.
fn self_approaches(c: &Polyline) -> bool {
    let arcs = c.arc_lengths();
    let total = c.length();
    let pts = &c.points[..c.points.len() - 1];
    let grid = PointGrid::new(pts);
    pts.iter().enumerate().any(|(i, &p)| {
        grid.near(p).any(|j| {
            let along = (arcs[j] - arcs[i]).abs();
            let along = along.min(total - along);
            along > 3.0 * MIN_SEPARATION && p.dist(pts[j]) < MIN_SEPARATION
        })
    })
}

/// True when some vertex of `a` lies closer than `MIN_SEPARATION` to a vertex of `b`.
fn too_close(a: &Polyline, b: &Polyline) -> bool {
    let grid = PointGrid::new(&b.points);
    a.points.iter().any(|&p| grid.near(p).any(|j| p.dist(b.points[j]) < MIN_SEPARATION))
}

/// Pixels whose centers lie within `radius` of any curve.
pub fn ink_mask(curves: &[Polyline], width: usize, height: usize, radius: f64) -> Vec<bool> {
    let mut ink = vec![false; width * height];
    for curve in curves {
        for w in curve.points.windows(2) {
            let lo_r = (w[0].row.min(w[1].row) - radius).floor().max(0.0) as usize;
            let hi_r = ((w[0].row.max(w[1].row) + radius).ceil() as usize).min(height - 1);
            let lo_c = (w[0].col.min(w[1].col) - radius).floor().max(0.0) as usize;
            let hi_c = ((w[0].col.max(w[1].col) + radius).ceil() as usize).min(width - 1);
            let seg = Polyline { points: vec![w[0], w[1]] };
            for r in lo_r..=hi_r {
                for c in lo_c..=hi_c {
                    if !ink[r * width + c] && seg.distance(SubPixel::new(r as f64, c as f64)) <= radius {
                        ink[r * width + c] = true;
                    }
                }
            }
        }
    }
    ink
}

/// One erased span of a truth curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub curve_index: usize,
    /// Arc-length interval `[start, start + gap_len]` that was erased.
    pub arc_start: f64,
    pub arc_end: f64,
    pub erased_pixels: usize,
    /// The curve pixels bounding the erased span, one on each side.
    pub endpoints: [PixelCoord; 2],
}

/// Arc distance from the cut to the recorded endpoint on either side.
/// Thinning eats a cut stroke end back by about its width, so the recorded
/// endpoint sits two pixels inside the remaining ink.
const ENDPOINT_INSET: f64 = 2.0;

/// Erases `n_gaps` spans of `gap_len` pixels at random arc positions.
/// Spans on one curve are kept at least `3 * gap_len` apart.
pub fn inject_gaps(
    map: &SyntheticMap,
    n_gaps: usize,
    gap_len: usize,
    seed: u64,
) -> Result<(GrayImage, Vec<GapRecord>), HarnessError> {
    if gap_len == 0 {
        return Err(HarnessError::InvalidParams("gap_len must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut image = map.image.clone();
    let mut records: Vec<GapRecord> = Vec::new();
    let len = gap_len as f64;
    let (w, h) = (image.width(), image.height());
    let lengths: Vec<f64> = map.truth_curves.iter().map(Polyline::length).collect();
    let grand_total: f64 = lengths.iter().sum();

    for _ in 0..n_gaps {
        let mut placed = None;
        for _ in 0..1000 {
            // Uniform over the combined arc length of all curves.
            let mut at = rng.random_range(0.0..grand_total);
            let mut ci = 0;
            while ci + 1 < lengths.len() && at >= lengths[ci] {
                at -= lengths[ci];
                ci += 1;
            }
            let total = lengths[ci];
            // Room for the span plus the required spacing on both sides.
            if total < 4.0 * len + 2.0 * ENDPOINT_INSET {
                continue;
            }
            let start = at;
            let closed = map.truth_curves[ci].is_closed();
            if !closed && (start < ENDPOINT_INSET + 1.0 || start + len > total - ENDPOINT_INSET - 1.0) {
                continue;
            }
            let clear = records.iter().filter(|r| r.curve_index == ci).all(|r| {
                let d = if closed {
                    let d = (start - r.arc_start).rem_euclid(total);
                    d.min(total - d)
                } else {
                    (start - r.arc_start).abs()
                };
                d - len >= 3.0 * len
            });
            if clear {
                placed = Some((ci, start));
                break;
            }
        }
        let Some((ci, start)) = placed else {
            return Err(HarnessError::InsufficientCurveLength { requested: n_gaps, gap_len });
        };
        let curve = &map.truth_curves[ci];
        let total = curve.length();
        let end = start + len;
        let in_span = |s: f64| (s - start).rem_euclid(total) <= len;
        let reach = map.stroke_radius + 2.0;
        let span_pts: Vec<SubPixel> = (0..=gap_len * 2).map(|k| curve.point_at(start + k as f64 * 0.5)).collect();
        let lo_r = span_pts.iter().map(|p| p.row).fold(f64::INFINITY, f64::min) - reach;
        let hi_r = span_pts.iter().map(|p| p.row).fold(f64::MIN, f64::max) + reach;
        let lo_c = span_pts.iter().map(|p| p.col).fold(f64::INFINITY, f64::min) - reach;
        let hi_c = span_pts.iter().map(|p| p.col).fold(f64::MIN, f64::max) + reach;
        let mut erased = 0;
        for r in (lo_r.floor().max(0.0) as usize)..=(hi_r.ceil() as usize).min(h - 1) {
            for c in (lo_c.floor().max(0.0) as usize)..=(hi_c.ceil() as usize).min(w - 1) {
                let p = SubPixel::new(r as f64, c as f64);
                let (dist, s) = curve.nearest(p);
                if dist > map.stroke_radius || !in_span(s) {
                    continue;
                }
                let shared = map
                    .truth_curves
                    .iter()
                    .enumerate()
                    .any(|(j, o)| j != ci && o.distance(p) <= map.stroke_radius);
                let px = PixelCoord::new(r, c);
                if !shared && image.get(px) == INK {
                    image.set(px, PAPER);
                    erased += 1;
                }
            }
        }
        let round = |p: SubPixel| PixelCoord::new(p.row.round() as usize, p.col.round() as usize);
        records.push(GapRecord {
            curve_index: ci,
            arc_start: start,
            arc_end: end,
            erased_pixels: erased,
            endpoints: [
                round(curve.point_at(start - ENDPOINT_INSET)),
                round(curve.point_at(end + ENDPOINT_INSET)),
            ],
        });
    }
    Ok((image, records))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalMetrics {
    /// Fraction of gaps whose two true endpoints were paired with each other.
    pub pairing_accuracy: f64,
    /// Mean over correctly paired gaps of the mean path-pixel distance to the truth curve.
    pub mean_deviation: f64,
    pub max_deviation: f64,
    /// Correctly paired gaps that received a reconnection path.
    pub gaps_closed: usize,
    pub gaps_total: usize,
}

/// Endpoint tolerance (Chebyshev pixels) when comparing pairs with records.
pub const ENDPOINT_TOLERANCE: usize = 1;

fn pair_hits(pair: &MatchPair, rec: &GapRecord) -> bool {
    let near = |a: PixelCoord, b: PixelCoord| a.chebyshev(b) <= ENDPOINT_TOLERANCE;
    let [e0, e1] = rec.endpoints;
    (near(pair.a.pos, e0) && near(pair.b.pos, e1)) || (near(pair.a.pos, e1) && near(pair.b.pos, e0))
}

/// Scores pipeline output against the gap records of one map.
pub fn evaluate(
    records: &[GapRecord],
    pairs: &[MatchPair],
    paths: &[ReconnectionPath],
    truth_curves: &[Polyline],
) -> EvalMetrics {
    let mut correct = 0;
    let mut closed = 0;
    let mut dev_sum = 0.0;
    let mut dev_max: f64 = 0.0;
    for rec in records {
        if !pairs.iter().any(|p| pair_hits(p, rec)) {
            continue;
        }
        correct += 1;
        let Some(path) = paths.iter().find(|p| pair_hits(&p.pair, rec)) else { continue };
        closed += 1;
        let curve = &truth_curves[rec.curve_index];
        let devs: Vec<f64> = path.pixels.iter().map(|&px| curve.distance(px.into())).collect();
        dev_sum += devs.iter().sum::<f64>() / devs.len().max(1) as f64;
        dev_max = devs.iter().copied().fold(dev_max, f64::max);
    }
    EvalMetrics {
        pairing_accuracy: if records.is_empty() { 1.0 } else { correct as f64 / records.len() as f64 },
        mean_deviation: if closed == 0 { 0.0 } else { dev_sum / closed as f64 },
        max_deviation: dev_max,
        gaps_closed: closed,
        gaps_total: records.len(),
    }
}

/// Pools per-map metrics in map order. Accuracy and mean deviation are
/// weighted by gap counts so the result equals scoring all gaps at once.
pub fn merge_metrics(per_map: &[EvalMetrics]) -> EvalMetrics {
    let gaps_total: usize = per_map.iter().map(|m| m.gaps_total).sum();
    let gaps_closed: usize = per_map.iter().map(|m| m.gaps_closed).sum();
    let correct: f64 = per_map.iter().map(|m| m.pairing_accuracy * m.gaps_total as f64).sum();
    let dev: f64 = per_map.iter().map(|m| m.mean_deviation * m.gaps_closed as f64).sum();
    EvalMetrics {
        pairing_accuracy: if gaps_total == 0 { 1.0 } else { correct / gaps_total as f64 },
        mean_deviation: if gaps_closed == 0 { 0.0 } else { dev / gaps_closed as f64 },
        max_deviation: per_map.iter().map(|m| m.max_deviation).fold(0.0, f64::max),
        gaps_closed,
        gaps_total,
    }
}

/// Parameters of a seeded evaluation corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub size: usize,
    pub first_seed: u64,
    pub n_maps: usize,
    pub min_contours: usize,
    pub max_contours: usize,
    pub gaps_per_map: usize,
    pub min_gap_len: usize,
    pub max_gap_len: usize,
    pub noise_density: f64,
    pub stroke_radius: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        Self {
            size: 512,
            first_seed: 1,
            n_maps: 50,
            min_contours: 2,
            max_contours: 4,
            gaps_per_map: 2,
            min_gap_len: 5,
            max_gap_len: 15,
            noise_density: NOISE_DENSITY,
            stroke_radius: DEFAULT_STROKE_RADIUS,
        }
    }
}

impl CorpusParams {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.min_contours == 0 || self.min_contours > self.max_contours {
            return Err(HarnessError::InvalidParams("contour range must be non-empty and positive".into()));
        }
        if self.min_gap_len == 0 || self.min_gap_len > self.max_gap_len {
            return Err(HarnessError::InvalidParams("gap length range must be non-empty and positive".into()));
        }
        Ok(())
    }

    /// Pipeline defaults with the global search radius set to twice the
    /// longest gap the corpus can contain.
    pub fn pipeline_config(&self) -> crate::pipeline::PipelineConfig {
        crate::pipeline::PipelineConfig { max_gap: 2.0 * self.max_gap_len as f64, ..Default::default() }
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> {
        self.first_seed..self.first_seed + self.n_maps as u64
    }
}

/// One corpus entry: the clean map, its broken copy, and the erased spans.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMap {
    pub seed: u64,
    pub params: MapParams,
    pub gap_len: usize,
    pub map: SyntheticMap,
    pub broken: GrayImage,
    pub records: Vec<GapRecord>,
}

/// Builds the corpus entry for `seed`. Contour count and gap length are
/// drawn from a stream separate from the map's own.
pub fn corpus_map(seed: u64, params: &CorpusParams) -> Result<CorpusMap, HarnessError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n_contours = rng.random_range(params.min_contours..=params.max_contours);
    let gap_len = rng.random_range(params.min_gap_len..=params.max_gap_len);
    let map_params = MapParams {
        noise_density: params.noise_density,
        stroke_radius: params.stroke_radius,
        ..MapParams::new(n_contours, params.size)
    };
    let map = generate_map_with(seed, &map_params, None)?;
    let (broken, records) = inject_gaps(&map, params.gaps_per_map, gap_len, rng.random())?;
    Ok(CorpusMap { seed, params: map_params, gap_len, map, broken, records })
}

/// Pipeline result for one corpus map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapResult {
    pub seed: u64,
    pub metrics: EvalMetrics,
    pub endpoints_before: usize,
    pub endpoints_after: usize,
    pub pairs: usize,
    pub paths_applied: usize,
}

pub fn evaluate_map(
    entry: &CorpusMap,
    cfg: &crate::pipeline::PipelineConfig,
) -> Result<MapResult, crate::error::GeometryError> {
    score_map(entry.seed, &entry.broken, &entry.records, &entry.map.truth_curves, cfg)
}

/// Runs the pipeline on a broken map and scores it against its gap records.
pub fn score_map(
    seed: u64,
    broken: &GrayImage,
    records: &[GapRecord],
    truth_curves: &[Polyline],
    cfg: &crate::pipeline::PipelineConfig,
) -> Result<MapResult, crate::error::GeometryError> {
    let out = crate::pipeline::run(broken, cfg)?;
    let metrics = evaluate(records, &out.outcome.pairs, &out.paths, truth_curves);
    Ok(MapResult {
        seed,
        metrics,
        endpoints_before: out.endpoints.len(),
        endpoints_after: out.report.endpoints_after,
        pairs: out.outcome.pairs.len(),
        paths_applied: out.paths.len(),
    })
}

/// Generates and scores every corpus map in parallel. Results come back in
/// seed order regardless of scheduling.
pub fn run_corpus(
    params: &CorpusParams,
    cfg: &crate::pipeline::PipelineConfig,
) -> Result<Vec<MapResult>, Box<dyn std::error::Error + Send + Sync>> {
    use rayon::prelude::*;
    params.validate()?;
    let seeds: Vec<u64> = params.seeds().collect();
    seeds
        .par_iter()
        .map(|&seed| -> Result<MapResult, Box<dyn std::error::Error + Send + Sync>> {
            let entry = corpus_map(seed, params)?;
            Ok(evaluate_map(&entry, cfg)?)
        })
        .collect()
}

/// One map of an on-disk corpus, as written to the JSONL manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub seed: u64,
    pub params: MapParams,
    pub gap_len: usize,
    pub image: String,
    pub broken: String,
    pub truth: String,
    pub records: Vec<GapRecord>,
}
