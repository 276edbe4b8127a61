//! Spline machinery and gap rasterization.
//!
//! Gaps are bridged by one parametric cubic Hermite segment whose end
//! tangents come from the contour tails. A natural cubic spline solver for
//! uniformly spaced knots is also provided for multi-point fitting.

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::matcher::MatchPair;
use crate::raster::{BinaryImage, PixelCoord};
use crate::skeleton::{trace_tail, ContourTail};

pub const DEFAULT_SAMPLE_STEP: f64 = 0.5;

/// A sub-pixel position in the shared (row, col) convention.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubPixel {
    pub row: f64,
    pub col: f64,
}

impl SubPixel {
    pub const fn new(row: f64, col: f64) -> Self {
        Self { row, col }
    }

    pub fn norm(self) -> f64 {
        self.row.hypot(self.col)
    }

    pub fn dot(self, o: SubPixel) -> f64 {
        self.row * o.row + self.col * o.col
    }

    pub fn dist(self, o: SubPixel) -> f64 {
        (self - o).norm()
    }
}

impl From<PixelCoord> for SubPixel {
    fn from(p: PixelCoord) -> Self {
        Self::new(p.row as f64, p.col as f64)
    }
}

impl std::ops::Add for SubPixel {
    type Output = SubPixel;
    fn add(self, o: SubPixel) -> SubPixel {
        SubPixel::new(self.row + o.row, self.col + o.col)
    }
}

impl std::ops::Sub for SubPixel {
    type Output = SubPixel;
    fn sub(self, o: SubPixel) -> SubPixel {
        SubPixel::new(self.row - o.row, self.col - o.col)
    }
}

impl std::ops::Mul<f64> for SubPixel {
    type Output = SubPixel;
    fn mul(self, s: f64) -> SubPixel {
        SubPixel::new(self.row * s, self.col * s)
    }
}

/// One piece of a natural cubic spline on `[x, x + h]`:
/// `S(x + t) = a t^3 + b t^2 + c t + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplineSegment {
    pub x: f64,
    pub h: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Second derivatives at the left and right knots.
    pub m0: f64,
    pub m1: f64,
    /// Values at the left and right knots.
    pub y0: f64,
    pub y1: f64,
}

impl SplineSegment {
    fn from_knots(x: f64, h: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> Self {
        Self {
            x,
            h,
            a: (m1 - m0) / (6.0 * h),
            b: m0 / 2.0,
            c: (y1 - y0) / h - (m1 + 2.0 * m0) * h / 6.0,
            d: y0,
            m0,
            m1,
            y0,
            y1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.x;
        ((self.a * t + self.b) * t + self.c) * t + self.d
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let t = x - self.x;
        (3.0 * self.a * t + 2.0 * self.b) * t + self.c
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let t = x - self.x;
        6.0 * self.a * t + 2.0 * self.b
    }
}

/// Fits a natural cubic spline (zero second derivative at both ends) through
/// uniformly spaced knots.
///
/// Interior second derivatives solve
/// `M[i-1] + 4 M[i] + M[i+1] = 6 (y[i-1] - 2 y[i] + y[i+1]) / h^2`.
pub fn natural_cubic_spline(xs: &[f64], ys: &[f64]) -> Result<Vec<SplineSegment>, GeometryError> {
    let n = xs.len();
    if n != ys.len() {
        return Err(GeometryError::KnotValueMismatch { knots: n, values: ys.len() });
    }
    if n < 2 {
        return Err(GeometryError::TooFewKnots(n));
    }
    let h = xs[1] - xs[0];
    let tol = 1e-9 * h.abs().max(1.0);
    if !(h > 0.0 && h.is_finite()) || xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > tol) {
        return Err(GeometryError::NonUniformKnots);
    }
    let m = solve_second_derivatives(ys, h);
    Ok((0..n - 1)
        .map(|i| SplineSegment::from_knots(xs[i], h, ys[i], ys[i + 1], m[i], m[i + 1]))
        .collect())
}

/// Thomas algorithm on the constant (1, 4, 1) system with natural ends.
fn solve_second_derivatives(ys: &[f64], h: f64) -> Vec<f64> {
    let n = ys.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let k = n - 2;
    let rhs: Vec<f64> = (1..n - 1).map(|i| 6.0 * (ys[i - 1] - 2.0 * ys[i] + ys[i + 1]) / (h * h)).collect();
    let mut c_prime = vec![0.0; k];
    let mut d_prime = vec![0.0; k];
    c_prime[0] = 1.0 / 4.0;
    d_prime[0] = rhs[0] / 4.0;
    for i in 1..k {
        let denom = 4.0 - c_prime[i - 1];
        c_prime[i] = 1.0 / denom;
        d_prime[i] = (rhs[i] - d_prime[i - 1]) / denom;
    }
    m[k] = d_prime[k - 1];
    for i in (0..k - 1).rev() {
        m[i + 1] = d_prime[i] - c_prime[i] * m[i + 2];
    }
    m
}

/// Evaluates a fitted spline at each query point. Queries outside the knot
/// range extend the first or last segment.
pub fn spline_eval(segments: &[SplineSegment], xq: &[f64]) -> Vec<f64> {
    xq.iter()
        .map(|&x| {
            let idx = segments.partition_point(|s| s.x + s.h <= x).min(segments.len() - 1);
            segments[idx].eval(x)
        })
        .collect()
}

/// A cubic Hermite curve from `p0` to `p1` with end tangents `t0`, `t1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteSegment {
    pub p0: SubPixel,
    pub p1: SubPixel,
    pub t0: SubPixel,
    pub t1: SubPixel,
}

impl HermiteSegment {
    /// Evaluates at `u` in [0, 1].
    pub fn eval(&self, u: f64) -> Result<SubPixel, GeometryError> {
        if !(0.0..=1.0).contains(&u) {
            return Err(GeometryError::ParameterOutOfRange(u));
        }
        Ok(self.point(u))
    }

    fn point(&self, u: f64) -> SubPixel {
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        self.p0 * h00 + self.t0 * h10 + self.p1 * h01 + self.t1 * h11
    }

    /// First derivative with respect to `u`.
    pub fn derivative(&self, u: f64) -> SubPixel {
        let u2 = u * u;
        let d00 = 6.0 * u2 - 6.0 * u;
        let d10 = 3.0 * u2 - 4.0 * u + 1.0;
        let d01 = -6.0 * u2 + 6.0 * u;
        let d11 = 3.0 * u2 - 2.0 * u;
        self.p0 * d00 + self.t0 * d10 + self.p1 * d01 + self.t1 * d11
    }

    /// Samples at uniform parameter steps, refining until consecutive samples
    /// lie no more than `step` apart.
    pub fn sample(&self, step: f64) -> Vec<SubPixel> {
        let fine = (0..=64).map(|i| self.point(f64::from(i) / 64.0)).collect::<Vec<_>>();
        let approx_len: f64 = fine.windows(2).map(|w| w[0].dist(w[1])).sum();
        let mut n = ((approx_len / step).ceil() as usize).max(1);
        loop {
            let pts: Vec<SubPixel> = (0..=n).map(|i| self.point(i as f64 / n as f64)).collect();
            if pts.windows(2).all(|w| w[0].dist(w[1]) <= step) || n > 1 << 20 {
                return pts;
            }
            n *= 2;
        }
    }
}

/// The curve and pixel chain closing one matched gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconnectionPath {
    pub pair: MatchPair,
    pub samples: Vec<SubPixel>,
    pub pixels: Vec<PixelCoord>,
}

/// Unit direction pointing from the contour interior out through its endpoint,
/// fitted by least squares over the tail pixels. `None` for degenerate tails.
pub fn outward_direction(tail: &ContourTail) -> Option<SubPixel> {
    let pts: Vec<SubPixel> = tail.pixels.iter().map(|&p| p.into()).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mean = pts.iter().fold(SubPixel::default(), |acc, &p| acc + p) * (1.0 / n);
    let (mut srr, mut scc, mut src) = (0.0, 0.0, 0.0);
    for p in &pts {
        let d = *p - mean;
        srr += d.row * d.row;
        scc += d.col * d.col;
        src += d.row * d.col;
    }
    // Principal axis of the 2x2 scatter matrix.
    let theta = 0.5 * (2.0 * src).atan2(scc - srr);
    let axis = SubPixel::new(theta.sin(), theta.cos());
    let outward = pts[0] - pts[pts.len() - 1];
    let s = axis.dot(outward);
    if outward.norm() == 0.0 {
        return None;
    }
    if s.abs() < 1e-12 {
        return Some(outward * (1.0 / outward.norm()));
    }
    Some(if s > 0.0 { axis } else { axis * -1.0 })
}

/// Builds the Hermite bridge for a matched pair and rasterizes it.
///
/// Tangent magnitudes equal the chord length. A tail that yields no direction
/// falls back to the chord.
pub fn build_path(
    pair: &MatchPair,
    tail_a: &ContourTail,
    tail_b: &ContourTail,
    step: f64,
) -> Result<ReconnectionPath, GeometryError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(GeometryError::InvalidConfig(format!("sample step must be positive, got {step}")));
    }
    if tail_a.endpoint != pair.a.pos || tail_b.endpoint != pair.b.pos {
        return Err(GeometryError::InvalidConfig("tails do not belong to the pair".into()));
    }
    let p0 = SubPixel::from(pair.a.pos);
    let p1 = SubPixel::from(pair.b.pos);
    let chord = p1 - p0;
    let len = chord.norm();
    if len == 0.0 {
        return Ok(ReconnectionPath { pair: pair.clone(), samples: vec![p0], pixels: vec![pair.a.pos] });
    }
    let chord_dir = chord * (1.0 / len);
    let out_a = outward_direction(tail_a).unwrap_or(chord_dir);
    let out_b = outward_direction(tail_b).unwrap_or(chord_dir * -1.0);
    let seg = HermiteSegment { p0, p1, t0: out_a * len, t1: out_b * -len };
    let samples = seg.sample(step);
    let mut pixels = rasterize(&samples);
    // The curve interpolates integer endpoints, so rounding reproduces them;
    // pin them anyway so the contract never depends on float rounding.
    if pixels.first() != Some(&pair.a.pos) {
        pixels.insert(0, pair.a.pos);
    }
    if pixels.last() != Some(&pair.b.pos) {
        pixels.push(pair.b.pos);
    }
    Ok(ReconnectionPath { pair: pair.clone(), samples, pixels: remove_loops(pixels) })
}

/// Bridges every pair over `skeleton`. An endpoint whose tail cannot be
/// traced gets a one-pixel tail, so its end of the bridge follows the chord.
/// Bridges that leave the image are returned separately and not drawn.
pub fn bridge_pairs(
    skeleton: &BinaryImage,
    pairs: &[MatchPair],
    tail_k: usize,
    step: f64,
) -> Result<(Vec<ReconnectionPath>, Vec<MatchPair>), GeometryError> {
    let tail = |p: PixelCoord| trace_tail(skeleton, p, tail_k).unwrap_or(ContourTail { endpoint: p, pixels: vec![p] });
    let mut paths = Vec::new();
    let mut rejected = Vec::new();
    for pair in pairs {
        let path = build_path(pair, &tail(pair.a.pos), &tail(pair.b.pos), step)?;
        if path.pixels.iter().all(|p| skeleton.contains(*p)) {
            paths.push(path);
        } else {
            rejected.push(pair.clone());
        }
    }
    Ok((paths, rejected))
}

/// Drops any closed excursion so that each pixel occurs once. Adjacency is
/// kept: the pixel after a repeat was adjacent to the repeated pixel.
fn remove_loops(pixels: Vec<PixelCoord>) -> Vec<PixelCoord> {
    let mut out: Vec<PixelCoord> = Vec::with_capacity(pixels.len());
    for p in pixels {
        if let Some(i) = out.iter().position(|&q| q == p) {
            out.truncate(i + 1);
        } else {
            out.push(p);
        }
    }
    out
}

/// Rounds samples to pixels and bridges jumps so the chain is 8-connected.
/// Consecutive duplicates are dropped. Negative coordinates clamp to 0.
pub fn rasterize(samples: &[SubPixel]) -> Vec<PixelCoord> {
    let round = |p: &SubPixel| (p.row.round().max(0.0) as i64, p.col.round().max(0.0) as i64);
    let mut out: Vec<PixelCoord> = Vec::with_capacity(samples.len());
    let mut prev: Option<(i64, i64)> = None;
    for s in samples {
        let cur = round(s);
        if let Some((pr, pc)) = prev {
            let steps = (cur.0 - pr).abs().max((cur.1 - pc).abs());
            for k in 1..steps {
                let t = k as f64 / steps as f64;
                let r = (pr as f64 + (cur.0 - pr) as f64 * t).round() as usize;
                let c = (pc as f64 + (cur.1 - pc) as f64 * t).round() as usize;
                push_dedup(&mut out, PixelCoord::new(r, c));
            }
        }
        push_dedup(&mut out, PixelCoord::new(cur.0 as usize, cur.1 as usize));
        prev = Some(cur);
    }
    out
}

fn push_dedup(out: &mut Vec<PixelCoord>, p: PixelCoord) {
    if out.last() != Some(&p) {
        out.push(p);
    }
}

/// Sets every path pixel to ink. Nothing is cleared.
pub fn apply_reconnection(img: &BinaryImage, paths: &[ReconnectionPath]) -> Result<BinaryImage, GeometryError> {
    if let Some(p) = paths.iter().flat_map(|path| &path.pixels).find(|p| !img.contains(**p)) {
        return Err(GeometryError::OutOfBounds(*p));
    }
    let mut out = img.clone();
    for p in paths.iter().flat_map(|path| &path.pixels) {
        out.set(*p, true);
    }
    Ok(out)
}
