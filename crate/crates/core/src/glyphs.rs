//! Zoning features for isolated digit glyphs and nearest-template classification.
//!
//! A glyph's bounding box is cut into a 3x3 grid, zones numbered 1..9 in
//! row-major order. Zone borders sit at exact thirds of the box; a pixel
//! straddling a border contributes to each zone in proportion to the area
//! that falls inside it. For sides divisible by three this is plain pixel
//! counting, and for any size the profile is unchanged by integer upscaling.

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::raster::{BinaryImage, PixelCoord};

/// Per-zone ink area in pixels. Index 0 holds zone 1, index 4 the center zone 5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneProfile {
    pub counts: [f64; 9],
    pub normalized: [f64; 9],
}

impl ZoneProfile {
    fn from_counts(counts: [f64; 9]) -> Self {
        let total: f64 = counts.iter().sum();
        let normalized = if total == 0.0 { [0.0; 9] } else { counts.map(|c| c / total) };
        Self { counts, normalized }
    }

    /// Count for a 1-based zone number.
    pub fn zone(&self, zone: usize) -> f64 {
        self.counts[zone - 1]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitTemplate {
    pub digit: u8,
    pub normalized: [f64; 9],
}

/// Length of `[a0, a1)` that falls inside `[b0, b1)`.
fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Fraction of unit cell `i` lying in each third of an axis of length `n`.
fn third_weights(i: usize, n: usize) -> [f64; 3] {
    let third = n as f64 / 3.0;
    let lo = i as f64;
    [0, 1, 2].map(|z| overlap(lo, lo + 1.0, z as f64 * third, (z + 1) as f64 * third))
}

pub fn zone_features(glyph: &BinaryImage) -> Result<ZoneProfile, GeometryError> {
    let (w, h) = (glyph.width(), glyph.height());
    if w < 3 || h < 3 {
        return Err(GeometryError::GlyphTooSmall { width: w, height: h });
    }
    let mut counts = [0.0; 9];
    for p in glyph.ink_pixels() {
        let rw = third_weights(p.row, h);
        let cw = third_weights(p.col, w);
        for zr in 0..3 {
            for zc in 0..3 {
                counts[zr * 3 + zc] += rw[zr] * cw[zc];
            }
        }
    }
    Ok(ZoneProfile::from_counts(counts))
}

/// Returns the closest template digit by L1 distance over normalized
/// profiles, ties going to the smaller digit.
pub fn classify_digit(profile: &ZoneProfile, templates: &[DigitTemplate]) -> Result<(u8, f64), GeometryError> {
    if profile.total() == 0.0 {
        return Err(GeometryError::BlankGlyph);
    }
    let mut best: Option<(u8, f64)> = None;
    for t in templates {
        let score: f64 = profile.normalized.iter().zip(&t.normalized).map(|(a, b)| (a - b).abs()).sum();
        best = match best {
            Some((d, s)) if s < score || (s == score && d < t.digit) => Some((d, s)),
            _ => Some((t.digit, score)),
        };
    }
    best.ok_or(GeometryError::NoTemplates)
}

/// Crops to the tight bounding box of the ink. `None` for blank input.
pub fn crop_to_ink(img: &BinaryImage) -> Option<BinaryImage> {
    let mut it = img.ink_pixels();
    let first = it.next()?;
    let (mut r0, mut r1, mut c0, mut c1) = (first.row, first.row, first.col, first.col);
    for p in it {
        r0 = r0.min(p.row);
        r1 = r1.max(p.row);
        c0 = c0.min(p.col);
        c1 = c1.max(p.col);
    }
    let (w, h) = (c1 - c0 + 1, r1 - r0 + 1);
    let mut data = Vec::with_capacity(w * h);
    for r in r0..=r1 {
        for c in c0..=c1 {
            data.push(u8::from(img.get(PixelCoord::new(r, c))));
        }
    }
    BinaryImage::from_vec(w, h, data).ok()
}

/// Nearest-neighbor upscaling by an integer factor.
pub fn upscale(img: &BinaryImage, factor: usize) -> BinaryImage {
    let (w, h) = (img.width() * factor, img.height() * factor);
    let mut data = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            data.push(u8::from(img.get(PixelCoord::new(r / factor, c / factor))));
        }
    }
    BinaryImage::from_vec(w, h, data).expect("scaled dimensions are consistent")
}

const FONT_5X7: [[&str; 7]; 10] = [
    [".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."],
    ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."],
    [".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"],
    ["#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."],
    ["...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."],
    ["#####", "#....", "####.", "....#", "....#", "#...#", ".###."],
    ["..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."],
    ["#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."],
    [".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."],
    [".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."],
];

/// The built-in 5x7 bitmap for a digit, cropped to its ink.
pub fn font_glyph(digit: u8) -> BinaryImage {
    let full = BinaryImage::from_ascii(&FONT_5X7[digit as usize]).expect("font rows are well formed");
    crop_to_ink(&full).expect("every font glyph has ink")
}

/// Templates derived from the built-in font, one per digit.
pub fn builtin_templates() -> Vec<DigitTemplate> {
    (0..10)
        .map(|digit| DigitTemplate {
            digit,
            normalized: zone_features(&font_glyph(digit)).expect("font glyphs exceed 3x3").normalized,
        })
        .collect()
}

/// Parses a template file: one row per digit, the digit followed by nine
/// non-negative numbers (an optional `:` may follow the digit). Rows are
/// normalized to sum to one. Blank lines and `#` comments are ignored.
pub fn parse_templates(text: &str) -> Result<Vec<DigitTemplate>, GeometryError> {
    let mut out: Vec<DigitTemplate> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| GeometryError::BadTemplate(format!("line {}: {msg}", lineno + 1));
        let line = line.replacen(':', " ", 1);
        let mut fields = line.split_whitespace();
        let digit: u8 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .filter(|d| *d <= 9)
            .ok_or_else(|| bad("expected a digit 0-9"))?;
        let values: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map_err(|_| bad("non-numeric zone value")))
            .collect::<Result<_, _>>()?;
        if values.len() != 9 {
            return Err(bad("expected nine zone values"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(bad("zone values must be non-negative"));
        }
        let sum: f64 = values.iter().sum();
        if sum <= 0.0 {
            return Err(bad("zone values sum to zero"));
        }
        if out.iter().any(|t| t.digit == digit) {
            return Err(bad("duplicate digit"));
        }
        let mut normalized = [0.0; 9];
        for (slot, v) in normalized.iter_mut().zip(&values) {
            *slot = v / sum;
        }
        out.push(DigitTemplate { digit, normalized });
    }
    if out.is_empty() {
        return Err(GeometryError::NoTemplates);
    }
    out.sort_by_key(|t| t.digit);
    Ok(out)
}
