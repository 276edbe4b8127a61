//! Gradient features at endpoints and endpoint pairing.
//!
//! Pairing runs in two phases. The windowed phase only considers
//! opposite-class endpoints on other components within a square window.
//! The global phase pools whatever is left and searches up to `max_gap`,
//! falling back to same-component partners when no other component offers
//! a candidate. Within a phase, rounds of mutual-nearest pairing repeat
//! until nothing changes.

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::raster::{BinaryImage, GrayImage, PixelCoord};
use crate::skeleton::{ComponentLabels, Endpoint};

const SOBEL_X: [[i32; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
const SOBEL_Y: [[i32; 3]; 3] = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];

pub const DEFAULT_WINDOW: usize = 11;
pub const DEFAULT_MAX_GAP: f64 = 80.0;
pub const DEFAULT_TIE_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchPhase {
    Windowed,
    Global,
}

/// Two endpoints judged to bound the same gap. `a.pos < b.pos` in (row, col) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub a: Endpoint,
    pub b: Endpoint,
    pub distance: f64,
    pub phase: MatchPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Side length of the square search window, odd and at least 3.
    pub window: usize,
    /// Radius of the global phase, in pixels.
    pub max_gap: f64,
    /// Distances within this much of the minimum are treated as ties.
    pub tie_epsilon: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self { window: DEFAULT_WINDOW, max_gap: DEFAULT_MAX_GAP, tie_epsilon: DEFAULT_TIE_EPSILON }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(GeometryError::InvalidConfig(format!("window must be odd and >= 3, got {}", self.window)));
        }
        if !(self.max_gap > 0.0 && self.max_gap.is_finite()) {
            return Err(GeometryError::InvalidConfig(format!("max_gap must be positive, got {}", self.max_gap)));
        }
        if !(self.tie_epsilon >= 0.0 && self.tie_epsilon.is_finite()) {
            return Err(GeometryError::InvalidConfig("tie_epsilon must be non-negative".into()));
        }
        Ok(())
    }

    pub fn radius(&self) -> usize {
        (self.window - 1) / 2
    }
}

/// Result of [`match_endpoints`]; `pairs` and `unmatched` partition the input.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub pairs: Vec<MatchPair>,
    pub unmatched: Vec<Endpoint>,
}

/// Sobel responses at an interior pixel, kernels applied as correlation.
pub fn sobel_at(img: &GrayImage, p: PixelCoord) -> Result<(i32, i32), GeometryError> {
    if p.row == 0 || p.col == 0 || p.row + 1 >= img.height() || p.col + 1 >= img.width() {
        return Err(GeometryError::OnBorder(p));
    }
    let (mut gx, mut gy) = (0, 0);
    for (i, dr) in (0..3).zip(-1isize..=1) {
        for (j, dc) in (0..3).zip(-1isize..=1) {
            let q = PixelCoord::new(p.row.wrapping_add_signed(dr), p.col.wrapping_add_signed(dc));
            let v = i32::from(img.get(q));
            gx += SOBEL_X[i][j] * v;
            gy += SOBEL_Y[i][j] * v;
        }
    }
    Ok((gx, gy))
}

/// Four-quadrant direction of `(gx, gy)` in degrees, in (-180, 180].
pub fn gradient_direction(gx: f64, gy: f64) -> Result<f64, GeometryError> {
    if gx == 0.0 && gy == 0.0 {
        return Err(GeometryError::ZeroGradient);
    }
    let deg = gy.atan2(gx).to_degrees();
    // atan2 returns -180 for (negative, -0.0); fold onto the half-open range.
    Ok(if deg <= -180.0 { deg + 360.0 } else { deg })
}

pub fn euclidean(p: PixelCoord, q: PixelCoord) -> f64 {
    let dr = p.row as f64 - q.row as f64;
    let dc = p.col as f64 - q.col as f64;
    (dr * dr + dc * dc).sqrt()
}

/// 1 for strictly positive directions, 0 otherwise.
pub fn dir_class(direction: f64) -> u8 {
    u8::from(direction > 0.0)
}

/// Attaches gradients, directions and component ids to endpoint coordinates.
/// Gradients are read from `skeleton` promoted to `{0, 255}`.
///
/// Endpoints with a vanishing gradient keep `direction = None` and never match.
pub fn describe_endpoints(skeleton: &BinaryImage, positions: &[PixelCoord], labels: &ComponentLabels) -> Vec<Endpoint> {
    let gray = skeleton.to_gray_255();
    positions
        .iter()
        .map(|&pos| {
            let (gx, gy) = sobel_at(&gray, pos).unwrap_or((0, 0));
            let direction = gradient_direction(f64::from(gx), f64::from(gy)).ok();
            Endpoint {
                pos,
                gx,
                gy,
                direction,
                dir_class: direction.map(dir_class),
                contour_id: labels.get(pos).unwrap_or(u32::MAX),
            }
        })
        .collect()
}

/// Absolute angle between two directions on the circle, in [0, 180].
fn circular_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

struct Slot<'a> {
    ep: &'a Endpoint,
    class: u8,
    direction: f64,
}

/// Pairs endpoints of opposite direction class by mutual minimum distance,
/// first inside the window and then globally.
pub fn match_endpoints(endpoints: &[Endpoint], cfg: &MatchConfig) -> Result<MatchOutcome, GeometryError> {
    cfg.validate()?;
    // Canonical order makes the outcome independent of input order.
    let mut order: Vec<&Endpoint> = endpoints.iter().collect();
    order.sort_by(|x, y| {
        x.pos
            .cmp(&y.pos)
            .then(x.contour_id.cmp(&y.contour_id))
            .then(x.direction.partial_cmp(&y.direction).unwrap_or(std::cmp::Ordering::Equal))
    });

    let mut undirected = Vec::new();
    let mut slots = Vec::new();
    for ep in order {
        match (ep.direction, ep.dir_class) {
            (Some(direction), Some(class)) => slots.push(Slot { ep, class, direction }),
            _ => undirected.push(ep.clone()),
        }
    }

    let mut partner: Vec<Option<(usize, MatchPhase)>> = vec![None; slots.len()];
    for phase in [MatchPhase::Windowed, MatchPhase::Global] {
        loop {
            let best: Vec<Option<usize>> =
                (0..slots.len()).map(|i| best_candidate(&slots, &partner, i, phase, cfg)).collect();
            let mut paired_any = false;
            for i in 0..slots.len() {
                if let Some(j) = best[i] {
                    if i < j && best[j] == Some(i) {
                        partner[i] = Some((j, phase));
                        partner[j] = Some((i, phase));
                        paired_any = true;
                    }
                }
            }
            if !paired_any {
                break;
            }
        }
    }

    let mut out = MatchOutcome::default();
    for (i, slot) in slots.iter().enumerate() {
        match partner[i] {
            Some((j, phase)) if i < j => {
                let (a, b) = (slot.ep.clone(), slots[j].ep.clone());
                out.pairs.push(MatchPair { distance: euclidean(a.pos, b.pos), a, b, phase });
            }
            Some(_) => {}
            None => out.unmatched.push(slot.ep.clone()),
        }
    }
    out.unmatched.extend(undirected);
    out.unmatched.sort_by_key(|e| e.pos);
    Ok(out)
}

fn best_candidate(
    slots: &[Slot<'_>],
    partner: &[Option<(usize, MatchPhase)>],
    i: usize,
    phase: MatchPhase,
    cfg: &MatchConfig,
) -> Option<usize> {
    if partner[i].is_some() {
        return None;
    }
    let me = &slots[i];
    let eligible = |j: usize, same_contour: bool| {
        let other = &slots[j];
        j != i
            && partner[j].is_none()
            && other.class != me.class
            && (other.ep.contour_id == me.ep.contour_id) == same_contour
            && match phase {
                MatchPhase::Windowed => me.ep.pos.chebyshev(other.ep.pos) <= cfg.radius(),
                MatchPhase::Global => euclidean(me.ep.pos, other.ep.pos) <= cfg.max_gap,
            }
    };
    let mut cands: Vec<usize> = (0..slots.len()).filter(|&j| eligible(j, false)).collect();
    if cands.is_empty() && phase == MatchPhase::Global {
        cands = (0..slots.len()).filter(|&j| eligible(j, true)).collect();
    }
    let min = cands
        .iter()
        .map(|&j| euclidean(me.ep.pos, slots[j].ep.pos))
        .fold(f64::INFINITY, f64::min);
    cands
        .into_iter()
        .filter(|&j| euclidean(me.ep.pos, slots[j].ep.pos) <= min + cfg.tie_epsilon)
        .min_by(|&x, &y| {
            let ax = (circular_diff(me.direction, slots[x].direction) - 180.0).abs();
            let ay = (circular_diff(me.direction, slots[y].direction) - 180.0).abs();
            ax.total_cmp(&ay).then(slots[x].ep.pos.cmp(&slots[y].ep.pos))
        })
}
