//! End-to-end reconstruction: threshold, median, thin, remove crossings,
//! detect and match endpoints, bridge each pair.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::matcher::{self, MatchConfig, MatchOutcome, MatchPhase, DEFAULT_MAX_GAP, DEFAULT_TIE_EPSILON, DEFAULT_WINDOW};
use crate::preprocess::{self, ThresholdReport};
use crate::raster::{BinaryImage, GrayImage, PixelCoord};
use crate::reconnect::{self, ReconnectionPath, SubPixel, DEFAULT_SAMPLE_STEP};
use crate::skeleton::{self, Endpoint, DEFAULT_TAIL_K};

pub const REPORT_VERSION: u32 = 1;

/// How the binarization threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    /// Midpoint of the occupied intensity range.
    #[default]
    Auto,
    Fixed(u8),
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMode::Auto => f.write_str("auto"),
            ThresholdMode::Fixed(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ThresholdMode::Auto);
        }
        s.parse::<u8>()
            .map(ThresholdMode::Fixed)
            .map_err(|_| format!("threshold must be `auto` or an intensity 0..=255, got `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub threshold: ThresholdMode,
    pub median_passes: usize,
    pub window: usize,
    pub max_gap: f64,
    pub tail_k: usize,
    pub sample_step: f64,
    pub tie_epsilon: f64,
    /// Include path samples and pixels in the report.
    pub dump_paths: bool,
    /// Include wall-clock stage timings in the report. Off by default since
    /// timings differ between otherwise identical runs.
    pub record_timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: ThresholdMode::Auto,
            median_passes: 1,
            window: DEFAULT_WINDOW,
            max_gap: DEFAULT_MAX_GAP,
            tail_k: DEFAULT_TAIL_K,
            sample_step: DEFAULT_SAMPLE_STEP,
            tie_epsilon: DEFAULT_TIE_EPSILON,
            dump_paths: false,
            record_timings: false,
        }
    }
}

impl PipelineConfig {
    pub fn match_config(&self) -> MatchConfig {
        MatchConfig { window: self.window, max_gap: self.max_gap, tie_epsilon: self.tie_epsilon }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        self.match_config().validate()?;
        if self.median_passes == 0 {
            return Err(GeometryError::InvalidConfig("median_passes must be positive".into()));
        }
        if self.tail_k < 2 {
            return Err(GeometryError::InvalidConfig(format!("tail_k must be at least 2, got {}", self.tail_k)));
        }
        if !(self.sample_step > 0.0 && self.sample_step.is_finite()) {
            return Err(GeometryError::InvalidConfig(format!("sample_step must be positive, got {}", self.sample_step)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdUsed {
    pub mode: String,
    pub value: u8,
    /// Occupied intensity range; absent when the threshold was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<ThresholdReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub a: PixelCoord,
    pub b: PixelCoord,
    pub distance: f64,
    pub phase: MatchPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub a: PixelCoord,
    pub b: PixelCoord,
    pub pixel_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<SubPixel>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pixels: Option<Vec<PixelCoord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

/// Everything needed to audit one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: u32,
    pub width: usize,
    pub height: usize,
    pub threshold: ThresholdUsed,
    pub median_passes: usize,
    pub window: usize,
    pub max_gap: f64,
    pub crossed_points: usize,
    pub endpoints: Vec<Endpoint>,
    pub pairs: Vec<PairReport>,
    pub unmatched: Vec<Endpoint>,
    pub all_matched: bool,
    pub paths: Vec<PathReport>,
    /// Pairs whose bridge left the image and was not drawn.
    pub rejected_paths: Vec<PairReport>,
    pub endpoints_after: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<StageTiming>>,
}

/// Intermediate rasters and the final reconstruction.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub binary: BinaryImage,
    pub denoised: BinaryImage,
    pub thinned: BinaryImage,
    /// Thinned skeleton with crossing points removed.
    pub skeleton: BinaryImage,
    pub reconstructed: BinaryImage,
    pub endpoints: Vec<Endpoint>,
    pub outcome: MatchOutcome,
    pub paths: Vec<ReconnectionPath>,
    pub report: RunReport,
}

impl PipelineOutput {
    /// Stage rasters in pipeline order, named for file dumps.
    pub fn stages(&self) -> [(&'static str, &BinaryImage); 5] {
        [
            ("binary", &self.binary),
            ("median", &self.denoised),
            ("thinned", &self.thinned),
            ("uncrossed", &self.skeleton),
            ("reconstructed", &self.reconstructed),
        ]
    }
}

struct Clock {
    enabled: bool,
    last: Instant,
    laps: Vec<StageTiming>,
}

impl Clock {
    fn lap(&mut self, stage: &str) {
        if self.enabled {
            let now = Instant::now();
            self.laps.push(StageTiming { stage: stage.into(), millis: (now - self.last).as_secs_f64() * 1e3 });
            self.last = now;
        }
    }
}

fn pair_report(a: PixelCoord, b: PixelCoord, distance: f64, phase: MatchPhase) -> PairReport {
    PairReport { a, b, distance, phase }
}

/// Runs the whole pipeline on a grayscale scan.
pub fn run(img: &GrayImage, cfg: &PipelineConfig) -> Result<PipelineOutput, GeometryError> {
    cfg.validate()?;
    let mut clock = Clock { enabled: cfg.record_timings, last: Instant::now(), laps: Vec::new() };

    let (value, spread) = match cfg.threshold {
        ThresholdMode::Fixed(m) => (m, None),
        ThresholdMode::Auto => {
            let rep = preprocess::spread_midpoint(&preprocess::histogram(img)).expect("non-empty image");
            (rep.midpoint, Some(rep))
        }
    };
    let binary = preprocess::threshold(img, value);
    clock.lap("threshold");
    let denoised = preprocess::median_filter_passes(&binary, cfg.median_passes);
    clock.lap("median");
    let thinned = skeleton::zhang_suen_thin(&denoised);
    clock.lap("thin");
    let (skel, crossed) = skeleton::remove_crossed_points(&thinned);
    clock.lap("remove_crossed");
    let positions = skeleton::detect_endpoints(&skel);
    let labels = skeleton::label_components(&skel);
    let endpoints = matcher::describe_endpoints(&skel, &positions, &labels);
    clock.lap("endpoints");
    let outcome = matcher::match_endpoints(&endpoints, &cfg.match_config())?;
    clock.lap("match");

    let (paths, rejected) = reconnect::bridge_pairs(&skel, &outcome.pairs, cfg.tail_k, cfg.sample_step)?;
    let reconstructed = reconnect::apply_reconnection(&skel, &paths)?;
    clock.lap("reconnect");
    let endpoints_after = skeleton::detect_endpoints(&reconstructed).len();

    let report = RunReport {
        version: REPORT_VERSION,
        width: img.width(),
        height: img.height(),
        threshold: ThresholdUsed { mode: cfg.threshold.to_string(), value, spread },
        median_passes: cfg.median_passes,
        window: cfg.window,
        max_gap: cfg.max_gap,
        crossed_points: crossed.len(),
        endpoints: endpoints.clone(),
        pairs: outcome.pairs.iter().map(|p| pair_report(p.a.pos, p.b.pos, p.distance, p.phase)).collect(),
        unmatched: outcome.unmatched.clone(),
        all_matched: outcome.unmatched.is_empty(),
        paths: paths
            .iter()
            .map(|p| PathReport {
                a: p.pair.a.pos,
                b: p.pair.b.pos,
                pixel_count: p.pixels.len(),
                samples: cfg.dump_paths.then(|| p.samples.clone()),
                pixels: cfg.dump_paths.then(|| p.pixels.clone()),
            })
            .collect(),
        rejected_paths: rejected.iter().map(|p| pair_report(p.a.pos, p.b.pos, p.distance, p.phase)).collect(),
        endpoints_after,
        timings: cfg.record_timings.then_some(clock.laps),
    };

    Ok(PipelineOutput {
        binary,
        denoised,
        thinned,
        skeleton: skel,
        reconstructed,
        endpoints,
        outcome,
        paths,
        report,
    })
}

pub const OVERLAY_BACKGROUND: u8 = 255;
pub const OVERLAY_INK: u8 = 80;
pub const OVERLAY_ENDPOINT: u8 = 160;
pub const OVERLAY_PATH: u8 = 0;

/// Debug overlay: original ink, then 3x3 endpoint squares, then path pixels on top.
pub fn overlay(out: &PipelineOutput) -> GrayImage {
    let (w, h) = (out.binary.width(), out.binary.height());
    let mut img = GrayImage::filled(w, h, OVERLAY_BACKGROUND).expect("non-empty");
    for p in out.binary.ink_pixels() {
        img.set(p, OVERLAY_INK);
    }
    for ep in &out.endpoints {
        for dr in -1..=1 {
            for dc in -1..=1 {
                if let Some(q) = ep.pos.offset(dr, dc, w, h) {
                    img.set(q, OVERLAY_ENDPOINT);
                }
            }
        }
    }
    for p in out.paths.iter().flat_map(|p| &p.pixels) {
        img.set(*p, OVERLAY_PATH);
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_from_ascii(rows: &[&str]) -> GrayImage {
        let bin = BinaryImage::from_ascii(rows).unwrap();
        let data = bin.data().iter().map(|&v| if v == 1 { 20 } else { 230 }).collect();
        GrayImage::from_vec(bin.width(), bin.height(), data).unwrap()
    }

    #[test]
    fn threshold_mode_parses() {
        assert_eq!("auto".parse::<ThresholdMode>().unwrap(), ThresholdMode::Auto);
        assert_eq!(" 243 ".parse::<ThresholdMode>().unwrap(), ThresholdMode::Fixed(243));
        assert!("256".parse::<ThresholdMode>().is_err());
        assert_eq!(ThresholdMode::Fixed(9).to_string(), "9");
    }

    #[test]
    fn rejects_invalid_config() {
        let img = GrayImage::filled(8, 8, 0).unwrap();
        for cfg in [
            PipelineConfig { window: 4, ..Default::default() },
            PipelineConfig { median_passes: 0, ..Default::default() },
            PipelineConfig { tail_k: 1, ..Default::default() },
            PipelineConfig { sample_step: 0.0, ..Default::default() },
        ] {
            assert!(run(&img, &cfg).is_err());
        }
    }

    #[test]
    fn bridges_a_broken_thick_bar() {
        let rows = [
            "........................",
            "........................",
            "..#######.....#######...",
            "..#######.....#######...",
            "..#######.....#######...",
            "........................",
            "........................",
        ];
        let out = run(&gray_from_ascii(&rows), &PipelineConfig::default()).unwrap();
        assert_eq!(out.report.endpoints.len(), 4);
        assert_eq!(out.report.pairs.len(), 2);
        assert!(out.report.all_matched);
        let inner = out.report.pairs.iter().min_by(|x, y| x.distance.total_cmp(&y.distance)).unwrap();
        assert!(inner.a.col < 10 && inner.b.col > 12);
        assert_eq!(skeleton::label_components(&out.reconstructed).count(), 1);
    }

    #[test]
    fn intact_ring_has_no_endpoints() {
        let rows = [
            "..........",
            "..######..",
            ".##....##.",
            ".#......#.",
            ".#......#.",
            ".##....##.",
            "..######..",
            "..........",
        ];
        let out = run(&gray_from_ascii(&rows), &PipelineConfig::default()).unwrap();
        assert!(out.report.endpoints.is_empty());
        assert!(out.report.pairs.is_empty());
        assert_eq!(out.reconstructed, out.skeleton);
    }

    #[test]
    fn overlay_layers() {
        let rows = ["..........", "..........", ".###..###.", ".###..###.", ".###..###.", "..........", ".........."];
        let out = run(&gray_from_ascii(&rows), &PipelineConfig::default()).unwrap();
        let ov = overlay(&out);
        for path in &out.paths {
            for p in &path.pixels {
                assert_eq!(ov.get(*p), OVERLAY_PATH);
            }
        }
        assert_eq!(ov.get(PixelCoord::new(0, 0)), OVERLAY_BACKGROUND);
    }
}
