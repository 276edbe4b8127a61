use thiserror::Error;

use crate::raster::PixelCoord;

/// Construction failures for raster values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RasterError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values, dimensions require {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("intensity {value} at index {index} exceeds 255")]
    IntensityOutOfRange { index: usize, value: u32 },
    #[error("binary image value {value} at index {index} is not 0 or 1")]
    NonBinaryValue { index: usize, value: u8 },
    #[error("ascii raster rows have differing lengths")]
    RaggedRows,
}

/// Netpbm decoding failures. Each malformation has its own variant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PnmError {
    #[error("unrecognized magic number {0:?}, expected P1, P2, P4 or P5")]
    BadMagic(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("maxval {0} is not supported (must be 1..=255)")]
    UnsupportedMaxval(u32),
    #[error("pixel data truncated: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("malformed pixel data: {0}")]
    MalformedData(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Failures of the per-pixel and per-curve operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("pixel {0} lies on the image border; a 1-pixel margin is required")]
    OnBorder(PixelCoord),
    #[error("gradient is zero, direction undefined")]
    ZeroGradient,
    #[error("pixel {0} is not foreground")]
    NotForeground(PixelCoord),
    #[error("pixel {0} is not an endpoint")]
    NotEndpoint(PixelCoord),
    #[error("tail length must be at least 2, got {0}")]
    TailTooShort(usize),
    #[error("spline needs at least 2 knots, got {0}")]
    TooFewKnots(usize),
    #[error("knot and value counts differ ({knots} vs {values})")]
    KnotValueMismatch { knots: usize, values: usize },
    #[error("knots must be strictly increasing with uniform spacing")]
    NonUniformKnots,
    #[error("curve parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("path pixel {0} falls outside the image")]
    OutOfBounds(PixelCoord),
    #[error("glyph must be at least 3x3, got {width}x{height}")]
    GlyphTooSmall { width: usize, height: usize },
    #[error("glyph has no ink")]
    BlankGlyph,
    #[error("template set is empty")]
    NoTemplates,
    #[error("invalid template data: {0}")]
    BadTemplate(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Failures of synthetic corpus generation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid harness parameters: {0}")]
    InvalidParams(String),
    #[error("no usable level set found after {0} attempts")]
    LevelSetExhausted(usize),
    #[error("curves are too short to host {requested} gaps of length {gap_len}")]
    InsufficientCurveLength { requested: usize, gap_len: usize },
}
