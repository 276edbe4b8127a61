//! Reconstruction of broken contour lines in scanned raster contour maps.
//!
//! The pipeline binarizes a grayscale scan, removes salt-and-pepper noise,
//! thins contours to one-pixel skeletons, finds the endpoints of broken
//! segments, pairs them by distance and gradient direction, and bridges each
//! pair with a cubic Hermite curve rasterized back into the skeleton.
//!
//! [`harness`] builds synthetic maps with known ground truth so the
//! reconnection accuracy can be measured.

pub mod error;
pub mod glyphs;
pub mod harness;
pub mod matcher;
pub mod pipeline;
pub mod pnm;
pub mod preprocess;
pub mod raster;
pub mod reconnect;
pub mod skeleton;

pub use error::{GeometryError, HarnessError, PnmError, RasterError};
pub use harness::{EvalMetrics, GapRecord, SyntheticMap};
pub use matcher::{MatchConfig, MatchOutcome, MatchPair, MatchPhase};
pub use pipeline::{PipelineConfig, PipelineOutput, RunReport, ThresholdMode};
pub use raster::{BinaryImage, GrayImage, PixelCoord};
pub use reconnect::{HermiteSegment, ReconnectionPath, SplineSegment, SubPixel};
pub use skeleton::{ContourTail, Endpoint};
