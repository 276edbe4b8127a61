//! Raster value types shared by every stage.
//!
//! All images are row-major with `(row, col)` addressing, row 0 at the top.
//! Binary images use `1` for contour ink and `0` for background.

use serde::{Deserialize, Serialize};

use crate::error::RasterError;

/// A pixel address. Rows grow downward, columns grow to the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelCoord {
    pub row: usize,
    pub col: usize,
}

impl PixelCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Chebyshev (chessboard) distance.
    pub fn chebyshev(self, other: PixelCoord) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }

    /// True when the two pixels touch in the 8-neighborhood sense (and differ).
    pub fn is_adjacent8(self, other: PixelCoord) -> bool {
        self.chebyshev(other) == 1
    }

    /// Offsets `self` by `(dr, dc)`, returning `None` outside `[0, height) x [0, width)`.
    pub fn offset(self, dr: isize, dc: isize, width: usize, height: usize) -> Option<PixelCoord> {
        let r = self.row.checked_add_signed(dr)?;
        let c = self.col.checked_add_signed(dc)?;
        (r < height && c < width).then_some(PixelCoord::new(r, c))
    }
}

impl std::fmt::Display for PixelCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// The eight neighbor offsets `(dr, dc)` in clockwise order starting north:
/// P2 (N), P3 (NE), P4 (E), P5 (SE), P6 (S), P7 (SW), P8 (W), P9 (NW).
pub const NEIGHBORS8: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// 8-bit single-channel raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    /// Builds an image from row-major intensities.
    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    /// Builds an image from wider integer samples, rejecting anything above 255.
    pub fn from_samples(width: usize, height: usize, samples: &[u32]) -> Result<Self, RasterError> {
        check_dims(width, height, samples.len())?;
        let data = samples
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                u8::try_from(v).map_err(|_| RasterError::IntensityOutOfRange { index: i, value: v })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { width, height, data })
    }

    /// A constant image.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, RasterError> {
        check_dims(width, height, width.saturating_mul(height))?;
        Ok(Self { width, height, data: vec![value; width * height] })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, p: PixelCoord) -> u8 {
        self.data[p.row * self.width + p.col]
    }

    pub fn set(&mut self, p: PixelCoord, value: u8) {
        self.data[p.row * self.width + p.col] = value;
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        p.row < self.height && p.col < self.width
    }
}

/// A `{0,1}` raster; `1` marks contour ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    /// Builds an image from row-major values, each of which must be 0 or 1.
    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        check_dims(width, height, data.len())?;
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(RasterError::NonBinaryValue { index, value });
        }
        Ok(Self { width, height, data })
    }

    /// An all-background image.
    pub fn new(width: usize, height: usize) -> Result<Self, RasterError> {
        check_dims(width, height, width.saturating_mul(height))?;
        Ok(Self { width, height, data: vec![0; width * height] })
    }

    /// Parses rows of `#` (ink) and `.` (background). Handy for fixtures.
    pub fn from_ascii(rows: &[&str]) -> Result<Self, RasterError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut data = Vec::with_capacity(width * height);
        for row in rows {
            if row.chars().count() != width {
                return Err(RasterError::RaggedRows);
            }
            data.extend(row.chars().map(|ch| u8::from(ch == '#' || ch == '1')));
        }
        Self::from_vec(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        p.row < self.height && p.col < self.width
    }

    pub fn get(&self, p: PixelCoord) -> bool {
        self.data[p.row * self.width + p.col] == 1
    }

    /// Reads with zero padding outside the raster.
    pub fn get_padded(&self, row: isize, col: isize) -> u8 {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            0
        } else {
            self.data[row as usize * self.width + col as usize]
        }
    }

    pub fn set(&mut self, p: PixelCoord, ink: bool) {
        self.data[p.row * self.width + p.col] = u8::from(ink);
    }

    /// The eight neighbor values P2..P9 (clockwise from north), zero padded.
    pub fn neighbors(&self, p: PixelCoord) -> [u8; 8] {
        let (r, c) = (p.row as isize, p.col as isize);
        NEIGHBORS8.map(|(dr, dc)| self.get_padded(r + dr, c + dc))
    }

    /// Foreground neighbor coordinates in clockwise order from north.
    pub fn ink_neighbors(&self, p: PixelCoord) -> Vec<PixelCoord> {
        NEIGHBORS8
            .iter()
            .filter_map(|&(dr, dc)| p.offset(dr, dc, self.width, self.height))
            .filter(|&q| self.get(q))
            .collect()
    }

    pub fn count_ink(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    /// Foreground coordinates in raster order.
    pub fn ink_pixels(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(move |(i, _)| PixelCoord::new(i / w, i % w))
    }

    /// Promotes ink to 255 and background to 0, the form the gradient operator reads.
    pub fn to_gray_255(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v * 255).collect(),
        }
    }

    /// True when every ink pixel of `self` is also ink in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::EmptyDimensions { width, height });
    }
    let expected = width
        .checked_mul(height)
        .ok_or(RasterError::EmptyDimensions { width, height })?;
    if expected != len {
        return Err(RasterError::LengthMismatch { expected, actual: len });
    }
    Ok(())
}
