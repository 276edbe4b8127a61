//! Netpbm codecs: PGM (P2/P5) for grayscale and PBM (P1/P4) for binary rasters.
//!
//! PBM stores 1 as black, which is the ink convention used throughout, so
//! no inversion happens on either path. PGM samples are kept verbatim;
//! maxval is validated but never used to rescale.

use crate::error::PnmError;
use crate::raster::{BinaryImage, GrayImage};

/// Decodes a P2 or P5 stream.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.magic()?;
    if magic != "P2" && magic != "P5" {
        return Err(PnmError::BadMagic(magic));
    }
    let width = cur.header_uint("width")?;
    let height = cur.header_uint("height")?;
    let maxval = cur.header_uint("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(PnmError::UnsupportedMaxval(maxval));
    }
    let (width, height) = (width as usize, height as usize);
    let expected = checked_area(width, height)?;
    let data = if magic == "P2" {
        let mut data = Vec::with_capacity(expected);
        for found in 0..expected {
            let v = cur.ascii_uint()?.ok_or(PnmError::Truncated { expected, found })?;
            if v > maxval {
                return Err(PnmError::MalformedData(format!("sample {v} exceeds maxval {maxval}")));
            }
            data.push(v as u8);
        }
        data
    } else {
        cur.single_whitespace()?;
        let body = cur.rest();
        if body.len() < expected {
            return Err(PnmError::Truncated { expected, found: body.len() });
        }
        let data = body[..expected].to_vec();
        if let Some(&v) = data.iter().find(|&&v| u32::from(v) > maxval) {
            return Err(PnmError::MalformedData(format!("sample {v} exceeds maxval {maxval}")));
        }
        data
    };
    Ok(GrayImage::from_vec(width, height, data)?)
}

/// Encodes as P2 (`ascii = true`) or P5, always with maxval 255 and LF line endings.
pub fn write_pgm(img: &GrayImage, ascii: bool) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    if ascii {
        let mut out = format!("P2\n{w} {h}\n255\n").into_bytes();
        push_ascii_rows(&mut out, img.data(), w, |v, buf| {
            let mut n = v;
            let start = buf.len();
            loop {
                buf.push(b'0' + n % 10);
                n /= 10;
                if n == 0 {
                    break;
                }
            }
            buf[start..].reverse();
        });
        out
    } else {
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        out.extend_from_slice(img.data());
        out
    }
}

/// Longest text line the ASCII encoders emit.
const MAX_LINE: usize = 70;

/// Writes samples separated by spaces, one raster row per line, wrapping
/// rows that would run past `MAX_LINE` characters.
fn push_ascii_rows(out: &mut Vec<u8>, data: &[u8], width: usize, token: impl Fn(u8, &mut Vec<u8>)) {
    let mut buf = Vec::with_capacity(3);
    for row in data.chunks(width) {
        let mut line_len = 0;
        for &v in row {
            buf.clear();
            token(v, &mut buf);
            if line_len > 0 {
                if line_len + 1 + buf.len() > MAX_LINE {
                    out.push(b'\n');
                    line_len = 0;
                } else {
                    out.push(b' ');
                    line_len += 1;
                }
            }
            out.extend_from_slice(&buf);
            line_len += buf.len();
        }
        out.push(b'\n');
    }
}

/// Decodes a P1 or P4 stream. Black (1) becomes ink.
pub fn read_pbm(bytes: &[u8]) -> Result<BinaryImage, PnmError> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.magic()?;
    if magic != "P1" && magic != "P4" {
        return Err(PnmError::BadMagic(magic));
    }
    let width = cur.header_uint("width")? as usize;
    let height = cur.header_uint("height")? as usize;
    let expected = checked_area(width, height)?;
    let data = if magic == "P1" {
        let mut data = Vec::with_capacity(expected);
        for found in 0..expected {
            match cur.ascii_bit()? {
                Some(b) => data.push(b),
                None => return Err(PnmError::Truncated { expected, found }),
            }
        }
        data
    } else {
        cur.single_whitespace()?;
        let stride = width.div_ceil(8);
        let body = cur.rest();
        let needed = stride * height;
        if body.len() < needed {
            // Report in samples so the diagnostic matches the P1 path.
            let found = (body.len() / stride) * width + (body.len() % stride * 8).min(width);
            return Err(PnmError::Truncated { expected, found });
        }
        let mut data = Vec::with_capacity(expected);
        for row in body[..needed].chunks(stride) {
            for col in 0..width {
                data.push((row[col / 8] >> (7 - col % 8)) & 1);
            }
        }
        data
    };
    Ok(BinaryImage::from_vec(width, height, data)?)
}

/// Encodes as P1 (`ascii = true`) or P4.
pub fn write_pbm(img: &BinaryImage, ascii: bool) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    if ascii {
        let mut out = format!("P1\n{w} {h}\n").into_bytes();
        push_ascii_rows(&mut out, img.data(), w, |v, buf| buf.push(b'0' + v));
        out
    } else {
        let mut out = format!("P4\n{w} {h}\n").into_bytes();
        let stride = w.div_ceil(8);
        for row in img.data().chunks(w) {
            let mut packed = vec![0u8; stride];
            for (col, &v) in row.iter().enumerate() {
                packed[col / 8] |= v << (7 - col % 8);
            }
            out.extend_from_slice(&packed);
        }
        out
    }
}

fn checked_area(width: usize, height: usize) -> Result<usize, PnmError> {
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    width
        .checked_mul(height)
        .ok_or_else(|| PnmError::MalformedHeader("dimensions overflow".into()))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }

    fn magic(&mut self) -> Result<String, PnmError> {
        let m = self.bytes.get(..2).ok_or_else(|| PnmError::MalformedHeader("missing magic".into()))?;
        self.pos = 2;
        Ok(String::from_utf8_lossy(m).into_owned())
    }

    /// Skips whitespace and `#` comments (comments run to end of line).
    fn skip_ws_and_comments(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn header_uint(&mut self, field: &str) -> Result<u32, PnmError> {
        if !self.peek().is_some_and(|b| b.is_ascii_whitespace() || b == b'#') {
            return Err(PnmError::MalformedHeader(format!("expected whitespace before {field}")));
        }
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PnmError::MalformedHeader(format!("missing or non-numeric {field}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PnmError::MalformedHeader(format!("{field} out of range")))
    }

    /// The single whitespace byte separating a binary header from its raster.
    fn single_whitespace(&mut self) -> Result<(), PnmError> {
        match self.peek() {
            // CRLF after the header is tolerated.
            Some(b'\r') if self.bytes.get(self.pos + 1) == Some(&b'\n') => {
                self.pos += 2;
                Ok(())
            }
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(PnmError::MalformedHeader("expected whitespace before raster".into())),
            None => Err(PnmError::Truncated { expected: 1, found: 0 }),
        }
    }

    fn ascii_uint(&mut self) -> Result<Option<u32>, PnmError> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.peek() {
                None => Ok(None),
                Some(b) => Err(PnmError::MalformedData(format!("unexpected byte 0x{b:02x}"))),
            };
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map(Some)
            .ok_or_else(|| PnmError::MalformedData("sample out of range".into()))
    }

    /// P1 samples may be packed without separators, so read one digit at a time.
    fn ascii_bit(&mut self) -> Result<Option<u8>, PnmError> {
        self.skip_ws_and_comments();
        match self.peek() {
            None => Ok(None),
            Some(b @ (b'0' | b'1')) => {
                self.pos += 1;
                Ok(Some(b - b'0'))
            }
            Some(b) => Err(PnmError::MalformedData(format!("unexpected byte 0x{b:02x} in P1 raster"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_ascii_pgm() {
        let img = read_pgm(b"P2\n2 1\n255\n0 255\n").unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.data(), &[0, 255]);
    }

    #[test]
    fn binary_and_ascii_pgm_agree() {
        let ascii = read_pgm(b"P2\n2 1\n255\n0 255\n").unwrap();
        let binary = read_pgm(b"P5\n2 1\n255\n\x00\xff").unwrap();
        assert_eq!(ascii, binary);
    }

    #[test]
    fn tolerates_comments_and_crlf() {
        let img = read_pgm(b"P2\r\n# scanner output\r\n2 1 # size\r\n255\r\n7 9\r\n").unwrap();
        assert_eq!(img.data(), &[7, 9]);
        let img = read_pgm(b"P5\r\n1 1\r\n255\r\n\x2a").unwrap();
        assert_eq!(img.data(), &[42]);
    }

    #[test]
    fn truncated_pgm_is_rejected() {
        let err = read_pgm(b"P2\n2 2\n255\n1 2 3\n").unwrap_err();
        assert_eq!(err, PnmError::Truncated { expected: 4, found: 3 });
        let err = read_pgm(b"P5\n2 2\n255\n\x01\x02\x03").unwrap_err();
        assert_eq!(err, PnmError::Truncated { expected: 4, found: 3 });
    }

    #[test]
    fn malformed_header_and_maxval_have_distinct_diagnostics() {
        assert!(matches!(read_pgm(b"P2\nx 1\n255\n0\n"), Err(PnmError::MalformedHeader(_))));
        assert!(matches!(read_pgm(b"P2\n1 1\n65535\n0\n"), Err(PnmError::UnsupportedMaxval(65535))));
        assert!(matches!(read_pgm(b"P3\n1 1\n255\n0 0 0\n"), Err(PnmError::BadMagic(_))));
        assert!(matches!(read_pgm(b"P2\n1 1\n15\n16\n"), Err(PnmError::MalformedData(_))));
        assert!(matches!(read_pgm(b"P2\n0 1\n255\n"), Err(PnmError::MalformedHeader(_))));
    }

    #[test]
    fn writes_ascii_pgm() {
        let img = GrayImage::from_vec(1, 1, vec![128]).unwrap();
        assert_eq!(write_pgm(&img, true), b"P2\n1 1\n255\n128\n");
    }

    #[test]
    fn writes_ascii_pbm() {
        let img = BinaryImage::from_vec(1, 2, vec![1, 0]).unwrap();
        assert_eq!(write_pbm(&img, true), b"P1\n1 2\n1\n0\n");
    }

    #[test]
    fn reads_packed_p1_digits() {
        let img = read_pbm(b"P1\n3 2\n101\n010\n").unwrap();
        assert_eq!(img.data(), &[1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn p4_rows_are_byte_padded() {
        let img = BinaryImage::from_ascii(&["#........#", ".#.......#"]).unwrap();
        let bytes = write_pbm(&img, false);
        assert_eq!(&bytes[bytes.len() - 4..], &[0b1000_0000, 0b0100_0000, 0b0100_0000, 0b0100_0000]);
        assert_eq!(read_pbm(&bytes).unwrap(), img);
    }

    #[test]
    fn truncated_pbm_is_rejected() {
        assert_eq!(read_pbm(b"P1\n2 2\n1 0 1\n").unwrap_err(), PnmError::Truncated { expected: 4, found: 3 });
        assert!(matches!(read_pbm(b"P4\n9 2\n\xff\xff\xff"), Err(PnmError::Truncated { .. })));
        assert!(matches!(read_pbm(b"P1\n1 1\n2\n"), Err(PnmError::MalformedData(_))));
    }
}
