//! Binarization by histogram-spread thresholding, followed by 3x3 median denoising.

use serde::{Deserialize, Serialize};

use crate::raster::{BinaryImage, GrayImage};

/// Pixel counts per intensity value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub bins: [u64; 256],
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// Occupied intensity range of a histogram and its midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub low: u8,
    pub high: u8,
    pub midpoint: u8,
}

pub fn histogram(img: &GrayImage) -> Histogram {
    let mut bins = [0u64; 256];
    for &v in img.data() {
        bins[v as usize] += 1;
    }
    Histogram { bins }
}

/// Midpoint of the occupied intensity spread, `floor((low + high) / 2)`.
///
/// Returns `None` for an all-zero histogram, which no valid image produces.
pub fn spread_midpoint(h: &Histogram) -> Option<ThresholdReport> {
    let low = h.bins.iter().position(|&n| n > 0)?;
    let high = h.bins.iter().rposition(|&n| n > 0)?;
    Some(ThresholdReport {
        low: low as u8,
        high: high as u8,
        midpoint: ((low + high) / 2) as u8,
    })
}

/// Pixels brighter than `m` become background; everything else is ink.
pub fn threshold(img: &GrayImage, m: u8) -> BinaryImage {
    let data = img.data().iter().map(|&v| u8::from(v <= m)).collect();
    BinaryImage::from_vec(img.width(), img.height(), data).expect("dimensions come from a valid image")
}

/// 3x3 median over a zero-padded border. On `{0,1}` data the median is 1
/// exactly when at least five of the nine window values are ink.
pub fn median_filter3(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut out = vec![0u8; w * h];
    for r in 0..h as isize {
        for c in 0..w as isize {
            let mut ones = 0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    ones += img.get_padded(r + dr, c + dc);
                }
            }
            out[r as usize * w + c as usize] = u8::from(ones >= 5);
        }
    }
    BinaryImage::from_vec(w, h, out).expect("same dimensions as input")
}

/// Applies [`median_filter3`] `passes` times.
pub fn median_filter_passes(img: &BinaryImage, passes: usize) -> BinaryImage {
    (0..passes).fold(img.clone(), |acc, _| median_filter3(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::PixelCoord;
    use proptest::prelude::*;

    /// Literal median: sort the nine padded values and take the fifth.
    fn oracle_median(img: &BinaryImage, p: PixelCoord) -> u8 {
        let mut vals = Vec::with_capacity(9);
        for dr in -1..=1isize {
            for dc in -1..=1isize {
                vals.push(img.get_padded(p.row as isize + dr, p.col as isize + dc));
            }
        }
        vals.sort_unstable();
        vals[4]
    }

    #[test]
    fn histogram_counts() {
        let img = GrayImage::from_vec(2, 2, vec![0, 0, 255, 255]).unwrap();
        let h = histogram(&img);
        assert_eq!(h.bins[0], 2);
        assert_eq!(h.bins[255], 2);
        assert_eq!(h.total(), 4);
        let img = GrayImage::filled(3, 3, 7).unwrap();
        assert_eq!(histogram(&img).bins[7], 9);
    }

    #[test]
    fn midpoint_of_full_range() {
        let img = GrayImage::from_vec(2, 1, vec![0, 255]).unwrap();
        let rep = spread_midpoint(&histogram(&img)).unwrap();
        assert_eq!(rep, ThresholdReport { low: 0, high: 255, midpoint: 127 });
    }

    #[test]
    fn midpoint_243_for_upper_band() {
        let data: Vec<u8> = (231..=255).collect();
        let img = GrayImage::from_vec(data.len(), 1, data).unwrap();
        assert_eq!(spread_midpoint(&histogram(&img)).unwrap().midpoint, 243);
    }

    #[test]
    fn single_bin_midpoint() {
        let img = GrayImage::filled(4, 4, 99).unwrap();
        let rep = spread_midpoint(&histogram(&img)).unwrap();
        assert_eq!((rep.low, rep.high, rep.midpoint), (99, 99, 99));
    }

    #[test]
    fn empty_histogram_has_no_midpoint() {
        assert!(spread_midpoint(&Histogram { bins: [0; 256] }).is_none());
    }

    #[test]
    fn threshold_boundary() {
        let img = GrayImage::from_vec(2, 1, vec![244, 243]).unwrap();
        assert_eq!(threshold(&img, 243).data(), &[0, 1]);
        let bright = GrayImage::filled(3, 2, 255).unwrap();
        assert_eq!(threshold(&bright, 254).count_ink(), 0);
    }

    #[test]
    fn median_removes_isolated_pixel() {
        let mut img = BinaryImage::new(5, 5).unwrap();
        img.set(PixelCoord::new(2, 2), true);
        assert_eq!(median_filter3(&img).count_ink(), 0);
    }

    #[test]
    fn median_keeps_center_of_solid_block() {
        let img = BinaryImage::from_ascii(&[".....", ".###.", ".###.", ".###.", "....."]).unwrap();
        let out = median_filter3(&img);
        assert!(out.get(PixelCoord::new(2, 2)));
        // Corners of the block see only four ink values.
        assert!(!out.get(PixelCoord::new(1, 1)));
    }

    #[test]
    fn median_of_constant_images() {
        let zeros = BinaryImage::new(4, 3).unwrap();
        assert_eq!(median_filter3(&zeros), zeros);
        // Zero padding erodes the border of an all-ink image, but the interior stays.
        let ones = BinaryImage::from_vec(5, 5, vec![1; 25]).unwrap();
        let out = median_filter3(&ones);
        for r in 1..4 {
            for c in 1..4 {
                assert!(out.get(PixelCoord::new(r, c)));
            }
        }
    }

    fn arb_binary() -> impl Strategy<Value = BinaryImage> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(0u8..=1, w * h)
                .prop_map(move |d| BinaryImage::from_vec(w, h, d).unwrap())
        })
    }

    fn arb_gray() -> impl Strategy<Value = GrayImage> {
        (1usize..10, 1usize..10).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h)
                .prop_map(move |d| GrayImage::from_vec(w, h, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn histogram_conserves_pixels(img in arb_gray()) {
            prop_assert_eq!(histogram(&img).total() as usize, img.width() * img.height());
        }

        #[test]
        fn threshold_is_monotone(img in arb_gray(), a in any::<u8>(), b in any::<u8>()) {
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(threshold(&img, lo).is_subset_of(&threshold(&img, hi)));
            prop_assert_eq!(threshold(&img, 255).count_ink(), img.width() * img.height());
        }

        #[test]
        fn median_matches_sorting_oracle(img in arb_binary()) {
            let out = median_filter3(&img);
            for r in 0..img.height() {
                for c in 0..img.width() {
                    let p = PixelCoord::new(r, c);
                    prop_assert_eq!(u8::from(out.get(p)), oracle_median(&img, p));
                }
            }
        }

        #[test]
        fn median_never_flips_uniform_neighborhoods(img in arb_binary()) {
            let out = median_filter3(&img);
            for r in 0..img.height() {
                for c in 0..img.width() {
                    let p = PixelCoord::new(r, c);
                    let v = u8::from(img.get(p));
                    let uniform = img.neighbors(p).iter().all(|&n| n == v);
                    if uniform {
                        prop_assert_eq!(u8::from(out.get(p)), v);
                    }
                }
            }
        }

        #[test]
        fn median_is_identity_on_its_fixed_points(img in arb_binary()) {
            let once = median_filter3(&img);
            if once == img {
                prop_assert_eq!(median_filter3(&once), once.clone());
            }
            let twice = median_filter3(&once);
            if twice == once {
                prop_assert_eq!(median_filter3(&twice), twice.clone());
            }
        }
    }
}
