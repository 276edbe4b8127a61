use contour_mend::pnm::{read_pbm, read_pgm, write_pbm, write_pgm};
use contour_mend::{BinaryImage, GrayImage, PnmError};
use proptest::prelude::*;

#[test]
fn comments_and_crlf_are_tolerated() {
    let img = read_pgm(b"P2\r\n# scanned\r\n2 1 # size\r\n255\r\n0 255\r\n").unwrap();
    assert_eq!(img.data(), &[0, 255]);
    let bin = read_pbm(b"P1\n# c\n3 1\n101\n").unwrap();
    assert_eq!(bin.data(), &[1, 0, 1]);
}

#[test]
fn lower_maxval_is_read_as_given() {
    let img = read_pgm(b"P2\n2 1\n15\n3 15\n").unwrap();
    assert_eq!(img.data(), &[3, 15]);
    assert!(matches!(read_pgm(b"P2\n1 1\n15\n16\n"), Err(PnmError::MalformedData(_)) | Err(PnmError::Raster(_))));
}

#[test]
fn wrong_magic_is_rejected() {
    assert!(matches!(read_pgm(b"P3\n1 1\n255\n0 0 0\n"), Err(PnmError::BadMagic(_))));
    assert!(matches!(read_pbm(b"P2\n1 1\n255\n0\n"), Err(PnmError::BadMagic(_))));
}

fn arb_gray() -> impl Strategy<Value = GrayImage> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h).prop_map(move |d| GrayImage::from_vec(w, h, d).unwrap())
    })
}

fn arb_binary() -> impl Strategy<Value = BinaryImage> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        proptest::collection::vec(0u8..=1, w * h).prop_map(move |d| BinaryImage::from_vec(w, h, d).unwrap())
    })
}

proptest! {
    #[test]
    fn pgm_round_trips(img in arb_gray(), ascii in any::<bool>()) {
        let bytes = write_pgm(&img, ascii);
        prop_assert_eq!(read_pgm(&bytes).unwrap(), img.clone());
        prop_assert_eq!(write_pgm(&read_pgm(&bytes).unwrap(), ascii), bytes);
    }

    #[test]
    fn pbm_round_trips(img in arb_binary(), ascii in any::<bool>()) {
        let bytes = write_pbm(&img, ascii);
        prop_assert_eq!(read_pbm(&bytes).unwrap(), img.clone());
        prop_assert_eq!(write_pbm(&read_pbm(&bytes).unwrap(), ascii), bytes);
    }

    #[test]
    fn truncated_rasters_are_errors(img in arb_gray(), cut in 1usize..8) {
        let bytes = write_pgm(&img, false);
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(read_pgm(&bytes[..keep]).is_err());
    }
}

#[test]
fn ascii_lines_stay_short() {
    let img = GrayImage::from_vec(100, 2, (0..200).map(|v| v as u8).collect()).unwrap();
    let bin = BinaryImage::from_vec(100, 2, (0..200).map(|v| (v % 3 == 0) as u8).collect()).unwrap();
    for bytes in [write_pgm(&img, true), write_pbm(&bin, true)] {
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.lines().all(|l| l.len() <= 70 && !l.ends_with(' ')));
    }
    assert_eq!(read_pgm(&write_pgm(&img, true)).unwrap(), img);
}
