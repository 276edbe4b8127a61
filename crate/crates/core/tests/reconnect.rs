mod common;

use contour_mend::reconnect::{apply_reconnection, build_path, natural_cubic_spline, rasterize, spline_eval};
use contour_mend::skeleton::{detect_endpoints, label_components, trace_tail};
use contour_mend::{
    BinaryImage, ContourTail, Endpoint, GeometryError, HermiteSegment, MatchPair, MatchPhase, PixelCoord, SubPixel,
};
use proptest::prelude::*;

fn uniform_knots(n: usize, x0: f64, h: f64) -> Vec<f64> {
    (0..n).map(|i| x0 + h * i as f64).collect()
}

#[test]
fn peak_instance_second_derivative() {
    let segs = natural_cubic_spline(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]).unwrap();
    assert_eq!(segs[0].m1, -3.0);
    assert_eq!(segs[1].m0, -3.0);
    assert_eq!((segs[0].m0, segs[1].m1), (0.0, 0.0));
    assert_eq!(spline_eval(&segs, &[0.0, 1.0, 2.0]), vec![0.0, 1.0, 0.0]);
}

#[test]
fn spline_rejects_bad_knots() {
    assert_eq!(natural_cubic_spline(&[0.0], &[1.0]), Err(GeometryError::TooFewKnots(1)));
    assert!(matches!(natural_cubic_spline(&[0.0, 1.0], &[1.0]), Err(GeometryError::KnotValueMismatch { .. })));
    assert_eq!(natural_cubic_spline(&[0.0, 1.0, 3.0], &[0.0; 3]), Err(GeometryError::NonUniformKnots));
    assert_eq!(natural_cubic_spline(&[1.0, 0.0], &[0.0; 2]), Err(GeometryError::NonUniformKnots));
}

#[test]
fn chord_aligned_tangents_give_the_chord() {
    let p0 = SubPixel::new(3.0, 4.0);
    let p1 = SubPixel::new(-7.0, 19.0);
    let chord = p1 - p0;
    let seg = HermiteSegment { p0, p1, t0: chord, t1: chord };
    for i in 0..=100 {
        let u = f64::from(i) / 100.0;
        let expected = p0 + chord * u;
        assert!(seg.eval(u).unwrap().dist(expected) < 1e-9, "u = {u}");
    }
}

#[test]
fn hermite_rejects_parameters_outside_unit_interval() {
    let seg = HermiteSegment {
        p0: SubPixel::new(0.0, 0.0),
        p1: SubPixel::new(1.0, 0.0),
        t0: SubPixel::new(0.0, 1.0),
        t1: SubPixel::new(0.0, 1.0),
    };
    assert_eq!(seg.eval(1.5), Err(GeometryError::ParameterOutOfRange(1.5)));
    assert!(seg.eval(-0.1).is_err());
}

fn endpoint_at(p: PixelCoord, id: u32) -> Endpoint {
    Endpoint { pos: p, gx: 0, gy: 0, direction: None, dir_class: None, contour_id: id }
}

#[test]
fn bridges_two_collinear_segments_straight() {
    let img = BinaryImage::from_ascii(&[
        "..........................",
        "..........................",
        "..######........#######...",
        "..........................",
        "..........................",
    ])
    .unwrap();
    let labels = label_components(&img);
    let eps = detect_endpoints(&img);
    let (a, b) = (PixelCoord::new(2, 7), PixelCoord::new(2, 16));
    assert!(eps.contains(&a) && eps.contains(&b));
    let pair = MatchPair {
        a: endpoint_at(a, labels.get(a).unwrap()),
        b: endpoint_at(b, labels.get(b).unwrap()),
        distance: 9.0,
        phase: MatchPhase::Global,
    };
    let path = build_path(&pair, &trace_tail(&img, a, 5).unwrap(), &trace_tail(&img, b, 5).unwrap(), 0.5).unwrap();
    assert_eq!(path.pixels, (7..=16).map(|c| PixelCoord::new(2, c)).collect::<Vec<_>>());
    let joined = apply_reconnection(&img, &[path]).unwrap();
    assert_eq!(label_components(&joined).count(), 1);
    assert_eq!(detect_endpoints(&joined).len(), 2);
}

#[test]
fn apply_rejects_out_of_bounds_pixels() {
    let img = BinaryImage::new(4, 4).unwrap();
    let e = endpoint_at(PixelCoord::new(0, 0), 0);
    let path = contour_mend::ReconnectionPath {
        pair: MatchPair { a: e.clone(), b: e, distance: 0.0, phase: MatchPhase::Global },
        samples: Vec::new(),
        pixels: vec![PixelCoord::new(9, 0)],
    };
    assert_eq!(apply_reconnection(&img, &[path]), Err(GeometryError::OutOfBounds(PixelCoord::new(9, 0))));
}

fn arb_values() -> impl Strategy<Value = (f64, f64, Vec<f64>)> {
    (-50.0f64..50.0, 0.1f64..5.0, proptest::collection::vec(-100.0f64..100.0, 2..=20))
}

fn arb_tail_end() -> impl Strategy<Value = (PixelCoord, Vec<PixelCoord>)> {
    // An endpoint and a short straight tail leaving it in one of eight directions.
    (20usize..80, 20usize..80, 0usize..8, 2usize..6).prop_map(|(r, c, d, k)| {
        let (dr, dc) = contour_mend::raster::NEIGHBORS8[d];
        let start = PixelCoord::new(r, c);
        let tail = (0..k)
            .map(|i| PixelCoord::new((r as isize + dr * i as isize) as usize, (c as isize + dc * i as isize) as usize))
            .collect();
        (start, tail)
    })
}

proptest! {
    #[test]
    fn spline_agrees_with_dense_solver((x0, h, ys) in arb_values()) {
        let xs = uniform_knots(ys.len(), x0, h);
        let segs = natural_cubic_spline(&xs, &ys).unwrap();
        let dense = common::dense_second_derivatives(&ys, h);
        let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs())) / (h * h);
        for (i, s) in segs.iter().enumerate() {
            prop_assert!((s.m0 - dense[i]).abs() < 1e-9 * scale);
            prop_assert!((s.m1 - dense[i + 1]).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn spline_interpolates_and_is_smooth((x0, h, ys) in arb_values()) {
        let xs = uniform_knots(ys.len(), x0, h);
        let segs = natural_cubic_spline(&xs, &ys).unwrap();
        let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
        for (i, s) in segs.iter().enumerate() {
            prop_assert!((s.eval(xs[i]) - ys[i]).abs() < 1e-9 * scale);
            prop_assert!((s.eval(xs[i + 1]) - ys[i + 1]).abs() < 1e-9 * scale);
        }
        for w in segs.windows(2) {
            let x = w[1].x;
            prop_assert!((w[0].derivative(x) - w[1].derivative(x)).abs() < 1e-9 * scale / h);
            prop_assert!((w[0].second_derivative(x) - w[1].second_derivative(x)).abs() < 1e-9 * scale / (h * h));
        }
        prop_assert!(segs[0].second_derivative(xs[0]).abs() < 1e-9 * scale / (h * h));
        let last = segs.last().unwrap();
        prop_assert!(last.second_derivative(*xs.last().unwrap()).abs() < 1e-9 * scale / (h * h));
    }

    #[test]
    fn hermite_hits_its_end_data(
        p0 in (-50.0f64..50.0, -50.0f64..50.0),
        p1 in (-50.0f64..50.0, -50.0f64..50.0),
        t0 in (-50.0f64..50.0, -50.0f64..50.0),
        t1 in (-50.0f64..50.0, -50.0f64..50.0),
    ) {
        let seg = HermiteSegment {
            p0: SubPixel::new(p0.0, p0.1),
            p1: SubPixel::new(p1.0, p1.1),
            t0: SubPixel::new(t0.0, t0.1),
            t1: SubPixel::new(t1.0, t1.1),
        };
        prop_assert!(seg.eval(0.0).unwrap().dist(seg.p0) < 1e-9);
        prop_assert!(seg.eval(1.0).unwrap().dist(seg.p1) < 1e-9);
        prop_assert!(seg.derivative(0.0).dist(seg.t0) < 1e-9);
        prop_assert!(seg.derivative(1.0).dist(seg.t1) < 1e-9);
        let samples = seg.sample(0.5);
        prop_assert!(samples.windows(2).all(|w| w[0].dist(w[1]) <= 0.5));
    }

    #[test]
    fn rasterized_chains_are_eight_connected(pts in proptest::collection::vec((0.0f64..60.0, 0.0f64..60.0), 1..12)) {
        let samples: Vec<SubPixel> = pts.iter().map(|&(r, c)| SubPixel::new(r, c)).collect();
        let px = rasterize(&samples);
        prop_assert!(!px.is_empty());
        for w in px.windows(2) {
            prop_assert!(w[0] != w[1]);
            prop_assert!(w[0].is_adjacent8(w[1]));
        }
        let round = |s: &SubPixel| PixelCoord::new(s.row.round() as usize, s.col.round() as usize);
        prop_assert_eq!(px[0], round(&samples[0]));
        prop_assert_eq!(*px.last().unwrap(), round(samples.last().unwrap()));
    }

    #[test]
    fn paths_are_simple_connected_and_pinned((a, tail_a) in arb_tail_end(), (b, tail_b) in arb_tail_end()) {
        prop_assume!(a != b);
        let (a, tail_a, b, tail_b) = if a < b { (a, tail_a, b, tail_b) } else { (b, tail_b, a, tail_a) };
        let pair = MatchPair {
            a: endpoint_at(a, 0),
            b: endpoint_at(b, 1),
            distance: contour_mend::matcher::euclidean(a, b),
            phase: MatchPhase::Global,
        };
        let path = build_path(
            &pair,
            &ContourTail { endpoint: a, pixels: tail_a },
            &ContourTail { endpoint: b, pixels: tail_b },
            0.5,
        ).unwrap();
        prop_assert_eq!(path.pixels[0], a);
        prop_assert_eq!(*path.pixels.last().unwrap(), b);
        for w in path.pixels.windows(2) {
            prop_assert!(w[0].is_adjacent8(w[1]));
        }
        let unique: std::collections::BTreeSet<_> = path.pixels.iter().collect();
        prop_assert_eq!(unique.len(), path.pixels.len());
    }
}
