//! Fixtures and independent reference implementations shared by the
//! integration and acceptance tests.

#![allow(dead_code)]

use contour_mend::harness::{ink_mask, Polyline};
use contour_mend::{BinaryImage, SubPixel};

/// Ink wherever a pixel center lies within `radius` of one of the polylines.
pub fn draw(width: usize, height: usize, strokes: &[Vec<(f64, f64)>], radius: f64) -> BinaryImage {
    let curves: Vec<Polyline> = strokes
        .iter()
        .map(|s| Polyline { points: s.iter().map(|&(r, c)| SubPixel::new(r, c)).collect() })
        .collect();
    let mask = ink_mask(&curves, width, height, radius);
    BinaryImage::from_vec(width, height, mask.iter().map(|&b| u8::from(b)).collect()).unwrap()
}

fn circle(cr: f64, cc: f64, radius: f64, n: usize) -> Vec<(f64, f64)> {
    (0..=n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            (cr + radius * t.sin(), cc + radius * t.cos())
        })
        .collect()
}

/// Thick straight and bent open strokes, one component each.
pub fn bar_corpus() -> Vec<BinaryImage> {
    let mut out = Vec::new();
    for (i, width) in [1.0, 1.5, 2.0, 2.5, 3.0].into_iter().enumerate() {
        let off = i as f64;
        out.push(draw(48, 32, &[vec![(16.0, 6.0 + off), (16.0 + off, 40.0)]], width));
        out.push(draw(40, 40, &[vec![(6.0, 6.0), (20.0 + off, 18.0), (33.0, 34.0 - off)]], width));
    }
    out
}

/// Annuli of several radii and thicknesses.
pub fn ring_corpus() -> Vec<BinaryImage> {
    let mut out = Vec::new();
    for (i, (radius, width)) in [(6.0, 1.0), (8.0, 1.5), (10.0, 2.0), (12.0, 2.5), (14.0, 3.0)].into_iter().enumerate() {
        let size = (2.0 * radius + 12.0) as usize;
        let c = size as f64 / 2.0;
        out.push(draw(size, size, &[circle(c, c, radius, 96)], width));
        out.push(draw(size + 3, size, &[circle(c, c + 1.5 + i as f64 * 0.1, radius, 96)], width));
    }
    out
}

/// Plus signs, X shapes and tees.
pub fn crossing_corpus() -> Vec<BinaryImage> {
    let mut out = Vec::new();
    for width in [1.0, 1.5, 2.0, 2.5] {
        out.push(draw(40, 40, &[vec![(20.0, 4.0), (20.0, 36.0)], vec![(4.0, 20.0), (36.0, 20.0)]], width));
        out.push(draw(40, 40, &[vec![(4.0, 4.0), (36.0, 36.0)], vec![(4.0, 36.0), (36.0, 4.0)]], width));
    }
    out.push(draw(40, 40, &[vec![(8.0, 4.0), (8.0, 36.0)], vec![(8.0, 20.0), (36.0, 20.0)]], 2.0));
    out.push(draw(40, 40, &[vec![(4.0, 10.0), (36.0, 30.0)], vec![(30.0, 4.0), (10.0, 36.0)]], 1.5));
    out
}

/// The 30-image thinning corpus: bars, rings and crossing strokes.
pub fn thinning_corpus() -> Vec<BinaryImage> {
    let mut all = bar_corpus();
    all.extend(ring_corpus());
    all.extend(crossing_corpus());
    all
}

/// Zhang-Suen written directly from the textbook conditions on a padded grid.
pub fn reference_thin(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let pw = w + 2;
    let mut g = vec![0u8; pw * (h + 2)];
    for r in 0..h {
        for c in 0..w {
            g[(r + 1) * pw + c + 1] = img.data()[r * w + c];
        }
    }
    loop {
        let mut changed = false;
        for step in 0..2 {
            let snap = g.clone();
            for r in 1..=h {
                for c in 1..=w {
                    let at = |dr: isize, dc: isize| snap[((r as isize + dr) as usize) * pw + (c as isize + dc) as usize];
                    if at(0, 0) == 0 {
                        continue;
                    }
                    let p = [at(-1, 0), at(-1, 1), at(0, 1), at(1, 1), at(1, 0), at(1, -1), at(0, -1), at(-1, -1)];
                    let b: u8 = p.iter().sum();
                    let a = (0..8).filter(|&i| p[i] == 0 && p[(i + 1) % 8] == 1).count();
                    let (p2, p4, p6, p8) = (p[0], p[2], p[4], p[6]);
                    let extra = if step == 0 {
                        p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
                    } else {
                        p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
                    };
                    if (2..=6).contains(&b) && a == 1 && extra {
                        g[r * pw + c] = 0;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let data = (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).map(|(r, c)| g[(r + 1) * pw + c + 1]).collect();
    BinaryImage::from_vec(w, h, data).unwrap()
}

/// Solves the full natural-spline system, boundary rows included, by
/// Gaussian elimination with partial pivoting.
pub fn dense_second_derivatives(ys: &[f64], h: f64) -> Vec<f64> {
    let n = ys.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    a[0][0] = 1.0;
    a[n - 1][n - 1] = 1.0;
    for i in 1..n - 1 {
        a[i][i - 1] = 1.0;
        a[i][i] = 4.0;
        a[i][i + 1] = 1.0;
        a[i][n] = 6.0 * (ys[i - 1] - 2.0 * ys[i] + ys[i + 1]) / (h * h);
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        let pivot = a[col].clone();
        for (row, r) in a.iter_mut().enumerate() {
            if row != col {
                let f = r[col] / pivot[col];
                for (x, p) in r[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}
