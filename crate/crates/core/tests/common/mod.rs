//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use convex_entropy::bodies::{hull_2d, Polytope};
use convex_entropy::convexfn::{Affine, PLConvexFn};
use convex_entropy::geometry::Rect;

/// Boole's rule on `[a, b]`; exact for polynomials of degree at most 5.
pub fn boole<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let h = (b - a) / 4.0;
    2.0 * h / 45.0 * (7.0 * f(a) + 32.0 * f(a + h) + 12.0 * f(a + 2.0 * h) + 32.0 * f(a + 3.0 * h) + 7.0 * f(b))
}

/// `min_β ∫₀¹ u^{α-1}|u-β|^p du` over `β ∈ {0, 1/n, …, 1}` for integer
/// `α, p ≤ 3`, where the integrand is a polynomial on either side of `β`.
pub fn c_grid_oracle(alpha: u32, p: u32, n: usize) -> f64 {
    (0..=n)
        .map(|k| {
            let b = k as f64 / n as f64;
            let f = |u: f64| u.powi(alpha as i32 - 1) * (u - b).abs().powi(p as i32);
            boole(f, 0.0, b) + boole(f, b, 1.0)
        })
        .fold(f64::INFINITY, f64::min)
}

fn dist_to_segment(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    ((x[0] - a[0] - t * dx).powi(2) + (x[1] - a[1] - t * dy).powi(2)).sqrt()
}

/// Euclidean distance from `x` to a convex polygon given counter-clockwise.
fn dist_to_polygon(x: &[f64], hull: &[Vec<f64>]) -> f64 {
    let n = hull.len();
    let edges = (0..n).map(|i| (&hull[i], &hull[(i + 1) % n]));
    let inside = edges
        .clone()
        .all(|(a, b)| (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]) >= 0.0);
    if inside {
        return 0.0;
    }
    edges.map(|(a, b)| dist_to_segment(x, a, b)).fold(f64::INFINITY, f64::min)
}

/// Exact Hausdorff distance between convex polygons. The distance to a convex
/// set is convex, so each directed distance is attained at a vertex.
pub fn polygon_hausdorff(a: &Polytope, b: &Polytope) -> f64 {
    let ha = hull_2d(a.vertices().to_vec());
    let hb = hull_2d(b.vertices().to_vec());
    let directed = |from: &[Vec<f64>], to: &[Vec<f64>]| from.iter().map(|v| dist_to_polygon(v, to)).fold(0.0, f64::max);
    directed(&ha, &hb).max(directed(&hb, &ha))
}

/// The restriction of `f` to the first axis, provided `f` ignores the others.
pub fn first_axis_section(f: &PLConvexFn) -> Option<PLConvexFn> {
    if f.pieces().iter().any(|a| a.slope[1..].iter().any(|&s| s != 0.0)) {
        return None;
    }
    let pieces = f.pieces().iter().map(|a| Affine::new(vec![a.slope[0]], a.intercept)).collect();
    let r = f.domain();
    PLConvexFn::new(pieces, Rect::interval(r.lo()[0], r.hi()[0]).ok()?).ok()
}
