//! Reductions to the unit cube, to an inner cube and to one orthant.

use serde::Serialize;

use crate::constants::eta_epsilon;
use crate::convexfn::{profile::Profile, BallSpec, PLConvexFn};
use crate::geometry::{make_grid_rule, Rect};
use crate::{Error, Result};

/// `f̃(x) = B^{-1} ∏(b_i-a_i)^{1/p} f(a + (b-a)∘x)` on `[0,1]^d`, together
/// with the factor `B^{-1} ∏(b_i-a_i)^{1/p-1/q}` such that
/// `‖f̃ - g̃‖_{L^q[0,1]^d} = factor · ‖f - g‖_{L^q(I)}`.
pub fn scale_to_unit(f: &PLConvexFn, spec: &BallSpec, q: f64) -> Result<(PLConvexFn, f64)> {
    let p = match spec.p {
        crate::convexfn::Exponent::Finite(p) => p,
        crate::convexfn::Exponent::Infinite => {
            return Err(Error::InvalidArgument("scale_to_unit needs finite p".into()))
        }
    };
    let d = spec.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
    }
    let widths: Vec<f64> = spec.rect.widths().collect();
    let value_scale = widths.iter().map(|w| w.powf(1.0 / p)).product::<f64>() / spec.b;
    let factor = widths.iter().map(|w| w.powf(1.0 / p - 1.0 / q)).product::<f64>() / spec.b;
    let unit = f
        .pullback(spec.rect.lo(), &widths, Rect::unit(d))
        .scaled(value_scale);
    Ok((unit, factor))
}

/// Inner cube `[η_ε, 1-η_ε]^d` and the tolerance `ε 2^{-1/q}` left for it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReduction {
    pub eta: f64,
    pub inner: Rect,
    pub tolerance: f64,
}

/// For `φ ∈ C_p([0,1]^d, 1)` the layer `[0,1]^d ∖ [η_ε, 1-η_ε]^d` carries at
/// most `ε^q/2` of `∫|φ|^q` (Hölder), so an `ε 2^{-1/q}`-cover on the inner
/// cube, extended by zero, is an `ε`-cover of the whole cube.
pub fn reduce_boundary(d: usize, p: f64, q: f64, eps: f64) -> Result<BoundaryReduction> {
    let eta = eta_epsilon(d, p, q, eps)?;
    Ok(BoundaryReduction {
        eta,
        inner: Rect::cube(d, eta, 1.0 - eta)?,
        tolerance: eps * 2f64.powf(-1.0 / q),
    })
}

/// The `2d` disjoint slabs whose union is `[0,1]^d ∖ (η, 1-η)^d`: slab
/// `(i, side)` has axis `i` in the boundary layer, axes before `i` in
/// `[η, 1-η]` and axes after `i` unrestricted.
pub fn boundary_layer(d: usize, eta: f64) -> Vec<Rect> {
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        for (lo_i, hi_i) in [(0.0, eta), (1.0 - eta, 1.0)] {
            let mut lo = vec![0.0; d];
            let mut hi = vec![1.0; d];
            for j in 0..i {
                lo[j] = eta;
                hi[j] = 1.0 - eta;
            }
            lo[i] = lo_i;
            hi[i] = hi_i;
            out.push(Rect::new(lo, hi).expect("0 < eta < 1/2"));
        }
    }
    out
}

/// `∫_{[0,1]^d ∖ [η,1-η]^d} |f|^q`: exact for `d = 1`, midpoint rule with
/// `cells` per axis on each slab otherwise.
pub fn tail_mass(f: &PLConvexFn, eta: f64, q: f64, cells: usize) -> Result<f64> {
    let d = f.dim();
    if d == 1 {
        let prof = Profile::of(f, 0.0, 1.0);
        return Ok(prof.restrict(0.0, eta).integrate_abs_pow(q)
            + prof.restrict(1.0 - eta, 1.0).integrate_abs_pow(q));
    }
    boundary_layer(d, eta)
        .iter()
        .map(|slab| Ok(make_grid_rule(slab, cells)?.integrate(|x| f.value_at(x).abs().powf(q))))
        .sum()
}

/// The `2^d` orthants of `[η, 1-η]^d`: products of `[η, 1/2]` (bit 0) and
/// `[1/2, 1-η]` (bit 1), indexed by bitmask over axes.
pub fn symmetry_split(d: usize, eta: f64) -> Result<Vec<Rect>> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::InvalidArgument(format!("need 0 < eta < 1/2, got {eta}")));
    }
    Ok((0..1usize << d)
        .map(|mask| {
            let (lo, hi) = (0..d)
                .map(|i| if mask >> i & 1 == 0 { (eta, 0.5) } else { (0.5, 1.0 - eta) })
                .unzip();
            Rect::new(lo, hi).expect("nondegenerate orthant")
        })
        .collect())
}

/// Tolerance per orthant: `ε 2^{-d/q}`.
pub fn orthant_tolerance(eps: f64, d: usize, q: f64) -> f64 {
    eps * 2f64.powf(-(d as f64) / q)
}

/// `x ↦ f(r(x))` with `r` reflecting the axes set in `mask` through `1/2`.
/// Maps orthant `mask` onto the lower orthant `[η, 1/2]^d` and preserves
/// membership in `C_p([0,1]^d, 1)`.
pub fn reflect(f: &PLConvexFn, mask: usize) -> PLConvexFn {
    let d = f.dim();
    let offset: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { 1.0 } else { 0.0 }).collect();
    let widths: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
    f.pullback(&offset, &widths, f.domain().clone())
}
