//! Rectangles, midpoint tensor rules and sphere nets.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Slack used when testing whether a point lies in a closed rectangle.
const CONTAINS_RTOL: f64 = 1e-12;

/// Axis-aligned box `∏ [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RectRepr", into = "RectRepr")]
pub struct Rect {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RectRepr {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl TryFrom<RectRepr> for Rect {
    type Error = Error;
    fn try_from(r: RectRepr) -> Result<Self> {
        Rect::new(r.lo, r.hi)
    }
}

impl From<Rect> for RectRepr {
    fn from(r: Rect) -> Self {
        RectRepr { lo: r.lo, hi: r.hi }
    }
}

impl Rect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidArgument("rectangle needs at least one axis".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidArgument(format!(
                    "axis {i}: need finite lo < hi, got [{a}, {b}]"
                )));
            }
        }
        Ok(Rect { lo, hi })
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Rect::new(vec![lo; d], vec![hi; d])
    }

    pub fn unit(d: usize) -> Self {
        Rect::cube(d, 0.0, 1.0).expect("unit cube is valid")
    }

    /// One-dimensional interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Rect::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a)
    }

    pub fn volume(&self) -> f64 {
        self.widths().product()
    }

    fn slack(&self, i: usize) -> f64 {
        CONTAINS_RTOL * (1.0 + self.lo[i].abs().max(self.hi[i].abs()))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, &xi)| {
                let s = self.slack(i);
                xi >= self.lo[i] - s && xi <= self.hi[i] + s
            })
    }

    /// True when `other` lies inside `self` (up to rounding slack).
    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.dim() == other.dim() && self.contains(&other.lo) && self.contains(&other.hi)
    }

    /// The 2^d corners, in binary order of the axis choices.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                    .collect()
            })
            .collect()
    }

    /// Affine image `lo + (hi - lo) ∘ t` of a point of the unit cube.
    pub fn from_unit(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .enumerate()
            .map(|(i, ti)| self.lo[i] + (self.hi[i] - self.lo[i]) * ti)
            .collect()
    }
}

/// Tensor midpoint rule on a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    rect: Rect,
    cells_per_axis: usize,
    points: Vec<f64>,
    weight: f64,
}

impl QuadratureRule {
    pub fn rect(&self) -> &Rect {
        &self.rect
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.rect.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every node carries the same weight, the cell volume.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn node(&self, k: usize) -> &[f64] {
        let d = self.rect.dim();
        &self.points[k * d..(k + 1) * d]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.rect.dim())
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes().map(&f).sum::<f64>() * self.weight
    }
}

/// Tensor midpoint rule with `n^d` equal cells.
pub fn make_grid_rule(rect: &Rect, n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("cells per axis must be at least 1".into()));
    }
    let d = rect.dim();
    let total = n
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidArgument(format!("{n}^{d} nodes overflow")))?;
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let (a, b) = (rect.lo[i], rect.hi[i]);
            let h = (b - a) / n as f64;
            (0..n).map(|j| a + (j as f64 + 0.5) * h).collect()
        })
        .collect();
    let mut points = Vec::with_capacity(total * d);
    for k in 0..total {
        let mut rem = k;
        for axis in &axes {
            points.push(axis[rem % n]);
            rem /= n;
        }
    }
    Ok(QuadratureRule {
        rect: rect.clone(),
        cells_per_axis: n,
        points,
        weight: rect.volume() / total as f64,
    })
}

/// Equal-weight discretization of the uniform probability measure on `S^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereNet {
    dim: usize,
    directions: Vec<f64>,
}

impl SphereNet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.directions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn direction(&self, k: usize) -> &[f64] {
        &self.directions[k * self.dim..(k + 1) * self.dim]
    }

    pub fn directions(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.directions.chunks_exact(self.dim)
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    /// Weighted mean of `h` over the net, approximating `∫ h dν`.
    pub fn mean<F: Fn(&[f64]) -> f64>(&self, h: F) -> f64 {
        self.directions().map(&h).sum::<f64>() * self.weight()
    }
}

/// Sphere net of the given resolution: equally spaced angles for `d = 2`,
/// a Fibonacci spiral for `d = 3`.
pub fn make_sphere_net(d: usize, resolution: usize) -> Result<SphereNet> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("sphere net resolution must be positive".into()));
    }
    let mut directions = Vec::with_capacity(d * resolution);
    match d {
        2 => {
            for k in 0..resolution {
                let theta = std::f64::consts::TAU * k as f64 / resolution as f64;
                directions.extend([theta.cos(), theta.sin()]);
            }
        }
        3 => {
            let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for k in 0..resolution {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / resolution as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden_angle * k as f64;
                let v = [r * phi.cos(), r * phi.sin(), z];
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                directions.extend(v.iter().map(|c| c / norm));
            }
        }
        _ => {
            return Err(Error::UnsupportedDimension {
                d,
                what: "sphere nets",
                supported: "d in {2, 3}",
            })
        }
    }
    Ok(SphereNet { dim: d, directions })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
