//! Convex bodies through their support functions.
//!
//! A body is stored as a finite point cloud; its support function equals
//! that of the convex hull, so no hull is needed for any computation here.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convexfn::Exponent;
use crate::geometry::{dot, norm, SphereNet};
use crate::seed::item_rng;
use crate::{Error, Result};

/// Convex hull of finitely many points in `R^d`, `d ∈ {2, 3}`.
/// Serialized as a JSON list of vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for Polytope {
    type Error = Error;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        Polytope::new(v)
    }
}

impl From<Polytope> for Vec<Vec<f64>> {
    fn from(p: Polytope) -> Self {
        p.vertices
    }
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidArgument("a body needs at least one point".into()));
        };
        let d = first.len();
        if !(2..=3).contains(&d) {
            return Err(Error::UnsupportedDimension {
                d,
                what: "convex bodies",
                supported: "d in {2, 3}",
            });
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("vertex coordinates must be finite".into()));
        }
        Ok(Polytope { vertices })
    }

    /// Regular `n`-gon inscribed in the circle of radius `r`.
    pub fn regular_polygon(n: usize, r: f64) -> Result<Self> {
        Polytope::new(
            (0..n)
                .map(|k| {
                    let t = TAU * k as f64 / n as f64;
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// `h_K(u) = max_x x·u`.
    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|x| dot(x, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, t: f64) -> Polytope {
        Polytope {
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|c| c * t).collect())
                .collect(),
        }
    }

    /// Largest Euclidean norm of a vertex.
    pub fn radius(&self) -> f64 {
        self.vertices.iter().map(|v| norm(v)).fold(0.0, f64::max)
    }
}

/// Support values of a body on a shared sphere net.
#[derive(Debug, Clone)]
pub struct SupportFn {
    net: Arc<SphereNet>,
    values: Vec<f64>,
}

impl SupportFn {
    pub fn net(&self) -> &Arc<SphereNet> {
        &self.net
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_net(&self, other: &SupportFn) -> bool {
        Arc::ptr_eq(&self.net, &other.net) || *self.net == *other.net
    }
}

pub fn support_fn(body: &Polytope, net: &Arc<SphereNet>) -> Result<SupportFn> {
    if body.dim() != net.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            got: body.dim(),
        });
    }
    Ok(SupportFn {
        net: Arc::clone(net),
        values: net.directions().map(|u| body.support(u)).collect(),
    })
}

/// `(∫ |h_K|^p dν)^{1/p}` on the net; `max |h_K|` for `p = ∞`.
pub fn kp_norm(h: &SupportFn, p: Exponent) -> f64 {
    match p {
        Exponent::Finite(p) => {
            (h.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h.net.weight()).powf(1.0 / p)
        }
        Exponent::Infinite => h.values.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// `ν({x ∈ S^{d-1} : x·v ≥ 1/2})`: the arc `|θ| ≤ π/3` (`1/3`) for `d = 2`,
/// the cap of height `1/2` (`1/4`) for `d = 3`.
pub fn cap_measure(d: usize) -> Result<f64> {
    match d {
        2 => Ok(1.0 / 3.0),
        3 => Ok(0.25),
        _ => Err(Error::UnsupportedDimension {
            d,
            what: "spherical cap measures",
            supported: "d in {2, 3}",
        }),
    }
}

/// `M = 2 ν(cap)^{-1/p}`: every body with `‖h_K‖_{L^p(ν)} ≤ R` lies in the
/// ball of radius `M R`.
pub fn inclusion_constant(d: usize, p: Exponent) -> Result<f64> {
    Ok(2.0 * cap_measure(d)?.powf(-p.recip()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    /// False when `kp_norm > R`, in which case nothing is checked.
    pub applicable: bool,
    pub kp_norm: f64,
    pub max_vertex_norm: f64,
    /// `M R`.
    pub radius_bound: f64,
    /// `max_vertex_norm / (M R)`.
    pub ratio: f64,
}

impl InclusionReport {
    pub fn violation(&self) -> bool {
        self.applicable && self.ratio > 1.0
    }
}

/// Checks `K ∈ K_p(R) ⇒ K ⊆ B(0, M R)` by scanning vertex norms.
pub fn check_inclusion(body: &Polytope, p: Exponent, r: f64, net: &Arc<SphereNet>) -> Result<InclusionReport> {
    let h = support_fn(body, net)?;
    let kp = kp_norm(&h, p);
    let radius_bound = inclusion_constant(body.dim(), p)? * r;
    let max_vertex_norm = body.radius();
    Ok(InclusionReport {
        applicable: kp <= r * (1.0 + 1e-12),
        kp_norm: kp,
        max_vertex_norm,
        radius_bound,
        ratio: max_vertex_norm / radius_bound,
    })
}

/// `n` points on the sphere of radius `r ~ U(0, 1]`, drawn from `item_rng(seed, 0)`.
/// In the plane the result is reduced to its convex hull.
pub fn random_body(d: usize, n: usize, seed: u64) -> Result<Polytope> {
    random_body_with(d, n, &mut item_rng(seed, 0))
}

pub fn random_body_with<R: Rng>(d: usize, n: usize, rng: &mut R) -> Result<Polytope> {
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension {
            d,
            what: "random bodies",
            supported: "d in {2, 3}",
        });
    }
    if n < d + 1 {
        return Err(Error::InvalidArgument(format!("need at least {} points, got {n}", d + 1)));
    }
    let r = 1.0 - rng.gen::<f64>();
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            if d == 2 {
                let t = rng.gen_range(0.0..TAU);
                vec![r * t.cos(), r * t.sin()]
            } else {
                let z: f64 = rng.gen_range(-1.0..=1.0);
                let t = rng.gen_range(0.0..TAU);
                let s = (1.0 - z * z).max(0.0).sqrt();
                vec![r * s * t.cos(), r * s * t.sin(), r * z]
            }
        })
        .collect();
    Polytope::new(if d == 2 { hull_2d(points) } else { points })
}

/// Convex hull vertices in counter-clockwise order (monotone chain).
pub fn hull_2d(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64], a: &[f64], b: &[f64]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<Vec<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec<f64>>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p.clone());
        }
        hull.pop();
    }
    hull
}

/// `2^k` polygons inscribed in the unit circle: the regular `k`-gon plus,
/// for every edge whose bit is set in the pattern, the arc midpoint above
/// that edge. Two members differing on one edge have support functions
/// `1 - cos(π/k)` apart in the direction of that midpoint, so the family is
/// a packing of `K_∞(1)` at that scale.
pub fn cap_family(k: usize) -> Result<Vec<Polytope>> {
    if !(3..=20).contains(&k) {
        return Err(Error::InvalidArgument(format!("cap family needs 3 <= k <= 20, got {k}")));
    }
    let point = |t: f64| vec![t.cos(), t.sin()];
    (0..1usize << k)
        .map(|pattern| {
            let mut v = Vec::with_capacity(2 * k);
            for j in 0..k {
                v.push(point(TAU * j as f64 / k as f64));
                if pattern >> j & 1 == 1 {
                    v.push(point(PI * (2 * j + 1) as f64 / k as f64));
                }
            }
            Polytope::new(v)
        })
        .collect()
}

/// Pairwise separation of [`cap_family`]: `1 - cos(π/k)`.
pub fn cap_family_separation(k: usize) -> f64 {
    1.0 - (PI / k as f64).cos()
}
