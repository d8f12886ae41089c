//! `L^q` pseudometrics on rectangles, support-function sup distances and
//! pairwise distance matrices.

use rayon::prelude::*;
use serde::Serialize;

use crate::bodies::SupportFn;
use crate::convexfn::profile::Profile;
use crate::convexfn::{Exponent, PLConvexFn};
use crate::geometry::{make_grid_rule, QuadratureRule, Rect};
use crate::{Error, Result};

/// How integrals over a rectangle are computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Integrator {
    /// Exact kink-partitioned integration on an interval.
    Exact1d(Rect),
    /// Tensor midpoint rule.
    Grid(QuadratureRule),
}

/// Which integration path produced a number; recorded in experiment outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationPath {
    Exact1d,
    Grid,
}

impl Integrator {
    /// Exact path on intervals, a midpoint rule with `cells` per axis otherwise.
    pub fn new(rect: &Rect, cells: usize) -> Result<Self> {
        if rect.dim() == 1 {
            Ok(Integrator::Exact1d(rect.clone()))
        } else {
            Self::grid(rect, cells)
        }
    }

    /// Midpoint rule regardless of dimension.
    pub fn grid(rect: &Rect, cells: usize) -> Result<Self> {
        Ok(Integrator::Grid(make_grid_rule(rect, cells)?))
    }

    pub fn rect(&self) -> &Rect {
        match self {
            Integrator::Exact1d(r) => r,
            Integrator::Grid(rule) => rule.rect(),
        }
    }

    pub fn path(&self) -> IntegrationPath {
        match self {
            Integrator::Exact1d(_) => IntegrationPath::Exact1d,
            Integrator::Grid(_) => IntegrationPath::Grid,
        }
    }
}

/// What a metric needs to know about one function.
#[derive(Debug, Clone)]
pub enum Samples {
    Profile(Profile),
    Nodes(Vec<f64>),
}

/// `(∫_J |f - g|^q)^{1/q}` on the integrator's rectangle `J`.
#[derive(Debug, Clone)]
pub struct LqMetric {
    q: Exponent,
    integ: Integrator,
}

impl LqMetric {
    pub fn new(q: Exponent, integ: Integrator) -> Result<Self> {
        if let Exponent::Finite(v) = q {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("q must lie in [1, inf], got {v}")));
            }
        }
        Ok(LqMetric { q, integ })
    }

    pub fn q(&self) -> Exponent {
        self.q
    }

    pub fn rect(&self) -> &Rect {
        self.integ.rect()
    }

    pub fn integrator(&self) -> &Integrator {
        &self.integ
    }

    pub fn path(&self) -> IntegrationPath {
        self.integ.path()
    }

    /// Short label such as `L1/exact-1d` or `L2/grid-64`.
    pub fn descriptor(&self) -> String {
        let q = match self.q {
            Exponent::Finite(v) => format!("L{v}"),
            Exponent::Infinite => "Linf".to_string(),
        };
        match &self.integ {
            Integrator::Exact1d(_) => format!("{q}/exact-1d"),
            Integrator::Grid(rule) => format!("{q}/grid-{}", rule.cells_per_axis()),
        }
    }

    pub fn sample(&self, f: &PLConvexFn) -> Samples {
        match &self.integ {
            Integrator::Exact1d(r) => Samples::Profile(Profile::of(f, r.lo()[0], r.hi()[0])),
            Integrator::Grid(rule) => Samples::Nodes(rule.nodes().map(|x| f.value_at(x)).collect()),
        }
    }

    /// Distance between two sampled functions. Both must come from `self.sample`.
    pub fn dist_samples(&self, a: &Samples, b: &Samples) -> f64 {
        match (a, b, &self.integ) {
            (Samples::Profile(a), Samples::Profile(b), _) => {
                let diff = a.sub(b);
                match self.q {
                    Exponent::Finite(q) => diff.integrate_abs_pow(q).powf(1.0 / q),
                    Exponent::Infinite => diff.sup_abs(),
                }
            }
            (Samples::Nodes(a), Samples::Nodes(b), Integrator::Grid(rule)) => {
                let gaps = a.iter().zip(b).map(|(x, y)| (x - y).abs());
                match self.q {
                    Exponent::Finite(q) => {
                        (rule.weight() * gaps.map(|g| g.powf(q)).sum::<f64>()).powf(1.0 / q)
                    }
                    Exponent::Infinite => gaps.fold(0.0, f64::max),
                }
            }
            _ => panic!("samples were not produced by this metric"),
        }
    }

    pub fn dist(&self, f: &PLConvexFn, g: &PLConvexFn) -> f64 {
        self.dist_samples(&self.sample(f), &self.sample(g))
    }
}

/// `‖f - g‖_{L^q(J)}` under `m`.
pub fn lq_dist(f: &PLConvexFn, g: &PLConvexFn, m: &LqMetric) -> f64 {
    m.dist(f, g)
}

/// Dense symmetric matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Fills the upper triangle with `dist(i, j)` (rows in parallel) and mirrors it.
    pub fn from_fn<F>(n: usize, dist: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| dist(i, j)).collect())
            .collect();
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, d) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest off-diagonal entry; `None` for fewer than two points.
    pub fn min_off_diagonal(&self) -> Option<f64> {
        (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .reduce(f64::min)
    }
}

/// Pairwise `L^q` distances. Each function is sampled once.
pub fn distance_matrix(fs: &[PLConvexFn], m: &LqMetric) -> DistanceMatrix {
    let samples: Vec<Samples> = fs.par_iter().map(|f| m.sample(f)).collect();
    DistanceMatrix::from_fn(fs.len(), |i, j| m.dist_samples(&samples[i], &samples[j]))
}

/// `max_u |h_1(u) - h_2(u)|` over a shared sphere net. For convex bodies this
/// approximates the Hausdorff distance from below.
pub fn sup_dist_support(h1: &SupportFn, h2: &SupportFn) -> Result<f64> {
    if !h1.same_net(h2) {
        return Err(Error::MismatchedNets);
    }
    Ok(h1
        .values()
        .iter()
        .zip(h2.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
