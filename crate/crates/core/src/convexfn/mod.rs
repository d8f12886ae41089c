//! Convex functions on rectangles as maxima of finitely many affine pieces,
//! the balls `C_p(I, B)`, and the explicit families used as packing witnesses.

mod families;
pub mod profile;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{dot, Rect};
use crate::metrics::Integrator;
use crate::{Error, Result};

pub use families::{
    perturbation_packing, sample_ball, sample_ball_with, witness_fj, BallSample,
    PerturbationFamily, SamplerConfig, MAX_PERTURBATION_INTERVALS,
};

/// Relative slack on `‖f‖ ≤ B` that absorbs rounding in the measured norm.
pub const MEMBERSHIP_RTOL: f64 = 1e-9;

/// An exponent in `[1, ∞]`; `∞` is kept distinct from every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidArgument(format!("exponent must lie in [1, ∞], got {p}")))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            t => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse exponent {t:?}")))?;
                if p.is_infinite() {
                    Ok(Exponent::Infinite)
                } else {
                    Exponent::finite(p)
                }
            }
        }
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Exponent> for String {
    fn from(e: Exponent) -> String {
        e.to_string()
    }
}

/// `x ↦ slope·x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub slope: Vec<f64>,
    pub intercept: f64,
}

impl Affine {
    pub fn new(slope: Vec<f64>, intercept: f64) -> Self {
        Affine { slope, intercept }
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Affine::new(vec![0.0; d], c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.slope, x) + self.intercept
    }
}

/// Convex function `x ↦ max_k (s_k·x + c_k)` on a rectangle.
///
/// Serialized as `{"domain": {"lo": [...], "hi": [...]}, "pieces": [[s_1, ..., s_d, c], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PLRepr", into = "PLRepr")]
pub struct PLConvexFn {
    pieces: Vec<Affine>,
    domain: Rect,
}

#[derive(Serialize, Deserialize)]
struct PLRepr {
    domain: Rect,
    pieces: Vec<Vec<f64>>,
}

impl TryFrom<PLRepr> for PLConvexFn {
    type Error = Error;
    fn try_from(r: PLRepr) -> Result<Self> {
        let pieces = r
            .pieces
            .into_iter()
            .map(|mut row| {
                let c = row.pop().ok_or_else(|| Error::InvalidArgument("empty piece".into()))?;
                Ok(Affine::new(row, c))
            })
            .collect::<Result<Vec<_>>>()?;
        PLConvexFn::new(pieces, r.domain)
    }
}

impl From<PLConvexFn> for PLRepr {
    fn from(f: PLConvexFn) -> Self {
        PLRepr {
            domain: f.domain,
            pieces: f
                .pieces
                .into_iter()
                .map(|a| {
                    let mut row = a.slope;
                    row.push(a.intercept);
                    row
                })
                .collect(),
        }
    }
}

impl PLConvexFn {
    pub fn new(pieces: Vec<Affine>, domain: Rect) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidArgument("need at least one affine piece".into()));
        }
        let d = domain.dim();
        for a in &pieces {
            if a.slope.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: a.slope.len(),
                });
            }
            if !(a.intercept.is_finite() && a.slope.iter().all(|s| s.is_finite())) {
                return Err(Error::InvalidArgument("affine piece has non-finite coefficients".into()));
            }
        }
        Ok(PLConvexFn { pieces, domain })
    }

    pub fn constant(domain: Rect, c: f64) -> Self {
        let d = domain.dim();
        PLConvexFn::new(vec![Affine::constant(d, c)], domain).expect("constant is valid")
    }

    pub fn zero(domain: Rect) -> Self {
        PLConvexFn::constant(domain, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Rect {
        &self.domain
    }

    pub fn pieces(&self) -> &[Affine] {
        &self.pieces
    }

    /// `f(x)`; fails for points outside the domain.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain {
                point: x.to_vec(),
                lo: self.domain.lo().to_vec(),
                hi: self.domain.hi().to_vec(),
            });
        }
        Ok(self.value_at(x))
    }

    /// `f(x)` without the domain check; the formula is convex on all of `R^d`.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|a| a.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The piece attaining the maximum at `x`; its slope is a subgradient.
    pub fn active_piece(&self, x: &[f64]) -> &Affine {
        self.pieces
            .iter()
            .max_by(|a, b| a.eval(x).total_cmp(&b.eval(x)))
            .expect("nonempty")
    }

    /// `c·f` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> PLConvexFn {
        assert!(c >= 0.0, "negative scaling breaks convexity");
        PLConvexFn {
            pieces: self
                .pieces
                .iter()
                .map(|a| Affine::new(a.slope.iter().map(|s| s * c).collect(), a.intercept * c))
                .collect(),
            domain: self.domain.clone(),
        }
    }

    /// `t ↦ f(offset + widths ∘ t)` on `domain`. Widths may be negative
    /// (reflections); convexity is preserved by any affine change of variables.
    pub fn pullback(&self, offset: &[f64], widths: &[f64], domain: Rect) -> PLConvexFn {
        PLConvexFn {
            pieces: self
                .pieces
                .iter()
                .map(|a| {
                    let slope = a.slope.iter().zip(widths).map(|(s, w)| s * w).collect();
                    Affine::new(slope, a.eval(offset))
                })
                .collect(),
            domain,
        }
    }

    pub fn with_domain(&self, domain: Rect) -> PLConvexFn {
        PLConvexFn {
            pieces: self.pieces.clone(),
            domain,
        }
    }
}

/// The class `C_p(I, B)`: convex functions on `I` with `‖f‖_{L^p(I)} ≤ B`
/// (`sup_I |f| ≤ B` for `p = ∞`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub p: Exponent,
    pub b: f64,
    pub rect: Rect,
}

impl BallSpec {
    pub fn new(p: Exponent, b: f64, rect: Rect) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidArgument(format!("radius B must be positive, got {b}")));
        }
        Ok(BallSpec { p, b, rect })
    }

    /// `C_p([0,1]^d, 1)`.
    pub fn unit(d: usize, p: Exponent) -> Self {
        BallSpec::new(p, 1.0, Rect::unit(d)).expect("unit ball is valid")
    }

    pub fn dim(&self) -> usize {
        self.rect.dim()
    }
}

/// `‖f‖_{L^p}` over the integrator's rectangle. One-dimensional integrators
/// are exact; grid integrators use the midpoint rule, and for `p = ∞` take
/// the maximum over the nodes and the rectangle's corners.
pub fn lp_norm(f: &PLConvexFn, p: Exponent, integ: &Integrator) -> f64 {
    match (integ, p) {
        (Integrator::Exact1d(rect), _) => {
            let prof = profile::Profile::of(f, rect.lo()[0], rect.hi()[0]);
            match p {
                Exponent::Finite(p) => prof.integrate_abs_pow(p).powf(1.0 / p),
                Exponent::Infinite => prof.sup_abs(),
            }
        }
        (Integrator::Grid(rule), Exponent::Finite(p)) => rule
            .integrate(|x| f.value_at(x).abs().powf(p))
            .powf(1.0 / p),
        (Integrator::Grid(rule), Exponent::Infinite) => sup_norm_grid(f, rule),
    }
}

fn sup_norm_grid(f: &PLConvexFn, rule: &crate::geometry::QuadratureRule) -> f64 {
    let nodes = rule.nodes().map(|x| f.value_at(x).abs());
    let corners = rule.rect().vertices().into_iter().map(|v| f.value_at(&v).abs());
    nodes.chain(corners).fold(0.0, f64::max)
}

/// Result of a membership test: the verdict and the measured norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub inside: bool,
    pub norm: f64,
}

/// Tests `f ∈ C_p(I, B)` with the norm measured by `integ` on `spec.rect`.
pub fn member(f: &PLConvexFn, spec: &BallSpec, integ: &Integrator) -> Result<Membership> {
    if !f.domain().contains_rect(&spec.rect) {
        return Err(Error::Precondition(
            "function domain must contain the ball's rectangle".into(),
        ));
    }
    if integ.rect() != &spec.rect {
        return Err(Error::Precondition(
            "integrator must live on the ball's rectangle".into(),
        ));
    }
    let norm = lp_norm(f, spec.p, integ);
    Ok(Membership {
        inside: norm <= spec.b * (1.0 + MEMBERSHIP_RTOL),
        norm,
    })
}
