//! The full reduction chain for one-dimensional balls: scale to the unit
//! interval, drop the boundary layer, split at `1/2`, partition each half
//! and cover every box with a quantized cover.

use rayon::prelude::*;
use serde::Serialize;

use super::cover::{combine_covers, quantized_box_cover, BoxCover, ProductCover};
use super::plan::{build_plan, PartitionPlan};
use super::reduce::{orthant_tolerance, reduce_boundary, reflect, scale_to_unit, symmetry_split, tail_mass, BoundaryReduction};
use super::schedule::{dyadic_schedule, geometric_schedule};
use crate::constants::{check_q_below_p, envelope_constant};
use crate::convexfn::{lp_norm, sample_ball_with, BallSpec, Exponent, PLConvexFn, SamplerConfig};
use crate::metrics::Integrator;
use crate::numeric::{fit_line, LineFit};
use crate::seed::item_rng;
use crate::{Error, Result};

/// One materialized box of the lower orthant.
#[derive(Debug, Clone, Serialize)]
pub struct CoveredBox {
    pub index: Vec<usize>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Envelope bound `c ∏ η_{i_k}^{-1/p}` on the box.
    pub bound: f64,
    pub alpha: f64,
    pub log_cardinality: f64,
}

/// Inner part of the cover: a partition of the lower orthant reused for
/// every orthant through reflections.
#[derive(Debug, Clone)]
pub struct InnerCover {
    pub reduction: BoundaryReduction,
    pub orthant_tolerance: f64,
    pub plan: PartitionPlan,
    pub envelope: f64,
    pub boxes: Vec<CoveredBox>,
    product: ProductCover,
}

#[derive(Debug, Clone)]
pub enum CoverBody {
    /// `ε̃ ≥ 1`: every member of the unit ball is within `ε̃` of zero.
    Zero,
    Partitioned(Box<InnerCover>),
}

/// A cover of `C_p(I, B)` under `L^q(I)` built by the reduction chain.
#[derive(Debug, Clone)]
pub struct PipelineCover {
    pub spec: BallSpec,
    pub q: f64,
    pub eps: f64,
    /// `‖f̃ - g̃‖ = factor · ‖f - g‖` after scaling to the unit interval.
    pub factor: f64,
    pub body: CoverBody,
}

/// Error of one function against the cover, in the units of the original ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverError {
    pub total: f64,
    /// `∫ |f̃|^q` over the boundary layer, unit-cube units.
    pub tail: f64,
    /// `Σ` over orthants and boxes of the `q`-th power errors, unit-cube units.
    pub inner: f64,
}

/// Builds the cover. The schedule is geometric on `[η_ε, 1/2]`.
pub fn pipeline_cover(spec: &BallSpec, q: f64, eps: f64) -> Result<PipelineCover> {
    let d = spec.dim();
    if d != 1 {
        return Err(Error::UnsupportedDimension {
            d,
            what: "the materialized partition cover",
            supported: "d = 1",
        });
    }
    let p = match spec.p {
        Exponent::Finite(p) => p,
        Exponent::Infinite => {
            return Err(Error::Regime("the partition cover needs finite p".into()));
        }
    };
    check_q_below_p(p, q)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let factor = scale_to_unit(&PLConvexFn::zero(spec.rect.clone()), spec, q)?.1;
    let unit_eps = eps * factor;
    let mut cover = PipelineCover {
        spec: spec.clone(),
        q,
        eps,
        factor,
        body: CoverBody::Zero,
    };
    // ‖φ‖_q ≤ ‖φ‖_p ≤ 1 on the unit cube
    if unit_eps >= 1.0 {
        return Ok(cover);
    }
    let reduction = reduce_boundary(d, p, q, unit_eps)?;
    let tau = orthant_tolerance(reduction.tolerance, d, q);
    let schedule = geometric_schedule(reduction.eta, 0.5, p, q)?;
    let plan = build_plan(&schedule, d, p, q, tau)?;
    let envelope = envelope_constant(d, p)?;
    let levels = schedule.levels();

    let built: Vec<(CoveredBox, BoxCover, f64)> = plan
        .boxes
        .par_iter()
        .map(|b| {
            let rect = plan.clipped_rect(&b.index);
            let bound = envelope * b.index.iter().map(|&i| levels[i].powf(-1.0 / p)).product::<f64>();
            let c = quantized_box_cover(&rect, bound, b.alpha, q)?;
            let summary = CoveredBox {
                index: b.index.clone(),
                lo: rect.lo().to_vec(),
                hi: rect.hi().to_vec(),
                bound,
                alpha: b.alpha,
                log_cardinality: c.log_cardinality(),
            };
            Ok((summary, BoxCover::Quantized(c), b.alpha))
        })
        .collect::<Result<_>>()?;
    let (boxes, parts): (Vec<_>, Vec<_>) = built.into_iter().map(|(s, c, a)| (s, (c, a))).unzip();
    let product = combine_covers(parts, tau, q, 1)?;
    cover.body = CoverBody::Partitioned(Box::new(InnerCover {
        reduction,
        orthant_tolerance: tau,
        plan,
        envelope,
        boxes,
        product,
    }));
    Ok(cover)
}

impl PipelineCover {
    /// `log` of the number of stitched cover elements.
    pub fn log_cardinality(&self) -> f64 {
        match &self.body {
            CoverBody::Zero => 0.0,
            CoverBody::Partitioned(inner) => {
                (1usize << self.spec.dim()) as f64 * inner.product.log_cardinality()
            }
        }
    }

    /// Distance from `f` to its stitched representative: zero on the boundary
    /// layer, the box covers' elements inside.
    pub fn error(&self, f: &PLConvexFn) -> Result<CoverError> {
        let (unit, _) = scale_to_unit(f, &self.spec, self.q)?;
        let q = self.q;
        let (tail, inner) = match &self.body {
            CoverBody::Zero => {
                let integ = Integrator::new(unit.domain(), 1)?;
                (lp_norm(&unit, Exponent::Finite(q), &integ).powf(q), 0.0)
            }
            CoverBody::Partitioned(c) => {
                let tail = tail_mass(&unit, c.reduction.eta, q, 1)?;
                let orthants = symmetry_split(unit.dim(), c.reduction.eta)?.len();
                let inner = (0..orthants)
                    .map(|mask| c.product.error(&reflect(&unit, mask)).powf(q))
                    .sum();
                (tail, inner)
            }
        };
        Ok(CoverError {
            total: (tail + inner).powf(1.0 / q) / self.factor,
            tail,
            inner,
        })
    }

    /// Measures [`PipelineCover::error`] on `n` fresh members drawn with
    /// `item_rng(seed, i)`.
    pub fn validate(&self, cfg: &SamplerConfig, n: usize, seed: u64) -> Result<Validation> {
        let integ = Integrator::new(&self.spec.rect, 1)?;
        let errors: Vec<CoverError> = (0..n)
            .into_par_iter()
            .map(|i| {
                let f = sample_ball_with(&self.spec, cfg, &mut item_rng(seed, i as u64), &integ)?.f;
                self.error(&f)
            })
            .collect::<Result<_>>()?;
        let passes = errors.iter().filter(|e| e.total <= self.eps).count();
        let max_error = errors.iter().map(|e| e.total).fold(0.0, f64::max);
        let mean_error = errors.iter().map(|e| e.total).sum::<f64>() / n.max(1) as f64;
        Ok(Validation {
            samples: n,
            passes,
            max_error,
            mean_error,
            eps: self.eps,
        })
    }

    pub fn summary(&self) -> CoverSummary {
        let inner = match &self.body {
            CoverBody::Zero => None,
            CoverBody::Partitioned(c) => Some(InnerSummary {
                eta: c.reduction.eta,
                inner_tolerance: c.reduction.tolerance,
                orthant_tolerance: c.orthant_tolerance,
                orthants: 1usize << self.spec.dim(),
                envelope: c.envelope,
                plan: c.plan.clone(),
                boxes: c.boxes.clone(),
            }),
        };
        CoverSummary {
            spec: self.spec.clone(),
            q: self.q,
            eps: self.eps,
            factor: self.factor,
            log_cardinality: self.log_cardinality(),
            inner,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InnerSummary {
    pub eta: f64,
    pub inner_tolerance: f64,
    pub orthant_tolerance: f64,
    pub orthants: usize,
    pub envelope: f64,
    pub plan: PartitionPlan,
    pub boxes: Vec<CoveredBox>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverSummary {
    pub spec: BallSpec,
    pub q: f64,
    pub eps: f64,
    pub factor: f64,
    pub log_cardinality: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<InnerSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub samples: usize,
    pub passes: usize,
    pub max_error: f64,
    pub mean_error: f64,
    pub eps: f64,
}

impl Validation {
    pub fn all_pass(&self) -> bool {
        self.passes == self.samples
    }
}

/// One row of the dyadic-schedule growth table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicRow {
    pub eta: f64,
    pub l: usize,
    #[serde(rename = "S")]
    pub s: f64,
    /// `S^{d(2p+d)/(2p)}`, the `η`-dependent factor of the interior bound.
    pub bound_factor: f64,
    pub log_inv_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicGrowth {
    pub d: usize,
    pub p: f64,
    pub rows: Vec<DyadicRow>,
    /// Least-squares fit of `S` against `log(1/η)`.
    pub fit: LineFit,
    /// `d(2p+d)/(2p)`.
    pub shape_exponent: f64,
    /// Least-squares fit of the bound factor against `log(1/η)^{shape_exponent}`.
    pub shape_fit: LineFit,
}

/// `S` for the dyadic schedule with `q = p` over a grid of `η`. With `p = q`
/// every full dyadic cell contributes exactly 1 to `S`, so `S` tracks the
/// number of levels and grows linearly in `log(1/η)`.
pub fn dyadic_growth(d: usize, p: f64, etas: &[f64]) -> Result<DyadicGrowth> {
    let rows = etas
        .iter()
        .map(|&eta| {
            let s = dyadic_schedule(eta)?;
            let plan_s = super::plan::level_sum(&s.all_levels(), d, p, p)?;
            let df = d as f64;
            Ok(DyadicRow {
                eta,
                l: s.l(),
                s: plan_s,
                bound_factor: plan_s.powf(df * (2.0 * p + df) / (2.0 * p)),
                log_inv_eta: (1.0 / eta).ln(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.log_inv_eta).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.s).collect();
    let degenerate = || Error::DegenerateFit("need two distinct eta values".into());
    let fit = fit_line(&xs, &ys).ok_or_else(degenerate)?;
    let df = d as f64;
    let shape_exponent = df * (2.0 * p + df) / (2.0 * p);
    let xs: Vec<f64> = rows.iter().map(|r| r.log_inv_eta.powf(shape_exponent)).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.bound_factor).collect();
    let shape_fit = fit_line(&xs, &ys).ok_or_else(degenerate)?;
    Ok(DyadicGrowth {
        d,
        p,
        rows,
        fit,
        shape_exponent,
        shape_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;

    #[test]
    fn cover_of_unit_ball_validates() {
        let spec = BallSpec::unit(1, Exponent::Finite(2.0));
        let cover = pipeline_cover(&spec, 1.0, 0.3).unwrap();
        let CoverBody::Partitioned(inner) = &cover.body else { panic!("expected partition") };
        assert!((inner.plan.alpha_budget() - inner.orthant_tolerance).abs() < 1e-12 * inner.orthant_tolerance);
        assert!(cover.log_cardinality() > 0.0);
        let v = cover.validate(&SamplerConfig::default(), 40, 12345).unwrap();
        assert!(v.all_pass(), "{v:?}");
    }

    #[test]
    fn cover_on_scaled_ball_validates() {
        let spec = BallSpec::new(Exponent::Finite(3.0), 2.0, Rect::interval(-1.0, 2.0).unwrap()).unwrap();
        let cover = pipeline_cover(&spec, 1.5, 0.8).unwrap();
        let v = cover.validate(&SamplerConfig::default(), 20, 7).unwrap();
        assert!(v.all_pass(), "{v:?}");
    }

    #[test]
    fn large_tolerance_gives_zero_cover() {
        let spec = BallSpec::unit(1, Exponent::Finite(2.0));
        let cover = pipeline_cover(&spec, 1.0, 1.5).unwrap();
        assert!(matches!(cover.body, CoverBody::Zero));
        assert_eq!(cover.log_cardinality(), 0.0);
        assert!(cover.validate(&SamplerConfig::default(), 20, 1).unwrap().all_pass());
    }

    #[test]
    fn rejects_infinite_entropy_regime() {
        let spec = BallSpec::unit(1, Exponent::Finite(1.0));
        assert!(matches!(pipeline_cover(&spec, 1.0, 0.3), Err(Error::Regime(_))));
        let spec = BallSpec::unit(2, Exponent::Finite(2.0));
        assert!(pipeline_cover(&spec, 1.0, 0.3).is_err());
    }

    #[test]
    fn dyadic_growth_is_linear_in_log() {
        let etas: Vec<f64> = (1..=12).map(|k| 10f64.powi(-k)).collect();
        let g = dyadic_growth(1, 2.0, &etas).unwrap();
        assert!(g.fit.r_squared >= 0.999, "{:?}", g.fit);
        assert!((g.fit.slope - 1.0 / 2f64.ln()).abs() < 0.1);
    }
}
