//! Finite covers of uniformly bounded convex functions on boxes and their
//! product over a partition.

use std::collections::HashSet;

use serde::Serialize;

use crate::convexfn::{Affine, Exponent, PLConvexFn};
use crate::geometry::Rect;
use crate::metrics::{Integrator, LqMetric};
use crate::{Error, Result};

/// Knot-count factor `κ` in `k = ⌈κ (bound · vol^{1/q} / δ)^{1/2}⌉`.
pub const KNOT_FACTOR: f64 = 2.6;

/// Relative slack on the tolerance budget `Σ α_i^q ≤ ε^q`.
const BUDGET_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuantizedKind {
    /// `δ ≥ 2 · bound · vol^{1/q}`: `{0}` covers everything.
    Trivial,
    /// Lower convex hulls of quantized values at `k + 1` uniform knots.
    Knots { k: usize, step: f64, max_level: i64 },
    /// Maxima of quantized tangent planes at a `(k+1)^2` node grid.
    Tangents {
        k: usize,
        value_step: f64,
        max_value_level: i64,
        slope_steps: Vec<f64>,
        max_slope_levels: Vec<i64>,
    },
}

/// A cover of `{φ convex on box : sup |φ| ≤ bound}` at `L^q` tolerance `δ`.
///
/// The cover is implicit: [`QuantizedBoxCover::project`] maps a function to
/// the cover element assigned to it, and the log-cardinality is an upper
/// bound on the number of distinct elements. Quantization contributes at
/// most `δ/4` (knots) or `3δ/8` (tangents) to the error; the remainder is
/// interpolation error, which is validated on samples rather than proven.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedBoxCover {
    rect: Rect,
    bound: f64,
    delta: f64,
    q: f64,
    kind: QuantizedKind,
    log_cardinality: f64,
}

/// Builds the quantized cover of a box; `d ∈ {1, 2}`.
pub fn quantized_box_cover(rect: &Rect, bound: f64, delta: f64, q: f64) -> Result<QuantizedBoxCover> {
    if !(bound > 0.0 && bound.is_finite() && delta > 0.0 && q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need bound > 0, delta > 0, finite q >= 1; got bound={bound}, delta={delta}, q={q}"
        )));
    }
    let d = rect.dim();
    if d > 2 {
        return Err(Error::UnsupportedDimension {
            d,
            what: "materialized box covers",
            supported: "d in {1, 2}",
        });
    }
    let vq = rect.volume().powf(1.0 / q);
    let mut cover = QuantizedBoxCover {
        rect: rect.clone(),
        bound,
        delta,
        q,
        kind: QuantizedKind::Trivial,
        log_cardinality: 0.0,
    };
    if delta >= 2.0 * bound * vq {
        return Ok(cover);
    }
    let k = (KNOT_FACTOR * (bound * vq / delta).sqrt()).ceil().max(1.0) as usize;
    if d == 1 {
        let step = delta / (2.0 * vq);
        let max_level = (bound / step).ceil() as i64;
        cover.log_cardinality = log_count_sequences(k + 1, max_level);
        cover.kind = QuantizedKind::Knots { k, step, max_level };
    } else {
        let widths: Vec<f64> = rect.widths().collect();
        let value_step = delta / (4.0 * vq);
        let slope_step = delta / (2.0 * vq * widths.iter().sum::<f64>());
        let max_value_level = (bound / value_step).ceil() as i64;
        // a convex function bounded by `bound` has slope at most
        // 2·bound / gap at distance `gap` from the boundary
        let max_slope_levels: Vec<i64> = widths
            .iter()
            .map(|w| (4.0 * bound * k as f64 / w / slope_step).ceil() as i64)
            .collect();
        let nodes = ((k + 1) * (k + 1)) as f64;
        cover.log_cardinality = nodes
            * (((2 * max_value_level + 1) as f64).ln()
                + max_slope_levels
                    .iter()
                    .map(|&m| ((2 * m + 1) as f64).ln())
                    .sum::<f64>());
        cover.kind = QuantizedKind::Tangents {
            k,
            value_step,
            max_value_level,
            slope_steps: vec![slope_step; 2],
            max_slope_levels,
        };
    }
    Ok(cover)
}

/// `ln` of the number of integer sequences `m_0, …, m_{n-1}` in `[-M, M]`
/// with second differences `≥ -2`. Rounding the values of a convex function
/// at uniform knots always lands in this set.
fn log_count_sequences(n: usize, max_level: i64) -> f64 {
    let levels = (2 * max_level + 1) as usize;
    if n == 1 {
        return (levels as f64).ln();
    }
    // counts[a * levels + b]: sequences ending in (a, b)
    let mut counts = vec![1.0f64; levels * levels];
    let mut log_scale = 0.0;
    let mut suffix = vec![0.0f64; levels + 1];
    for _ in 2..n {
        let mut next = vec![0.0f64; levels * levels];
        for b in 0..levels {
            suffix[levels] = 0.0;
            for a in (0..levels).rev() {
                suffix[a] = suffix[a + 1] + counts[a * levels + b];
            }
            for c in 0..levels {
                // m_c - 2 m_b + m_a >= -2  <=>  a >= 2b - c - 2
                let lo = 2 * b as i64 - c as i64 - 2;
                let lo = lo.clamp(0, levels as i64) as usize;
                next[b * levels + c] = suffix[lo];
            }
        }
        let total: f64 = next.iter().sum();
        log_scale += total.ln();
        counts = next.into_iter().map(|x| x / total).collect();
    }
    log_scale + counts.iter().sum::<f64>().ln()
}

/// Greatest convex minorant of points with increasing abscissae, as affine pieces.
fn lower_hull(xs: &[f64], ys: &[f64]) -> Vec<Affine> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or above the chord from a to i
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let s = (ys[b] - ys[a]) / (xs[b] - xs[a]);
            Affine::new(vec![s], ys[a] - s * xs[a])
        })
        .collect()
}

fn quantize(v: f64, step: f64, max_level: i64) -> i64 {
    ((v / step).round() as i64).clamp(-max_level, max_level)
}

impl QuantizedBoxCover {
    pub fn rect(&self) -> &Rect {
        &self.rect
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kind(&self) -> &QuantizedKind {
        &self.kind
    }

    pub fn log_cardinality(&self) -> f64 {
        self.log_cardinality
    }

    fn knots(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = (self.rect.lo()[0], self.rect.hi()[0]);
        (0..=k).map(|j| lo + (hi - lo) * j as f64 / k as f64).collect()
    }

    fn element_from_levels(&self, k: usize, step: f64, levels: &[i64]) -> PLConvexFn {
        let xs = self.knots(k);
        let ys: Vec<f64> = levels.iter().map(|&m| m as f64 * step).collect();
        PLConvexFn::new(lower_hull(&xs, &ys), self.rect.clone()).expect("finite hull")
    }

    /// The cover element assigned to `f`.
    pub fn project(&self, f: &PLConvexFn) -> PLConvexFn {
        match &self.kind {
            QuantizedKind::Trivial => PLConvexFn::zero(self.rect.clone()),
            QuantizedKind::Knots { k, step, max_level } => {
                let levels: Vec<i64> = self
                    .knots(*k)
                    .iter()
                    .map(|&x| quantize(f.value_at(&[x]), *step, *max_level))
                    .collect();
                self.element_from_levels(*k, *step, &levels)
            }
            QuantizedKind::Tangents {
                k,
                value_step,
                max_value_level,
                slope_steps,
                max_slope_levels,
            } => {
                let (lo, hi) = (self.rect.lo(), self.rect.hi());
                let mut seen = HashSet::new();
                let mut pieces = Vec::new();
                for i in 0..=*k {
                    for j in 0..=*k {
                        let c = [
                            lo[0] + (hi[0] - lo[0]) * i as f64 / *k as f64,
                            lo[1] + (hi[1] - lo[1]) * j as f64 / *k as f64,
                        ];
                        let v = quantize(f.value_at(&c), *value_step, *max_value_level);
                        let slope = &f.active_piece(&c).slope;
                        let s: Vec<i64> = (0..2)
                            .map(|a| quantize(slope[a], slope_steps[a], max_slope_levels[a]))
                            .collect();
                        if !seen.insert((v, s[0], s[1], i, j)) {
                            continue;
                        }
                        let sv: Vec<f64> = (0..2).map(|a| s[a] as f64 * slope_steps[a]).collect();
                        let value = v as f64 * value_step;
                        let intercept = value - sv[0] * c[0] - sv[1] * c[1];
                        pieces.push(Affine::new(sv, intercept));
                    }
                }
                PLConvexFn::new(pieces, self.rect.clone()).expect("finite planes")
            }
        }
    }

    /// Every element of a one-dimensional cover, for covers with at most
    /// `limit` candidate sequences.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<PLConvexFn>> {
        if self.log_cardinality > (limit as f64).ln() {
            return Err(Error::CoverTooLarge {
                log_card: self.log_cardinality,
                limit,
            });
        }
        match &self.kind {
            QuantizedKind::Trivial => Ok(vec![PLConvexFn::zero(self.rect.clone())]),
            QuantizedKind::Knots { k, step, max_level } => {
                let mut out = Vec::new();
                let mut seen = HashSet::new();
                let mut seq = Vec::with_capacity(k + 1);
                self.walk(*k + 1, *max_level, &mut seq, &mut |levels| {
                    let g = self.element_from_levels(*k, *step, levels);
                    let key: Vec<u64> = self
                        .knots(*k)
                        .iter()
                        .map(|&x| g.value_at(&[x]).to_bits())
                        .collect();
                    if seen.insert(key) {
                        out.push(g);
                    }
                });
                Ok(out)
            }
            QuantizedKind::Tangents { .. } => Err(Error::UnsupportedDimension {
                d: 2,
                what: "cover enumeration",
                supported: "d = 1",
            }),
        }
    }

    fn walk(&self, n: usize, m: i64, seq: &mut Vec<i64>, visit: &mut dyn FnMut(&[i64])) {
        if seq.len() == n {
            visit(seq);
            return;
        }
        let lo = match seq.len() {
            0 | 1 => -m,
            len => (2 * seq[len - 1] - seq[len - 2] - 2).max(-m),
        };
        for v in lo..=m {
            seq.push(v);
            self.walk(n, m, seq, visit);
            seq.pop();
        }
    }
}

/// An explicit finite cover searched exhaustively.
#[derive(Debug, Clone)]
pub struct FiniteCover {
    members: Vec<PLConvexFn>,
    metric: LqMetric,
}

impl FiniteCover {
    /// `cells` is the per-axis grid resolution used when `d ≥ 2`.
    pub fn new(members: Vec<PLConvexFn>, rect: &Rect, q: f64, cells: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("a cover needs at least one member".into()));
        }
        let metric = LqMetric::new(Exponent::Finite(q), Integrator::new(rect, cells)?)?;
        Ok(FiniteCover { members, metric })
    }

    pub fn members(&self) -> &[PLConvexFn] {
        &self.members
    }

    /// Nearest member (lowest index on ties) and its distance.
    pub fn nearest(&self, f: &PLConvexFn) -> (usize, f64) {
        let sf = self.metric.sample(f);
        self.members
            .iter()
            .enumerate()
            .map(|(i, g)| (i, self.metric.dist_samples(&sf, &self.metric.sample(g))))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }
}

/// A cover of one box of a partition.
#[derive(Debug, Clone)]
pub enum BoxCover {
    Finite(FiniteCover),
    Quantized(QuantizedBoxCover),
}

impl BoxCover {
    pub fn rect(&self) -> &Rect {
        match self {
            BoxCover::Finite(c) => c.metric.rect(),
            BoxCover::Quantized(c) => c.rect(),
        }
    }

    pub fn log_cardinality(&self) -> f64 {
        match self {
            BoxCover::Finite(c) => (c.members.len() as f64).ln(),
            BoxCover::Quantized(c) => c.log_cardinality(),
        }
    }

    pub fn project(&self, f: &PLConvexFn) -> PLConvexFn {
        match self {
            BoxCover::Finite(c) => c.members[c.nearest(f).0].clone(),
            BoxCover::Quantized(c) => c.project(f),
        }
    }
}

/// One cover per box, combined into a cover of their union.
#[derive(Debug, Clone)]
pub struct ProductCover {
    parts: Vec<(BoxCover, f64, LqMetric)>,
    eps: f64,
    q: f64,
}

/// Stitches per-box covers with tolerances `α_i`, `Σ α_i^q ≤ ε^q`, into a
/// cover of the union at tolerance `ε`. The log-cardinality is the sum of the
/// per-box log-cardinalities.
pub fn combine_covers(parts: Vec<(BoxCover, f64)>, eps: f64, q: f64, cells: usize) -> Result<ProductCover> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("no boxes to combine".into()));
    }
    let used: f64 = parts.iter().map(|(_, a)| a.powf(q)).sum();
    let budget = eps.powf(q);
    if used > budget * (1.0 + BUDGET_RTOL) {
        return Err(Error::ToleranceBudget { used, budget });
    }
    let parts = parts
        .into_iter()
        .map(|(c, a)| {
            let m = LqMetric::new(Exponent::Finite(q), Integrator::new(c.rect(), cells)?)?;
            Ok((c, a, m))
        })
        .collect::<Result<_>>()?;
    Ok(ProductCover { parts, eps, q })
}

impl ProductCover {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn log_cardinality(&self) -> f64 {
        self.parts.iter().map(|(c, _, _)| c.log_cardinality()).sum()
    }

    pub fn boxes(&self) -> impl Iterator<Item = (&BoxCover, f64)> + '_ {
        self.parts.iter().map(|(c, a, _)| (c, *a))
    }

    /// `‖f - proj_i(f)‖_{L^q(box_i)}` for every box.
    pub fn box_errors(&self, f: &PLConvexFn) -> Vec<f64> {
        self.parts
            .iter()
            .map(|(c, _, m)| m.dist(f, &c.project(f)))
            .collect()
    }

    /// `(Σ_i ‖f - proj_i(f)‖^q)^{1/q}`: the distance from `f` to its stitched
    /// representative, an upper bound on the distance to the nearest element.
    pub fn error(&self, f: &PLConvexFn) -> f64 {
        self.box_errors(f)
            .iter()
            .map(|e| e.powf(self.q))
            .sum::<f64>()
            .powf(1.0 / self.q)
    }
}
