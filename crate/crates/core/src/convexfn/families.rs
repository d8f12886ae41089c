//! Witness families and the Monte Carlo sampler for `C_p(I, B)`.

use rand::Rng;

use super::{lp_norm, Affine, BallSpec, Exponent, PLConvexFn};
use crate::geometry::Rect;
use crate::metrics::{Integrator, LqMetric};
use crate::seed::item_rng;
use crate::{Error, Result};

/// Largest `k` accepted by [`perturbation_packing`]; the family has `2^k` members.
pub const MAX_PERTURBATION_INTERVALS: usize = 16;

/// `f_j(x) = (1 + p)^{1/p} 2^{j/p} max(0, 1 - 2^j x_1)` on `[0, 1]^d`.
///
/// Every `f_j` has `∫ |f_j|^p = 1`, so the sequence sits on the boundary of
/// `C_p([0,1]^d, 1)`, while for `q ≥ p` its members stay a fixed `L^q`
/// distance apart.
pub fn witness_fj(j: u32, d: usize, p: f64) -> PLConvexFn {
    assert!(j >= 1, "witness index starts at 1");
    let height = (1.0 + p).powf(1.0 / p) * 2f64.powf(j as f64 / p);
    let mut slope = vec![0.0; d];
    slope[0] = -height * 2f64.powi(j as i32);
    PLConvexFn::new(
        vec![Affine::new(slope, height), Affine::constant(d, 0.0)],
        Rect::unit(d),
    )
    .expect("witness pieces are finite")
}

/// Knobs of the max-of-affine sampler.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SamplerConfig {
    /// Number of affine pieces `m`.
    pub pieces: usize,
    /// Slopes are drawn uniformly from `[-s, s]^d`.
    pub slope_bound: f64,
    /// Redraws allowed when a draw has zero norm.
    pub max_retries: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            pieces: 8,
            slope_bound: 10.0,
            max_retries: 16,
        }
    }
}

/// A sampled member together with the norm it was rescaled to.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSample {
    pub f: PLConvexFn,
    pub target_norm: f64,
}

/// Draws one member of `C_p(I, B)` from `item_rng(seed, 0)`.
pub fn sample_ball(
    spec: &BallSpec,
    cfg: &SamplerConfig,
    seed: u64,
    integ: &Integrator,
) -> Result<BallSample> {
    sample_ball_with(spec, cfg, &mut item_rng(seed, 0), integ)
}

/// Draws `m` affine pieces, takes their maximum and rescales it to norm
/// `B·r` with `r` uniform in `(0, 1]`. The norm is measured by `integ`.
///
/// The induced distribution on the ball is an arbitrary choice; estimates
/// built on it are relative to this sampler.
pub fn sample_ball_with<R: Rng>(
    spec: &BallSpec,
    cfg: &SamplerConfig,
    rng: &mut R,
    integ: &Integrator,
) -> Result<BallSample> {
    if cfg.pieces == 0 {
        return Err(Error::InvalidArgument("sampler needs at least one piece".into()));
    }
    let d = spec.dim();
    let s = cfg.slope_bound;
    for _ in 0..cfg.max_retries.max(1) {
        let pieces = (0..cfg.pieces)
            .map(|_| {
                let slope = (0..d).map(|_| rng.gen_range(-s..=s)).collect();
                Affine::new(slope, rng.gen_range(-1.0..=1.0))
            })
            .collect();
        let f = PLConvexFn::new(pieces, spec.rect.clone())?;
        let norm = lp_norm(&f, spec.p, integ);
        if norm > 0.0 && norm.is_finite() {
            let r = 1.0 - rng.gen::<f64>();
            let target_norm = spec.b * r;
            return Ok(BallSample {
                f: f.scaled(target_norm / norm),
                target_norm,
            });
        }
    }
    Err(Error::SamplingFailed {
        attempts: cfg.max_retries.max(1),
    })
}

/// The `2^k` perturbed interpolants together with their exact separation.
#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    pub k: usize,
    /// Member `σ` uses the midpoint knot of interval `i` iff bit `i` of `σ` is set.
    pub members: Vec<PLConvexFn>,
    /// Exact `L^2` distance between members differing on one interval; every
    /// pair of distinct members is at least this far apart.
    pub delta: f64,
}

/// Packing family in `C_∞([a, b], B)`.
///
/// The base function is the parabola `P(t) = B(8t² - 8t + 1)`, `t = (x-a)/(b-a)`,
/// with `-B ≤ P ≤ B`. The interval is split into `k` equal cells; each member
/// is the piecewise-linear interpolant of `P` at the cell endpoints plus the
/// midpoints of a chosen subset of cells. Interpolants of a convex function
/// are convex and lie between `P` and its chords, so every member stays within
/// `[-B, B]`. Toggling one midpoint adds or removes a tent of height `2B/k²`.
pub fn perturbation_packing(k: usize, spec: &BallSpec) -> Result<PerturbationFamily> {
    if spec.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            d: spec.dim(),
            what: "the perturbation packing family",
            supported: "d = 1",
        });
    }
    if !spec.p.is_infinite() {
        return Err(Error::InvalidArgument(
            "perturbation family lives in the uniformly bounded class (p = inf)".into(),
        ));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need k >= 2 intervals, got {k}")));
    }
    if k > MAX_PERTURBATION_INTERVALS {
        return Err(Error::TooManyIntervals {
            k,
            max: MAX_PERTURBATION_INTERVALS,
        });
    }
    let (a, w) = (spec.rect.lo()[0], spec.rect.hi()[0] - spec.rect.lo()[0]);
    let b = spec.b;
    let parabola = |t: f64| b * (8.0 * t * t - 8.0 * t + 1.0);
    let kf = k as f64;

    let members = (0..1usize << k)
        .map(|pattern| {
            let mut ts = Vec::with_capacity(2 * k + 1);
            for i in 0..k {
                ts.push(i as f64 / kf);
                if pattern >> i & 1 == 1 {
                    ts.push((i as f64 + 0.5) / kf);
                }
            }
            ts.push(1.0);
            let pieces = ts
                .windows(2)
                .map(|t| {
                    let (x0, x1) = (a + w * t[0], a + w * t[1]);
                    let (y0, y1) = (parabola(t[0]), parabola(t[1]));
                    let s = (y1 - y0) / (x1 - x0);
                    Affine::new(vec![s], y0 - s * x0)
                })
                .collect();
            PLConvexFn::new(pieces, spec.rect.clone()).expect("finite pieces")
        })
        .collect::<Vec<_>>();

    let l2 = LqMetric::new(Exponent::Finite(2.0), Integrator::Exact1d(spec.rect.clone()))?;
    let delta = l2.dist(&members[0], &members[1]);
    Ok(PerturbationFamily { k, members, delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexfn::{member, profile::Profile};
    use crate::metrics::Integrator;

    #[test]
    fn first_witness_is_root_six_ramp() {
        let f1 = witness_fj(1, 1, 2.0);
        for x in [0.0, 0.1, 0.3, 0.5, 0.9] {
            let want = 6f64.sqrt() * (1.0f64 - 2.0 * x).max(0.0);
            assert!((f1.value_at(&[x]) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn witness_mass_is_one() {
        let exact = Integrator::Exact1d(Rect::unit(1));
        for p in [1.0, 2.0, 3.5] {
            for j in 1..=20 {
                let f = witness_fj(j, 1, p);
                let mass = Profile::of(&f, 0.0, 1.0).integrate_abs_pow(p);
                assert!((mass - 1.0).abs() < 1e-9, "j={j} p={p} mass={mass}");
                assert!((lp_norm(&f, Exponent::Finite(p), &exact) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic_and_inside() {
        let spec = BallSpec::new(Exponent::Finite(2.0), 1.5, Rect::interval(-1.0, 2.0).unwrap()).unwrap();
        let integ = Integrator::new(&spec.rect, 1).unwrap();
        let cfg = SamplerConfig::default();
        for seed in 0..50 {
            let a = sample_ball(&spec, &cfg, seed, &integ).unwrap();
            let b = sample_ball(&spec, &cfg, seed, &integ).unwrap();
            assert_eq!(a, b);
            assert!(member(&a.f, &spec, &integ).unwrap().inside);
        }
    }

    #[test]
    fn single_piece_hits_target_norm() {
        let spec = BallSpec::unit(1, Exponent::Finite(3.0));
        let integ = Integrator::new(&spec.rect, 1).unwrap();
        let cfg = SamplerConfig {
            pieces: 1,
            ..SamplerConfig::default()
        };
        for seed in 0..20 {
            let s = sample_ball(&spec, &cfg, seed, &integ).unwrap();
            assert_eq!(s.f.pieces().len(), 1);
            let n = lp_norm(&s.f, spec.p, &integ);
            assert!((n - s.target_norm).abs() < 1e-9);
        }
    }

    #[test]
    fn sampler_in_two_dimensions_and_sup_ball() {
        let spec = BallSpec::unit(2, Exponent::Infinite);
        let integ = Integrator::new(&spec.rect, 8).unwrap();
        let s = sample_ball(&spec, &SamplerConfig::default(), 7, &integ).unwrap();
        assert!(member(&s.f, &spec, &integ).unwrap().inside);
    }

    #[test]
    fn sampler_rejects_empty_piece_count() {
        let spec = BallSpec::unit(1, Exponent::Finite(1.0));
        let integ = Integrator::new(&spec.rect, 1).unwrap();
        let cfg = SamplerConfig {
            pieces: 0,
            ..SamplerConfig::default()
        };
        assert!(sample_ball(&spec, &cfg, 1, &integ).is_err());
        assert!(sample_ball(&spec, &SamplerConfig::default(), 1, &integ).is_ok());
    }

    #[test]
    fn perturbation_members_convex_and_bounded() {
        let spec = BallSpec::new(Exponent::Infinite, 2.0, Rect::unit(1)).unwrap();
        let fam = perturbation_packing(2, &spec).unwrap();
        assert_eq!(fam.members.len(), 4);
        let exact = Integrator::Exact1d(spec.rect.clone());
        for f in &fam.members {
            let slopes: Vec<f64> = f.pieces().iter().map(|a| a.slope[0]).collect();
            assert!(slopes.windows(2).all(|s| s[0] <= s[1]));
            assert!(member(f, &spec, &exact).unwrap().inside);
        }
    }

    #[test]
    fn perturbation_delta_matches_tent_formula() {
        // tent of height 2B/k² over width w/k: ∫ tent² = (2B/k²)² (w/k) / 3
        let spec = BallSpec::new(Exponent::Infinite, 1.0, Rect::interval(0.0, 3.0).unwrap()).unwrap();
        for k in [2usize, 5, 8] {
            let fam = perturbation_packing(k, &spec).unwrap();
            let kf = k as f64;
            let want = ((2.0 / (kf * kf)).powi(2) * (3.0 / kf) / 3.0).sqrt();
            assert!((fam.delta - want).abs() < 1e-12 * want.max(1.0), "k={k}");
        }
    }

    #[test]
    fn perturbation_rejects_bad_inputs() {
        let sup1 = BallSpec::unit(1, Exponent::Infinite);
        assert!(matches!(
            perturbation_packing(17, &sup1),
            Err(Error::TooManyIntervals { max: 16, .. })
        ));
        assert!(perturbation_packing(1, &sup1).is_err());
        assert!(perturbation_packing(3, &BallSpec::unit(2, Exponent::Infinite)).is_err());
        assert!(perturbation_packing(3, &BallSpec::unit(1, Exponent::Finite(2.0))).is_err());
    }
}
