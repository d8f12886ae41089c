//! Closed-form constants and the right-hand sides of the entropy bounds.
//!
//! The entropy bounds hold up to existential constants that are never given
//! explicitly. Every [`BoundReport`] evaluates its expression with those
//! constants set to 1 and says so in its `convention` field; only the
//! dependence on `ε`, `η` and the rectangle is meaningful.

use serde::Serialize;
use statrs::function::beta::beta;

use crate::convexfn::Exponent;
use crate::geometry::Rect;
use crate::numeric::{golden_section, integrate};
use crate::partition::level_sum;
use crate::{Error, Result};

pub const UNIT_CONSTANT_CONVENTION: &str =
    "existential constants set to 1; only the scaling in eps, eta and the rectangle is meaningful";

/// Points of the bracketing grid for the `β` search.
const BETA_GRID: usize = 200;

/// `∫₀¹ u^{α-1} |u - β|^p du`.
fn c_integral(alpha: f64, p: f64, beta_: f64) -> f64 {
    integer_power(p)
        .map(|n| c_integral_int(alpha, n, beta_))
        .unwrap_or_else(|| c_integral_real(alpha, p, beta_))
}

fn integer_power(p: f64) -> Option<u32> {
    (p.fract() == 0.0 && (1.0..=64.0).contains(&p)).then_some(p as u32)
}

/// Integer `p`: `∫₀^β` is `β^{α+p} p!/(α(α+1)…(α+p))`, `∫_β^1` expands binomially.
fn c_integral_int(alpha: f64, n: u32, b: f64) -> f64 {
    let mut left = b.powf(alpha + n as f64);
    for k in 0..=n {
        left /= alpha + k as f64;
    }
    for k in 1..=n {
        left *= k as f64;
    }
    let mut right = 0.0;
    let mut binom = 1.0;
    for k in 0..=n {
        let a = alpha + k as f64;
        right += binom * (-b).powi((n - k) as i32) * (1.0 - b.powf(a)) / a;
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    left + right
}

fn c_integral_real(alpha: f64, p: f64, b: f64) -> f64 {
    let left = b.powf(alpha + p) * beta(alpha, p + 1.0);
    let right = integrate(|u| u.powf(alpha - 1.0) * (u - b).powf(p), b, 1.0, 1e-13);
    left + right
}

/// `C(α, p) = inf_{0 ≤ β ≤ 1} ∫₀¹ u^{α-1} |u - β|^p du`.
///
/// A grid over `β` brackets the minimizer, golden-section search refines it.
pub fn c_alpha_p(alpha: f64, p: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite() && p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "C(alpha, p) needs alpha > 0 and p > 0, got ({alpha}, {p})"
        )));
    }
    let g = |b: f64| c_integral(alpha, p, b);
    let step = 1.0 / BETA_GRID as f64;
    let best = (0..=BETA_GRID)
        .map(|k| (k, g(k as f64 * step)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
        .0;
    let lo = best.saturating_sub(1) as f64 * step;
    let hi = ((best + 1).min(BETA_GRID)) as f64 * step;
    Ok(golden_section(g, lo, hi, 1e-10).1)
}

/// The envelope constant `c = d^{-1/p} C(d, p)^{-1/p}`: every convex `φ` on
/// `[0,1]^d` with `∫|φ|^p ≤ 1` obeys `|φ(y)| ≤ c ∏ max(y_i, 1-y_i)^{-1/p}`.
pub fn envelope_constant(d: usize, p: f64) -> Result<f64> {
    if d == 0 || !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "envelope constant needs d >= 1 and finite p >= 1, got d={d}, p={p}"
        )));
    }
    let c = c_alpha_p(d as f64, p)?;
    Ok((d as f64).powf(-1.0 / p) * c.powf(-1.0 / p))
}

/// The right-hand side of the envelope bound at `y ∈ (0,1)^d`.
pub fn envelope_bound(c: f64, p: f64, y: &[f64]) -> f64 {
    y.iter()
        .map(|&yi| yi.powf(-1.0 / p).max((1.0 - yi).powf(-1.0 / p)))
        .product::<f64>()
        * c
}

pub(crate) fn check_q_below_p(p: f64, q: f64) -> Result<()> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("q must be finite and >= 1, got {q}")));
    }
    if !(p > q) {
        return Err(Error::Regime(format!(
            "q = {q} >= p = {p}: the metric entropy under L_q is infinite in this regime"
        )));
    }
    Ok(())
}

/// Exponent `E = 2p(p+q)(2q+d) / (d(p-q)²)` of `u = 2^{-E}`.
fn u_exponent(d: usize, p: f64, q: f64) -> f64 {
    let d = d as f64;
    2.0 * p * (p + q) * (2.0 * q + d) / (d * (p - q) * (p - q))
}

/// `u = exp(-2p(p+q)(2q+d) log 2 / (d(p-q)²))`, below which the geometric
/// schedule's `ζ_i` at least double. Evaluated as a power of two, so integer
/// exponents give exact results.
pub fn u_threshold(d: usize, p: f64, q: f64) -> Result<f64> {
    check_q_below_p(p, q)?;
    if !p.is_finite() || d == 0 {
        return Err(Error::InvalidArgument("u needs d >= 1 and finite p".into()));
    }
    Ok(2f64.powf(-u_exponent(d, p, q)))
}

/// Upper end of the admissible tolerance range `(0, 2^{1/q} d^{1/q - 1/p})`.
pub fn eps_max(d: usize, p: f64, q: f64) -> f64 {
    2f64.powf(1.0 / q) * (d as f64).powf(1.0 / q - 1.0 / p)
}

/// `η_ε = (1/(2d)) (ε^q / 2)^{p/(p-q)}`: the boundary layer of width `η_ε`
/// carries at most `ε^q / 2` of `∫|φ|^q` for every member of the unit ball.
pub fn eta_epsilon(d: usize, p: f64, q: f64, eps: f64) -> Result<f64> {
    check_q_below_p(p, q)?;
    let hi = eps_max(d, p, q);
    if !(eps > 0.0 && eps < hi) {
        return Err(Error::Precondition(format!(
            "eps = {eps} outside the admissible interval (0, {hi})"
        )));
    }
    Ok((eps.powf(q) / 2.0).powf(p / (p - q)) / (2.0 * d as f64))
}

/// Boundary margin `η` of `inner` inside `outer`: the smallest relative gap
/// between corresponding faces.
pub fn interior_margin(outer: &Rect, inner: &Rect) -> Result<f64> {
    if outer.dim() != inner.dim() {
        return Err(Error::DimensionMismatch {
            expected: outer.dim(),
            got: inner.dim(),
        });
    }
    let mut eta = f64::INFINITY;
    for i in 0..outer.dim() {
        let (a, b) = (outer.lo()[i], outer.hi()[i]);
        let (al, be) = (inner.lo()[i], inner.hi()[i]);
        if !(a < al && be < b) {
            return Err(Error::Precondition(
                "inner rectangle must lie strictly inside the outer one".into(),
            ));
        }
        eta = eta.min((al - a) / (b - a)).min((b - be) / (b - a));
    }
    Ok(eta)
}

/// Which bound to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    /// Uniformly bounded class under `L^q(I)`:
    /// `(ε / (B ∏(b_i-a_i)^{1/q}))^{-d/2}`. Upper and lower bounds share it.
    Bounded { q: f64, b: f64, rect: Rect, eps: f64, lower: bool },
    /// `C_p(I, B)` under `L^q`, `q < p ≤ ∞`:
    /// `(ε / (B ∏(b_i-a_i)^{1/q-1/p}))^{-d/2}`.
    Lp { p: Exponent, q: f64, b: f64, rect: Rect, eps: f64, lower: bool },
    /// `C_p(I, B)` under `L^p(J)` with `J` strictly inside `I`:
    /// `(ε/B)^{-d/2} (log 1/η)^{d(2p+d)/(2p)}`.
    Interior { p: f64, b: f64, outer: Rect, inner: Rect, eps: f64 },
    /// Partition bound on `[η, u]^d` for a level sequence `η_0 < … < η_{l+1}`:
    /// `ε^{-d/2} S^{d(2q+d)/(2q)}`.
    Partition { d: usize, p: f64, q: f64, levels: Vec<f64>, eps: f64 },
}

/// An evaluated bound with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: &'static str,
    pub params: serde_json::Value,
    pub value: f64,
    /// Margin `η` for interior bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub convention: &'static str,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")))
    }
}

fn width_product(rect: &Rect, exponent: f64) -> f64 {
    rect.widths().map(|w| w.powf(exponent)).product()
}

/// Evaluates a bound expression under the unit-constant convention.
pub fn bound_rhs(bound: &Bound) -> Result<BoundReport> {
    let report = |name, params, value, eta| BoundReport {
        name,
        params,
        value,
        eta,
        convention: UNIT_CONSTANT_CONVENTION,
    };
    match bound {
        Bound::Bounded { q, b, rect, eps, lower } => {
            check_eps(*eps)?;
            if !(*q >= 1.0 && q.is_finite()) {
                return Err(Error::InvalidArgument(format!("q must be finite and >= 1, got {q}")));
            }
            let d = rect.dim() as f64;
            let scale = b * width_product(rect, 1.0 / q);
            let params = serde_json::json!({"d": rect.dim(), "q": q, "B": b, "rect": rect, "eps": eps});
            let name = if *lower { "bounded-lower" } else { "bounded-upper" };
            Ok(report(name, params, (eps / scale).powf(-d / 2.0), None))
        }
        Bound::Lp { p, q, b, rect, eps, lower } => {
            check_eps(*eps)?;
            check_q_below_p(p.value(), *q)?;
            let d = rect.dim() as f64;
            let scale = b * width_product(rect, 1.0 / q - p.recip());
            let params = serde_json::json!({"d": rect.dim(), "p": p, "q": q, "B": b, "rect": rect, "eps": eps});
            let name = if *lower { "lp-lower" } else { "lp-upper" };
            Ok(report(name, params, (eps / scale).powf(-d / 2.0), None))
        }
        Bound::Interior { p, b, outer, inner, eps } => {
            check_eps(*eps)?;
            let eta = interior_margin(outer, inner)?;
            let d = outer.dim() as f64;
            let value = (eps / b).powf(-d / 2.0)
                * (1.0 / eta).ln().powf(d * (2.0 * p + d) / (2.0 * p));
            let params = serde_json::json!({"d": outer.dim(), "p": p, "B": b, "outer": outer, "inner": inner, "eps": eps});
            Ok(report("interior-upper", params, value, Some(eta)))
        }
        Bound::Partition { d, p, q, levels, eps } => {
            check_eps(*eps)?;
            let s = level_sum(levels, *d, *p, *q)?;
            let df = *d as f64;
            let value = eps.powf(-df / 2.0) * s.powf(df * (2.0 * q + df) / (2.0 * q));
            let params = serde_json::json!({"d": d, "p": p, "q": q, "levels": levels, "eps": eps, "S": s});
            Ok(report("partition-upper", params, value, None))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson on `[0, β]` and `[β, 1]`, independent of the closed forms.
    fn simpson_c_integral(alpha: f64, p: f64, b: f64) -> f64 {
        let simpson = |lo: f64, hi: f64| {
            let n = 2000;
            let h = (hi - lo) / n as f64;
            let f = |u: f64| u.powf(alpha - 1.0) * (u - b).abs().powf(p);
            let mut s = f(lo) + f(hi);
            for k in 1..n {
                s += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        simpson(0.0, b) + simpson(b, 1.0)
    }

    #[test]
    fn closed_forms_match_simpson() {
        for alpha in [1.0, 2.0, 3.0] {
            for p in [1.0, 2.0, 3.0, 1.5, 2.5] {
                for b in [0.0, 0.2, 0.5, 0.77, 1.0] {
                    let a = c_integral(alpha, p, b);
                    let s = simpson_c_integral(alpha, p, b);
                    assert!((a - s).abs() < 1e-9, "alpha={alpha} p={p} b={b}: {a} vs {s}");
                }
            }
        }
    }

    #[test]
    fn known_values() {
        assert!((c_alpha_p(1.0, 1.0).unwrap() - 0.25).abs() < 1e-12);
        // β³/3 - β/2 + 1/3 at β = 1/√2
        let want = 1.0 / 3.0 - 1.0 / (3.0 * 2f64.sqrt());
        assert!((c_alpha_p(2.0, 1.0).unwrap() - want).abs() < 1e-12);
        // ∫(u - 1/2)² = 1/12
        assert!((c_alpha_p(1.0, 2.0).unwrap() - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn below_feasible_point() {
        for alpha in [0.5, 1.0, 2.5, 4.0] {
            for p in [0.5, 1.0, 2.0, 3.7] {
                let c = c_alpha_p(alpha, p).unwrap();
                assert!(c > 0.0 && c <= 1.0 / (alpha + p) + 1e-15, "alpha={alpha} p={p}");
            }
        }
    }

    #[test]
    fn envelope_values() {
        assert!((envelope_constant(1, 1.0).unwrap() - 4.0).abs() < 1e-9);
        assert!((envelope_constant(1, 2.0).unwrap() - 12f64.sqrt()).abs() < 1e-9);
        let c21 = 1.0 / 3.0 - 1.0 / (3.0 * 2f64.sqrt());
        assert!((envelope_constant(2, 1.0).unwrap() - 0.5 / c21).abs() < 1e-9);
        assert!((envelope_constant(2, 1.0).unwrap() - 5.1213).abs() < 1e-3);
    }

    #[test]
    fn u_threshold_values() {
        assert_eq!(u_threshold(1, 2.0, 1.0).unwrap(), 2f64.powi(-36));
        // 2·3·4·4 / (2·4) = 12
        assert_eq!(u_threshold(2, 3.0, 1.0).unwrap(), 2f64.powi(-12));
        for (d, p, q) in [(1, 1.5, 1.0), (3, 10.0, 2.0), (2, 100.0, 1.0)] {
            let u = u_threshold(d, p, q).unwrap();
            assert!(u > 0.0 && u < 0.5);
        }
        assert!(matches!(u_threshold(1, 1.0, 1.0), Err(Error::Regime(_))));
        assert!(matches!(u_threshold(1, 1.0, 2.0), Err(Error::Regime(_))));
    }

    #[test]
    fn eta_epsilon_values() {
        assert!((eta_epsilon(1, 2.0, 1.0, 0.2).unwrap() - 0.005).abs() < 1e-15);
        let near = eta_epsilon(1, 2.0, 1.0, 2.0 - 1e-9).unwrap();
        assert!(near < 0.5 && near > 0.5 - 1e-8);
        assert!(matches!(eta_epsilon(1, 2.0, 1.0, 2.0), Err(Error::Precondition(_))));
        assert!(eta_epsilon(1, 2.0, 1.0, 0.0).is_err());
        let mut prev = 0.0;
        for k in 1..100 {
            let eps = eps_max(2, 3.0, 1.5) * k as f64 / 100.0;
            let e = eta_epsilon(2, 3.0, 1.5, eps).unwrap();
            assert!(e > prev && e < 0.5);
            prev = e;
        }
    }

    #[test]
    fn bound_examples() {
        let lp = |p: Exponent, b: f64, rect: Rect, eps: f64| {
            bound_rhs(&Bound::Lp { p, q: 1.0, b, rect, eps, lower: false }).unwrap().value
        };
        for d in [1, 2, 3] {
            let v = lp(Exponent::Finite(2.0), 1.0, Rect::unit(d), 0.01);
            assert!((v - 0.01f64.powf(-(d as f64) / 2.0)).abs() < 1e-9 * v);
        }
        let v = lp(Exponent::Finite(2.0), 2.0, Rect::interval(0.0, 3.0).unwrap(), 0.1);
        let want = (0.1 / (2.0 * 3f64.sqrt())).powf(-0.5);
        assert!((v - want).abs() < 1e-12 * want);

        let rect = Rect::new(vec![0.0, -1.0], vec![2.0, 3.0]).unwrap();
        let big = lp(Exponent::Finite(1e6), 1.5, rect.clone(), 0.05);
        let inf = lp(Exponent::Infinite, 1.5, rect.clone(), 0.05);
        let bounded = bound_rhs(&Bound::Bounded { q: 1.0, b: 1.5, rect, eps: 0.05, lower: false }).unwrap();
        assert!((big - inf).abs() < 1e-4 * inf);
        assert!((bounded.value - inf).abs() < 1e-12 * inf);
        assert_eq!(bounded.convention, UNIT_CONSTANT_CONVENTION);

        let err = bound_rhs(&Bound::Lp {
            p: Exponent::Finite(1.0),
            q: 1.0,
            b: 1.0,
            rect: Rect::unit(1),
            eps: 0.1,
            lower: false,
        });
        assert!(matches!(err, Err(Error::Regime(_))));
    }

    #[test]
    fn interior_bound_example() {
        let p = 2.0;
        let r = bound_rhs(&Bound::Interior {
            p,
            b: 1.0,
            outer: Rect::unit(2),
            inner: Rect::cube(2, 0.1, 0.9).unwrap(),
            eps: 0.3,
        })
        .unwrap();
        assert!((r.eta.unwrap() - 0.1).abs() < 1e-15);
        let want = 0.3f64.powi(-1) * 10f64.ln().powf(2.0 * (2.0 * p + 2.0) / (2.0 * p));
        assert!((r.value - want).abs() < 1e-12 * want);
        assert!(bound_rhs(&Bound::Interior {
            p,
            b: 1.0,
            outer: Rect::unit(2),
            inner: Rect::unit(2),
            eps: 0.3,
        })
        .is_err());
    }
}
