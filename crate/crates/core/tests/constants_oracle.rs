mod common;

use common::c_grid_oracle;
use convex_entropy::bodies::inclusion_constant;
use convex_entropy::constants::{c_alpha_p, envelope_constant, eta_epsilon, u_threshold};
use convex_entropy::convexfn::Exponent;

#[test]
fn c_alpha_p_matches_beta_grid_oracle() {
    for alpha in 1..=3 {
        for p in 1..=3 {
            let oracle = c_grid_oracle(alpha, p, 100_000);
            let c = c_alpha_p(alpha as f64, p as f64).unwrap();
            assert!(c <= oracle + 1e-12, "alpha={alpha} p={p}: {c} above grid minimum {oracle}");
            assert!((c - oracle).abs() < 1e-8, "alpha={alpha} p={p}: {c} vs {oracle}");
        }
    }
}

#[test]
fn c_alpha_p_is_smooth_in_p() {
    let a = c_alpha_p(2.0, 2.0).unwrap();
    let b = c_alpha_p(2.0, 2.0 + 1e-7).unwrap();
    assert!((a - b).abs() < 1e-6);
}

#[test]
fn envelope_constant_from_oracle() {
    for d in 1..=3u32 {
        for p in 1..=3u32 {
            let oracle = (d as f64).powf(-1.0 / p as f64) * c_grid_oracle(d, p, 100_000).powf(-1.0 / p as f64);
            let c = envelope_constant(d as usize, p as f64).unwrap();
            assert!((c - oracle).abs() < 1e-6 * oracle, "d={d} p={p}");
        }
    }
}

#[test]
fn threshold_exponent_identity() {
    for (d, p, q) in [(1usize, 2.0f64, 1.0f64), (2, 3.0, 1.0), (1, 3.0, 2.0), (3, 5.0, 2.5)] {
        let e = 2.0 * p * (p + q) * (2.0 * q + d as f64) / (d as f64 * (p - q).powi(2));
        let u = u_threshold(d, p, q).unwrap();
        assert!((u.log2() + e).abs() < 1e-9, "d={d} p={p} q={q}");
    }
}

#[test]
fn eta_epsilon_inverts() {
    for (d, p, q) in [(1usize, 2.0f64, 1.0f64), (2, 3.0, 1.0), (3, 4.0, 2.0)] {
        for eps in [0.01, 0.1, 0.5] {
            let eta = eta_epsilon(d, p, q, eps).unwrap();
            let back = (2.0 * (2.0 * d as f64 * eta).powf((p - q) / p)).powf(1.0 / q);
            assert!((back - eps).abs() < 1e-12, "d={d} p={p} q={q} eps={eps}");
        }
    }
}

#[test]
fn inclusion_constants() {
    assert!((inclusion_constant(3, Exponent::Finite(2.0)).unwrap() - 4.0).abs() < 1e-9);
    assert!((inclusion_constant(2, Exponent::Finite(1.0)).unwrap() - 6.0).abs() < 1e-9);
    assert_eq!(inclusion_constant(2, Exponent::Infinite).unwrap(), 2.0);
}
