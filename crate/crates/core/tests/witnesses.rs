mod common;

use common::first_axis_section;
use convex_entropy::convexfn::profile::Profile;
use convex_entropy::convexfn::{witness_fj, Exponent};
use convex_entropy::estimator::greedy_packing;
use convex_entropy::geometry::Rect;
use convex_entropy::metrics::{distance_matrix, Integrator, LqMetric};

fn l1() -> LqMetric {
    LqMetric::new(Exponent::Finite(1.0), Integrator::new(&Rect::unit(1), 1).unwrap()).unwrap()
}

#[test]
fn witnesses_have_unit_mass() {
    for d in 1..=2 {
        for p in [1.0, 2.0] {
            for j in 1..=20 {
                let f = first_axis_section(&witness_fj(j, d, p)).expect("depends on x_1 only");
                let mass = Profile::of(&f, 0.0, 1.0).integrate_abs_pow(p);
                assert!((mass - 1.0).abs() < 1e-9, "d={d} p={p} j={j}: {mass}");
            }
        }
    }
}

#[test]
fn first_pair_distance() {
    let d = l1().dist(&witness_fj(1, 1, 1.0), &witness_fj(2, 1, 1.0));
    assert!((d - 2.0 / 3.0).abs() < 1e-9, "{d}");
}

/// `∫|f_j - f_k|` in closed form for `p = 1`, `j < k`: the ramps cross at
/// `x* = (2^k - 2^j) / (2^{2k} - 2^{2j})`.
fn l1_oracle(j: u32, k: u32) -> f64 {
    let (a, b) = (2f64.powi(j as i32), 2f64.powi(k as i32));
    let fj = |x: f64| (2.0 * a * (1.0 - a * x)).max(0.0);
    let fk = |x: f64| (2.0 * b * (1.0 - b * x)).max(0.0);
    let xs = (b - a) / (b * b - a * a);
    // f_k dominates on [0, x*], f_j on [x*, 1/a]
    let area = |g: &dyn Fn(f64) -> f64, lo: f64, hi: f64| (g(lo) + g(hi)) / 2.0 * (hi - lo);
    let upper = area(&fk, 0.0, xs) - area(&fj, 0.0, xs);
    let lower = area(&fj, xs, 1.0 / b) - area(&fk, xs, 1.0 / b) + area(&fj, 1.0 / b, 1.0 / a);
    upper + lower
}

#[test]
fn pairwise_distances_match_closed_form() {
    let fs: Vec<_> = (1..=20).map(|j| witness_fj(j, 1, 1.0)).collect();
    let dm = distance_matrix(&fs, &l1());
    for j in 0..20 {
        for k in j + 1..20 {
            let want = l1_oracle(j as u32 + 1, k as u32 + 1);
            assert!((dm.get(j, k) - want).abs() < 1e-9, "j={j} k={k}");
        }
    }
    assert!(dm.min_off_diagonal().unwrap() >= 0.25 - 1e-9);
    assert_eq!(greedy_packing(&dm, 0.2).len(), 20);
}

#[test]
fn packing_counts_split_by_regime() {
    let metric = l1();
    let grow = |p: f64, eps: f64, j: u32| {
        let fs: Vec<_> = (1..=j).map(|i| witness_fj(i, 1, p)).collect();
        greedy_packing(&distance_matrix(&fs, &metric), eps).len()
    };
    for j in [1, 5, 10, 25, 50] {
        assert_eq!(grow(1.0, 0.2, j), j as usize);
    }
    let counts: Vec<usize> = (1..=20).map(|j| grow(2.0, 0.05, j)).collect();
    assert!(counts.windows(2).any(|w| w[0] == w[1]));
    assert_eq!(counts[19], counts[10], "{counts:?}");
}
