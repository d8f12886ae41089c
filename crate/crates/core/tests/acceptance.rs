//! One PASS/FAIL line per acceptance criterion, each with its runtime limit.

mod common;

use std::process::Command as Process;
use std::sync::Arc;
use std::time::Instant;

use common::{c_grid_oracle, first_axis_section, polygon_hausdorff};
use convex_entropy::bodies::{inclusion_constant, random_body, support_fn};
use convex_entropy::constants::{c_alpha_p, envelope_constant, eta_epsilon, u_threshold};
use convex_entropy::convexfn::profile::Profile;
use convex_entropy::convexfn::{sample_ball_with, witness_fj, BallSpec, Exponent, SamplerConfig};
use convex_entropy::estimator::greedy_packing;
use convex_entropy::experiments::{
    cap_family_scan, entropy_scan, envelope_check, inclusion_scan, Command, ExperimentConfig,
};
use convex_entropy::geometry::{make_sphere_net, Rect};
use convex_entropy::metrics::{distance_matrix, sup_dist_support, Integrator, LqMetric};
use convex_entropy::partition::{
    build_plan, dyadic_schedule, geometric_schedule, doubling_check, pipeline_cover, scale_to_unit, tail_mass,
    DoublingOutcome,
};
use convex_entropy::seed::item_rng;
use rand::Rng;

struct Check {
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    secs: f64,
    limit: f64,
    detail: String,
}

fn criterion(id: u32, name: &'static str, limit: f64, body: impl FnOnce(&mut Check) -> String) -> Outcome {
    let start = Instant::now();
    let mut check = Check::new();
    let summary = body(&mut check);
    let secs = start.elapsed().as_secs_f64();
    check.require(secs < limit, format!("runtime {secs:.2} s exceeds {limit} s"));
    let detail = if check.failures.is_empty() {
        summary
    } else {
        format!("{summary}; failed: {}", check.failures.join("; "))
    };
    Outcome {
        id,
        name,
        pass: check.failures.is_empty(),
        secs,
        limit,
        detail,
    }
}

fn l1_unit() -> LqMetric {
    LqMetric::new(Exponent::Finite(1.0), Integrator::new(&Rect::unit(1), 1).unwrap()).unwrap()
}

fn witness_count(p: f64, eps: f64, j: u32) -> usize {
    let fs: Vec<_> = (1..=j).map(|i| witness_fj(i, 1, p)).collect();
    greedy_packing(&distance_matrix(&fs, &l1_unit()), eps).len()
}

fn witness_exactness(c: &mut Check) -> String {
    let mut worst = 0.0f64;
    for d in 1..=2 {
        for p in [1.0, 2.0] {
            for j in 1..=20 {
                let f = first_axis_section(&witness_fj(j, d, p)).expect("witness depends on x_1 only");
                worst = worst.max((Profile::of(&f, 0.0, 1.0).integrate_abs_pow(p) - 1.0).abs());
            }
        }
    }
    c.require(worst <= 1e-9, format!("mass error {worst:e} > 1e-9"));
    let d12 = l1_unit().dist(&witness_fj(1, 1, 1.0), &witness_fj(2, 1, 1.0));
    c.require((d12 - 2.0 / 3.0).abs() <= 1e-9, format!("d(f1,f2) = {d12}"));
    let fs: Vec<_> = (1..=20).map(|j| witness_fj(j, 1, 1.0)).collect();
    let dm = distance_matrix(&fs, &l1_unit());
    let min = dm.min_off_diagonal().unwrap();
    c.require(min >= 0.25 - 1e-9, format!("min pairwise {min} < 1/4"));
    let count = greedy_packing(&dm, 0.2).len();
    c.require(count == 20, format!("packing count {count} != 20"));
    format!("max |mass-1| = {worst:.1e}, d(f1,f2) = {d12:.12}, min pairwise = {min:.6}, count(0.2) = {count}")
}

fn regime_split(c: &mut Check) -> String {
    let sat: Vec<usize> = (1..=20).map(|j| witness_count(2.0, 0.05, j)).collect();
    let j0 = (0..20).find(|&i| sat[i..].iter().all(|&n| n == sat[i])).map(|i| i + 1);
    c.require(j0.is_some_and(|j| j < 20), format!("q<p counts keep growing: {sat:?}"));
    let linear = (1..=50u32).all(|j| witness_count(1.0, 0.2, j) == j as usize);
    c.require(linear, "q=p count differs from J for some J <= 50");
    format!("q=1<p=2 counts at eps=0.05 saturate at {} from J0 = {}; q=p=1 count = J for all J <= 50: {linear}", sat[19], j0.unwrap_or(0))
}

fn constants(c: &mut Check) -> String {
    let c11 = c_alpha_p(1.0, 1.0).unwrap();
    c.require((c11 - 0.25).abs() <= 1e-6, format!("C(1,1) = {c11}"));
    let c21 = c_alpha_p(2.0, 1.0).unwrap();
    let oracle = c_grid_oracle(2, 1, 100_000);
    c.require((c21 - 0.097631).abs() <= 1e-4, format!("C(2,1) = {c21}"));
    c.require((c21 - oracle).abs() <= 1e-4, format!("C(2,1) = {c21} vs oracle {oracle}"));
    let env = envelope_constant(1, 1.0).unwrap();
    c.require((env - 4.0).abs() <= 1e-6, format!("envelope(1,1) = {env}"));
    let u = u_threshold(1, 2.0, 1.0).unwrap();
    c.require(u == 2f64.powi(-36), format!("u(1,2,1) = {u:e}"));
    let m21 = inclusion_constant(2, Exponent::Finite(1.0)).unwrap();
    let m32 = inclusion_constant(3, Exponent::Finite(2.0)).unwrap();
    c.require((m21 - 12.0).abs() <= 1e-9, format!("M(2,1) = {m21}, expected 12"));
    c.require((m32 - 4.0).abs() <= 1e-9, format!("M(3,2) = {m32}"));
    format!("C(1,1) = {c11}, C(2,1) = {c21:.9} (oracle {oracle:.9}), envelope = {env}, u = 2^{}, M(2,1) = {m21}, M(3,2) = {m32}", u.log2())
}

fn envelope(c: &mut Check) -> String {
    let mut parts = Vec::new();
    for d in 1..=2 {
        for p in [1.0, 2.0] {
            let cfg = ExperimentConfig {
                d,
                p: Exponent::Finite(p),
                n: 1000,
                ..ExperimentConfig::new(Command::EnvelopeCheck)
            };
            let r = envelope_check(&cfg).unwrap();
            c.require(r.grid_points == 10usize.pow(d as u32), "y-grid size");
            c.require(r.violations == 0, format!("d={d} p={p}: {} violations", r.violations));
            parts.push(format!("(d={d},p={p}) max ratio {:.3}", r.max_ratio));
        }
    }
    format!("0 violations required; {}", parts.join(", "))
}

fn partition_identities(c: &mut Check) -> String {
    let configs = [(1usize, 2.0f64, 1.0f64), (2, 3.0, 1.0), (1, 3.0, 2.0)];
    let etas = [1e-3, 1e-6, 1e-9, 1e-12];
    let mut worst_budget = 0.0f64;
    let (mut checked, mut trivial) = (0, 0);
    let mut s_spread = Vec::new();
    let mut threshold_spread = Vec::new();
    for &(d, p, q) in &configs {
        let mut s_values = Vec::new();
        let mut threshold_s = Vec::new();
        for &eta in &etas {
            for u in [0.5, u_threshold(d, p, q).unwrap()] {
                if eta >= u {
                    continue;
                }
                let sched = geometric_schedule(eta, u, p, q).unwrap();
                for eps in [0.1, 0.5] {
                    let plan = build_plan(&sched, d, p, q, eps).unwrap();
                    let sum: f64 = plan.boxes.iter().map(|b| b.alpha.powf(q)).sum();
                    worst_budget = worst_budget.max((sum - eps.powf(q)).abs() / eps.powf(q));
                }
                if u == 0.5 {
                    s_values.push(build_plan(&sched, d, p, q, 1.0).unwrap().s);
                }
            }
            match doubling_check(d, p, q, eta).unwrap() {
                DoublingOutcome::Trivial { .. } => trivial += 1,
                DoublingOutcome::Checked(r) => {
                    checked += 1;
                    threshold_s.push(r.s);
                    c.require(r.pass(), format!("doubling checks fail at d={d} p={p} q={q} eta={eta:e}: {r:?}"));
                }
            }
        }
        let (lo, hi) = s_values.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
        let spread = hi / lo - 1.0;
        c.require(spread < 0.05, format!("S on [eta, 1/2] varies by {:.1}% for (d,p,q)=({d},{p},{q})", 100.0 * spread));
        s_spread.push(format!("({d},{p},{q}) {:.1}%", 100.0 * spread));
        if threshold_s.len() > 1 {
            let (lo, hi) = threshold_s.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
            threshold_spread.push(format!("({d},{p},{q}) {:.1}% over {} eta", 100.0 * (hi / lo - 1.0), threshold_s.len()));
        }
    }
    c.require(worst_budget <= 1e-12, format!("budget relative error {worst_budget:e}"));
    let mut dyadic_ok = true;
    for k in 1..=400 {
        let eta = 0.49 * 0.93f64.powi(k);
        let s = dyadic_schedule(eta).unwrap();
        dyadic_ok &= (s.l() + 1) as f64 <= (1.0 / eta).log2();
    }
    for k in 2..=40 {
        let s = dyadic_schedule(2f64.powi(-k)).unwrap();
        dyadic_ok &= (s.l() + 1) as f64 <= k as f64;
    }
    c.require(dyadic_ok, "dyadic l+1 exceeds log2(1/eta)");
    format!(
        "budget rel err {worst_budget:.1e}; doubling checks: {checked} checked, {trivial} trivial (eta >= u); S spread on [eta, 1/2]: {}; S spread on [eta, u]: {}; dyadic l+1 <= log2(1/eta): {dyadic_ok}",
        s_spread.join(", "),
        threshold_spread.join(", ")
    )
}

fn end_to_end(c: &mut Check) -> String {
    let spec = BallSpec::unit(1, Exponent::Finite(2.0));
    let cover = pipeline_cover(&spec, 1.0, 0.3).unwrap();
    let v = cover.validate(&SamplerConfig::default(), 200, 2024).unwrap();
    c.require(v.all_pass(), format!("{} of {} within eps", v.passes, v.samples));
    format!("{}/{} within eps = 0.3, max error {:.4}, log-cardinality {:.1}", v.passes, v.samples, v.max_error, cover.log_cardinality())
}

fn exponent_recovery(c: &mut Check) -> String {
    let cfg = ExperimentConfig::new(Command::EntropyScan);
    let s = entropy_scan(&cfg).unwrap();
    c.require(s.records.len() == 8, "8-point grid");
    let fit = s.fit.expect("fit");
    c.require((0.35..=0.65).contains(&fit.slope), format!("slope {}", fit.slope));
    c.require(fit.r_squared >= 0.95, format!("R^2 {}", fit.r_squared));
    format!("perturbation family, {} under {}: slope {:.4}, R^2 {:.4}", s.records.len(), s.metric, fit.slope, fit.r_squared)
}

fn bodies(c: &mut Check) -> String {
    let mut parts = Vec::new();
    for p in [1.0, 2.0] {
        let s = inclusion_scan(2, Exponent::Finite(p), 1000, 12, 3600, 99).unwrap();
        c.require(s.violations == 0, format!("p={p}: {} inclusion violations", s.violations));
        parts.push(format!("p={p}: 0/{} violations required, got {} (max ratio {:.3})", s.bodies, s.violations, s.max_ratio));
    }
    let net = Arc::new(make_sphere_net(2, 3600).unwrap());
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let a = random_body(2, 3 + (i % 10) as usize, 1000 + 2 * i).unwrap();
        let b = random_body(2, 3 + (i % 7) as usize, 1001 + 2 * i).unwrap();
        let d = sup_dist_support(&support_fn(&a, &net).unwrap(), &support_fn(&b, &net).unwrap()).unwrap();
        worst = worst.max((d - polygon_hausdorff(&a, &b)).abs());
    }
    c.require(worst <= 1e-3, format!("Hausdorff mismatch {worst:e}"));
    let scan = cap_family_scan(&(3..=9).collect::<Vec<_>>(), 3600, 42, false).unwrap();
    let fit = scan.fit.expect("fit");
    c.require((0.35..=0.65).contains(&fit.slope), format!("cap family slope {}", fit.slope));
    format!("{}; Hausdorff max error {worst:.1e}; cap-family slope {:.4} (R^2 {:.4})", parts.join(", "), fit.slope, fit.r_squared)
}

fn scaling(c: &mut Check) -> String {
    let sampler = SamplerConfig::default();
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let mut rng = item_rng(31, i);
        let a = rng.gen_range(-2.0..2.0);
        let w = rng.gen_range(0.2..4.0);
        let b = rng.gen_range(0.5..3.0);
        let (p, q) = [(2.0, 1.0), (3.0, 1.5), (1.5, 1.0), (4.0, 2.0)][i as usize % 4];
        let spec = BallSpec::new(Exponent::Finite(p), b, Rect::interval(a, a + w).unwrap()).unwrap();
        let integ = Integrator::new(&spec.rect, 1).unwrap();
        let f = sample_ball_with(&spec, &sampler, &mut rng, &integ).unwrap().f;
        let g = sample_ball_with(&spec, &sampler, &mut rng, &integ).unwrap().f;
        let before = LqMetric::new(Exponent::Finite(q), integ).unwrap().dist(&f, &g);
        let (fu, _) = scale_to_unit(&f, &spec, q).unwrap();
        let (gu, _) = scale_to_unit(&g, &spec, q).unwrap();
        let unit = LqMetric::new(Exponent::Finite(q), Integrator::new(&Rect::unit(1), 1).unwrap()).unwrap();
        let want = w.powf(1.0 / p - 1.0 / q) / b;
        worst = worst.max((unit.dist(&fu, &gu) / before - want).abs() / want);
    }
    c.require(worst <= 1e-9, format!("ratio error {worst:e}"));
    let mut violations = 0;
    let mut max_share = 0.0f64;
    for (k, (p, eps)) in [(2.0, 0.3), (2.0, 0.05), (3.0, 0.5), (1.5, 0.1)].into_iter().enumerate() {
        let spec = BallSpec::unit(1, Exponent::Finite(p));
        let integ = Integrator::new(&spec.rect, 1).unwrap();
        let eta = eta_epsilon(1, p, 1.0, eps).unwrap();
        for i in 0..250u64 {
            let f = sample_ball_with(&spec, &sampler, &mut item_rng(100 + k as u64, i), &integ).unwrap().f;
            let share = tail_mass(&f, eta, 1.0, 1).unwrap() / (eps / 2.0);
            max_share = max_share.max(share);
            violations += usize::from(share > 1.0);
        }
    }
    c.require(violations == 0, format!("{violations} tail violations"));
    format!("ratio rel err {worst:.1e} on 100 pairs; tail <= eps^q/2 on 1000 samples: {violations} violations (max share {max_share:.3})")
}

fn determinism(c: &mut Check) -> String {
    let bin = env!("CARGO_BIN_EXE_convex-entropy");
    let runs: [&[&str]; 4] = [
        &["entropy-scan"],
        &["entropy-scan", "--family", "sampled", "--p", "2", "--q", "1", "--n", "150", "--eps", "0.4,0.3,0.2,0.1"],
        &["constants", "--d", "2", "--p", "1"],
        &["envelope-check", "--d", "2", "--n", "200", "--format", "json"],
    ];
    let mut identical = 0;
    for args in runs {
        let out = |_| Process::new(bin).args(args).output().expect("binary runs");
        let (a, b) = (out(0), out(1));
        let same = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
        c.require(same, format!("{args:?} differs between runs or failed"));
        identical += usize::from(same);
    }
    format!("{identical}/{} CLI runs byte-identical on repeat", runs.len())
}

#[test]
fn acceptance() {
    let outcomes = vec![
        criterion(1, "witness exactness", 5.0, witness_exactness),
        criterion(2, "regime split", 10.0, regime_split),
        criterion(3, "constants", 5.0, constants),
        criterion(4, "envelope", 60.0, envelope),
        criterion(5, "partition identities", 5.0, partition_identities),
        criterion(6, "end-to-end cover", 120.0, end_to_end),
        criterion(7, "entropy exponent recovery", 120.0, exponent_recovery),
        criterion(8, "bodies", 180.0, bodies),
        criterion(9, "scaling identities", 30.0, scaling),
        criterion(10, "determinism", 5.0, determinism),
    ];
    for o in &outcomes {
        println!(
            "{} {:>2} {} ({:.2} s, limit {} s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.secs,
            o.limit,
            o.detail
        );
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
