//! Reproducible runners behind the `convex-entropy` CLI.
//!
//! Every run is a pure function of its [`ExperimentConfig`]. Rendered output
//! starts with a header carrying the tool version and the full config; the
//! body that follows is byte-identical across repeated runs.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{cap_family, check_inclusion, inclusion_constant, kp_norm, random_body_with, support_fn};
use crate::constants::{
    bound_rhs, c_alpha_p, envelope_bound, envelope_constant, eta_epsilon, u_threshold, Bound, UNIT_CONSTANT_CONVENTION,
};
use crate::convexfn::{
    perturbation_packing, sample_ball_with, witness_fj, BallSpec, Exponent, PLConvexFn, SamplerConfig,
};
use crate::estimator::{greedy_cover, greedy_packing, is_cover, is_packing, scaling_fit, ScanRecord};
use crate::geometry::{make_sphere_net, Rect};
use crate::metrics::{distance_matrix, sup_dist_support, DistanceMatrix, Integrator, LqMetric};
use crate::numeric::LineFit;
use crate::partition::pipeline::{CoverSummary, DyadicGrowth};
use crate::partition::{dyadic_growth, doubling_check, pipeline_cover, DoublingOutcome, Validation};
use crate::seed::{item_rng, phase_seed};
use crate::{Error, Result};

pub const TOOL: &str = "convex-entropy";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Phases of a run; each draws from its own sub-seed.
const PHASE_SAMPLES: u64 = 1;
const PHASE_BODIES: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    EntropyScan,
    EnvelopeCheck,
    PartitionDemo,
    BodiesCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// Population scanned by `entropy-scan`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `2^k` perturbed interpolants of a parabola in `C_∞`, one population per `k`.
    Perturbation,
    /// The witnesses `f_1, …, f_n`.
    Witness,
    /// `n` sampled members of `C_p(I, B)`.
    Sampled,
}

/// Everything a run depends on. Serialized into every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub d: usize,
    pub p: Exponent,
    pub q: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// `[a1, b1, a2, b2, …]`; the unit cube when empty.
    pub rect: Vec<f64>,
    pub eps: Vec<f64>,
    pub n: usize,
    /// Affine pieces per sampled function; vertices per random body.
    pub pieces: usize,
    pub seed: u64,
    /// Sphere-net size for bodies, y-grid points per axis for envelopes.
    pub resolution: usize,
    /// Quadrature cells per axis for grid integration.
    pub cells: usize,
    pub alpha: f64,
    pub family: Family,
    /// Interval counts for the perturbation and cap families.
    pub k: Vec<usize>,
    pub timings: bool,
    pub format: Format,
}

impl ExperimentConfig {
    /// Defaults for `command`.
    pub fn new(command: Command) -> Self {
        let base = ExperimentConfig {
            command,
            d: 1,
            p: Exponent::Finite(2.0),
            q: 1.0,
            b: 1.0,
            rect: Vec::new(),
            eps: Vec::new(),
            n: 200,
            pieces: 8,
            seed: 42,
            resolution: 10,
            cells: 64,
            alpha: 1.0,
            family: Family::Perturbation,
            k: (2..=9).collect(),
            timings: false,
            format: Format::Json,
        };
        match command {
            Command::Constants => ExperimentConfig {
                eps: vec![0.4, 0.3, 0.2, 0.1],
                format: Format::Text,
                ..base
            },
            Command::EntropyScan => ExperimentConfig {
                p: Exponent::Infinite,
                q: 2.0,
                format: Format::Csv,
                ..base
            },
            Command::EnvelopeCheck => ExperimentConfig {
                p: Exponent::Finite(1.0),
                n: 1000,
                ..base
            },
            Command::PartitionDemo => ExperimentConfig {
                eps: vec![0.3],
                ..base
            },
            Command::BodiesCheck => ExperimentConfig {
                d: 2,
                p: Exponent::Finite(1.0),
                n: 1000,
                pieces: 12,
                resolution: 3600,
                k: (3..=9).collect(),
                ..base
            },
        }
    }

    /// The rectangle named by `rect`, or the unit cube of dimension `d`.
    pub fn rectangle(&self) -> Result<Rect> {
        if self.rect.is_empty() {
            return Ok(Rect::unit(self.d));
        }
        if self.rect.len() != 2 * self.d {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.d,
                got: self.rect.len(),
            });
        }
        let lo = self.rect.iter().step_by(2).copied().collect();
        let hi = self.rect.iter().skip(1).step_by(2).copied().collect();
        Rect::new(lo, hi)
    }

    fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            pieces: self.pieces,
            ..SamplerConfig::default()
        }
    }

    fn integrator(&self, rect: &Rect) -> Result<Integrator> {
        Integrator::new(rect, self.cells)
    }

    fn q_exponent(&self) -> Result<Exponent> {
        Exponent::finite(self.q)
    }
}

/// A rendered run: the text to write and the number of invariant violations.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub violations: usize,
}

/// Runs `cfg.command` and renders it in `cfg.format`.
pub fn run(cfg: &ExperimentConfig) -> Result<Rendered> {
    match cfg.command {
        Command::Constants => {
            let t = constants_table(cfg)?;
            render(cfg, &t, None, t.violations, |out| t.write_text(out))
        }
        Command::EntropyScan => {
            let s = entropy_scan(cfg)?;
            render(cfg, &s, Some(&s.records), s.violations, |out| s.write_trailer(out))
        }
        Command::EnvelopeCheck => {
            let r = envelope_check(cfg)?;
            render(cfg, &r, None, r.violations, |_| ())
        }
        Command::PartitionDemo => {
            let r = partition_demo(cfg)?;
            render(cfg, &r, None, r.violations, |_| ())
        }
        Command::BodiesCheck => {
            let r = bodies_check(cfg)?;
            let records = r.scan.as_ref().map(|s| s.records.as_slice());
            render(cfg, &r, records, r.violations, |out| r.write_trailer(out))
        }
    }
}

/// `# convex-entropy <version>` and `# config: <json>` lines.
pub fn header_lines(cfg: &ExperimentConfig) -> Result<String> {
    Ok(format!("# {TOOL} {VERSION}\n# config: {}\n", to_json(cfg)?))
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))
}

#[derive(Serialize)]
struct Header<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
}

/// JSON output: `{"header": …, "body": …}`.
#[derive(Serialize)]
struct Document<'a, T> {
    header: Header<'a>,
    body: &'a T,
}

fn render<T: Serialize>(
    cfg: &ExperimentConfig,
    body: &T,
    records: Option<&[ScanRecord]>,
    violations: usize,
    trailer: impl FnOnce(&mut String),
) -> Result<Rendered> {
    let text = match cfg.format {
        Format::Json => {
            let doc = Document {
                header: Header {
                    tool: TOOL,
                    version: VERSION,
                    config: cfg,
                },
                body,
            };
            let mut s = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let records = records.ok_or_else(|| {
                Error::InvalidArgument(format!("{:?} has no tabular output; use --format json", cfg.command))
            })?;
            let mut s = header_lines(cfg)?;
            s.push_str(&records_csv(records)?);
            trailer(&mut s);
            s
        }
        Format::Text => {
            if cfg.command != Command::Constants {
                return Err(Error::InvalidArgument(format!(
                    "text output is only available for constants, not {:?}",
                    cfg.command
                )));
            }
            let mut s = header_lines(cfg)?;
            trailer(&mut s);
            s
        }
    };
    Ok(Rendered { text, violations })
}

/// Scan records as CSV with the columns `eps,pack,cover,n,seed,metric,secs`.
pub fn records_csv(records: &[ScanRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::InvalidArgument(format!("csv serialization failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv serialization failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

// ---------------------------------------------------------------- constants

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRow {
    pub name: String,
    pub params: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsTable {
    pub rows: Vec<ConstantRow>,
    pub convention: &'static str,
    pub violations: usize,
}

impl ConstantsTable {
    pub fn get(&self, name: &str) -> Option<&ConstantRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    fn write_text(&self, out: &mut String) {
        let w_name = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(4);
        let w_params = self.rows.iter().map(|r| r.params.chars().count()).max().unwrap_or(0).max(6);
        let _ = writeln!(out, "{:<w_name$}  {:<w_params$}  value", "name", "params");
        for r in &self.rows {
            let value = match (&r.value, &r.error) {
                (Some(v), _) => format!("{v:e}"),
                (None, Some(e)) => format!("error: {e}"),
                (None, None) => String::new(),
            };
            let pad = w_params + r.params.len() - r.params.chars().count();
            let _ = writeln!(out, "{:<w_name$}  {:<pad$}  {value}", r.name, r.params);
        }
    }
}

fn row(name: &str, params: String, value: Result<f64>) -> ConstantRow {
    let (value, error) = match value {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ConstantRow {
        name: name.to_string(),
        params,
        value,
        error,
    }
}

/// `C(α, p)`, the envelope constant, `u`, `η_ε` over the ε-grid and the
/// inclusion constant `M`. Regime errors appear in place of values.
pub fn constants_table(cfg: &ExperimentConfig) -> Result<ConstantsTable> {
    let (d, p, q, alpha) = (cfg.d, cfg.p, cfg.q, cfg.alpha);
    let pv = p.value();
    let mut rows = vec![
        row("C", format!("alpha={alpha}, p={p}"), c_alpha_p(alpha, pv)),
        row("envelope", format!("d={d}, p={p}"), envelope_constant(d, pv)),
    ];
    let u = u_threshold(d, pv, q);
    rows.push(row("log2_u", format!("d={d}, p={p}, q={q}"), u.as_ref().map(|u| u.log2()).map_err(Clone::clone)));
    rows.push(row("u", format!("d={d}, p={p}, q={q}"), u));
    for &eps in &cfg.eps {
        rows.push(row("eta_eps", format!("d={d}, p={p}, q={q}, eps={eps}"), eta_epsilon(d, pv, q, eps)));
    }
    rows.push(row("M", format!("d={d}, p={p}"), inclusion_constant(d, p)));
    Ok(ConstantsTable {
        rows,
        convention: UNIT_CONSTANT_CONVENTION,
        violations: 0,
    })
}

// ------------------------------------------------------------- entropy scan

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPoint {
    pub eps: f64,
    pub name: &'static str,
    pub value: f64,
}

/// Post-hoc checks of the greedy outputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScanChecks {
    pub invalid_packings: usize,
    pub invalid_covers: usize,
    /// Adjacent records on one population whose packing count increases with ε.
    pub packing_monotonicity_breaks: usize,
    /// Same for the greedy cover count; reported only, since greedy set
    /// cover is not monotone in ε.
    pub cover_monotonicity_breaks: usize,
}

impl ScanChecks {
    fn total(&self) -> usize {
        self.invalid_packings + self.invalid_covers + self.packing_monotonicity_breaks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutput {
    pub family: Family,
    pub metric: String,
    pub records: Vec<ScanRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<LineFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub bound: Vec<BoundPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_error: Option<String>,
    pub checks: ScanChecks,
    pub violations: usize,
    pub note: &'static str,
}

const POPULATION_NOTE: &str = "counts are relative to the scanned population: lower envelopes of covering numbers";

impl ScanOutput {
    fn write_trailer(&self, out: &mut String) {
        let _ = writeln!(out, "# fit: {}", json_line(&self.fit));
        if let Some(e) = &self.fit_error {
            let _ = writeln!(out, "# fit_error: {e}");
        }
        let _ = writeln!(out, "# bound: {}", json_line(&self.bound));
        if let Some(e) = &self.bound_error {
            let _ = writeln!(out, "# bound_error: {e}");
        }
        let _ = writeln!(out, "# checks: {}", json_line(&self.checks));
        let _ = writeln!(out, "# violations: {}", self.violations);
        let _ = writeln!(out, "# note: {}", self.note);
    }
}

fn json_line<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_else(|e| format!("\"{e}\""))
}

/// Scans one population: one record per ε, with validity checks.
fn scan_population(
    dm: &DistanceMatrix,
    eps_grid: &[f64],
    seed: u64,
    metric: &str,
    timings: bool,
    checks: &mut ScanChecks,
) -> Vec<ScanRecord> {
    let mut records = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let start = std::time::Instant::now();
        let pack = greedy_packing(dm, eps);
        let cover = greedy_cover(dm, eps);
        let secs = if timings { start.elapsed().as_secs_f64() } else { 0.0 };
        checks.invalid_packings += usize::from(!is_packing(dm, &pack, eps));
        checks.invalid_covers += usize::from(!is_cover(dm, &cover, eps));
        records.push(ScanRecord {
            eps,
            pack: pack.len(),
            cover: cover.len(),
            n: dm.len(),
            seed,
            metric: metric.to_string(),
            secs,
        });
    }
    let mut by_eps: Vec<&ScanRecord> = records.iter().collect();
    by_eps.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    checks.packing_monotonicity_breaks += by_eps.windows(2).filter(|w| w[1].pack > w[0].pack).count();
    checks.cover_monotonicity_breaks += by_eps.windows(2).filter(|w| w[1].cover > w[0].cover).count();
    records
}

/// Greedy packing and cover counts over the ε-grid, the exponent fit and the
/// unit-constant bound curve.
///
/// The perturbation family builds one population per `k` and scans it at
/// just below its exact separation; the ε-grid is ignored.
pub fn entropy_scan(cfg: &ExperimentConfig) -> Result<ScanOutput> {
    if !(1..=2).contains(&cfg.d) {
        return Err(Error::UnsupportedDimension {
            d: cfg.d,
            what: "entropy scans",
            supported: "d in {1, 2}",
        });
    }
    let rect = cfg.rectangle()?;
    let integ = cfg.integrator(&rect)?;
    let metric = LqMetric::new(cfg.q_exponent()?, integ.clone())?;
    let label = metric.descriptor();
    let mut checks = ScanChecks::default();
    let records = match cfg.family {
        Family::Perturbation => {
            let spec = BallSpec::new(Exponent::Infinite, cfg.b, rect.clone())?;
            if cfg.k.is_empty() {
                return Err(Error::InvalidArgument("empty k grid".into()));
            }
            let mut records = Vec::with_capacity(cfg.k.len());
            for &k in &cfg.k {
                let fam = perturbation_packing(k, &spec)?;
                let dm = distance_matrix(&fam.members, &metric);
                let sep = dm.min_off_diagonal().unwrap_or(fam.delta);
                let eps = sep * (1.0 - 1e-6);
                records.extend(scan_population(&dm, &[eps], cfg.seed, &label, cfg.timings, &mut checks));
            }
            records
        }
        Family::Witness => {
            require_eps(&cfg.eps)?;
            let p = finite_p(cfg.p, "the witness family")?;
            let fs: Vec<PLConvexFn> = (1..=cfg.n as u32)
                .map(|j| witness_fj(j, cfg.d, p).with_domain(rect.clone()))
                .collect();
            let dm = distance_matrix(&fs, &metric);
            scan_population(&dm, &cfg.eps, cfg.seed, &label, cfg.timings, &mut checks)
        }
        Family::Sampled => {
            require_eps(&cfg.eps)?;
            let spec = BallSpec::new(cfg.p, cfg.b, rect.clone())?;
            let fs = sample_population(&spec, &cfg.sampler(), cfg.n, phase_seed(cfg.seed, PHASE_SAMPLES), &integ)?;
            let dm = distance_matrix(&fs, &metric);
            scan_population(&dm, &cfg.eps, cfg.seed, &label, cfg.timings, &mut checks)
        }
    };
    let (fit, fit_error) = match scaling_fit(&records) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut bound = Vec::new();
    let mut bound_error = None;
    for r in &records {
        let b = match cfg.family {
            Family::Perturbation => Bound::Bounded {
                q: cfg.q,
                b: cfg.b,
                rect: rect.clone(),
                eps: r.eps,
                lower: false,
            },
            _ => Bound::Lp {
                p: cfg.p,
                q: cfg.q,
                b: cfg.b,
                rect: rect.clone(),
                eps: r.eps,
                lower: false,
            },
        };
        match bound_rhs(&b) {
            Ok(rep) => bound.push(BoundPoint {
                eps: r.eps,
                name: rep.name,
                value: rep.value,
            }),
            Err(e) => {
                bound_error = Some(e.to_string());
                break;
            }
        }
    }
    let violations = checks.total();
    Ok(ScanOutput {
        family: cfg.family,
        metric: label,
        records,
        fit,
        fit_error,
        bound,
        bound_error,
        checks,
        violations,
        note: POPULATION_NOTE,
    })
}

fn require_eps(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        Err(Error::InvalidArgument("empty eps grid".into()))
    } else {
        Ok(())
    }
}

fn finite_p(p: Exponent, what: &str) -> Result<f64> {
    match p {
        Exponent::Finite(p) => Ok(p),
        Exponent::Infinite => Err(Error::InvalidArgument(format!("{what} needs a finite p"))),
    }
}

/// `n` members of the ball, member `i` drawn from `item_rng(seed, i)`.
pub fn sample_population(
    spec: &BallSpec,
    sampler: &SamplerConfig,
    n: usize,
    seed: u64,
    integ: &Integrator,
) -> Result<Vec<PLConvexFn>> {
    (0..n)
        .into_par_iter()
        .map(|i| Ok(sample_ball_with(spec, sampler, &mut item_rng(seed, i as u64), integ)?.f))
        .collect()
}

// ---------------------------------------------------------- envelope check

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub d: usize,
    pub p: f64,
    /// The envelope constant `c`.
    pub c: f64,
    pub samples: usize,
    pub grid_points: usize,
    pub max_ratio: f64,
    pub violations: usize,
    /// Ratio for `φ ≡ 0`.
    pub zero_ratio: f64,
    pub witness: WitnessEnvelope,
}

/// The envelope evaluated on `f_1, …, f_20` near the face `y_1 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessEnvelope {
    pub j_max: u32,
    pub points: usize,
    pub max_ratio: f64,
    pub violations: usize,
}

/// Largest `|φ(y)| / (c ∏ max(y_i^{-1/p}, (1-y_i)^{-1/p}))` over the grid.
pub fn envelope_ratio(f: &PLConvexFn, c: f64, p: f64, grid: &[Vec<f64>]) -> f64 {
    grid.iter()
        .map(|y| f.value_at(y).abs() / envelope_bound(c, p, y))
        .fold(0.0, f64::max)
}

/// `m^d` points `((i_1 + 1/2)/m, …)` in the open unit cube.
pub fn open_cube_grid(d: usize, m: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    (0..m.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let v = axis[k % m];
                    k /= m;
                    v
                })
                .collect()
        })
        .collect()
}

/// Checks the pointwise envelope on sampled members of `C_p([0,1]^d, 1)`.
pub fn envelope_check(cfg: &ExperimentConfig) -> Result<EnvelopeReport> {
    let p = finite_p(cfg.p, "the envelope check")?;
    let d = cfg.d;
    let c = envelope_constant(d, p)?;
    let spec = BallSpec::unit(d, cfg.p);
    let integ = cfg.integrator(&spec.rect)?;
    let grid = open_cube_grid(d, cfg.resolution.max(1));
    let fs = sample_population(&spec, &cfg.sampler(), cfg.n, phase_seed(cfg.seed, PHASE_SAMPLES), &integ)?;
    let ratios: Vec<f64> = fs.par_iter().map(|f| envelope_ratio(f, c, p, &grid)).collect();
    let violations = ratios.iter().filter(|&&r| r > 1.0).count();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let zero_ratio = envelope_ratio(&PLConvexFn::zero(Rect::unit(d)), c, p, &grid);

    let j_max = 20;
    let near_face: Vec<Vec<f64>> = (1..=40)
        .map(|k| {
            let mut y = vec![0.5; d];
            y[0] = 2f64.powi(-k);
            y
        })
        .chain(grid.iter().cloned())
        .collect();
    let witness_ratios: Vec<f64> = (1..=j_max)
        .map(|j| envelope_ratio(&witness_fj(j, d, p), c, p, &near_face))
        .collect();
    let witness = WitnessEnvelope {
        j_max,
        points: near_face.len(),
        max_ratio: witness_ratios.iter().copied().fold(0.0, f64::max),
        violations: witness_ratios.iter().filter(|&&r| r > 1.0).count(),
    };
    Ok(EnvelopeReport {
        d,
        p,
        c,
        samples: cfg.n,
        grid_points: grid.len(),
        max_ratio,
        violations: violations + witness.violations,
        zero_ratio,
        witness,
    })
}

// ----------------------------------------------------------- partition demo

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetCheck {
    /// `Σ α_i^q` over the boxes of one orthant.
    pub alpha_sum: f64,
    /// The orthant tolerance raised to `q`.
    pub target: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub cover: CoverSummary,
    pub validation: Validation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetCheck>,
    /// Doubling checks on the geometric schedule below the threshold `u`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubling: Option<DoublingOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubling_error: Option<String>,
    /// `S` on dyadic schedules with `q = p`.
    pub dyadic: DyadicGrowth,
    pub violations: usize,
}

/// Relative tolerance on `Σ α^q = ε^q`.
pub const BUDGET_RTOL: f64 = 1e-12;

/// Builds the materialized cover of `C_p(I, B)` (`d = 1`) at the first ε of
/// the grid and validates it on `n` fresh members.
pub fn partition_demo(cfg: &ExperimentConfig) -> Result<PartitionReport> {
    if cfg.d != 1 {
        return Err(Error::UnsupportedDimension {
            d: cfg.d,
            what: "materialized partition covers",
            supported: "d = 1",
        });
    }
    let p = finite_p(cfg.p, "the partition demo")?;
    let eps = *cfg.eps.first().ok_or_else(|| Error::InvalidArgument("empty eps grid".into()))?;
    let spec = BallSpec::new(cfg.p, cfg.b, cfg.rectangle()?)?;
    let cover = pipeline_cover(&spec, cfg.q, eps)?;
    let validation = cover.validate(&cfg.sampler(), cfg.n, phase_seed(cfg.seed, PHASE_SAMPLES))?;
    let summary = cover.summary();
    let budget = summary.inner.as_ref().map(|inner| {
        let target = inner.orthant_tolerance.powf(cfg.q);
        let alpha_sum = inner.plan.alpha_budget().powf(cfg.q);
        BudgetCheck {
            alpha_sum,
            target,
            relative_error: (alpha_sum - target).abs() / target,
        }
    });
    let (doubling, doubling_error) = match &summary.inner {
        Some(inner) => match doubling_check(cfg.d, p, cfg.q, inner.eta) {
            Ok(k) => (Some(k), None),
            Err(e) => (None, Some(e.to_string())),
        },
        None => (None, None),
    };
    let etas: Vec<f64> = (1..=12).map(|k| 10f64.powi(-k)).collect();
    let dyadic = dyadic_growth(cfg.d, p, &etas)?;
    let budget_breaks = budget.as_ref().map_or(0, |b| usize::from(b.relative_error > BUDGET_RTOL));
    let violations = validation.samples - validation.passes + budget_breaks;
    Ok(PartitionReport {
        cover: summary,
        validation,
        budget,
        doubling,
        doubling_error,
        dyadic,
        violations,
    })
}

// ------------------------------------------------------------ bodies check

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionSummary {
    pub p: Exponent,
    /// `M`.
    pub constant: f64,
    pub bodies: usize,
    pub max_ratio: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodiesScan {
    pub metric: String,
    pub records: Vec<ScanRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<LineFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub checks: ScanChecks,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodiesReport {
    pub d: usize,
    pub inclusion: InclusionSummary,
    /// Entropy scan of the cap family in `K_∞(1)`; planar only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<BodiesScan>,
    pub violations: usize,
    pub note: &'static str,
}

impl BodiesReport {
    fn write_trailer(&self, out: &mut String) {
        let _ = writeln!(out, "# inclusion: {}", json_line(&self.inclusion));
        if let Some(s) = &self.scan {
            let _ = writeln!(out, "# fit: {}", json_line(&s.fit));
            if let Some(e) = &s.fit_error {
                let _ = writeln!(out, "# fit_error: {e}");
            }
            let _ = writeln!(out, "# checks: {}", json_line(&s.checks));
        }
        let _ = writeln!(out, "# violations: {}", self.violations);
        let _ = writeln!(out, "# note: {}", self.note);
    }
}

/// Random polytopes rescaled to `‖h_K‖_{L^p} = 1`, checked against the ball
/// of radius `M`.
pub fn inclusion_scan(d: usize, p: Exponent, n: usize, vertices: usize, resolution: usize, seed: u64) -> Result<InclusionSummary> {
    let net = Arc::new(make_sphere_net(d, resolution)?);
    let ratios: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let body = random_body_with(d, vertices, &mut item_rng(seed, i as u64))?;
            let norm = kp_norm(&support_fn(&body, &net)?, p);
            let report = check_inclusion(&body.scaled(1.0 / norm), p, 1.0, &net)?;
            Ok(if report.applicable { report.ratio } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    Ok(InclusionSummary {
        p,
        constant: inclusion_constant(d, p)?,
        bodies: n,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        violations: ratios.iter().filter(|&&r| r > 1.0).count(),
    })
}

/// Cap-family populations under the support sup distance, one per `k`,
/// each scanned just below its measured separation.
pub fn cap_family_scan(ks: &[usize], resolution: usize, seed: u64, timings: bool) -> Result<BodiesScan> {
    let net = Arc::new(make_sphere_net(2, resolution)?);
    let metric = format!("sup-support/net-{resolution}");
    let mut checks = ScanChecks::default();
    let mut records = Vec::with_capacity(ks.len());
    for &k in ks {
        let hs = cap_family(k)?
            .iter()
            .map(|b| support_fn(b, &net))
            .collect::<Result<Vec<_>>>()?;
        let dm = DistanceMatrix::from_fn(hs.len(), |i, j| {
            sup_dist_support(&hs[i], &hs[j]).expect("shared net")
        });
        let sep = dm
            .min_off_diagonal()
            .ok_or_else(|| Error::InvalidArgument("cap family needs two members".into()))?;
        records.extend(scan_population(&dm, &[sep * (1.0 - 1e-6)], seed, &metric, timings, &mut checks));
    }
    let (fit, fit_error) = match scaling_fit(&records) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(BodiesScan {
        metric,
        records,
        fit,
        fit_error,
        checks,
    })
}

/// Inclusion checks on random normalized bodies and, for `d = 2`, the
/// entropy scan of the cap family.
pub fn bodies_check(cfg: &ExperimentConfig) -> Result<BodiesReport> {
    let seed = phase_seed(cfg.seed, PHASE_BODIES);
    let inclusion = inclusion_scan(cfg.d, cfg.p, cfg.n, cfg.pieces, cfg.resolution, seed)?;
    let scan = if cfg.d == 2 && !cfg.k.is_empty() {
        Some(cap_family_scan(&cfg.k, cfg.resolution, cfg.seed, cfg.timings)?)
    } else {
        None
    };
    let violations = inclusion.violations + scan.as_ref().map_or(0, |s| s.checks.total());
    Ok(BodiesReport {
        d: cfg.d,
        inclusion,
        scan,
        violations,
        note: POPULATION_NOTE,
    })
}
