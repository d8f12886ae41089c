use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use convex_entropy::convexfn::Exponent;
use convex_entropy::experiments::{run, Command, ExperimentConfig, Family, Format};

/// Covering and packing experiments for balls of convex functions and convex bodies.
#[derive(Parser, Debug)]
#[command(name = "convex-entropy", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// C(α,p), the envelope constant, u, η_ε over the ε-grid and M.
    Constants(Opts),
    /// Greedy packing and cover counts over an ε-grid with an exponent fit.
    EntropyScan(Opts),
    /// Pointwise envelope on sampled members of the unit L^p ball.
    EnvelopeCheck(Opts),
    /// Materialized partition cover of C_p([a,b],B), validated on fresh samples.
    PartitionDemo(Opts),
    /// Inclusion K_p(1) ⊆ B(0,M) on random bodies and the planar entropy scan.
    BodiesCheck(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    #[arg(long)]
    d: Option<usize>,
    /// Ball exponent; `inf` for the uniformly bounded class.
    #[arg(long)]
    p: Option<Exponent>,
    /// Metric exponent.
    #[arg(long)]
    q: Option<f64>,
    /// Ball radius.
    #[arg(long = "B")]
    b: Option<f64>,
    /// Rectangle bounds a1,b1[,a2,b2].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    rect: Option<Vec<f64>>,
    /// ε-grid; the perturbation family derives its grid from --k.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Population size, validation samples or body count.
    #[arg(long)]
    n: Option<usize>,
    /// Affine pieces per sampled function, vertices per random body.
    #[arg(long)]
    pieces: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sphere-net size (bodies) or y-grid points per axis (envelope).
    #[arg(long)]
    resolution: Option<usize>,
    /// Quadrature cells per axis for grid integration.
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Interval counts for the perturbation and cap families.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Record wall time per scan row (breaks byte-identical output).
    #[arg(long)]
    timings: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Opts {
    fn config(self, command: Command) -> (ExperimentConfig, Option<PathBuf>) {
        let mut c = ExperimentConfig::new(command);
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(d, p, q, b, rect, eps, n, pieces, seed, resolution, cells, alpha, family, k, format);
        c.timings = self.timings;
        (c, self.out)
    }
}

fn thread_pool() -> Result<(), String> {
    let Ok(v) = std::env::var("CONVEX_ENTROPY_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| format!("CONVEX_ENTROPY_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (cfg, out) = match cli.command {
        Cmd::Constants(o) => o.config(Command::Constants),
        Cmd::EntropyScan(o) => o.config(Command::EntropyScan),
        Cmd::EnvelopeCheck(o) => o.config(Command::EnvelopeCheck),
        Cmd::PartitionDemo(o) => o.config(Command::PartitionDemo),
        Cmd::BodiesCheck(o) => o.config(Command::BodiesCheck),
    };
    let rendered = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &out {
        Some(path) => std::fs::write(path, &rendered.text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(rendered.text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if rendered.violations == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} invariant violation(s)", rendered.violations);
        ExitCode::from(1)
    }
}
