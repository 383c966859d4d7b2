//! `eproc` — command-line front end for the E-process laboratory.
//!
//! Graphs travel between subcommands as plain edge-list files (`n m` header,
//! one `u v` line per edge); analysis subcommands print JSON to stdout.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result, bail};
use clap::{Args, Parser, Subcommand};

use eproc_core::experiments::{self, SweepSpec};
use eproc_core::generators::{self, Family, GenSpec};
use eproc_core::graph::{Graph, VertexSet};
use eproc_core::processes::{CheckMode, ProcessKind, RuleKind, RunConfig, StopRule, run_process};
use eproc_core::spectral::{self, SpectralSummary};
use eproc_core::structure::{self, DensityMode};

#[derive(Parser)]
#[command(name = "eproc", version, about = "Unvisited-edge-preferring walk laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it in edge-list format.
    Generate(GenerateArgs),
    /// Stationary distribution, eigenvalue gap, and mixing times.
    Spectral(SpectralArgs),
    /// Exact and bounded hitting times of a vertex set.
    Hit(HitArgs),
    /// Run one exploration trial and emit its record as JSON.
    Run(RunArgs),
    /// Minimum even-subgraph order at a vertex (or the whole graph).
    Goodness(GoodnessArgs),
    /// Edge-density certificate over small connected vertex sets.
    Density(DensityArgs),
    /// Second adjacency eigenvalue of a regular graph vs 2 sqrt(r-1) + eps.
    P1(P1Args),
    /// Multi-trial cover-time sweep over random regular graphs.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// random-regular, cycle, complete, torus-grid, bowtie, barbell, petersen
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 0)]
    n: usize,
    /// Degree (random-regular) or clique size (barbell).
    #[arg(long, default_value_t = 0)]
    r: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long)]
    input: PathBuf,
    /// Analyze the lazy chain (stays put with probability 1/2).
    #[arg(long)]
    lazy: bool,
}

#[derive(Args)]
struct HitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated vertex ids forming the target set.
    #[arg(long)]
    target: String,
    #[arg(long)]
    lazy: bool,
    /// Include the per-start-vertex hitting time vector.
    #[arg(long)]
    per_start: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    /// e, e-directed, or srw.
    #[arg(long, default_value = "e")]
    process: String,
    /// uniform, fixed, round-robin, or adversary:<script-file>.
    #[arg(long, default_value = "uniform")]
    rule: String,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// vertex or edge.
    #[arg(long, default_value = "vertex")]
    stop: String,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Drop the per-phase log from the output.
    #[arg(long)]
    no_phase_log: bool,
}

#[derive(Args)]
struct GoodnessArgs {
    #[arg(long)]
    input: PathBuf,
    /// Search ceiling on the subgraph order.
    #[arg(long)]
    cap: usize,
    /// Check a single vertex.
    #[arg(long, conflicts_with = "all")]
    vertex: Option<usize>,
    /// Check every vertex and report the minimum.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    smax: usize,
    /// Sample this many random connected sets instead of exhausting.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 1)]
    sample_seed: u64,
}

#[derive(Args)]
struct P1Args {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated degrees, e.g. 3,4,6.
    #[arg(long, default_value = "4,6")]
    degrees: String,
    /// Comma-separated sizes; defaults to powers of two from 2^10 to 2^16.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value = "e")]
    process: String,
    #[arg(long, default_value = "uniform")]
    rule: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "vertex")]
    stop: String,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Per-trial CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Summary CSV output path.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// SVG plot output path.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Full-scale grid up to 500000 vertices (tens of minutes).
    #[arg(long)]
    full: bool,
}

fn load_graph(path: &PathBuf) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Graph::from_edge_list(&text)?)
}

fn parse_rule(spec: &str) -> Result<RuleKind> {
    Ok(match spec {
        "uniform" => RuleKind::Uniform,
        "fixed" => RuleKind::Fixed,
        "round-robin" => RuleKind::RoundRobin,
        other => {
            if let Some(path) = other.strip_prefix("adversary:") {
                let source =
                    fs::read_to_string(path).with_context(|| format!("reading script {path}"))?;
                RuleKind::Script(source)
            } else {
                bail!("unknown rule `{other}` (expected uniform, fixed, round-robin, adversary:<file>)");
            }
        }
    })
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .with_context(|| format!("invalid {what} entry `{tok}`"))
        })
        .collect()
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let family = Family::parse(&args.family)?;
    let spec = GenSpec {
        family,
        n: args.n,
        r: args.r,
        seed: args.seed,
    };
    let g = generators::named(&spec)?;
    let text = g.to_edge_list();
    match &args.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_spectral(args: &SpectralArgs) -> Result<()> {
    let g = load_graph(&args.input)?;
    let s = SpectralSummary::compute(&g, args.lazy)?;
    let pi_min = s.pi.iter().cloned().fold(f64::INFINITY, f64::min);
    let pi_max = s.pi.iter().cloned().fold(0.0f64, f64::max);
    let out = serde_json::json!({
        "n": g.n(),
        "m": g.m(),
        "lazy": s.lazy,
        "pi_min": pi_min,
        "pi_max": pi_max,
        "lambda_max": s.lambda_max,
        "gap": s.gap,
        "T_mix_exact": s.t_mix_exact,
        "T_mix_analytic": s.t_mix_analytic,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_hit(args: &HitArgs) -> Result<()> {
    let g = load_graph(&args.input)?;
    let ids = parse_usize_list(&args.target, "target")?;
    let target = VertexSet::new(ids);
    let mut report = spectral::hitting_exact(&g, &target, args.lazy)?;
    if !args.per_start {
        report.per_start = None;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let g = load_graph(&args.input)?;
    let process = ProcessKind::parse(&args.process)?;
    let rule = parse_rule(&args.rule)?;
    let mut cfg = RunConfig::new(args.start, args.seed)
        .stop(StopRule::parse(&args.stop)?)
        .checks(CheckMode::Auto)
        .log_phases(!args.no_phase_log);
    cfg.max_steps = args.max_steps;
    let record = run_process(&g, process, &rule, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(())
}

fn cmd_goodness(args: &GoodnessArgs) -> Result<()> {
    let g = load_graph(&args.input)?;
    if let Some(v) = args.vertex {
        let report = structure::l_goodness(&g, v, args.cap)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else if args.all {
        let report = structure::graph_l_good(&g, args.cap, None)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        bail!("pass --vertex <v> or --all");
    }
    Ok(())
}

fn cmd_density(args: &DensityArgs) -> Result<()> {
    let g = load_graph(&args.input)?;
    let mode = match args.sample {
        Some(count) => DensityMode::Sample {
            count,
            seed: args.sample_seed,
        },
        None => DensityMode::Exhaustive,
    };
    let report = structure::density_check(&g, args.smax, mode)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_p1(args: &P1Args) -> Result<()> {
    let g = load_graph(&args.input)?;
    let report = structure::p1_check(&g, args.eps)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn default_sizes(full: bool) -> Vec<usize> {
    let mut sizes: Vec<usize> = (10..=16).map(|k| 1usize << k).collect();
    if full {
        sizes.extend((17..=18).map(|k| 1usize << k));
        sizes.push(500_000);
    }
    sizes
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let sizes = match &args.sizes {
        Some(s) => parse_usize_list(s, "sizes")?,
        None => default_sizes(args.full),
    };
    let mut spec = SweepSpec::new(parse_usize_list(&args.degrees, "degrees")?, sizes);
    spec.trials = args.trials;
    spec.process = ProcessKind::parse(&args.process)?;
    spec.rule = parse_rule(&args.rule)?;
    spec.seed = args.seed;
    spec.stop = StopRule::parse(&args.stop)?;
    spec.max_steps = args.max_steps;

    let result = experiments::sweep(&spec)?;
    if let Some(path) = &args.csv {
        fs::write(path, experiments::trials_csv(&result))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.summary {
        fs::write(path, experiments::summary_csv(&result))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.svg {
        fs::write(path, experiments::svg_plot(&result))
            .with_context(|| format!("writing {}", path.display()))?;
    }

    for p in &result.points {
        println!(
            "d={} n={} mean={:.1} stddev={:.1} normalized={:.4} timeouts={}",
            p.degree, p.n, p.mean, p.stddev, p.normalized, p.timeouts
        );
    }
    for f in &result.fits {
        println!(
            "d={} fit: c_nlogn={:.4} (sse {:.3e})  c_flat={:.4} (sse {:.3e})",
            f.degree, f.fit.c_nlogn, f.fit.residual_nlogn, f.fit.c_flat, f.fit.residual_flat
        );
    }
    for row in experiments::compare_lower_bound(&result) {
        println!(
            "d={} n={} mean/lower_bound = {:.4}",
            row.degree, row.n, row.ratio
        );
    }
    Ok(result.any_timeout())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate(args) => cmd_generate(args).map(|_| false),
        Command::Spectral(args) => cmd_spectral(args).map(|_| false),
        Command::Hit(args) => cmd_hit(args).map(|_| false),
        Command::Run(args) => cmd_run(args).map(|_| false),
        Command::Goodness(args) => cmd_goodness(args).map(|_| false),
        Command::Density(args) => cmd_density(args).map(|_| false),
        Command::P1(args) => cmd_p1(args).map(|_| false),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::FAILURE, // a sweep trial timed out
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
