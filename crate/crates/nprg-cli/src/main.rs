//! `nprg` — exact renormalization-group flows for quantum-mechanical
//! potentials at the local-potential approximation.
//!
//! Every run verb reads one JSON experiment config, writes CSV/JSON
//! artifacts plus a checksummed manifest into `--out`, and exits 0 only
//! when every point of the run completed or was declared an expected
//! failure. `compare` joins finished runs on their shared parameter axis.

mod config;
mod manifest;
mod studies;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use config::StudyConfig;

#[derive(Parser)]
#[command(name = "nprg", version, about = "RG flow solver suite for quantum mechanics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single flow (study `flow`).
    Flow(RunArgs),
    /// Run an observable sweep over a coupling axis (study `sweep`).
    Sweep(RunArgs),
    /// Classify dimensionless seeds into phase basins (study `flow_diagram`).
    FlowDiagram(RunArgs),
    /// Locate fixed points of the dimensionless flow (study `fixed_points`).
    FixedPoints(RunArgs),
    /// Scan the supersymmetric pair over `g` (study `susy`).
    Susy(RunArgs),
    /// Scan two-particle interactions (study `two_particle`).
    TwoParticle(RunArgs),
    /// Pole-dominance diagnostics over a coupling axis (study `poles`).
    Poles(RunArgs),
    /// Join run manifests on their shared axis with deviation columns.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for data files and the manifest.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for independent points (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Output directory for the joined table and its manifest.
    #[arg(long)]
    out: PathBuf,
    /// Manifests of the runs to join (two or more).
    #[arg(required = true)]
    manifests: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Compare(args) => studies::compare::run(&args.manifests, &args.out),
        Cmd::Flow(args) => run_study(args, "flow"),
        Cmd::Sweep(args) => run_study(args, "sweep"),
        Cmd::FlowDiagram(args) => run_study(args, "flow_diagram"),
        Cmd::FixedPoints(args) => run_study(args, "fixed_points"),
        Cmd::Susy(args) => run_study(args, "susy"),
        Cmd::TwoParticle(args) => run_study(args, "two_particle"),
        Cmd::Poles(args) => run_study(args, "poles"),
    }
}

fn run_study(args: RunArgs, verb_study: &str) -> Result<i32> {
    init_pool(args.jobs);
    let (cfg, echo) = config::load(&args.config)?;
    if cfg.study_name() != verb_study {
        bail!(
            "config declares study `{}` but the `{}` verb expects `{verb_study}`",
            cfg.study_name(),
            verb_study.replace('_', "-"),
        );
    }
    let out = &args.out;
    match &cfg {
        StudyConfig::Flow(c) => studies::flow::run(c, echo, out),
        StudyConfig::Sweep(c) => studies::sweep::run(c, echo, out),
        StudyConfig::FlowDiagram(c) => studies::diagram::run(c, echo, out),
        StudyConfig::FixedPoints(c) => studies::fixed_points::run(c, echo, out),
        StudyConfig::Susy(c) => studies::susy::run(c, echo, out),
        StudyConfig::TwoParticle(c) => studies::two_particle::run(c, echo, out),
        StudyConfig::Poles(c) => studies::poles::run(c, echo, out),
    }
}

#[cfg(feature = "parallel")]
fn init_pool(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // Ignore the error from re-initialization: only the first call can
        // size the global pool, and `main` runs once.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_pool(jobs: Option<usize>) {
    if jobs.is_some() {
        eprintln!("warning: built without the `parallel` feature; --jobs is ignored");
    }
}
