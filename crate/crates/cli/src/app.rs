//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use vdselect_core::{DummyLaw, SelectorKind};

use crate::bench::{bench_to_file, BenchMode, BenchParams};
use crate::error::CliError;
use crate::model::{gen_model, ModelParams};
use crate::select::{select_to_file, SelectParams};
use crate::sim::{self, SimReport};

pub const THREADS_ENV: &str = "VDSELECT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "vdselect", version, about = "Virtual-dummy T-Rex selection, simulations and benchmarks")]
pub struct Cli {
    /// Worker threads for Monte Carlo loops; falls back to VDSELECT_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write a null manifest timestamp so outputs are byte-for-byte
    /// reproducible.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run T-Rex on a VDMX design and response.
    Select(SelectArgs),
    /// Virtual against explicit dummies on a fixed model.
    SimEquivalence(EquivalenceArgs),
    /// FDP and TPP of T-Rex over a parameter grid.
    SimFdr(SimArgs),
    /// Fresh-projection normality under non-Gaussian dummy coordinates.
    SimUniversality(SimArgs),
    /// Gaussian against spherical dummies and the max-correlation check.
    SimNormInflation(SimArgs),
    /// Number of steps until the T-th dummy enters.
    SimPathLength(SimArgs),
    /// Memory and runtime of virtual or explicit dummies.
    Bench(BenchArgs),
    /// Write a synthetic instance: x.vdmx, y.csv and truth.json.
    GenModel(GenModelArgs),
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Design matrix (VDMX).
    #[arg(long)]
    pub x: PathBuf,
    /// Response: VDMX with one column or a single-column CSV.
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Dummies per experiment as a multiple of p.
    #[arg(long, default_value_t = 10)]
    pub l_factor: usize,
    #[arg(long, default_value_t = 10)]
    pub t_max: usize,
    /// Number of random experiments.
    #[arg(long, default_value_t = 20)]
    pub b: usize,
    /// spherical, gaussian-proj or gaussian-norm.
    #[arg(long, default_value = "spherical")]
    pub law: DummyLaw,
    /// lars or omp.
    #[arg(long, default_value = "lars")]
    pub selector: SelectorKind,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Read the design column by column from a memory map.
    #[arg(long)]
    pub mmap: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Flat key = value parameter file; missing keys take defaults.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EquivalenceArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Drive the virtual run from each replicate's explicit block.
    #[arg(long)]
    pub shadow: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Comma-separated multiples of p.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub l_factor: Vec<usize>,
    #[arg(long, value_enum, default_value_t = BenchMode::Vd)]
    pub mode: BenchMode,
    #[arg(long, default_value_t = 10)]
    pub t: usize,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Largest explicit dummy block the ad mode may allocate.
    #[arg(long, default_value_t = 1 << 30)]
    pub budget_bytes: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// CSV path; a .json sidecar is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenModelArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1.0)]
    pub snr: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV}='{v}' is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    Ok(n)
}

fn print_report(report: &SimReport) {
    for f in &report.files {
        println!("{}", f.display());
    }
    for line in &report.summary {
        println!("{line}");
    }
}

/// Executes a parsed command line; standard output carries only written
/// paths and summary lines.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = thread_count(cli.threads)? {
        // A pool built earlier in the process stays in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let stamp = !cli.no_timestamp;
    match cli.command {
        Command::Select(a) => {
            let params = SelectParams {
                x: a.x,
                y: a.y,
                alpha: a.alpha,
                l_factor: a.l_factor,
                t_max: a.t_max,
                b: a.b,
                law: a.law,
                selector: a.selector,
                seed: a.seed,
                mmap: a.mmap,
            };
            let out = select_to_file(&params, &a.out, stamp)?;
            println!("{}", a.out.display());
            println!(
                "selected {} of {} (v* = {}, T* = {}, feasible = {})",
                out.selected.len(),
                out.l / a.l_factor,
                out.v_star.map_or("none".into(), |v| v.to_string()),
                out.t_star.map_or("none".into(), |t| t.to_string()),
                out.feasible
            );
        }
        Command::SimEquivalence(a) => {
            let params = sim::equivalence_params(a.sim.params.as_deref(), a.shadow)?;
            print_report(&sim::sim_equivalence(&params, &a.sim.out, stamp)?);
        }
        Command::SimFdr(a) => {
            let params = sim::fdr_params(a.params.as_deref())?;
            print_report(&sim::sim_fdr(&params, &a.out, stamp)?);
        }
        Command::SimUniversality(a) => {
            let params = sim::universality_params(a.params.as_deref())?;
            print_report(&sim::sim_universality(&params, &a.out, stamp)?);
        }
        Command::SimNormInflation(a) => {
            let params = sim::norm_inflation_params(a.params.as_deref())?;
            print_report(&sim::sim_norm_inflation(&params, &a.out, stamp)?);
        }
        Command::SimPathLength(a) => {
            let params = sim::path_length_params(a.params.as_deref())?;
            print_report(&sim::sim_path_length(&params, &a.out, stamp)?);
        }
        Command::Bench(a) => {
            let params = BenchParams {
                n: a.n,
                p: a.p,
                l_factors: a.l_factor,
                mode: a.mode,
                t: a.t,
                reps: a.reps,
                budget_bytes: a.budget_bytes,
                seed: a.seed,
            };
            let records = bench_to_file(&params, &a.out, stamp)?;
            println!("{}", a.out.display());
            println!("{}", a.out.with_extension("json").display());
            for r in records {
                println!(
                    "{} n={} p={} L={} median_ms={:.3} dummy_ms_per_step={:.4} dummy_bytes={}",
                    r.mode.name(),
                    r.n,
                    r.p,
                    r.l,
                    r.median_ms,
                    r.dummy_ms_per_step,
                    r.dummy_bytes
                );
            }
        }
        Command::GenModel(a) => {
            let params = ModelParams {
                n: a.n,
                p: a.p,
                s: a.s,
                snr: a.snr,
                seed: a.seed,
            };
            for f in gen_model(&params, &a.out, stamp)? {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}
