use std::path::PathBuf;
use std::process::ExitCode;

use aircomp_core::experiment::{eta_report, optimal_radius, run_sweep, RadiusSearch, RunConfig, VariantSelection};
use aircomp_core::{Error, InnerRegion};
use aircomp_validation::ValidationOptions;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;

/// AirComp MSE analysis in Poisson cellular IoT networks.
///
/// Settings resolve as built-in defaults, then the `--config` JSON file,
/// then command-line flags.
#[derive(Debug, Parser)]
#[command(name = "aircomp", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo iterations per point [default: 10000].
    #[arg(long, global = true, value_name = "N")]
    iters: Option<usize>,
    /// Handling of devices closer than 1 m: clamp | annulus.
    #[arg(long, global = true)]
    mode: Option<InnerRegion>,
    /// Analytic MSE form(s) to report: printed | rederived | both.
    #[arg(long, global = true)]
    variant: Option<VariantSelection>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep one parameter; writes results.csv and run.json.
    Sweep,
    /// Locate the MSE-minimizing access radius.
    OptimalRadius {
        #[arg(long, default_value_t = 5.0)]
        r_min: f64,
        #[arg(long, default_value_t = 40.0)]
        r_max: f64,
        #[arg(long, default_value_t = 5.0)]
        ref_radius: f64,
        /// Coarse grid spacing in metres.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Denoising-factor bound, optima and MSE-vs-η curve.
    EtaReport {
        /// Number of η grid points in the curve.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Run the acceptance suite; exits 3 if any criterion fails.
    Validate,
}

enum Failure {
    Usage(String),
    Run(Error),
    Acceptance(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn run_config(g: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.mc.seed = seed;
    }
    if let Some(iters) = g.iters {
        cfg.mc.iters = iters;
    }
    if let Some(mode) = g.mode {
        cfg.mc.mode = mode;
    }
    if let Some(variant) = g.variant {
        cfg.variant = variant;
    }
    if let Some(out) = &g.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn validation_options(g: &GlobalArgs) -> ValidationOptions {
    let mut opts = ValidationOptions::default();
    if let Some(seed) = g.seed {
        opts.seed = seed;
    }
    if let Some(iters) = g.iters {
        opts.mc_iters = iters;
    }
    if let Some(mode) = g.mode {
        opts.mode = mode;
    }
    if let Some(threads) = g.threads {
        opts.threads = threads.max(2);
    }
    if let Some(out) = &g.out {
        opts.scratch_dir = out.join("determinism");
    }
    opts.sweep_binary = std::env::current_exe().ok();
    opts
}

fn execute(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Sweep => {
            let cfg = run_config(&cli.global)?;
            let outcome = run_sweep(&cfg)?;
            let flagged = outcome
                .rows
                .iter()
                .filter(|r| r.flags.iter().any(|f| f == "discrepancy"))
                .count();
            println!(
                "wrote {} rows to {} and metadata to {}",
                outcome.rows.len(),
                outcome.results_csv.display(),
                outcome.metadata_json.display()
            );
            if flagged > 0 {
                println!("{flagged} rows flagged: rederived MSE outside 3 stderr of Monte Carlo");
            }
        }
        Command::OptimalRadius {
            r_min,
            r_max,
            ref_radius,
            step,
        } => {
            let cfg = run_config(&cli.global)?;
            let search = RadiusSearch {
                r_min,
                r_max,
                ref_radius,
                spacing: step,
                ..RadiusSearch::default()
            };
            let report = optimal_radius(&cfg, &search)?;
            report.write(&cfg.output_dir)?;
            print!("{}", report.summary());
        }
        Command::EtaReport { points } => {
            let cfg = run_config(&cli.global)?;
            let report = eta_report(&cfg, points)?;
            report.write(&cfg.output_dir)?;
            print!("{}", report.summary());
        }
        Command::Validate => {
            let opts = validation_options(&cli.global);
            let outcomes = aircomp_validation::run_all(&opts, |o| println!("{}", o.line()));
            if let Some(out) = &cli.global.out {
                aircomp_validation::write_outcomes(out, &outcomes)?;
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
            if failed > 0 {
                return Err(Failure::Acceptance(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                ExitCode::from(EXIT_NUMERIC)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
        Err(Failure::Acceptance(n)) => {
            eprintln!("{n} acceptance criteria failed");
            ExitCode::from(EXIT_ACCEPTANCE)
        }
    }
}
