mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::phase::{parse_pq_case, ProbeArgs, ScanArgs, TupleSource};
use config::RunConfig;
use error::{CliError, CliResult};
use lindyn::Reduction;

/// Exact gradient-flow dynamics of one-hidden-layer networks on 1-D data.
#[derive(Debug, Parser)]
#[command(name = "lindyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration (`-` reads stdin).
    config: PathBuf,
    /// Reduce the dataset with sums instead of means.
    #[arg(long)]
    sum_convention: bool,
    /// Override the seed of the initialization and synthetic data.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of grid samples after t = 0.
    #[arg(long)]
    samples: Option<usize>,
    /// End time in units of t_c.
    #[arg(long)]
    t_end_tc: Option<f64>,
    /// Absolute end time.
    #[arg(long)]
    t_end: Option<f64>,
}

impl RunArgs {
    fn load(&self) -> CliResult<RunConfig> {
        let mut cfg = config::load(&self.config)?;
        if self.sum_convention {
            cfg.reduction = Reduction::Sum;
        }
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        if let Some(n) = self.samples {
            cfg.grid.samples = n;
        }
        if let Some(t) = self.t_end_tc {
            cfg.grid.t_end_tc = Some(t);
            cfg.grid.t_end = None;
        }
        if let Some(t) = self.t_end {
            cfg.grid.t_end = Some(t);
            cfg.grid.t_end_tc = None;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct TupleArgs {
    /// JSON tuple {c_d, c_gamma, c_u, c_w, c_eta_u, c_eta_w, pq_case} (`-` reads stdin).
    file: Option<PathBuf>,
    /// Inline JSON tuple.
    #[arg(long, conflicts_with = "file")]
    tuple: Option<String>,
    /// Tabulated scaling: ntk, mf, xavier, kaiming, lazy.
    #[arg(long, conflicts_with_all = ["file", "tuple"])]
    scaling: Option<String>,
    /// Block for --scaling: base, stable, plus, minus.
    #[arg(long, requires = "scaling")]
    block: Option<String>,
    /// Override the P/Q convergence case.
    #[arg(long)]
    pq_case: Option<String>,
}

impl TupleArgs {
    fn resolve(&self) -> CliResult<commands::phase::PhaseInput> {
        let src = TupleSource {
            file: self.file.clone(),
            inline: self.tuple.clone(),
            scaling: self.scaling.clone(),
            block: self.block.clone(),
        };
        src.resolve(self.pq_case.as_deref().map(parse_pq_case).transpose()?)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form trajectory (β = 1), or the reduced ODE with --reduced-ode.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        reduced_ode: bool,
        /// Trajectory CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Direct integration of the gradient flow with a conservation audit.
    Integrate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Closed form (β = 1) or reduced ODE (β ≥ 2) against direct integration.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Run seeds 0..N instead of the configured seed.
        #[arg(long)]
        seeds: Option<u64>,
        /// Rebuild the first layer with the uncorrected printed formula.
        #[arg(long)]
        inject_printed_first_layer: bool,
    },
    /// Alignment and norm-rescaling report; CSV `t,zeta,u_norm,w_norm`.
    Align {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Classify a scaling tuple, optionally probing concrete instances.
    Phase {
        #[command(flatten)]
        tuple: TupleArgs,
        /// Solve instances at each κ and fit the weight-movement exponent.
        #[arg(long)]
        probe: bool,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128,256,512,1024")]
        kappas: Vec<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        replicates: usize,
        /// Independent rather than mirrored Gaussian draws.
        #[arg(long)]
        independent: bool,
    },
    /// Phase map over two exponents; CSV `x_exp,y_exp,phase,delta`.
    Scan {
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// `lo:hi:step`, rationals allowed.
        #[arg(long)]
        x_range: String,
        #[arg(long)]
        y_range: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Built-in invariant suite and the corrected-formula report.
    Verify,
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("LINDYN_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("LINDYN_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Runtime(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Solve { run, reduced_ode, csv } => commands::instance::cmd_solve(&run.load()?, reduced_ode, csv),
        Command::Integrate { run, csv } => commands::instance::cmd_integrate(&run.load()?, csv),
        Command::Compare { run, seeds, inject_printed_first_layer } => {
            commands::instance::cmd_compare(&run.load()?, seeds, inject_printed_first_layer)
        }
        Command::Align { run, csv } => commands::instance::cmd_align(&run.load()?, csv),
        Command::Phase { tuple, probe, kappas, seed, replicates, independent } => {
            let probe = probe.then_some(ProbeArgs { kappas, seed, replicates, independent });
            commands::phase::cmd_phase(&tuple.resolve()?, probe)
        }
        Command::Scan { tuple, x, y, x_range, y_range, csv } => {
            commands::phase::cmd_scan(&tuple.resolve()?, &ScanArgs { x, y, x_range, y_range, csv })
        }
        Command::Verify => commands::verify::cmd_verify(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lindyn: {e}");
            e.exit_code()
        }
    }
}
