use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use memvisc_experiments::{emit, run, ExpResult, ExperimentConfig, Kind};

#[derive(Parser)]
#[command(name = "memvisc", version, about = "Run viscoelastic memory experiments from a TOML config")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary problem under mesh refinement.
    Elliptic(RunArgs),
    /// Single-eps energy ledger, oracle comparison and balance refinement.
    Dynamic(RunArgs),
    /// Distance to the quasistatic limit over the eps list.
    Sweep(RunArgs),
    /// Undamped resonant load paired with the memory-damped run.
    Counterexample(RunArgs),
    /// Bromwich-line distances, coercivity grid and Plancherel check.
    Laplace(RunArgs),
    /// Root localization and product-inequality sampling.
    Cubic(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Command {
    fn split(self) -> (Kind, RunArgs) {
        match self {
            Command::Elliptic(a) => (Kind::Elliptic, a),
            Command::Dynamic(a) => (Kind::Dynamic, a),
            Command::Sweep(a) => (Kind::Sweep, a),
            Command::Counterexample(a) => (Kind::Counterexample, a),
            Command::Laplace(a) => (Kind::Laplace, a),
            Command::Cubic(a) => (Kind::Cubic, a),
        }
    }
}

fn execute(kind: Kind, args: RunArgs) -> ExpResult<bool> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.kind != kind {
        return Err(memvisc_experiments::ExpError::Config(format!(
            "config {} describes a {} experiment, not {}",
            args.config.display(),
            cfg.kind.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    let out = args.out.unwrap_or_else(|| cfg.output.clone());
    cfg.validate()?;
    let report = run(&cfg)?;
    for path in emit(&report, &out)? {
        log::info!("wrote {}", path.display());
    }
    for check in &report.checks {
        let mark = if check.passed { "pass" } else { "FAIL" };
        println!("{mark} {} {:?}: {}", check.series, check.rule, check.detail);
    }
    Ok(report.all_checks_passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (kind, args) = Cli::parse().command.split();
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
