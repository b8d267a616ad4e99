use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dyadica::harness::{emit, run, Command, ExperimentConfig, Format, SCHEMA};
use dyadica::Error;

#[derive(Parser)]
#[command(name = "dyadica", version, about = "Dyadic lattices, b-adapted Haar systems and bi-parameter square-function checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the master seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutFormat,
}

#[derive(Subcommand)]
enum Cmd {
    /// Upper doubling, pseudo-accretivity and the symmetrized majorant.
    VerifyMeasure(Common),
    /// Kernel estimates and Carleson-box assumptions.
    VerifyKernel(Common),
    /// Cancellation, biorthogonality and reconstruction of the Haar systems.
    VerifyHaar(Common),
    /// Truncated g-function energy, good-pair sum and its four-way split.
    Gnorm(Common),
    /// Shift-averaging identity.
    Avgid {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Carleson coefficient table and the bi-parameter packing check.
    Carleson(Common),
    /// Probability of goodness per level.
    Pigood(Common),
    /// Operator-norm estimates under refinement.
    Probe(Common),
    /// The full acceptance battery.
    Suite(Common),
    /// Print the documented schema, or validate a configuration.
    Schema {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn fail(code: u8, err: &Error) -> ExitCode {
    eprintln!("dyadica: {err}");
    ExitCode::from(code)
}

fn load(path: Option<&PathBuf>) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => ExperimentConfig::from_path(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    if let Some(n) = std::env::var("DYADICA_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let cli = Cli::parse();
    let (command, common, mode, trials) = match cli.command {
        Cmd::Schema { config } => {
            return match config {
                None => {
                    print!("{SCHEMA}");
                    ExitCode::SUCCESS
                }
                Some(p) => match ExperimentConfig::from_path(&p) {
                    Ok(_) => {
                        println!("{}: valid", p.display());
                        ExitCode::SUCCESS
                    }
                    Err(e) => fail(2, &e),
                },
            };
        }
        Cmd::VerifyMeasure(c) => (Command::VerifyMeasure, c, None, None),
        Cmd::VerifyKernel(c) => (Command::VerifyKernel, c, None, None),
        Cmd::VerifyHaar(c) => (Command::VerifyHaar, c, None, None),
        Cmd::Gnorm(c) => (Command::Gnorm, c, None, None),
        Cmd::Avgid { common, mode, trials } => (Command::Avgid, common, mode, trials),
        Cmd::Carleson(c) => (Command::Carleson, c, None, None),
        Cmd::Pigood(c) => (Command::Pigood, c, None, None),
        Cmd::Probe(c) => (Command::Probe, c, None, None),
        Cmd::Suite(c) => (Command::Suite, c, None, None),
    };
    let mut cfg = match load(common.config.as_ref()) {
        Ok(c) => c,
        Err(e) => return fail(2, &e),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(m) = mode {
        cfg.avgid.mode = match m {
            Mode::Exact => dyadica::harness::config::SamplingMode::Exact,
            Mode::Mc => dyadica::harness::config::SamplingMode::Mc,
        };
    }
    if let Some(t) = trials {
        cfg.avgid.trials = t;
    }
    if let Err(e) = cfg.validate() {
        return fail(2, &e);
    }
    let report = match run(command, &cfg) {
        Ok(r) => r,
        Err(e) => return fail(2, &e),
    };
    let format = match common.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
        OutFormat::Text => Format::Text,
    };
    let bytes = match emit(&report, format) {
        Ok(b) => b,
        Err(e) => return fail(2, &e),
    };
    let written = match &common.out {
        Some(p) => std::fs::write(p, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        return fail(2, &Error::Io(e));
    }
    eprintln!("wall_time_seconds={:.3}", report.wall_time_seconds);
    for c in report.checks.iter().filter(|c| !c.pass) {
        let w = c.witness.as_ref().map_or("", |w| w.description.as_str());
        eprintln!("FAIL {}: {w}", c.name);
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
