//! `qcv`: runs the simulator's studies from JSON configs and writes
//! unit-tagged CSV tables with JSON metadata.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use qcv_core::compiler::CommutatorScheme;
use qcv_core::experiments::SqueezeProtocol;
use qcv_core::Error;

#[derive(Parser)]
#[command(name = "qcv", version, about = "Quasi-continuous-variable spin simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the su(2) relations and the Casimir for N atoms.
    OpsCheck {
        #[arg(long)]
        n: u64,
    },
    /// Two-cavity power map and four-step inset lines.
    Fig2 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Overlap of TACT-squeezed states with their phase-shifted copies.
    Overlap {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; CSV goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distinguishable states, qubits and bits for a squeezed ensemble.
    #[command(group(ArgGroup::new("input").required(true).args(["r", "sq"])))]
    Info {
        #[arg(long)]
        n: Option<f64>,
        #[arg(long, requires = "n")]
        r: Option<f64>,
        /// Squeezing in dB relative to N/4.
        #[arg(long, allow_hyphen_values = true)]
        sq: Option<f64>,
    },
    /// Transverse variance under one-axis twisting or countertwisting.
    Squeeze {
        #[arg(long)]
        protocol: SqueezeProtocol,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a polynomial Hamiltonian into a pulse sequence.
    Compile {
        /// e.g. `0.5 X1^3`, `X1^3 Z2`, `Z1^2 + 0.3 X1 Z2`.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long)]
        dt: f64,
        /// Simulated evolution time.
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        #[arg(long, value_enum, default_value_t = Scheme::Plain)]
        scheme: Scheme,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multiply out a pulse sequence and compare it with its target.
    Verify {
        #[arg(long)]
        seq: PathBuf,
        /// Atoms per ensemble; a single value applies to every mode.
        #[arg(long, num_args = 1.., required = true)]
        n: Vec<u64>,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = qcv_core::numerics::DEFAULT_SEED)]
        seed: u64,
        /// Fail (exit 3) when the phase-aligned distance exceeds this.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Sweep one parameter of a scattering network.
    Network {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pair selectivity of the five-cavity network.
    Selectivity {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Identity residuals, gadget and Trotter convergence, QND fidelities.
    CompilerStudy {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Scheme {
    Plain,
    Balanced,
}

impl From<Scheme> for CommutatorScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Plain => CommutatorScheme::Plain,
            Scheme::Balanced => CommutatorScheme::Balanced,
        }
    }
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Ok,
    /// The run finished but a numerical check failed.
    Invalid(String),
}

const EXIT_CONFIG: u8 = 2;
const EXIT_INVALID: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotHermitian { .. }
        | Error::SingularNetwork(_)
        | Error::UnderdeterminedFit { .. }
        | Error::IllConditionedFit(_) => EXIT_INVALID,
        Error::Io(_) | Error::Csv(_) => 1,
        _ => EXIT_CONFIG,
    }
}

fn run(cli: Cli) -> qcv_core::Result<Outcome> {
    match cli.command {
        Command::OpsCheck { n } => commands::ops_check(n),
        Command::Fig2 { config, out } => commands::fig2(&config, &out),
        Command::Overlap { config, out } => commands::overlap(&config, out.as_deref()),
        Command::Info { n, r, sq } => commands::info(n, r, sq),
        Command::Squeeze {
            protocol,
            n,
            points,
            t_max,
            out,
        } => commands::squeeze(protocol, n, points, t_max, out.as_deref()),
        Command::Compile {
            target,
            dt,
            time,
            scheme,
            out,
        } => commands::compile(&target, dt, time, scheme.into(), &out),
        Command::Verify {
            seq,
            n,
            states,
            seed,
            tolerance,
        } => commands::verify(&seq, &n, states, seed, tolerance),
        Command::Network { spec, sweep, out } => commands::network(&spec, &sweep, out.as_deref()),
        Command::Selectivity { config, out } => commands::selectivity(&config, out.as_deref()),
        Command::CompilerStudy { config, out } => commands::compiler_study(config.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Invalid(why)) => {
            eprintln!("numerical check failed: {why}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
