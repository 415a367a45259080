use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use semigroup_forge_cli::commands::{self, EvolveOptions, Method, Output, Target};
use semigroup_forge_cli::report::{CheckOptions, DEFAULT_REQUIRED};
use semigroup_forge_cli::{CliError, CliResult, DEFAULT_SEED};

/// Build, check, convert and evolve generators of quantum dynamical
/// semigroups.
///
/// Exit codes: 0 success, 1 input error, 2 a required verdict failed.
/// SEMIGROUP_FORGE_THREADS caps the worker threads.
#[derive(Parser)]
#[command(name = "semigroup-forge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a JSON diagnostics report for a generator spec.
    Check {
        spec: PathBuf,
        /// Tolerance for every verdict.
        #[arg(long, default_value_t = semigroup_forge::PSD_TOL)]
        tol: f64,
        /// Comma-separated times at which e^(tL) is tested for complete positivity.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0])]
        times: Vec<f64>,
        /// Restarts of the positivity optimizer.
        #[arg(long, default_value_t = semigroup_forge::cp::DEFAULT_RESTARTS)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Comma-separated verdicts that must pass: trace, hermiticity, gkls,
        /// cp, positivity, stable, leakage, or all. An empty value requires nothing.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_REQUIRED.map(String::from))]
        require: Vec<String>,
    },
    /// Evolve a state and print the trajectory as CSV.
    Evolve {
        spec: PathBuf,
        state: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-12)]
        atol: f64,
    },
    /// Convert a generator to another form: gks, lindblad, kraus@t or choi@t.
    Convert {
        spec: PathBuf,
        #[arg(long)]
        to: Target,
    },
    /// Built-in historical generators.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    /// List the generator names.
    List,
    /// Print an example spec for one generator.
    Emit { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Ode,
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("SEMIGROUP_FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("SEMIGROUP_FORGE_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<Output> {
    configure_threads()?;
    match cli.command {
        Command::Check {
            spec,
            tol,
            times,
            budget,
            seed,
            require,
        } => commands::check(
            &spec,
            &CheckOptions {
                tol,
                times,
                budget,
                seed,
                require,
            },
        ),
        Command::Evolve {
            spec,
            state,
            t0,
            t1,
            steps,
            method,
            rtol,
            atol,
        } => commands::evolve(
            &spec,
            &state,
            &EvolveOptions {
                t0,
                t1,
                steps,
                method: match method {
                    MethodArg::Exact => Method::Exact,
                    MethodArg::Ode => Method::Ode,
                },
                rtol,
                atol,
            },
        ),
        Command::Convert { spec, to } => commands::convert(&spec, to),
        Command::Zoo { action } => match action {
            ZooAction::List => Ok(commands::zoo_list()),
            ZooAction::Emit { name } => commands::zoo_emit(&name),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            eprint!("{}", out.stderr);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("semigroup-forge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
