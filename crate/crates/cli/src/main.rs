use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use iie_cli::commands::{self, Overrides};
use iie_cli::{config, exit, CliError};

/// Inhomogeneous incompressible Euler on the periodic square.
#[derive(Debug, Parser)]
#[command(name = "iie", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Initial condition preset.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Grid points per axis.
    #[arg(long, value_name = "N", allow_hyphen_values = true)]
    n: Option<String>,
    /// Time step.
    #[arg(long, value_name = "DT", allow_hyphen_values = true)]
    dt: Option<String>,
    /// Final time.
    #[arg(long, value_name = "T", allow_hyphen_values = true)]
    tend: Option<String>,
    /// Seed of the random_smooth preset.
    #[arg(long, value_name = "S", allow_hyphen_values = true)]
    seed: Option<String>,
    /// Relative tolerance of the elliptic solves.
    #[arg(long, value_name = "TOL", allow_hyphen_values = true)]
    tol: Option<String>,
}

impl RunArgs {
    fn resolve(self) -> Result<iie_core::eulerian::RunConfig, CliError> {
        let overrides = Overrides {
            preset: self.preset,
            n: self.n,
            dt: self.dt,
            t_end: self.tend,
            seed: self.seed,
            tol: self.tol,
        };
        commands::resolve_config(self.config.as_deref(), &overrides)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eulerian RK4 run; writes snapshots and diagnostics.csv.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Picard fixed-point iteration on [0, tend].
    Picard {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        /// Maximum number of iterations.
        #[arg(long, default_value_t = 20)]
        iters: usize,
    },
    /// Time-Taylor series of the displacement and its empirical radius.
    Taylor {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        /// Number of Taylor orders.
        #[arg(long, value_name = "M", default_value_t = 12)]
        order: usize,
    },
    /// Weighted Hodge decomposition w = rho v + grad p of a snapshot field.
    Project {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Names of the x and y components to decompose.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = ["u_x".to_string(), "u_y".to_string()])]
        fields: Vec<String>,
        #[arg(long, default_value_t = iie_core::elliptic::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Recomputes diagnostics from snapshot files.
    Diagnose {
        #[arg(required = true, value_name = "SNAPSHOT")]
        inputs: Vec<PathBuf>,
        /// CSV output; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.9, 1.0, 1.1])]
        level_sets: Vec<f64>,
        #[arg(long, default_value_t = iie_core::elliptic::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Majorant radius calculator.
    Radius {
        /// Constants C2[,C3,...] of the majorant polynomial.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        c2: Vec<f64>,
        /// Size of the initial data.
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        delta: f64,
        /// Number of majorant coefficients.
        #[arg(long, value_name = "M", default_value_t = 10)]
        order: usize,
        /// CSV of the coefficients.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("IIE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("IIE_THREADS must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(command: Command) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    match command {
        Command::Solve { run, out: dir } => {
            commands::solve(&run.resolve()?, &dir, &mut out)?;
        }
        Command::Picard {
            run,
            out: dir,
            iters,
        } => {
            commands::picard(&run.resolve()?, iters, &dir, &mut out)?;
        }
        Command::Taylor {
            run,
            out: dir,
            order,
        } => {
            commands::taylor(&run.resolve()?, order, &dir, &mut out)?;
        }
        Command::Project {
            input,
            out: path,
            fields,
            tol,
        } => {
            commands::project(&input, &path, (&fields[0], &fields[1]), tol, &mut out)?;
        }
        Command::Diagnose {
            inputs,
            out: path,
            level_sets,
            tol,
        } => {
            commands::diagnose(&inputs, path.as_deref(), &level_sets, tol, &mut out)?;
        }
        Command::Radius {
            c2,
            b,
            delta,
            order,
            out: path,
        } => {
            commands::radius(c2, b, delta, order, path.as_deref(), &mut out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = Cli::command().after_help(config::help_text()).get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(exit::CONFIG);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
