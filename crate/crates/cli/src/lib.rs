//! Command-line front end: TOML documents in, text or JSON reports out.
//!
//! Exit status is 0 when every stage passes, 1 when a verdict fails and 2
//! for usage, I/O or document errors.

pub mod commands;
pub mod docs;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gauge_noether::expr::IdentityConfig;
use gauge_noether::extremal::ExtremalityTolerances;

pub use commands::{cmd_check, cmd_currents, cmd_simulate, cmd_verify, CliError, Input, Run, RunConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gauge-noether", version, about = "Check gauge symmetries of optimal control problems and their Noether currents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test full and linearized semi-invariance.
    Check { problem: PathBuf, symmetry: PathBuf },
    /// Print the Noether currents of a symmetry.
    Currents { problem: PathBuf, symmetry: PathBuf },
    /// Full pipeline: invariance, currents, extremals, conservation.
    Verify { problem: PathBuf, symmetry: PathBuf, trajectories: PathBuf },
    /// Integrate trajectories and check extremality only.
    Simulate { problem: PathBuf, trajectories: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Debug, Args)]
struct Options {
    /// Random evaluations per identity test.
    #[arg(long, global = true, default_value_t = 200)]
    trials: usize,
    /// Identity-test tolerance, relative to a cancellation-free scale.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// RK4 steps over [a, b] (refined when breakpoints need it).
    #[arg(long, global = true, default_value_t = 1000)]
    steps: usize,
    /// Random control samples per node for the maximality check.
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,
    /// Directory for report.json and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit currents even if the invariance stage fails.
    #[arg(long, global = true)]
    force: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also run every trajectory with half the step and report drift ratios.
    #[arg(long, global = true)]
    halving: bool,
    #[arg(long, global = true)]
    adjoint_tol: Option<f64>,
    #[arg(long, global = true)]
    maximality_tol: Option<f64>,
    /// Relative drift tolerance; default max(1e-8, 100 h^4).
    #[arg(long, global = true)]
    drift_tol: Option<f64>,
}

impl Options {
    fn config(&self) -> Result<RunConfig, CliError> {
        if self.trials == 0 || !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage("--trials and --tol must be positive".into()));
        }
        let defaults = ExtremalityTolerances::default();
        Ok(RunConfig {
            identity: IdentityConfig::new(self.trials, self.tol, self.seed),
            steps: self.steps,
            samples_per_node: self.samples,
            extremality: ExtremalityTolerances {
                adjoint: self.adjoint_tol.unwrap_or(defaults.adjoint),
                maximality: self.maximality_tol.unwrap_or(defaults.maximality),
                dhdt: defaults.dhdt,
            },
            drift_tolerance: self.drift_tol,
            force: self.force,
            halving: self.halving,
            out: self.out.clone(),
        })
    }
}

fn dispatch(cli: &Cli) -> Result<Run, CliError> {
    let cfg = cli.opts.config()?;
    match &cli.command {
        Command::Check { problem, symmetry } => cmd_check(&Input::read(problem)?, &Input::read(symmetry)?, &cfg),
        Command::Currents { problem, symmetry } => cmd_currents(&Input::read(problem)?, &Input::read(symmetry)?, &cfg),
        Command::Verify { problem, symmetry, trajectories } => {
            cmd_verify(&Input::read(problem)?, &Input::read(symmetry)?, &Input::read(trajectories)?, &cfg)
        }
        Command::Simulate { problem, trajectories } => cmd_simulate(&Input::read(problem)?, &Input::read(trajectories)?, &cfg),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let run = match dispatch(&cli) {
        Ok(run) => run,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(dir) = &cli.opts.out {
        if let Err(e) = run.write_to(dir) {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    }
    let rendered = match cli.opts.format {
        Format::Text => run.report.to_text(),
        Format::Machine => run.report.to_json(),
    };
    if write!(stdout, "{rendered}").is_err() {
        return EXIT_USAGE;
    }
    if run.report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
