//! `esd` command-line front end: trajectories as CSV, sudden-death times,
//! parameter sweeps, the verification gate and steady states.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Settings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Error reported as a one-line diagnostic with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
        }
    }
}

impl From<esd_core::Error> for CliError {
    fn from(e: esd_core::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::usage(format!("csv error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "esd",
    version,
    about = "Entanglement dynamics of two cavity qubits in thermal reservoirs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectory of populations, coherences and both measures as CSV
    Evolve(ScenarioArgs),
    /// Entanglement sudden-death time
    Esd(ScenarioArgs),
    /// Death times and initial measures across bath photon numbers or amplitudes
    Sweep(ScenarioArgs),
    /// Closed forms against RK4 and the X-state formulas against the general measures
    Verify(ScenarioArgs),
    /// Long-time populations for identical cavities
    Steady(ScenarioArgs),
}

/// Scenario flags. Every flag can also come from `--config`; flags win.
#[derive(Debug, Clone, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct ScenarioArgs {
    /// key=value file with default settings
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// noon, phi or custom
    #[arg(long)]
    pub family: Option<String>,
    /// amplitude of |00>; complex values as 0.3+0.4i
    #[arg(long)]
    pub a1: Option<String>,
    /// amplitude of |01>
    #[arg(long)]
    pub a2: Option<String>,
    /// amplitude of |10>
    #[arg(long)]
    pub a3: Option<String>,
    /// amplitude of |11>
    #[arg(long)]
    pub a4: Option<String>,
    /// leading amplitude of a named family (|a2| for noon, |a1| for phi)
    #[arg(long)]
    pub amp: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub nbar: Option<String>,
    #[arg(long = "nbar-a")]
    pub nbar_a: Option<String>,
    #[arg(long = "nbar-b")]
    pub nbar_b: Option<String>,
    #[arg(long = "gamma-a")]
    pub gamma_a: Option<String>,
    #[arg(long = "gamma-b")]
    pub gamma_b: Option<String>,
    #[arg(long = "t-end")]
    pub t_end: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    /// analytic, rk4 or both
    #[arg(long)]
    pub method: Option<String>,
    /// both, concurrence or log_negativity
    #[arg(long)]
    pub measure: Option<String>,
    /// ESD scan horizon
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    /// sweep axis: nbar or amplitude
    #[arg(long)]
    pub axis: Option<String>,
    /// sweep values: comma list or start:stop:step
    #[arg(long)]
    pub values: Option<String>,
    /// output file, or "-" for stdout
    #[arg(long)]
    pub out: Option<String>,
}

impl ScenarioArgs {
    /// Config file settings overlaid with the flags given on the command line.
    pub fn settings(&self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let mut flags = Settings::default();
        let pairs = [
            ("family", &self.family),
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("a3", &self.a3),
            ("a4", &self.a4),
            ("amp", &self.amp),
            ("gamma", &self.gamma),
            ("nbar", &self.nbar),
            ("nbar_a", &self.nbar_a),
            ("nbar_b", &self.nbar_b),
            ("gamma_a", &self.gamma_a),
            ("gamma_b", &self.gamma_b),
            ("t_end", &self.t_end),
            ("steps", &self.steps),
            ("method", &self.method),
            ("measure", &self.measure),
            ("horizon", &self.horizon),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("axis", &self.axis),
            ("values", &self.values),
            ("out", &self.out),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                flags.set(k, v)?;
            }
        }
        s.overlay(&flags);
        Ok(s)
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match commands::dispatch(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            EXIT_USAGE
        }
    }
}
