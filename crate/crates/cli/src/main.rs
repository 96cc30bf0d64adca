mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use ddcorr_core::timeloop::Overrides;

use commands::Aborted;

/// Drift-diffusion model of a corroding oxide layer with Butler-Volmer
/// boundary kinetics.
///
/// Exit status: 0 on success, 1 on usage or configuration errors, 2 when a
/// run leaves the admissible density box.
#[derive(Parser, Debug)]
#[command(name = "ddcorr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the admissibility report (text, then JSON) for a configuration
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one simulation and write snapshots and the time series
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Allow dt above tau and keep going past bound violations
        #[arg(long)]
        unsafe_dt: bool,
        /// Accept drops outside the point-of-zero-charge intervals
        #[arg(long)]
        unsafe_pzc: bool,
        /// Override a config entry, e.g. `--set kinetics.P.side0.m=2`
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Vary one scalar config entry over a linear range
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted config key, e.g. `V` or `kinetics.N.side1.k`
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Temporal self-convergence study
    Convergence {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated time steps, halving: numbers or `tau/N`
        #[arg(long)]
        dts: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Check { config } => commands::check(&config),
        Command::Simulate {
            config,
            out,
            unsafe_dt,
            unsafe_pzc,
            set,
        } => {
            let settings = commands::parse_settings(&set)?;
            let overrides = Overrides {
                unsafe_dt,
                unsafe_pzc,
            };
            commands::simulate(&config, &out, &settings, overrides).map(|_| true)
        }
        Command::Sweep {
            config,
            param,
            from,
            to,
            points,
            out,
        } => commands::sweep(&config, &param, from, to, points, &out).map(|_| true),
        Command::Convergence { config, dts, out } => {
            commands::convergence(&config, &dts, &out).map(|_| true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Aborted>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
