use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsch_sim::commands::{self, RunOverrides};

#[derive(Parser)]
#[command(name = "nsch", version, about = "Two-phase Navier-Stokes-Cahn-Hilliard solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recompute the blow-up accumulator from a time series.
    Diag {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        r: f64,
    },
    /// Check the energy of a time series against the decay envelope.
    CheckDecay {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        eps0: f64,
        #[arg(long)]
        c0: f64,
        /// Lower viscosity bound; read from run_info.ini when omitted.
        #[arg(long)]
        nu_star: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut stdout = std::io::stdout();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            t_end,
            seed,
        } => commands::run_command(&config, &RunOverrides { out, t_end, seed }, &mut stdout).map(|_| ()),
        Command::Diag { series, r } => commands::diag_command(&series, r, &mut stdout).map(|_| ()),
        Command::CheckDecay {
            series,
            eps0,
            c0,
            nu_star,
        } => commands::check_decay_command(&series, eps0, c0, nu_star, &mut stdout).map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
