use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinflip_cli::{load_config, run, run_plan, run_verify, CliError, Format};

#[derive(Parser)]
#[command(name = "spinflip", version, about = "Qubit dephasing under spin-flip pulse sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Cross-check the quadrature against the oracles.
    Verify {
        /// Smaller mode grid and Fock cutoff.
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Find the fewest cycles that keep a target coherence.
    Plan {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, format } => {
            let cfg = load_config(&config)?;
            let format = format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            });
            run(&cfg, out.as_deref(), format)
        }
        Command::Verify { fast, config } => {
            let cfg = config.as_deref().map(load_config).transpose()?;
            let mut out = BufWriter::new(io::stdout().lock());
            run_verify(cfg.as_ref(), fast, &mut out)
        }
        Command::Plan { config } => {
            let cfg = load_config(&config)?;
            let mut out = BufWriter::new(io::stdout().lock());
            run_plan(&cfg, &mut out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = io::stdout().flush();
            eprintln!("spinflip: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
