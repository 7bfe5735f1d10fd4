use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use seqstop::harness::{
    emit_report, emit_run, round6, run_replications, run_single, true_value, ExperimentConfig, OutputFormat,
};
use seqstop::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "seqstop", version, about = "Fixed-width sequential stopping for MCMC output")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured base seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = one per core)
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One sequential run, printing the final estimates
    Run {
        /// Random stream; stream i matches replication i of `coverage`
        #[arg(long, default_value_t = 1)]
        stream: u64,
    },
    /// Replicate the run and score interval coverage
    Coverage {
        /// Override the configured number of replications
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Print the registered true value of each parameter
    Truth,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let path = cli
        .config
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut config = ExperimentConfig::from_file(&path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(w) = cli.workers {
        config.workers = w;
    }
    let format = OutputFormat::from(cli.format);
    let text = match cli.command {
        Command::Run { stream } => emit_run(&run_single(&config, stream)?, &config.parameters, format)?,
        Command::Coverage { replications } => {
            if let Some(r) = replications {
                config.replications = r;
                config.validate()?;
            }
            emit_report(&run_replications(&config)?, format)?
        }
        Command::Truth => {
            let mut out = String::new();
            for spec in &config.parameters {
                out.push_str(&format!("{} {}\n", spec.id, round6(true_value(&config.sampler, spec)?)));
            }
            out
        }
    };
    match cli.out.or(config.output) {
        Some(out) => std::fs::write(&out, text).map_err(|source| Error::Io { path: out, source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
