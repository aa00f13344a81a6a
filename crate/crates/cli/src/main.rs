use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wavedsm_cli::commands::{self, Check, CliError, EXIT_FAILURE};

#[derive(Parser)]
#[command(name = "wavedsm", version, about = "Time-domain direct sampling imaging of point-like scatterers")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "WAVEDSM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize clean (and noisy) receiver traces.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Noise seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the indicator over the sampling grid from a trace file.
    Image {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an analysis suite and write its JSON report.
    Verify {
        #[arg(value_enum)]
        which: Which,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// simulate, image and verify in sequence.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Checks to run after imaging; pass the flag with no value to skip.
        #[arg(long, value_enum, value_delimiter = ',', num_args = 0.., default_value = "equivalence")]
        verify: Vec<Which>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Equivalence,
    Lemma,
    ClosedForm,
    Theorem,
}

impl From<Which> for Check {
    fn from(w: Which) -> Check {
        match w {
            Which::Equivalence => Check::Equivalence,
            Which::Lemma => Check::Lemma,
            Which::ClosedForm => Check::ClosedForm,
            Which::Theorem => Check::Theorem,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new(EXIT_FAILURE, format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate { config, out, seed } => commands::simulate(&config, &out, seed).map(|_| ()),
        Command::Image { config, data, out } => commands::image(&config, &data, &out).map(|_| ()),
        Command::Verify { which, config, out } => commands::verify(&config, &[which.into()], &out),
        Command::Pipeline { config, out, seed, verify } => {
            let checks: Vec<Check> = verify.into_iter().map(Check::from).collect();
            commands::pipeline(&config, &out, seed, &checks)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
