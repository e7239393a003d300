use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(
    name = "thermofal",
    version,
    about = "Falsification toolkit for a hybrid thermostat: fit surrogate models, \
             generate usage scenarios, simulate them, and search for schedules the \
             system cannot follow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit surrogate model coefficients from a recorded trace CSV.
    Fit {
        /// Trace CSV with header t_minutes,temperature_c,mode.
        #[arg(long)]
        trace: PathBuf,
        /// Output coefficient-table path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate test-case documents by walking the usage Markov chain.
    Generate {
        /// Generator config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Coefficient table JSON; the built-in registry when omitted.
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Number of test cases to generate.
        #[arg(short = 'n', long)]
        count: usize,
        /// RNG seed; overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for tc_*.json documents.
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate one test-case document and export the trace.
    Simulate {
        /// Test-case document to execute.
        #[arg(long = "test-case")]
        test_case: PathBuf,
        /// Coefficient table JSON; the built-in registry when omitted.
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Simulation config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV path (minute_index,expected_c,simulated_c).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the genetic search described by a run manifest.
    Evolve {
        #[arg(long)]
        manifest: PathBuf,
        /// RNG seed; overrides the manifest's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the random-search baseline described by a run manifest.
    RandomSearch {
        #[arg(long)]
        manifest: PathBuf,
        /// Evaluation budget; the manifest's GA budget when omitted.
        #[arg(long)]
        budget: Option<usize>,
        /// RNG seed; overrides the manifest's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run repeated GA and random-search runs and compare them.
    Compare {
        #[arg(long)]
        manifest: PathBuf,
        /// Number of runs per method.
        #[arg(long)]
        runs: usize,
        /// Base RNG seed; overrides the manifest's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print every tunable parameter with its default value.
    PrintDefaultConfig {
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fit { trace, out } => commands::fit(&trace, &out),
        Command::Generate {
            config,
            registry,
            count,
            seed,
            out,
        } => commands::generate(config.as_deref(), registry.as_deref(), count, seed, &out),
        Command::Simulate {
            test_case,
            registry,
            config,
            out,
        } => commands::simulate(&test_case, registry.as_deref(), config.as_deref(), &out),
        Command::Evolve { manifest, seed } => commands::evolve(&manifest, seed),
        Command::RandomSearch {
            manifest,
            budget,
            seed,
        } => commands::random_search(&manifest, budget, seed),
        Command::Compare {
            manifest,
            runs,
            seed,
        } => commands::compare(&manifest, runs, seed),
        Command::PrintDefaultConfig { out } => commands::print_default_config(out.as_deref()),
    }
}
