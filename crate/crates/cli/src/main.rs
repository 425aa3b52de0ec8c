mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use baer_core::adversary::Strategy;
use baer_core::Scheme;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Bandwidth-adaptive, error-resilient MBR regenerating codes.
#[derive(Debug, Parser)]
#[command(name = "baer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print repair bandwidth, capacity and the capacity bounds.
    Bounds {
        #[arg(long)]
        params: PathBuf,
    },
    /// Search for the smallest prime field certified for a scheme.
    FindField {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        /// Lowest candidate modulus (raised to n + 1 if smaller).
        #[arg(long, default_value_t = 2)]
        from: u64,
        #[arg(long, default_value_t = 100_000)]
        to: u64,
        /// Write the parameter file with `p` filled in.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a message file into one share file per node.
    Encode {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(long)]
        message: PathBuf,
        /// Output directory for node<N>.share files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate a lost share from helper share files.
    Repair {
        /// Optional; must agree with the share headers when given.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<Scheme>,
        #[arg(long)]
        failed: usize,
        /// Defaults to the number of helper files.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, num_args = 1.., required = true)]
        helpers: Vec<PathBuf>,
        #[command(flatten)]
        adversary: AdversaryArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the message from exactly k share files.
    Reconstruct {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        shares: Vec<PathBuf>,
        #[command(flatten)]
        adversary: AdversaryArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a failure/repair scenario on an in-memory cluster.
    Simulate {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        /// Scenario file; without it a random scenario is generated.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Length of the generated scenario.
        #[arg(long, default_value_t = 50)]
        events: usize,
        /// Adversary kind used by generated scenarios.
        #[arg(long, value_enum, default_value_t = AdversaryKind::Random)]
        adversary: AdversaryKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Message file; a seeded random message is used otherwise.
        #[arg(long)]
        message: Option<PathBuf>,
        /// Report destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the configured field for a scheme.
    Selftest {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AdversaryKind {
    Honest,
    Random,
    Liar,
}

#[derive(Debug, Args)]
struct AdversaryArgs {
    #[arg(long, value_enum, default_value_t = AdversaryKind::Honest)]
    adversary: AdversaryKind,
    /// Comma-separated nodes under adversarial control.
    #[arg(long, value_delimiter = ',')]
    controlled: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl AdversaryKind {
    fn name(self) -> &'static str {
        match self {
            AdversaryKind::Honest => "honest",
            AdversaryKind::Random => "random",
            AdversaryKind::Liar => "liar",
        }
    }
}

impl AdversaryArgs {
    fn strategy(&self) -> Strategy {
        let seed = self.seed;
        match self.adversary {
            AdversaryKind::Honest => Strategy::Honest,
            AdversaryKind::Random => Strategy::Random { seed },
            AdversaryKind::Liar => Strategy::ConsistentLiar { seed },
        }
    }
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
        .map_err(|_| format!("expected 1, 2 or concat, got {s:?}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
