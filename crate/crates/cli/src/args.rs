use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "coded-inference",
    version,
    about = "Latency analysis for coded edge inference"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form MDS latency and the optimized hybrid design.
    Analyze(AnalyzeArgs),
    /// Monte Carlo latency estimates for the chosen schemes.
    Simulate(SimulateArgs),
    /// Score every valid hybrid design and print the candidate table.
    OptimizeHybrid(OptimizeArgs),
    /// Latency of all schemes across a grid of gamma values.
    Sweep(SweepArgs),
    /// Exact decodability checks over GF(2^L) at small scale.
    Verify(VerifyArgs),
}

/// System parameters: a JSON file plus per-field overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct SystemArgs {
    /// JSON file with keys K, N, m, mu, tau, eta, gamma, L.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Number of edge nodes.
    #[arg(long = "k", value_name = "K")]
    pub nodes: Option<usize>,
    /// Number of users.
    #[arg(long = "n", value_name = "N")]
    pub users: Option<usize>,
    /// Rows of the model matrix.
    #[arg(long = "m", value_name = "M")]
    pub rows: Option<usize>,
    /// Fraction of the model stored per node.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Seconds per inner product.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Rate of the exponential setup delay.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Compute-to-transmit time ratio.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Field width L for verification (4, 8 or 16).
    #[arg(long = "field-bits", value_name = "L")]
    pub field_bits: Option<u32>,
}

/// A fixed hybrid design. Give all three or none.
#[derive(Debug, Clone, Default, Args)]
pub struct HybridArgs {
    /// Nodes awaited before the downlink.
    #[arg(long)]
    pub q: Option<usize>,
    /// Coded rows of the outer MDS code (rho1 = mprime / m).
    #[arg(long)]
    pub mprime: Option<usize>,
    /// Replication factor of each coded row.
    #[arg(long)]
    pub rho2: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Scheme {
    Uc,
    Mc,
    Hs,
}

pub const ALL_SCHEMES: [Scheme; 3] = [Scheme::Uc, Scheme::Mc, Scheme::Hs];

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// `start:stop:step` or a single value; defaults to the configured gamma.
    #[arg(long, value_name = "GRID")]
    pub gamma_grid: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub hybrid: HybridArgs,
    /// Schemes to simulate; repeat or separate with commas.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = ALL_SCHEMES)]
    pub scheme: Vec<Scheme>,
    /// `start:stop:step` or a single value; defaults to the configured gamma.
    #[arg(long, value_name = "GRID")]
    pub gamma_grid: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub hybrid: HybridArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = ALL_SCHEMES)]
    pub scheme: Vec<Scheme>,
    #[arg(long, value_name = "GRID", default_value = "0:2:0.1")]
    pub gamma_grid: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Simulate the MDS scheme instead of using its closed form.
    #[arg(long)]
    pub simulate_mc: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub hybrid: HybridArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = ALL_SCHEMES)]
    pub scheme: Vec<Scheme>,
    /// Straggler samples per scheme.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Uncoded schedule as a JSON array of 1-based row lists, one per node.
    #[arg(long, value_name = "PATH")]
    pub schedule: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
