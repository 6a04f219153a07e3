//! `shillbid`: synthesize, clean and featurize auction bid histories.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "shillbid", version, about = "Shill-bidding dataset pipeline for auction bid histories")]
struct Cli {
    /// Worker threads; output bytes do not depend on this.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    jobs: usize,

    /// Log progress (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a raw scrape (or re-clean a preprocessed file).
    Preprocess(PreprocessArgs),
    /// Compute the eight metrics for every (auction, bidder) pair.
    Features(FeaturesArgs),
    /// Generate a synthetic raw corpus with planted shills and defects.
    Synth(SynthArgs),
    /// Summarize a feature file.
    Stats(StatsArgs),
    /// Check a raw, preprocessed or feature file without writing anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct EpochArgs {
    /// Reference instant countdown seconds are measured back from.
    #[arg(long, default_value = "2017-07-07 00:00:00")]
    epoch: String,

    /// Fixed UTC offset of the scraped timestamps, e.g. -07:00.
    #[arg(long, default_value = "-07:00", allow_hyphen_values = true)]
    tz_offset: String,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[arg(long = "in", value_name = "CSV")]
    input: PathBuf,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    /// Cleansing report path [default: <out>.report.json].
    #[arg(long, value_name = "JSON")]
    report: Option<PathBuf>,
    #[command(flatten)]
    epoch: EpochArgs,
    /// Auctions with fewer bids are removed.
    #[arg(long, default_value_t = 5)]
    min_bids: usize,
    /// Optionally drop auctions that sold below this price.
    #[arg(long, value_name = "PRICE")]
    min_winning_price: Option<String>,
    /// Raw column mapping file (`field = Header` lines).
    #[arg(long, value_name = "FILE")]
    schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    #[arg(long = "in", value_name = "CSV")]
    input: PathBuf,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    /// Pattern statistics report (JSON).
    #[arg(long, value_name = "JSON")]
    report: Option<PathBuf>,
    /// Weight overrides; adds a weighted_score column.
    #[arg(long, value_name = "FILE")]
    weights: Option<PathBuf>,
    /// High-value threshold for the statistics report.
    #[arg(long, default_value = "0.7")]
    threshold: String,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    auctions: usize,
    /// Fraction of sellers with a bound shill bidder.
    #[arg(long, default_value_t = 0.1)]
    shill_fraction: f64,
    /// Consecutive bids per shill per auction.
    #[arg(long, default_value_t = 4)]
    run_length: u32,
    #[arg(long, default_value_t = 5)]
    min_auction_bids: u32,
    #[arg(long, default_value_t = 30)]
    max_auction_bids: u32,
    /// Honest bidder pool size [default: 1.5 x auctions, at least 20].
    #[arg(long)]
    bidders: Option<usize>,
    /// Seller count [default: auctions / 3].
    #[arg(long)]
    sellers: Option<usize>,
    /// Disable every defect injection.
    #[arg(long)]
    clean: bool,
    #[arg(long)]
    duplicate_rate: Option<f64>,
    #[arg(long)]
    missing_bidder_rate: Option<f64>,
    #[arg(long)]
    thin_rate: Option<f64>,
    #[arg(long)]
    inconsistent_rate: Option<f64>,
    #[arg(long)]
    count_mismatch_rate: Option<f64>,
    #[command(flatten)]
    epoch: EpochArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in", value_name = "CSV")]
    input: PathBuf,
    /// Preprocessed bids, to identify winners for the behavior buckets.
    #[arg(long, value_name = "CSV")]
    auctions: Option<PathBuf>,
    #[arg(long, default_value = "0.7")]
    threshold: String,
    /// Structured report (JSON).
    #[arg(long, value_name = "JSON")]
    report: Option<PathBuf>,
    /// Also write the text table here.
    #[arg(long, value_name = "TXT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long = "in", value_name = "CSV")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    schema: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Features(a) => commands::features(a),
        Command::Synth(a) => commands::synth(a),
        Command::Stats(a) => commands::stats(a),
        Command::Validate(a) => commands::validate(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
