//! `famasel` command line.
//!
//! Scenario values resolve as command-line flags, then the `--config` JSON
//! file, then built-in defaults (P = 100, L = 8, K = N_t = 10, W = 4). Setting
//! `--users` without `--bs-antennas` keeps `N_t = K`.
//!
//! Exit codes: 0 success, 1 runtime error or failed invariant, 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::harness::bench::{bench_timing, format_table, gfwd_port_scaling};
use crate::harness::dataset::{export_dataset, write_jsonl, GoldenRecord, DEFAULT_SNRS_DB};
use crate::harness::sweep::{run_sweep, write_csv, SweepRecord, SweepSpec, SweptParameter};
use crate::harness::verify::{run_all, VerifyOptions};
use crate::model::SystemConfig;
use crate::par::Threads;
use crate::selectors::{Algorithm, DEFAULT_SWAP_ROUNDS};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "famasel", version, about = "Port selection for multi-port fluid-antenna receivers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average spectral efficiency over a swept parameter, written as CSV
    Sweep(SweepArgs),
    /// Export a GFwd+S-labelled dataset as JSON Lines
    Dataset(DatasetArgs),
    /// Run the randomised invariant suites
    Verify(VerifyArgs),
    /// Time the selectors
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// JSON scenario file with keys P, L, K, N_t, W, snr_db, seed, user_index
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of ports P
    #[arg(long, alias = "P")]
    pub ports: Option<usize>,
    /// Active ports / RF chains L
    #[arg(long, alias = "L")]
    pub rf_chains: Option<usize>,
    /// Number of users K
    #[arg(long, alias = "K")]
    pub users: Option<usize>,
    /// BS antennas N_t (defaults to K)
    #[arg(long, alias = "nt")]
    pub bs_antennas: Option<usize>,
    /// Aperture W in wavelengths
    #[arg(long, alias = "W")]
    pub aperture: Option<f64>,
    /// Transmit SNR in dB
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Master PRNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulated user (0-based)
    #[arg(long)]
    pub user_index: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

impl ScenarioArgs {
    pub fn resolve(&self) -> Result<SystemConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => SystemConfig::load(path)?,
            None => SystemConfig::default(),
        };
        if let Some(v) = self.ports {
            cfg.ports = v;
        }
        if let Some(v) = self.rf_chains {
            cfg.rf_chains = v;
        }
        if let Some(v) = self.users {
            cfg.users = v;
            cfg.bs_antennas = v;
        }
        if let Some(v) = self.bs_antennas {
            cfg.bs_antennas = v;
        }
        if let Some(v) = self.aperture {
            cfg.aperture = v;
        }
        if let Some(v) = self.snr_db {
            cfg.snr_db = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.user_index {
            cfg.user_index = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn threads(&self) -> Threads {
        Threads(self.threads.map(|t| t as usize))
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.trim().parse().map_err(|e: Error| e.to_string())
}

fn parse_parameter(s: &str) -> Result<SweptParameter, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Swept parameter: snr_db, K, L, P or R
    #[arg(long, value_parser = parse_parameter)]
    pub param: SweptParameter,
    /// Comma-separated values of the swept parameter
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub values: Vec<f64>,
    /// Comma-separated algorithms: sfama, dc, cuma, gfwd, gfwds, geport, exhaustive
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "sfama,dc,cuma,gfwd,gfwds,geport")]
    pub algs: Vec<Algorithm>,
    /// Monte Carlo trials per value
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Swap rounds for gfwds
    #[arg(long = "r", alias = "R", default_value_t = DEFAULT_SWAP_ROUNDS)]
    pub swap_rounds: usize,
    /// CSV output path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record measured runtimes in the CSV instead of 0
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of records
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Comma-separated SNR grid in dB, cycled over the records
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub snrs: Vec<f64>,
    /// Swap rounds of the GFwd+S labeller
    #[arg(long = "r", alias = "R", default_value_t = DEFAULT_SWAP_ROUNDS)]
    pub swap_rounds: usize,
    /// Trial index of the first record; use disjoint ranges for train and validation files
    #[arg(long, default_value_t = 0)]
    pub first_trial: u64,
    /// Write the golden feature schema (H_re, H_im, snr_db, features) only
    #[arg(long)]
    pub golden: bool,
    /// Output JSONL path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Monotonicity triples (the other suites run a tenth of this)
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated algorithms to time
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "sfama,dc,cuma,gfwd,gfwds,geport")]
    pub algs: Vec<Algorithm>,
    /// Channel draws per algorithm (at least 10)
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(10..))]
    pub trials: u64,
    /// Swap rounds for gfwds
    #[arg(long = "r", alias = "R", default_value_t = DEFAULT_SWAP_ROUNDS)]
    pub swap_rounds: usize,
    /// Also report the gfwd runtime ratio between 2P and P ports
    #[arg(long)]
    pub scaling: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Dataset(a) => cmd_dataset(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(Error::io(path, e).to_string()))
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32, Failure> {
    let base = args.scenario.resolve()?;
    let spec = SweepSpec {
        base,
        parameter: args.param,
        values: args.values.clone(),
        algorithms: args.algs.clone(),
        trials: args.trials,
        swap_rounds: args.swap_rounds,
        threads: args.scenario.threads(),
    };
    spec.validate()?;
    let records = run_sweep(&spec).map_err(|e| Failure::Runtime(e.to_string()))?;
    match &args.out {
        Some(path) => {
            write_csv(&records, create(path)?, args.timing).map_err(|e| Failure::Runtime(e.to_string()))?;
            print!("{}", summary(&records));
        }
        None => write_csv(&records, io::stdout().lock(), args.timing).map_err(|e| Failure::Runtime(e.to_string()))?,
    }
    Ok(EXIT_OK)
}

fn summary(records: &[SweepRecord]) -> String {
    let mut s = format!("{:>10} {:<12} {:>10} {:>10} {:>8}\n", "value", "algorithm", "mean SE", "std SE", "trials");
    for r in records {
        s += &format!(
            "{:>10} {:<12} {:>10.4} {:>10.4} {:>8}\n",
            format!("{}={}", r.swept_param, r.value),
            r.algorithm.id(),
            r.mean_se,
            r.std_se,
            r.trials
        );
    }
    s
}

fn cmd_dataset(args: &DatasetArgs) -> Result<i32, Failure> {
    let cfg = args.scenario.resolve()?;
    let snrs = if args.snrs.is_empty() {
        DEFAULT_SNRS_DB.to_vec()
    } else {
        args.snrs.clone()
    };
    let records = export_dataset(&cfg, args.n, &snrs, args.swap_rounds, args.first_trial, args.scenario.threads())?;
    let written = if args.golden {
        let golden: Vec<GoldenRecord> = records.iter().map(GoldenRecord::from).collect();
        write_jsonl(&args.out, &golden)
    } else {
        write_jsonl(&args.out, &records)
    };
    written.map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32, Failure> {
    let opts = VerifyOptions {
        trials: args.trials,
        seed: args.seed,
        threads: Threads(args.threads.map(|t| t as usize)),
    };
    let reports = run_all(&opts).map_err(|e| Failure::Runtime(e.to_string()))?;
    for r in &reports {
        println!("{r}");
    }
    Ok(if reports.iter().all(|r| r.ok()) { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_bench(args: &BenchArgs) -> Result<i32, Failure> {
    let cfg = args.scenario.resolve()?;
    let rows = bench_timing(&cfg, &args.algs, args.trials, args.swap_rounds).map_err(|e| Failure::Runtime(e.to_string()))?;
    let mut out = io::stdout().lock();
    let _ = write!(out, "{}", format_table(&cfg, &rows, args.swap_rounds));
    if args.scaling {
        let ratio = gfwd_port_scaling(&cfg, args.trials).map_err(|e| Failure::Runtime(e.to_string()))?;
        let _ = writeln!(out, "gfwd time ratio P={} / P={}: {ratio:.3}", 2 * cfg.ports, cfg.ports);
    }
    Ok(EXIT_OK)
}
