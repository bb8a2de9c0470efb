//! `vanderspec`: run one experiment and write its tables.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::builder::PossibleValuesParser;
use clap::Parser;
use vanderspec_core::experiments::{self, Experiment, ExperimentConfig, KSeq, OutputFormat};
use vanderspec_core::par::{with_workers, Execution};
use vanderspec_core::Error;

/// Worker-count override; science knobs are flags only.
const WORKERS_ENV: &str = "VANDERSPEC_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "vanderspec", version, about = "Random Vandermonde matrix experiments")]
struct Cli {
    /// Experiment to run.
    #[arg(value_parser = PossibleValuesParser::new(Experiment::ALL.map(Experiment::name)))]
    experiment: String,

    /// Matrix scale N, or a comma-separated list for scans.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,

    /// Number of phases L.
    #[arg(long, conflicts_with = "beta")]
    l: Option<usize>,

    /// Aspect ratio, L = round(beta * N^d).
    #[arg(long)]
    beta: Option<f64>,

    /// Phase dimension.
    #[arg(long)]
    d: Option<usize>,

    #[arg(long)]
    trials: Option<usize>,

    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Probability level, or truncation radius for the bridge experiments.
    #[arg(long)]
    eps: Option<f64>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,

    /// Exponent sequence of the generalized matrix.
    #[arg(long = "k-seq", value_parser = ["linear", "pow2", "square"])]
    k_seq: Option<String>,

    /// Bridge grid size (a power of two).
    #[arg(long)]
    grid: Option<usize>,

    /// Dyadic depth of the phase search.
    #[arg(long)]
    depth: Option<u32>,

    /// Threshold exponents `lo:hi` for thresholds 10^-p.
    #[arg(long = "p-range")]
    p_range: Option<String>,

    /// Histogram bin count (default Freedman–Diaconis).
    #[arg(long)]
    bins: Option<usize>,
}

fn parse_p_range(s: &str) -> Result<(u32, u32), Error> {
    let bad = || Error::Config(format!("--p-range expects lo:hi, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn build_config(cli: &Cli) -> Result<(ExperimentConfig, OutputFormat), Error> {
    let mut c = ExperimentConfig::defaults(cli.experiment.parse()?);
    if let Some(n) = &cli.n {
        c.ns = n.clone();
    }
    c.l = cli.l.or(c.l);
    c.beta = cli.beta.or(c.beta);
    c.d = cli.d.unwrap_or(c.d);
    c.trials = cli.trials.unwrap_or(c.trials);
    c.seed = cli.seed.unwrap_or(c.seed);
    c.eps = cli.eps.unwrap_or(c.eps);
    if let Some(k) = &cli.k_seq {
        c.k_seq = Some(k.parse::<KSeq>()?);
    }
    c.grid = cli.grid.unwrap_or(c.grid);
    c.depth = cli.depth.unwrap_or(c.depth);
    if let Some(p) = &cli.p_range {
        c.p_range = parse_p_range(p)?;
    }
    c.bins = cli.bins.or(c.bins);
    c.validate()?;
    Ok((c, cli.format.parse()?))
}

fn workers() -> Result<Option<usize>, Error> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let (config, format) = build_config(cli)?;
    let k = workers()?;
    let exec = if k == Some(1) { Execution::Sequential } else { Execution::Parallel };
    let start = Instant::now();
    let tables = with_workers(k, || experiments::run(&config, exec))?;
    let files = experiments::write_tables(&tables, &cli.out, format)?;
    for f in files {
        println!("{}", f.display());
    }
    eprintln!("{}: {:.3} s", config.experiment, start.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
