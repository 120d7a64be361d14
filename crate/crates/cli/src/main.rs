use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gapforge::explorer::{
    cluster_scan, explore, normalized_gaps, normalized_gaps_sharded, parse_normalizer,
    render_report, Report, ReportFormat,
};
use gapforge::numeric::GrowthConstants;
use gapforge::primes::max_gap_records;
use gapforge::rankin::{
    derive_params, run_construction, schedule, write_trace, RankinConfig, RankinParams, Strategy,
};
use gapforge::smooth::smooth_count;
use gapforge::tuples::{place_prime_tuple, AdmissibleTuple, PlacementConstraint};
use gapforge::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "gapforge",
    version,
    about = "Prime gaps, smooth numbers and covering constructions"
)]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    ErdosRankin,
    Maynard,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalized gaps d/f(p) for consecutive primes in [lo, hi].
    Gaps {
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
        /// log, g-log, const, const:<c>, identity or file:<path>
        #[arg(long, default_value = "log")]
        f: String,
        /// Split the range into this many parallel shards.
        #[arg(long, default_value_t = 1)]
        shards: u64,
    },
    /// First-occurrence maximal gaps up to a limit.
    Records {
        #[arg(long)]
        limit: u64,
    },
    /// Count y-smooth integers up to x.
    Smooth {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
        /// Value used for the o(1) term of the upper bound.
        #[arg(long, default_value_t = 0.0)]
        o1: f64,
    },
    /// Place a prime tuple near the given targets.
    Tuple {
        /// Comma-separated increasing targets.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<f64>,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        q0: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Run the covering construction.
    Rankin(RankinArgs),
    /// Scan n ≡ z (mod W) for translates n + H with at least m primes.
    Scan {
        #[arg(long)]
        z: u64,
        #[arg(long)]
        w: u64,
        /// File with the offsets, or an inline list such as 0,2,6.
        #[arg(long)]
        tuple: String,
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
        #[arg(long)]
        m: usize,
    },
    /// Histogram of normalized gaps with running minima.
    Explore {
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
        #[arg(long, default_value = "log")]
        f: String,
        #[arg(long, default_value_t = 0.1)]
        grid: f64,
        /// Minimum count for a cell to be marked hit.
        #[arg(long, default_value_t = 1)]
        hit_threshold: u64,
    },
}

#[derive(Args, Debug)]
struct RankinArgs {
    #[arg(long = "L")]
    l: u64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    v: Option<u64>,
    #[arg(long)]
    y: Option<u64>,
    #[arg(long = "U")]
    u: Option<u64>,
    #[arg(long)]
    q0: Option<u64>,
    /// File with the tuple offsets.
    #[arg(long)]
    tuple: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyArg::ErdosRankin)]
    strategy: StrategyArg,
    /// Upper end of the class-0 range for the maynard strategy.
    #[arg(long)]
    zbound: Option<u64>,
    /// Also write the survivor trace as CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn parse_offsets(text: &str) -> Result<Vec<u64>> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Invalid(format!("bad tuple offset {s:?}")))
        })
        .collect()
}

fn read_tuple(arg: &str) -> Result<AdmissibleTuple> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path)?
    } else {
        arg.to_string()
    };
    AdmissibleTuple::new(parse_offsets(&text)?)
}

fn rankin_params(args: &RankinArgs, k: usize) -> Result<RankinParams> {
    let constants = GrowthConstants::default();
    match (args.v, args.y, args.u) {
        (Some(v), Some(y), Some(u)) => RankinParams::explicit(args.l, k, v, y, u),
        (None, None, None) => derive_params(args.l, k, &constants),
        (v, y, u) => {
            let s = schedule(args.l, k, &constants)?;
            let mut p = RankinParams::explicit(
                args.l,
                k,
                v.unwrap_or(s.v.floor() as u64),
                y.unwrap_or(s.y.floor() as u64),
                u.unwrap_or(s.u.floor() as u64),
            )?;
            p.u_fallback = u.is_none() && s.u_fallback;
            Ok(p)
        }
    }
}

fn rankin(args: &RankinArgs) -> Result<gapforge::rankin::Construction> {
    let tuple = match &args.tuple {
        Some(path) => AdmissibleTuple::new(parse_offsets(&std::fs::read_to_string(path)?)?)?,
        None => AdmissibleTuple::empty(),
    };
    let k = args.k.unwrap_or(tuple.k);
    let params = rankin_params(args, k)?;
    let mut config = RankinConfig::new(params, tuple, args.q0)?;
    let strategy = match args.strategy {
        StrategyArg::ErdosRankin => Strategy::ErdosRankin,
        StrategyArg::Maynard => {
            config = config.with_zbound(args.zbound)?;
            Strategy::Maynard
        }
    };
    let c = run_construction(&config, strategy)?;
    if let Some(path) = &args.trace {
        write_trace(&c.history, std::fs::File::create(path)?)?;
    }
    Ok(c)
}

fn emit(report: &dyn ErasedReport, cli: &Cli) -> Result<()> {
    let format = cli.format.into();
    match &cli.out {
        Some(path) => {
            let mut out = io::BufWriter::new(std::fs::File::create(path)?);
            report.render(format, &mut out)
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            report.render(format, &mut out)
        }
    }
}

trait ErasedReport {
    fn render(&self, format: ReportFormat, out: &mut dyn Write) -> Result<()>;
}

impl<R: Report> ErasedReport for R {
    fn render(&self, format: ReportFormat, out: &mut dyn Write) -> Result<()> {
        render_report(self, format, out)
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gaps { lo, hi, f, shards } => {
            let f = parse_normalizer(f)?;
            let gaps = if *shards > 1 {
                normalized_gaps_sharded(*lo, *hi, &f, *shards)?
            } else {
                normalized_gaps(*lo, *hi, &f)?
            };
            emit(&gaps, cli)
        }
        Command::Records { limit } => emit(&max_gap_records(*limit)?, cli),
        Command::Smooth { x, y, o1 } => emit(&smooth_count(*x, *y, *o1)?, cli),
        Command::Tuple {
            targets,
            eta,
            q0,
            cap,
        } => {
            let c = PlacementConstraint::relative(targets, *eta)?
                .with_q0(*q0)
                .with_cap(*cap);
            emit(&place_prime_tuple(&c)?, cli)
        }
        Command::Rankin(args) => emit(&rankin(args)?, cli),
        Command::Scan {
            z,
            w,
            tuple,
            lo,
            hi,
            m,
        } => {
            let h = read_tuple(tuple)?;
            emit(&cluster_scan(*z, *w, &h, *lo, *hi, *m)?, cli)
        }
        Command::Explore {
            lo,
            hi,
            f,
            grid,
            hit_threshold,
        } => {
            let f = parse_normalizer(f)?;
            let mut report = explore(*lo, *hi, &f, *grid)?;
            report.estimate = report.estimate.with_hit_threshold(*hit_threshold);
            report.hit_measure = report.estimate.hit_measure();
            emit(&report, cli)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                e if e.is_budget() => ExitCode::from(3),
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
