mod config;

use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use flatstir_core::analysis::{descent_polynomial_bruteforce, ConjectureReport};
use flatstir_core::counting::{
    count_flattened_identity, count_flattened_recurrence, count_flattened_series_approx, run_distribution_bruteforce,
    RunSource,
};
use flatstir_core::enumeration::{gen_flattened, gen_gcp, gen_stirling};
use flatstir_core::oeis::{self, ClientConfig};
use flatstir_core::series::{descent_polynomial, egf_flattened};
use flatstir_core::verify::{self, VerifyConfig};
use flatstir_core::{phi, phi_inverse, Budget, ColoredPartition, CountTable, Error, IntPolynomial, StirlingWord};

use config::{Overrides, Settings};

/// Flattened k-Stirling permutations: enumeration, counting and cross-checks.
#[derive(Parser, Debug)]
#[command(name = "flatstir", version)]
struct Cli {
    /// Flat key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Largest number of objects any enumeration may produce.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Enumerate regardless of the budget.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stream every word of Q_n^k, or every flattened word or good partition.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Only flattened words.
        #[arg(long)]
        flattened: bool,
        #[arg(long = "as", value_enum, default_value_t = Objects::Words)]
        objects: Objects,
        #[arg(long, value_enum, default_value_t = StreamFormat::Text)]
        format: StreamFormat,
    },
    /// Print the number of flattened words of order n.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = CountMethod::Recurrence)]
        method: CountMethod,
        /// Working precision for series-approx.
        #[arg(long, default_value_t = 128)]
        precision_bits: u32,
    },
    /// Totals and run-refined counts for orders 1..=max-n.
    Table {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        max_n: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Md)]
        format: TableFormat,
        #[arg(long, value_enum, default_value_t = Runs::Bruteforce)]
        runs: Runs,
    },
    /// Map a partition to its word (forward) or a word to its partition (inverse), read from stdin.
    Bijection {
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
    },
    /// Descent polynomial of the flattened words of order n.
    Poly {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = PolyMethod::Egf)]
        method: PolyMethod,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
    },
    /// Exact coefficients a_0..a_order of the generating function for the totals.
    Egf {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
    },
    /// Run the full cross-validation sweep.
    Verify {
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        max_k: Option<usize>,
        #[arg(long)]
        count_max_n: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
    },
    /// Compare totals with the matching OEIS entry (k = 2, 3, 4).
    Oeis {
        #[arg(long)]
        k: usize,
        /// Largest index n compared (orders 1..=max-n+1).
        #[arg(long, default_value_t = 9)]
        max_n: usize,
        /// Use the cache or the embedded prefix only.
        #[arg(long)]
        offline: bool,
        /// Directory for cached b-files and pinned offsets.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
    },
    /// Unimodality and real-rootedness of descent polynomials.
    Conjecture {
        #[arg(long)]
        max_n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Objects {
    Words,
    Partitions,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StreamFormat {
    Text,
    Jsonl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Md,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Json,
    Md,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CountMethod {
    Recurrence,
    Identity,
    Egf,
    SeriesApprox,
    Bruteforce,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolyMethod {
    Egf,
    Bruteforce,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Runs {
    Bruteforce,
    Egf,
    None,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Direction {
    Forward,
    Inverse,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_NETWORK: u8 = 4;

enum Failure {
    Core(Error),
    Usage(String),
    /// A comparison ran and disagreed; the report is already on stdout.
    Mismatch(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: String,
}

fn emit_error(kind: &str, message: String) {
    let line = serde_json::to_string(&ErrorLine { error: kind, message }).expect("plain struct serializes");
    eprintln!("{line}");
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Malformed(_) | Error::Domain(_) => EXIT_USAGE,
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Network(_) | Error::Unavailable(_) => EXIT_NETWORK,
        _ => EXIT_MISMATCH,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            emit_error("usage", first.trim_start_matches("error: ").to_string());
            return ExitCode::from(EXIT_USAGE);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            emit_error(e.kind(), e.to_string());
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Usage(msg)) => {
            emit_error("usage", msg);
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Mismatch(msg)) => {
            emit_error("mismatch", msg);
            ExitCode::from(EXIT_MISMATCH)
        }
        // A closed pipe (e.g. `| head`) is not an error.
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            emit_error("io", e.to_string());
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let offline_flag = matches!(cli.command, Command::Oeis { offline: true, .. });
    let cache_flag = match &cli.command {
        Command::Oeis { cache_dir, .. } => cache_dir.clone(),
        _ => None,
    };
    let settings = config::resolve(&Overrides {
        config: cli.config.clone(),
        budget: cli.budget,
        cache_dir: cache_flag,
        offline: offline_flag,
    })
    .map_err(|e| Failure::Usage(e.0))?;
    let budget = if cli.force {
        Budget::unlimited()
    } else {
        Budget::new(settings.budget)
    };

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Enumerate {
            n,
            k,
            flattened,
            objects,
            format,
        } => enumerate(&mut out, n, k, flattened, objects, format, budget)?,
        Command::Count {
            n,
            k,
            method,
            precision_bits,
        } => count(&mut out, n, k, method, precision_bits, budget)?,
        Command::Table { k, max_n, format, runs } => table(&mut out, k, max_n, format, runs, budget)?,
        Command::Bijection { direction, k, format } => bijection(&mut out, direction, k, format)?,
        Command::Poly { n, k, method, format } => {
            let p = match method {
                PolyMethod::Egf => descent_polynomial(n, k)?,
                PolyMethod::Bruteforce => descent_polynomial_bruteforce(n, k, budget)?,
            };
            write_poly(&mut out, n, k, &p, format)?;
        }
        Command::Egf { k, order, format } => egf(&mut out, k, order, format)?,
        Command::Verify {
            max_n,
            max_k,
            count_max_n,
            format,
        } => {
            let defaults = VerifyConfig::default();
            let config = VerifyConfig {
                max_n: max_n.unwrap_or(defaults.max_n),
                max_k: max_k.unwrap_or(defaults.max_k),
                budget: cli.budget.unwrap_or(if cli.force { u64::MAX } else { defaults.budget }),
                count_max_n: count_max_n.unwrap_or(defaults.count_max_n),
                count_max_k: defaults.count_max_k,
            };
            let report = verify::run_all(&config);
            match format {
                OutFormat::Text => write!(out, "{}", report.to_text())?,
                OutFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
            }
            out.flush()?;
            if !report.passed() {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.as_str())
                    .collect();
                return Err(Failure::Mismatch(format!("failed checks: {}", failed.join(", "))));
            }
        }
        Command::Oeis { k, max_n, format, .. } => oeis_check(&mut out, k, max_n, format, &settings)?,
        Command::Conjecture { max_n, k, format } => {
            let report = ConjectureReport::build(k, max_n)?;
            match format {
                ReportFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
                ReportFormat::Md => write!(out, "{}", report.to_markdown())?,
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn enumerate(
    out: &mut impl Write,
    n: usize,
    k: usize,
    flattened: bool,
    objects: Objects,
    format: StreamFormat,
    budget: Budget,
) -> Result<(), Failure> {
    match objects {
        Objects::Words => {
            let words: Box<dyn Iterator<Item = StirlingWord>> = if flattened {
                Box::new(gen_flattened(n, k, budget)?)
            } else {
                Box::new(gen_stirling(n, k, budget)?)
            };
            for w in words {
                match format {
                    StreamFormat::Text => writeln!(out, "{w}")?,
                    StreamFormat::Jsonl => writeln!(out, "{}", serde_json::to_string(&w)?)?,
                }
            }
        }
        // Good partitions are in bijection with flattened words, so
        // `--flattened` changes nothing here.
        Objects::Partitions => {
            for p in gen_gcp(n, k, budget)? {
                match format {
                    StreamFormat::Text => writeln!(out, "{p}")?,
                    StreamFormat::Jsonl => writeln!(out, "{}", serde_json::to_string(&p)?)?,
                }
            }
        }
    }
    Ok(())
}

fn count(
    out: &mut impl Write,
    n: usize,
    k: usize,
    method: CountMethod,
    precision_bits: u32,
    budget: Budget,
) -> Result<(), Failure> {
    let value = match method {
        CountMethod::Recurrence => count_flattened_recurrence(n, k)?,
        CountMethod::Identity => count_flattened_identity(n, k)?,
        CountMethod::Egf => {
            if n == 0 || k == 0 {
                return Err(Error::Domain(format!("need n >= 1 and k >= 1 (got n={n}, k={k})")).into());
            }
            egf_flattened(k, n - 1).egf_count(n - 1)?
        }
        CountMethod::SeriesApprox => {
            if n == 0 {
                return Err(Error::Domain("need n >= 1".to_string()).into());
            }
            let approx = count_flattened_series_approx(n - 1, k, precision_bits)?;
            writeln!(out, "{}", approx.rounded)?;
            writeln!(out, "{}", approx.approximation)?;
            return Ok(());
        }
        CountMethod::Bruteforce => run_distribution_bruteforce(n, k, budget)?.into_iter().sum(),
    };
    writeln!(out, "{value}")?;
    Ok(())
}

fn table(
    out: &mut impl Write,
    k: usize,
    max_n: usize,
    format: TableFormat,
    runs: Runs,
    budget: Budget,
) -> Result<(), Failure> {
    let table = match runs {
        Runs::Bruteforce => CountTable::build(k, max_n, budget, RunSource::BruteForce)?,
        Runs::Egf => CountTable::build(k, max_n, budget, RunSource::Egf)?,
        Runs::None => {
            let mut t = CountTable::build(k, max_n, Budget::new(0), RunSource::BruteForce)?;
            t.notices.clear();
            t
        }
    };
    for notice in &table.notices {
        eprintln!("notice: {notice}");
    }
    match format {
        TableFormat::Md => write!(out, "{}", table.to_markdown())?,
        TableFormat::Csv => write!(out, "{}", table.to_csv())?,
        TableFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&table)?)?,
    }
    Ok(())
}

fn bijection(out: &mut impl Write, direction: Direction, k: usize, format: OutFormat) -> Result<(), Failure> {
    let mut input = String::new();
    io::stdin().read_to_string(&mut input)?;
    let text = input.trim();
    if text.is_empty() {
        return Err(Failure::Usage("expected one object on standard input".to_string()));
    }
    let json = text.starts_with('{');
    match direction {
        Direction::Forward => {
            let p: ColoredPartition = if json {
                serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?
            } else {
                ColoredPartition::parse(text, k)?
            };
            if p.k() != k {
                return Err(Error::Domain(format!("partition has k={} but --k {k}", p.k())).into());
            }
            if p.was_reordered() {
                eprintln!("notice: input was not in standard block notation and has been reordered");
            }
            let w = phi(&p)?;
            match format {
                OutFormat::Text => writeln!(out, "{w}")?,
                OutFormat::Json => writeln!(out, "{}", serde_json::to_string(&w)?)?,
            }
        }
        Direction::Inverse => {
            let w: StirlingWord = if json {
                serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?
            } else {
                StirlingWord::parse(text, k)?
            };
            if w.multiplicity() != k {
                return Err(Error::Domain(format!("word has multiplicity {} but --k {k}", w.multiplicity())).into());
            }
            let p = phi_inverse(&w)?;
            match format {
                OutFormat::Text => writeln!(out, "{p}")?,
                OutFormat::Json => writeln!(out, "{}", serde_json::to_string(&p)?)?,
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PolyJson<'a> {
    n: usize,
    k: usize,
    coeffs: Vec<String>,
    text: &'a str,
}

fn write_poly(out: &mut impl Write, n: usize, k: usize, p: &IntPolynomial, format: OutFormat) -> Result<(), Failure> {
    let text = p.to_string();
    match format {
        OutFormat::Text => writeln!(out, "{text}")?,
        OutFormat::Json => {
            let json = PolyJson {
                n,
                k,
                coeffs: p.coeffs().iter().map(ToString::to_string).collect(),
                text: &text,
            };
            writeln!(out, "{}", serde_json::to_string(&json)?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EgfJson {
    k: usize,
    order: usize,
    coeffs: Vec<String>,
}

fn egf(out: &mut impl Write, k: usize, order: usize, format: OutFormat) -> Result<(), Failure> {
    if k == 0 {
        return Err(Error::Domain("need k >= 1".to_string()).into());
    }
    let coeffs: Vec<String> = egf_flattened(k, order)
        .coeffs()
        .iter()
        .map(|c| format!("{}/{}", c.numer(), c.denom()))
        .collect();
    match format {
        OutFormat::Text => {
            for c in &coeffs {
                writeln!(out, "{c}")?;
            }
        }
        OutFormat::Json => writeln!(out, "{}", serde_json::to_string(&EgfJson { k, order, coeffs })?)?,
    }
    Ok(())
}

fn oeis_check(
    out: &mut impl Write,
    k: usize,
    max_n: usize,
    format: OutFormat,
    settings: &Settings,
) -> Result<(), Failure> {
    let client = oeis::Client::new(ClientConfig {
        cache_dir: settings.cache_dir.clone(),
        offline: settings.offline,
        timeout: Duration::from_secs(settings.timeout_secs),
        ..ClientConfig::default()
    });
    let report = oeis::cross_check(&client, k, max_n)?;
    for f in &report.fallbacks {
        eprintln!("notice: skipped {f}");
    }
    match format {
        OutFormat::Text => write!(out, "{}", report.to_text())?,
        OutFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
    }
    out.flush()?;
    if !report.all_match() {
        return Err(Failure::Mismatch(format!(
            "{}: {} of {} terms match",
            report.sequence,
            report.matched(),
            report.compared()
        )));
    }
    Ok(())
}
