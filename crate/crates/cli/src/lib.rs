//! `refd`: batch CLI over the rating engine.
//!
//! Exit codes: 0 success, 1 validation/runtime failure, 2 usage error.

use std::ffi::OsString;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use refd_core::{
    combine_digests, compare_years, generate_synthetic, group_subscores, histogram_report,
    run_rating, screen_dataset, to_csv_string, Dataset, ModelConfig, ReportEnvelope, ReportPayload,
    StdDevMode, SyntheticSpec,
};

pub mod render;

use render::Format;

#[derive(Parser, Debug)]
#[command(
    name = "refd",
    version,
    about = "Regional football development efficiency ratings",
    long_about = "Scores regions on a factor model with three-sigma interval points, \
                  equal or explicit weights, climate/density support scores and star \
                  categories. Subcommands cover rating, factor screening, multi-year \
                  trends, weight-sensitivity analysis, point histograms, synthetic \
                  datasets and input validation."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct IoArgs {
    /// Dataset CSV; `-` reads standard input
    #[arg(long)]
    data: PathBuf,

    /// Model config TOML; defaults are used when omitted
    #[arg(long, env = "REFD_CONFIG")]
    config: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,

    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the config's standard-deviation mode
    #[arg(long, value_enum)]
    stddev: Option<StdDevArg>,

    /// Treat warnings as errors
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum StdDevArg {
    Population,
    Sample,
}

impl From<StdDevArg> for StdDevMode {
    fn from(v: StdDevArg) -> StdDevMode {
        match v {
            StdDevArg::Population => StdDevMode::Population,
            StdDevArg::Sample => StdDevMode::Sample,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rate every region and print the ranked table
    Rate {
        #[command(flatten)]
        io: IoArgs,
        /// Year label for the dataset
        #[arg(long, default_value_t = 0)]
        year: i32,
    },
    /// Correlation matrix, collinearity flags and pruning report
    Screen {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Compare rating runs across years
    Trend {
        /// Dataset CSVs, one per year, at least two
        #[arg(long = "data", required = true, num_args = 1)]
        data: Vec<PathBuf>,
        /// Comma-separated year labels matching --data order (default 1,2,...)
        #[arg(long)]
        years: Option<String>,
        #[arg(long, env = "REFD_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        stddev: Option<StdDevArg>,
        #[arg(long)]
        strict: bool,
    },
    /// Rank stability under multiplicative weight perturbation
    Sensitivity {
        #[command(flatten)]
        io: IoArgs,
        /// Relative weight jitter in [0, 1)
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Per-factor distribution of allocated points
    Histogram {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Generate a seeded synthetic dataset CSV
    Synth {
        #[arg(long, default_value_t = 83)]
        regions: usize,
        /// Factors per criteria group (5 groups)
        #[arg(long, default_value_t = 4)]
        factors_per_group: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the dataset here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a dataset and/or config without producing a report
    Validate {
        /// Dataset CSV; `-` reads standard input
        #[arg(long, required_unless_present = "config")]
        data: Option<PathBuf>,
        #[arg(long, env = "REFD_CONFIG", required_unless_present = "data")]
        config: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
}

/// Entry point; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rate { io, year } => rate(io, year),
        Command::Screen { io } => screen(io),
        Command::Trend {
            data,
            years,
            config,
            format,
            out,
            stddev,
            strict,
        } => trend(data, years, config, format, out, stddev, strict),
        Command::Sensitivity {
            io,
            epsilon,
            trials,
            seed,
        } => sensitivity_cmd(io, epsilon, trials, seed),
        Command::Histogram { io } => histogram_cmd(io),
        Command::Synth {
            regions,
            factors_per_group,
            seed,
            out,
        } => synth(regions, factors_per_group, seed, out),
        Command::Validate {
            data,
            config,
            strict,
        } => validate(data, config, strict),
    }
}

fn load_model_config(path: Option<&Path>, stddev: Option<StdDevArg>) -> Result<ModelConfig> {
    let mut config = match path {
        Some(p) => {
            refd_core::load_config(p).with_context(|| format!("loading config {}", p.display()))?
        }
        None => ModelConfig::default(),
    };
    if let Some(mode) = stddev {
        config = config.with_stddev_mode(mode.into());
    }
    Ok(config)
}

fn load_dataset(path: &Path, year: i32, config: &ModelConfig) -> Result<Dataset> {
    let mut dataset = if path == Path::new("-") {
        let mut bytes = Vec::new();
        std::io::stdin()
            .lock()
            .read_to_end(&mut bytes)
            .context("reading dataset from stdin")?;
        refd_core::parse_dataset_bytes(&bytes, "<stdin>", year)?
    } else {
        refd_core::parse_dataset(path, year)
            .with_context(|| format!("loading dataset {}", path.display()))?
    };
    config.apply_to_dataset(&mut dataset)?;
    Ok(dataset)
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(content.as_bytes()) {
                // a closed downstream pipe (e.g. `| head`) is not an error
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.context("writing to stdout"),
            }
        }
    }
}

/// Prints warnings to stderr; under --strict any warning is fatal.
fn handle_warnings(warnings: &[String], strict: bool) -> Result<()> {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if strict && !warnings.is_empty() {
        bail!("{} warning(s) treated as errors (--strict)", warnings.len());
    }
    Ok(())
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn finish_report(io: &IoArgs, envelope: ReportEnvelope, dataset: Option<&Dataset>) -> Result<()> {
    let envelope = if io.format == Format::Json {
        envelope.with_timestamp(timestamp())
    } else {
        envelope
    };
    let content = render::render(&envelope, io.format, dataset)?;
    emit(io.out.as_deref(), &content)
}

fn rate(io: IoArgs, year: i32) -> Result<()> {
    let config = load_model_config(io.config.as_deref(), io.stddev)?;
    let dataset = load_dataset(&io.data, year, &config)?;
    let table = run_rating(&dataset, &config)?;
    let warnings: Vec<String> = dataset
        .warnings
        .iter()
        .chain(&table.warnings)
        .cloned()
        .collect();
    handle_warnings(&warnings, io.strict)?;
    let subscores = group_subscores(&table, &dataset);
    let envelope = ReportEnvelope::new(
        config.digest.clone(),
        dataset.provenance.sha256.clone(),
        ReportPayload::Rating { table, subscores },
    );
    finish_report(&io, envelope, Some(&dataset))
}

fn screen(io: IoArgs) -> Result<()> {
    let config = load_model_config(io.config.as_deref(), io.stddev)?;
    let dataset = load_dataset(&io.data, 0, &config)?;
    let threshold = config.screening.threshold;
    let (matrix, report) = screen_dataset(&dataset, threshold)?;
    let warnings: Vec<String> = dataset
        .warnings
        .iter()
        .chain(&report.warnings)
        .cloned()
        .collect();
    handle_warnings(&warnings, io.strict)?;
    let envelope = ReportEnvelope::new(
        config.digest.clone(),
        dataset.provenance.sha256.clone(),
        ReportPayload::Screening {
            threshold,
            matrix,
            report,
        },
    );
    finish_report(&io, envelope, Some(&dataset))
}

#[allow(clippy::too_many_arguments)]
fn trend(
    data: Vec<PathBuf>,
    years: Option<String>,
    config: Option<PathBuf>,
    format: Format,
    out: Option<PathBuf>,
    stddev: Option<StdDevArg>,
    strict: bool,
) -> Result<()> {
    if data.len() < 2 {
        bail!("trend needs at least two --data files, got {}", data.len());
    }
    let years: Vec<i32> = match years {
        Some(list) => {
            let parsed: Vec<i32> = list
                .split(',')
                .map(|y| {
                    y.trim()
                        .parse()
                        .with_context(|| format!("invalid year '{y}'"))
                })
                .collect::<Result<_>>()?;
            if parsed.len() != data.len() {
                bail!(
                    "--years lists {} label(s) for {} dataset(s)",
                    parsed.len(),
                    data.len()
                );
            }
            parsed
        }
        None => (1..=data.len() as i32).collect(),
    };

    let config = load_model_config(config.as_deref(), stddev)?;
    let mut tables = Vec::new();
    let mut digests = Vec::new();
    let mut warnings = Vec::new();
    for (path, year) in data.iter().zip(&years) {
        let dataset = load_dataset(path, *year, &config)?;
        let table =
            run_rating(&dataset, &config).with_context(|| format!("rating {}", path.display()))?;
        warnings.extend(dataset.warnings.iter().cloned());
        warnings.extend(table.warnings.iter().cloned());
        digests.push(dataset.provenance.sha256.clone());
        tables.push(table);
    }
    handle_warnings(&warnings, strict)?;
    let report = compare_years(&tables)?;
    let envelope = ReportEnvelope::new(
        config.digest.clone(),
        combine_digests(digests.iter().map(String::as_str)),
        ReportPayload::Trend { report },
    );
    let io = IoArgs {
        data: PathBuf::new(),
        config: None,
        format,
        out,
        stddev: None,
        strict,
    };
    finish_report(&io, envelope, None)
}

fn sensitivity_cmd(io: IoArgs, epsilon: f64, trials: usize, seed: u64) -> Result<()> {
    let config = load_model_config(io.config.as_deref(), io.stddev)?;
    let dataset = load_dataset(&io.data, 0, &config)?;
    let report = refd_core::sensitivity(&dataset, &config, epsilon, trials, seed)?;
    handle_warnings(&dataset.warnings, io.strict)?;
    let envelope = ReportEnvelope::new(
        config.digest.clone(),
        dataset.provenance.sha256.clone(),
        ReportPayload::Sensitivity { report },
    );
    finish_report(&io, envelope, Some(&dataset))
}

fn histogram_cmd(io: IoArgs) -> Result<()> {
    let config = load_model_config(io.config.as_deref(), io.stddev)?;
    let dataset = load_dataset(&io.data, 0, &config)?;
    let table = run_rating(&dataset, &config)?;
    let warnings: Vec<String> = dataset
        .warnings
        .iter()
        .chain(&table.warnings)
        .cloned()
        .collect();
    handle_warnings(&warnings, io.strict)?;
    let report = histogram_report(&table, &dataset)?;
    let envelope = ReportEnvelope::new(
        config.digest.clone(),
        dataset.provenance.sha256.clone(),
        ReportPayload::Histogram { report },
    );
    finish_report(&io, envelope, Some(&dataset))
}

fn synth(regions: usize, factors_per_group: usize, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let spec = SyntheticSpec::with_shape(regions, factors_per_group, seed);
    let dataset = generate_synthetic(&spec)?;
    let csv = to_csv_string(&dataset)?;
    emit(out.as_deref(), &csv)
}

fn validate(data: Option<PathBuf>, config_path: Option<PathBuf>, strict: bool) -> Result<()> {
    let config = load_model_config(config_path.as_deref(), None)?;
    let mut lines = Vec::new();
    if config_path.is_some() {
        lines.push(format!("config: ok (digest {})", config.digest));
    } else {
        lines.push(format!("config: defaults (digest {})", config.digest));
    }
    let mut warnings = Vec::new();
    if let Some(path) = data {
        let dataset = load_dataset(&path, 0, &config)?;
        lines.push(format!(
            "dataset: ok ({} regions, {} factors, digest {})",
            dataset.regions.len(),
            dataset.factors.len(),
            dataset.provenance.sha256
        ));
        warnings.extend(dataset.warnings);
    }
    handle_warnings(&warnings, strict)?;
    let mut out = lines.join("\n");
    out.push('\n');
    emit(None, &out)
}
