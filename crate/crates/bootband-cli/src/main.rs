//! The `bootband` binary: experiment subcommands over a shared flag set.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bootband_cli::config::{parse_family, parse_preset, parse_scheme};
use bootband_cli::{CliError, ConfigError, CsvTable, RunConfig};

#[derive(Parser)]
#[command(
    name = "bootband",
    version,
    about = "Simultaneous bootstrap confidence bands: experiment harness",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit one dataset and emit its simultaneous band (band.csv).
    Band(CommonArgs),
    /// Measure effective coverage over Monte-Carlo datasets (coverage.csv).
    Coverage(CommonArgs),
    /// Compare true-world and bootstrap corrected levels (correction.csv).
    Correction(CommonArgs),
    /// Emit modeling-bias norms and paired band widths (bias.csv).
    Bias(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value config file, applied after the preset.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Scale preset applied first: paper (full) or desk (minutes).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// Model family: lc, lq, or qt.
    #[arg(long, value_name = "FAM")]
    family: Option<String>,

    /// Kernel bandwidth for the regression families.
    #[arg(long, value_name = "H")]
    h: Option<f64>,

    /// Number of observations per dataset.
    #[arg(long, value_name = "N")]
    n: Option<usize>,

    /// Number of models in the grid.
    #[arg(long, value_name = "K")]
    k: Option<usize>,

    /// Bootstrap replicates per dataset.
    #[arg(long, value_name = "B")]
    b: Option<usize>,

    /// Monte-Carlo datasets.
    #[arg(long, value_name = "M")]
    m: Option<usize>,

    /// Nominal joint level; repeat the flag for several levels.
    #[arg(long = "alpha", value_name = "A")]
    alphas: Vec<f64>,

    /// Multiplier scheme: gauss, exp, or bern.
    #[arg(long, value_name = "SCHEME")]
    scheme: Option<String>,

    /// Root seed for all random streams.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Worker threads; affects speed, never results.
    #[arg(long, value_name = "T")]
    threads: Option<usize>,

    /// Output directory for the CSV file; omit to print to stdout.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

/// Layers defaults, preset, config file, and flags into one configuration.
fn resolve_config(args: &CommonArgs) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    if let Some(preset) = &args.preset {
        config.apply_preset(parse_preset(preset)?);
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
        config.apply_text(&text)?;
    }
    if let Some(family) = &args.family {
        config.family = parse_family(family)?;
    }
    if let Some(h) = args.h {
        config.h = h;
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(b) = args.b {
        config.b = b;
    }
    if let Some(m) = args.m {
        config.m = Some(m);
    }
    if !args.alphas.is_empty() {
        config.alphas = args.alphas.clone();
    }
    if let Some(scheme) = &args.scheme {
        config.scheme = parse_scheme(scheme)?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

type Runner = fn(&RunConfig) -> Result<CsvTable, CliError>;

fn execute(cmd: &Cmd) -> Result<(), CliError> {
    let (args, name, runner): (&CommonArgs, &str, Runner) = match cmd {
        Cmd::Band(a) => (a, "band", bootband_cli::cmd_band),
        Cmd::Coverage(a) => (a, "coverage", bootband_cli::cmd_coverage),
        Cmd::Correction(a) => (a, "correction", bootband_cli::cmd_correction),
        Cmd::Bias(a) => (a, "bias", bootband_cli::cmd_bias),
    };
    let config = resolve_config(args)?;

    let table = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ConfigError::new(format!("cannot build a {threads}-thread pool: {e}")))?
            .install(|| runner(&config)),
        None => runner(&config),
    }?;

    match &config.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            table.write_to(&dir.join(format!("{name}.csv")))?;
        }
        None => print!("{}", table.render()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("bootband: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
