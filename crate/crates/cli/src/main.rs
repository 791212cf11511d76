use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use psas::reconstruct::Algorithm;
use psas_cli::commands::{compare_cmd, pathmap_cmd, reconstruct_cmd, simulate_cmd};
use psas_cli::config::{FreqRange, RunConfig, Variant};
use psas_cli::CliError;

/// Microwave imaging of scatterers in dispersive, lossy cylinders.
#[derive(Debug, Parser)]
#[command(name = "psas", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (TOML); built-in defaults when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overwrite files in a non-empty output directory.
    #[arg(long, global = true)]
    force: bool,
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a multistatic dataset directory.
    Simulate {
        #[arg(long, short)]
        out: PathBuf,
        /// Drop every object and keep only the background artifact.
        #[arg(long)]
        background_only: bool,
    },
    /// Image a dataset directory.
    Reconstruct {
        /// Dataset directory written by `simulate`.
        #[arg(long, short)]
        data: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// psas, das, dmas or rar.
        #[arg(long)]
        algo: Option<String>,
        /// PSAS frequencies as start:step:stop in Hz.
        #[arg(long)]
        freqs: Option<FreqRange>,
        /// Reference dielectric: matched, higher or lower.
        #[arg(long)]
        reference: Option<String>,
        /// Pixel spacing in metres.
        #[arg(long)]
        grid_spacing: Option<f64>,
    },
    /// Map the number of stationary ray paths to each pixel.
    Pathmap {
        #[arg(long, short)]
        out: PathBuf,
        /// Source angle in degrees.
        #[arg(long)]
        source_deg: Option<f64>,
        /// Hz
        #[arg(long)]
        frequency: Option<f64>,
        /// Pixel spacing in metres.
        #[arg(long)]
        grid_spacing: Option<f64>,
    },
    /// Metric table over algorithms and reference dielectrics.
    Compare {
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Print the default configuration.
    DefaultConfig,
}

fn variant(s: &str) -> Result<Variant, CliError> {
    Variant::ALL.into_iter().find(|v| v.label() == s).ok_or_else(|| CliError::usage(format!("unknown reference '{s}' (expected matched, higher or lower)")))
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (mut cfg, base) = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => (RunConfig::default(), PathBuf::new()),
    };
    if let Some(s) = cli.common.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.common.workers {
        if n == 0 {
            return Err(CliError::usage("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(CliError::runtime)?;
    }
    let force = cli.common.force;
    let base: &Path = &base;
    match cli.command {
        Command::Simulate { out, background_only } => simulate_cmd(&cfg, base, &out, background_only, force),
        Command::Reconstruct { data, out, algo, freqs, reference, grid_spacing } => {
            let r = &mut cfg.reconstruction;
            if let Some(a) = algo {
                r.algorithm = a.parse::<Algorithm>().map_err(CliError::usage)?;
            }
            if let Some(f) = freqs {
                r.frequencies = f;
            }
            if let Some(v) = reference {
                r.reference = variant(&v)?;
            }
            if let Some(g) = grid_spacing {
                r.grid_spacing = g;
            }
            reconstruct_cmd(&cfg, base, &data, &out, force)
        }
        Command::Pathmap { out, source_deg, frequency, grid_spacing } => {
            let p = &mut cfg.pathmap;
            p.source_angle_deg = source_deg.unwrap_or(p.source_angle_deg);
            p.frequency = frequency.unwrap_or(p.frequency);
            p.grid_spacing = grid_spacing.unwrap_or(p.grid_spacing);
            pathmap_cmd(&cfg, base, &out, force)
        }
        Command::Compare { out } => compare_cmd(&cfg, base, &out, force),
        Command::DefaultConfig => Ok(RunConfig::default().to_toml()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::usage(e.to_string().lines().next().unwrap_or("invalid arguments"));
            eprintln!("{}", err.json_line());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(msg) => {
            println!("{}", msg.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
