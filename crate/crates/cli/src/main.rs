//! `stratscat`: forward solves, parametrix assembly and inverse recovery
//! from the command line. Every run writes its artifacts and a
//! `manifest.json` with content hashes into `--out`.

mod config;
mod forward;
mod inverse;
mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use output::Artifacts;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    ConfigInvalid(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigInvalid(_) => "ConfigInvalid",
            CliError::Io(_) => "IoFailure",
            CliError::Numerical(_) => "NumericalFailure",
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stratscat", version, about = "Scattering on perturbed stratified media")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Medium document (JSON); overrides the one named in the config.
    #[arg(long, global = true)]
    medium: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized test data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Frequency; overrides the config.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Guided modes at one tangential wavenumber and a dispersion table.
    Modes {
        #[arg(long)]
        kappa: f64,
        /// Number of kappa samples in (0, kappa] for dispersion.csv.
        #[arg(long, default_value_t = 20)]
        sweep: usize,
    },
    /// Reflection/transmission coefficients from above.
    Coeffs {
        #[arg(long = "omega-n")]
        omega_n: Option<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Reflected, transmitted and antipodal images of a direction.
    Maps {
        #[arg(long = "omega-n", allow_hyphen_values = true)]
        omega_n: f64,
        #[arg(long, default_value_t = 0.0)]
        azimuth: f64,
    },
    /// Assemble the parametrix and fit its residual decay.
    Parametrix {
        /// Incident direction "x,y,z" (normalized).
        #[arg(long)]
        omega: String,
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Layer stripping from a symbol file.
    Recover {
        #[arg(long)]
        symbols: PathBuf,
        #[arg(long)]
        mode: String,
        /// Orders as J..L.
        #[arg(long)]
        orders: String,
    },
    /// Marchenko inversion of 1D reflection data (CSV: k,re_R,im_R).
    Invert1d {
        #[arg(long)]
        reflection: PathBuf,
        /// Bound state "kappa:norming"; repeatable.
        #[arg(long)]
        bound: Vec<String>,
        #[arg(long = "x-min", default_value_t = -3.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long = "x-max", default_value_t = 3.0, allow_hyphen_values = true)]
        x_max: f64,
    },
    /// Plant random layers, synthesize their symbols and recover them.
    Roundtrip {
        #[arg(long, default_value = "transmitted")]
        mode: String,
        #[arg(long, default_value = "3..4")]
        orders: String,
        #[arg(long, default_value_t = 0.1)]
        scale: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::ConfigInvalid(format!("threads: {e}")))?;
    }
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(m) = cli.medium {
        cfg.medium = Some(m);
    }
    if let Some(l) = cli.lambda {
        cfg.lambda = l;
    }
    cfg.validate()?;
    let mut out = Artifacts::new(&cli.out)?;
    let (name, details) = match &cli.command {
        Command::Modes { kappa, sweep } => ("modes", forward::modes(&cfg, &mut out, *kappa, *sweep)?),
        Command::Coeffs { omega_n, samples } => ("coeffs", forward::coeffs(&cfg, &mut out, *omega_n, *samples)?),
        Command::Maps { omega_n, azimuth } => ("maps", forward::maps(&cfg, &mut out, *omega_n, *azimuth)?),
        Command::Parametrix { omega, order } => {
            let w = forward::parse_vec3(omega)?;
            ("parametrix", forward::parametrix(&cfg, &mut out, w, *order)?)
        }
        Command::Recover { symbols, mode, orders } => {
            let (mode, orders) = (inverse::parse_mode(mode)?, inverse::parse_orders(orders)?);
            ("recover", inverse::recover(&cfg, &mut out, symbols, mode, orders)?)
        }
        Command::Invert1d { reflection, bound, x_min, x_max } => {
            let b = bound.iter().map(|s| inverse::parse_bound(s)).collect::<Result<Vec<_>, _>>()?;
            if x_max <= x_min {
                return Err(CliError::ConfigInvalid("x-max must exceed x-min".into()));
            }
            ("invert1d", inverse::invert1d(&cfg, &mut out, reflection, &b, (*x_min, *x_max))?)
        }
        Command::Roundtrip { mode, orders, scale } => {
            let (mode, orders) = (inverse::parse_mode(mode)?, inverse::parse_orders(orders)?);
            ("roundtrip", inverse::roundtrip(&cfg, &mut out, cli.seed, mode, orders, *scale)?)
        }
    };
    let halted = details.get("halted_at").and_then(|h| h.as_u64());
    out.finish(name, cli.seed, &cfg, details)?;
    if let Some(k) = halted {
        return Err(CliError::Numerical(format!("residual symbol at order {k} exceeds the tolerance; partial results written")));
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.code() }));
            ExitCode::from(e.code())
        }
    }
}
