//! The `photonpress` command-line front end.
//!
//! Every subcommand writes its artifacts plus a `manifest.json` into the
//! output directory. Failures print a JSON error object on stderr.

mod commands;
mod manifest;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::invdesign::Method;
use crate::srp::tracer::SOLAR_IRRADIANCE_1AU;

pub use manifest::{sha256_file, Manifest};
pub use verify::{run_suite, OracleCheck};

/// Environment variable consulted when `--threads` is not given.
pub const THREADS_ENV: &str = "PHOTONPRESS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "photonpress",
    version,
    about = "Radiation-pressure force maps, neural proxies and adjoint trajectory design"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides shared by all subcommands; each uses the ones that apply to it.
#[derive(Clone, Debug, Args)]
pub struct Common {
    /// Master seed; every stage derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte-Carlo samples per estimate.
    #[arg(long, global = true)]
    pub spp: Option<usize>,
    /// Force-map resolution, `WxH`.
    #[arg(long, global = true, value_parser = parse_resolution)]
    pub res: Option<(usize, usize)>,
    /// Maximum number of bounces per path.
    #[arg(long, global = true)]
    pub bounces: Option<u32>,
    /// Training steps (train-proxy), integration steps (propagate) or outer steps (optimize).
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Integration step [s].
    #[arg(long = "step-size", global = true)]
    pub step_size: Option<f64>,
    /// Worker threads; falls back to PHOTONPRESS_THREADS, then all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Force and torque over a latitude-longitude grid of sun directions.
    Forcemap {
        /// Template file, or `library:<name>`.
        #[arg(long, default_value = "library:box-wing")]
        template: String,
        /// Design vector; defaults to the centre of the bounds.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        #[arg(long, default_value_t = SOLAR_IRRADIANCE_1AU)]
        irradiance: f64,
    },
    /// Random (direction, design) training rows for the proxy.
    Sample {
        #[arg(long, default_value = "library:box-wing")]
        template: String,
        #[arg(long, default_value_t = 1024)]
        rows: usize,
        /// Copy this dataset into the output directory and append to the copy.
        #[arg(long)]
        extend: Option<PathBuf>,
        #[arg(long, default_value_t = SOLAR_IRRADIANCE_1AU)]
        irradiance: f64,
    },
    /// Fit a proxy network to a dataset.
    TrainProxy {
        #[arg(long)]
        data: PathBuf,
        /// Hidden layers and width, `LxW`.
        #[arg(long, value_parser = parse_resolution)]
        arch: Option<(usize, usize)>,
        /// Training configuration JSON; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Relative error of a proxy on a dataset.
    EvalProxy {
        #[arg(long)]
        proxy: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Propagate every case of a scenario.
    Propagate {
        #[arg(long)]
        scenario: PathBuf,
        /// Use this proxy instead of the scenario's force model.
        #[arg(long)]
        proxy: Option<PathBuf>,
        /// Free-parameter values; defaults to the scenario's initial ones.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
    },
    /// Optimize a scenario's free parameters.
    Optimize {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        proxy: Option<PathBuf>,
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        /// Outer learning rate in normalized units.
        #[arg(long)]
        lr: Option<f64>,
        /// Finite-difference check of the initial gradient with this relative step.
        #[arg(long)]
        check_gradient: Option<f64>,
    },
    /// Built-in analytic oracle suite.
    Verify,
}

fn parse_resolution(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height in `{s}`"))?;
    if w == 0 || h == 0 {
        return Err(format!("both dimensions must be positive, got `{s}`"));
    }
    Ok((w, h))
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "adam" => Ok(Method::Adam),
        "gd" | "gradient_descent" => Ok(Method::GradientDescent),
        "lbfgs" => Ok(Method::Lbfgs),
        _ => Err(format!("unknown method `{s}` (adam, gd, lbfgs)")),
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV}=`{v}` is not a thread count"))),
        _ => Ok(0),
    }
}

fn error_json(e: &Error) -> String {
    json!({"error": {"kind": e.kind(), "message": e.to_string()}}).to_string()
}

/// Run the CLI on `argv` (including the program name) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let args: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &args) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "{}", error_json(&e));
            1
        }
    }
}

fn execute(cli: &Cli, args: &[String]) -> Result<i32> {
    let threads = resolve_threads(cli.common.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| commands::dispatch(cli, args, pool.current_num_threads()))
}
