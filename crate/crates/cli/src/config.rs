use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use singtrace::asymptotics::{GridKind, GridSpec};

use crate::defaults;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "singtrace", version, about = "Numerical laboratory for singular (Dixmier) traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace estimates by one or all routes, with cross-route deltas.
    Trace(TraceArgs),
    /// Measurability verdict and envelope of the Cesaro profile.
    Measurable(MeasurableArgs),
    /// Interval of attainable Dixmier-trace values.
    Range(RangeArgs),
    /// Truncated, Dixmier and pairing values of the Toeplitz index.
    Toeplitz(ToeplitzArgs),
    /// Spectral flow of a Hermitian path by three definitions.
    Specflow(SpecflowArgs),
    /// Run the invariant suite; exits with 5 if a property fails.
    Props(PropsArgs),
    /// List gallery models with their targets.
    Gallery(OutArgs),
    /// Write the singular values of a model to an `explicit:file=` JSON file.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSel {
    Cesaro,
    Zeta,
    Heat,
    Lidskii,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridSel {
    Geometric,
    Loglog,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// JSON output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Largest t of a geometric Cesaro grid.
    #[arg(long = "tmax")]
    pub t_max: Option<f64>,
    /// Largest log t of a log log Cesaro grid.
    #[arg(long = "log-tmax")]
    pub log_t_max: Option<f64>,
    #[arg(long, value_enum)]
    pub grid: Option<GridSel>,
    /// Ratio of a geometric grid.
    #[arg(long)]
    pub grid_ratio: Option<f64>,
    /// Step in log log t of a log log grid.
    #[arg(long)]
    pub loglog_step: Option<f64>,
    /// Measurability tolerance, relative to |value| + 1.
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Model specification, for example `harmonic` or `torus:n=2,R=2000`.
    #[arg(long)]
    pub model: String,
    #[arg(long, value_enum, default_value_t = MethodSel::All)]
    pub method: MethodSel,
    /// Estimate tau(T^p); p > 1 uses the p-power and heat routes.
    #[arg(long, default_value_t = defaults::P)]
    pub p: f64,
    /// Eigenvalues used by the Lidskii route.
    #[arg(long = "nmax", default_value_t = defaults::EIG_TERMS)]
    pub n_max: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Also write the series CSV.
    #[arg(long)]
    pub emit_series: bool,
    /// Series CSV path; defaults to the JSON path with a `.csv` extension.
    #[arg(long)]
    pub series: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasurableArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub model: String,
    /// Largest N in xi_N = g(e^N).
    #[arg(long = "nmax", default_value_t = defaults::RANGE_N_MAX)]
    pub n_max: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ToeplitzArgs {
    /// Winding number.
    #[arg(long, allow_hyphen_values = true)]
    pub w: i64,
    /// Cutoff of the circle Dirac spectrum in the Dixmier route.
    #[arg(long = "R", value_parser = parse_count, default_value_t = defaults::TOEPLITZ_R)]
    pub r: u64,
    /// Size of the truncated compression.
    #[arg(long = "N", value_parser = parse_count, default_value_t = defaults::TOEPLITZ_N)]
    pub n: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SpecflowArgs {
    /// JSON path file: `{"nodes": [[[[re, im], ...], ...], ...], "times": [...]}`.
    #[arg(long)]
    pub path: PathBuf,
    /// Sign-change sampling steps per segment.
    #[arg(long, default_value_t = defaults::CROSSING_STEPS)]
    pub steps: usize,
    /// Initial partition points per segment for the projection definition.
    #[arg(long, default_value_t = defaults::PARTITION_STEPS)]
    pub partition: usize,
    /// Exponent n of (1 + D^2)^{-n/2} in the integral formula.
    #[arg(long = "n", default_value_t = defaults::INTEGRAL_N)]
    pub n: f64,
    #[arg(long, default_value_t = defaults::QUAD_POINTS)]
    pub quad: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PropsArgs {
    /// Comma-separated property names; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: String,
    /// Values written for infinite models.
    #[arg(long = "nmax", value_parser = parse_count, default_value_t = defaults::EIG_TERMS)]
    pub n_max: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Accepts integers written as `1000000` or `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("expected a count, got {s:?}"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) {
        Ok(x as u64)
    } else {
        Err(format!("expected a nonnegative integer, got {s:?}"))
    }
}

/// Resolved configuration echoed in every report.
#[derive(Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodSel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<PathBuf>,
    pub emit_series: bool,
    #[serde(skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub extra: std::collections::BTreeMap<&'static str, serde_json::Value>,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("--{name} must be positive and finite, got {v}")))
    }
}

impl GridArgs {
    /// The explicit grid, or `None` when no grid flag was given.
    pub fn resolve(&self) -> Result<Option<GridSpec>, CliError> {
        positive("tol", self.tol)?;
        let kind = match (self.grid, self.t_max, self.log_t_max) {
            (Some(GridSel::Geometric), _, Some(_)) | (None, Some(_), Some(_)) => {
                return Err(CliError::Config("--log-tmax applies to log log grids; use --tmax".into()))
            }
            (Some(GridSel::Loglog), Some(_), _) => {
                return Err(CliError::Config("--tmax applies to geometric grids; use --log-tmax".into()))
            }
            (Some(g), _, _) => g,
            (None, Some(_), None) => GridSel::Geometric,
            (None, None, Some(_)) => GridSel::Loglog,
            (None, None, None) => {
                if self.grid_ratio.is_some() || self.loglog_step.is_some() {
                    return Err(CliError::Config("grid spacing flags need --grid, --tmax or --log-tmax".into()));
                }
                return Ok(None);
            }
        };
        let mut spec = match kind {
            GridSel::Geometric => {
                let t = positive("tmax", self.t_max.unwrap_or(defaults::T_MAX))?;
                if t <= 1.0 {
                    return Err(CliError::Config(format!("--tmax must exceed 1, got {t}")));
                }
                GridSpec::geometric(t)
            }
            GridSel::Loglog => GridSpec::loglog(positive("log-tmax", self.log_t_max.unwrap_or(defaults::LOG_T_MAX))?),
        };
        if let Some(r) = self.grid_ratio {
            if spec.kind != GridKind::Geometric || !(r > 1.0 && r.is_finite()) {
                return Err(CliError::Config(format!("--grid-ratio needs a geometric grid and a value > 1, got {r}")));
            }
            spec.geometric_ratio = r;
        }
        if let Some(s) = self.loglog_step {
            if spec.kind != GridKind::LogLog {
                return Err(CliError::Config("--loglog-step needs a log log grid".into()));
            }
            spec.loglog_step = positive("loglog-step", s)?;
        }
        Ok(Some(spec))
    }
}

/// Thread cap from `SINGTRACE_THREADS`, else the available parallelism.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var("SINGTRACE_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Config(format!("SINGTRACE_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
