//! Command-line surface and the validated run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;
use crate::runner::THREADS_ENV;

#[derive(Debug, Parser)]
#[command(name = "fareyphase", version, about = "Statistical models on Farey fractions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Levels,
    Partition,
    Verify,
    Eigen,
    Thermo,
    Balls,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the fractions of one or more Farey levels.
    Levels(RunArgs),
    /// Evaluate partition functions over levels and temperatures.
    Partition(RunArgs),
    /// Check the rigorous bounds and limits; exits 1 on any violation.
    Verify(RunArgs),
    /// Leading transfer-operator eigenvalue from the matrix or the sum ratio.
    Eigen(RunArgs),
    /// Free energy, specific heat, the logarithmic fit and the dimension check.
    Thermo(RunArgs),
    /// Ball diameters: exact, composed and derivative-approximated.
    Balls(RunArgs),
}

impl Command {
    pub fn split(self) -> (CommandName, RunArgs) {
        match self {
            Command::Levels(a) => (CommandName::Levels, a),
            Command::Partition(a) => (CommandName::Partition, a),
            Command::Verify(a) => (CommandName::Verify, a),
            Command::Eigen(a) => (CommandName::Eigen, a),
            Command::Thermo(a) => (CommandName::Thermo, a),
            Command::Balls(a) => (CommandName::Balls, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Matrix,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accel {
    Power,
    Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Sandwich,
    Telescope,
    Totient,
    Zeta,
    Balls,
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Curve,
    Fit,
    Hausdorff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    Tree,
    Chain,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Single level.
    #[arg(long)]
    pub k: Option<u32>,
    /// Inclusive level range `A:B`.
    #[arg(long, value_name = "A:B")]
    pub k_range: Option<String>,
    /// Single inverse temperature.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// `start:stop:count`, or `start:stop:count:log1` for spacing that is
    /// logarithmic in `1 - beta`.
    #[arg(long, value_name = "SPEC", allow_hyphen_values = true)]
    pub beta_grid: Option<String>,
    /// Model name, or `all`.
    #[arg(long)]
    pub model: Option<String>,
    /// Transfer-matrix truncation (largest when escalating).
    #[arg(long = "dim", value_name = "M")]
    pub dim: Option<usize>,
    /// Eigen-iteration residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Eigenvalue source for `eigen` and `thermo`.
    #[arg(long, value_enum, default_value = "matrix")]
    pub source: Source,
    /// Eigen-iteration; `eigen` defaults to power, `thermo` to chebyshev.
    #[arg(long, value_enum)]
    pub accel: Option<Accel>,
    /// Also emit the truncation (or level) sequence below the target.
    #[arg(long)]
    pub study: bool,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, value_enum, default_value = "curve")]
    pub analysis: Analysis,
    #[arg(long, value_enum, default_value = "tree")]
    pub convention: ConventionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    LogToOne,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl BetaGrid {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("--beta-grid expects start:stop:count[:log1], got {spec:?}"));
        let parts: Vec<&str> = spec.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let spacing = match parts.get(3).map(|s| s.trim()) {
            None | Some("lin") => Spacing::Linear,
            Some("log1") => Spacing::LogToOne,
            Some(_) => return Err(bad()),
        };
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        if spacing == Spacing::LogToOne && !(start < 1.0 && stop < 1.0) {
            return Err(CliError::Usage("log1 spacing needs both grid ends below 1".into()));
        }
        Ok(BetaGrid { start, stop, count, spacing })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::LogToOne => {
                        let (a, b) = ((1.0 - self.start).ln(), (1.0 - self.stop).ln());
                        1.0 - (a + t * (b - a)).exp()
                    }
                }
            })
            .collect()
    }
}

pub fn parse_k_range(spec: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Usage(format!("--k-range expects A:B with A <= B, got {spec:?}"));
    let (a, b) = spec.split_once(':').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// Everything that determines a command's output, echoed into every output
/// header. The thread count and output path are not serialized.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub fareyphase_version: &'static str,
    pub command: CommandName,
    pub model: Option<String>,
    pub k: Option<u32>,
    pub k_range: Option<(u32, u32)>,
    pub beta: Option<f64>,
    pub beta_grid: Option<BetaGrid>,
    pub dim: Option<usize>,
    pub tol: Option<f64>,
    pub format: Format,
    pub source: Source,
    pub accel: Option<Accel>,
    pub study: bool,
    pub suite: Suite,
    pub analysis: Analysis,
    pub convention: ConventionArg,
    #[serde(skip)]
    pub threads: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(command: CommandName, a: RunArgs) -> Result<Self, CliError> {
        if a.k.is_some() && a.k_range.is_some() {
            return Err(CliError::Usage("give either --k or --k-range, not both".into()));
        }
        if a.beta.is_some() && a.beta_grid.is_some() {
            return Err(CliError::Usage("give either --beta or --beta-grid, not both".into()));
        }
        if let Some(b) = a.beta {
            if !b.is_finite() {
                return Err(CliError::Usage(format!("--beta must be finite, got {b}")));
            }
        }
        if let Some(t) = a.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        let k_range = a.k_range.as_deref().map(parse_k_range).transpose()?;
        let beta_grid = a.beta_grid.as_deref().map(BetaGrid::parse).transpose()?;
        Ok(RunConfig {
            fareyphase_version: env!("CARGO_PKG_VERSION"),
            command,
            model: a.model,
            k: a.k,
            k_range,
            beta: a.beta,
            beta_grid,
            dim: a.dim,
            tol: a.tol,
            format: a.format,
            source: a.source,
            accel: a.accel,
            study: a.study,
            suite: a.suite,
            analysis: a.analysis,
            convention: a.convention,
            threads: a.threads.unwrap_or_else(crate::runner::default_threads),
            out: a.out,
        })
    }

    /// Parses a full command line (program name first).
    pub fn parse_from<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args)?;
        let (name, a) = cli.command.split();
        RunConfig::from_args(name, a).map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, e))
    }

    /// Levels from `--k` or `--k-range`, or `default` if neither is given.
    pub fn levels(&self, default: Option<(u32, u32)>) -> Result<Vec<u32>, CliError> {
        let (a, b) = match (self.k, self.k_range, default) {
            (Some(k), _, _) => (k, k),
            (_, Some(r), _) => r,
            (_, _, Some(r)) => r,
            _ => return Err(CliError::Usage("this command needs --k or --k-range".into())),
        };
        Ok((a..=b).collect())
    }

    /// Temperatures from `--beta` or `--beta-grid`, or `default`.
    pub fn betas(&self, default: Option<&[f64]>) -> Result<Vec<f64>, CliError> {
        match (self.beta, &self.beta_grid, default) {
            (Some(b), _, _) => Ok(vec![b]),
            (_, Some(g), _) => Ok(g.values()),
            (_, _, Some(d)) => Ok(d.to_vec()),
            _ => Err(CliError::Usage("this command needs --beta or --beta-grid".into())),
        }
    }
}
