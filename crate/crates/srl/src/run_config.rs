//! Command records shared by the CLI parser, the digest and the metadata.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use srl_core::reflection_config::Branch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Weak,
    Strong,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Weak => Branch::Weak,
            BranchArg::Strong => Branch::Strong,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Args)]
pub struct GasArgs {
    #[arg(long, default_value_t = 1.4)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho0: f64,
    #[arg(long, default_value_t = 2.0)]
    pub rho1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Args)]
pub struct WedgeArgs {
    /// Wedge half-angle in degrees.
    #[arg(long = "theta-w", default_value_t = 60.0)]
    pub theta_w: f64,
    #[arg(long, value_enum, default_value_t = BranchArg::Weak)]
    pub branch: BranchArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Bin,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Model,
    Linear,
    Reflection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Sides {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Barriers,
    Rh,
    Regularity,
}

/// `nx,ny`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridArg {
    pub nx: usize,
    pub ny: usize,
}

impl std::str::FromStr for GridArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected nx,ny, got {s:?}"))?;
        let nx = a.trim().parse().map_err(|e| format!("nx: {e}"))?;
        let ny = b.trim().parse().map_err(|e| format!("ny: {e}"))?;
        Ok(GridArg { nx, ny })
    }
}

impl std::fmt::Display for GridArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.nx, self.ny)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct ConfigArgs {
    #[command(flatten)]
    pub gas: GasArgs,
    #[command(flatten)]
    pub wedge: WedgeArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, default_value = "out")]
    #[serde(skip, default)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub gas: GasArgs,
    #[arg(long, value_enum, default_value_t = BranchArg::Weak)]
    pub branch: BranchArg,
    /// Last angle in degrees; the sweep starts at the detachment angle.
    #[arg(long = "theta-hi", default_value_t = 89.0)]
    pub theta_hi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value = "out")]
    #[serde(skip, default)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = Mode::Model)]
    pub mode: Mode,
    #[command(flatten)]
    pub gas: GasArgs,
    #[command(flatten)]
    pub wedge: WedgeArgs,
    #[arg(long, default_value = "129,33")]
    pub grid: GridArg,
    /// Geometric grading ratio toward `x = 0`; 1 gives a uniform grid.
    #[arg(long, default_value_t = 0.95)]
    pub grade: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100)]
    pub max_iter: usize,
    /// Depth of the near-sonic strip; defaults to `c₂/20`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Model `a`; defaults to `γ+1` (and to 0 in linear mode).
    #[arg(long)]
    pub a: Option<f64>,
    /// Model `b`; defaults to `1/c₂` of the configuration.
    #[arg(long)]
    pub b: Option<f64>,
    /// Extent `r̂` of the rectangle `(0, r̂) × (−1, 1)`.
    #[arg(long, default_value_t = 0.5)]
    pub rhat: f64,
    /// Relative amplitude `δ` of the outer data `(x²/2a)(1 + δ cos πy)`.
    #[arg(long, default_value_t = 0.2)]
    pub amplitude: f64,
    /// Prefactor `c` of the linear-mode data `c·x^{3/2}`.
    #[arg(long = "linear-c", default_value_t = 1.0)]
    pub linear_c: f64,
    #[arg(long, value_enum, default_value_t = Sides::Neumann)]
    pub sides: Sides,
    #[arg(long, value_enum, default_value_t = Format::Bin)]
    pub format: Format,
    #[arg(long, default_value = "out")]
    #[serde(skip, default)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub what: Check,
    #[command(flatten)]
    pub gas: GasArgs,
    #[command(flatten)]
    pub wedge: WedgeArgs,
    /// Solve directories; one field, or three for a refinement triplet.
    #[arg(long)]
    #[serde(skip, default)]
    pub input: Vec<PathBuf>,
    /// Digests of the input files, filled in after reading them.
    #[arg(skip)]
    pub input_digests: Vec<String>,
    /// Model fixture grid used by the barrier check when no input is given.
    #[arg(long, default_value = "257,65")]
    pub grid: GridArg,
    /// Bound `N` on the small terms used by the barrier recipe.
    #[arg(long = "bound-n", default_value_t = 1.0)]
    pub bound_n: f64,
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
    #[arg(long, default_value = "out")]
    #[serde(skip, default)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Regular reflection configuration for one wedge angle.
    Config(ConfigArgs),
    /// Near-sonic or model solve.
    Solve(SolveArgs),
    /// Barrier, boundary-algebra or regularity checks.
    Verify(VerifyArgs),
    /// Configurations from the detachment angle upward.
    Sweep(SweepArgs),
}

/// Everything that determines a run's output. The output directory is not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: String,
    #[serde(flatten)]
    pub command: Command,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig { version: env!("CARGO_PKG_VERSION").to_string(), command }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run config serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Hex SHA-256 of the canonical JSON.
    pub fn digest(&self) -> String {
        hex_digest(self.to_json().as_bytes())
    }

    pub fn out_dir(&self) -> &std::path::Path {
        match &self.command {
            Command::Config(a) => &a.out,
            Command::Solve(a) => &a.out,
            Command::Verify(a) => &a.out,
            Command::Sweep(a) => &a.out,
        }
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
