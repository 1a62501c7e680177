use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use riemann_core::limits::ClipKind;
use riemann_core::mesh::MeshFormat;
use riemann_core::NormalizationKind;

#[derive(Debug, Parser)]
#[command(name = "riemann", version, about = "Riemann minimal examples: meshes, checks and limit sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Triangulate a fundamental piece and its translates.
    Mesh(MeshArgs),
    /// Run invariant suites over a set of λ values.
    Verify(VerifyArgs),
    /// Sweep λ towards a limit and report deviations.
    Limits(LimitsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormArg {
    Raw,
    Paper,
    Spacing,
}

impl NormArg {
    pub fn kind(self) -> NormalizationKind {
        match self {
            NormArg::Raw => NormalizationKind::Unnormalized,
            NormArg::Paper => NormalizationKind::PaperNormalized,
            NormArg::Spacing => NormalizationKind::FixedVerticalSpacing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Obj,
    Ply,
}

impl FormatArg {
    pub fn format(self) -> MeshFormat {
        match self {
            FormatArg::Obj => MeshFormat::Obj,
            FormatArg::Ply => MeshFormat::Ply,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Curvature,
    Periods,
    Symmetry,
    Conjugate,
    Foliation,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Curvature,
                Suite::Periods,
                Suite::Symmetry,
                Suite::Conjugate,
                Suite::Foliation,
            ],
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Catenoid,
    Helicoid,
    Planes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipArg {
    Ball,
    Slab,
}

impl ClipArg {
    pub fn kind(self) -> ClipKind {
        match self {
            ClipArg::Ball => ClipKind::Ball,
            ClipArg::Slab => ClipKind::Slab,
        }
    }
}

/// `RxA`, for instance `64x128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Resolution {
    pub radial: usize,
    pub angular: usize,
}

impl std::str::FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (r, a) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected RxA, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Resolution {
            radial: parse(r)?,
            angular: parse(a)?,
        })
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {v}"))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeshArgs {
    /// Family parameter λ > 0.
    #[arg(long, value_parser = positive)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "paper")]
    pub normalization: NormArg,
    /// Number of translates along the period.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub copies: u32,
    /// Radial rings by angular cells per sheet.
    #[arg(long, default_value = "64x128")]
    pub resolution: Resolution,
    /// Ends are trimmed to 1/L ≤ |z| ≤ L.
    #[arg(long = "l-mesh", default_value_t = riemann_core::mesh::DEFAULT_L_MESH, value_parser = positive)]
    pub l_mesh: f64,
    #[arg(long, value_enum, default_value = "obj")]
    pub format: FormatArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Comma-separated λ values.
    #[arg(long = "lambda-set", default_value = "0.1,1,10", value_delimiter = ',', value_parser = positive)]
    pub lambda_set: Vec<f64>,
    /// Random points per λ for the symmetry and conjugacy suites.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Seed for sample generation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LimitsArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    /// Comma-separated λ values.
    #[arg(long = "lambda-schedule", required = true, value_delimiter = ',', value_parser = positive)]
    pub lambda_schedule: Vec<f64>,
    /// Annulus 1/L < |z| < L.
    #[arg(long = "annulus-L", default_value_t = 10.0, value_parser = positive)]
    pub annulus_l: f64,
    #[arg(long = "clip-r", default_value_t = 5.0, value_parser = positive)]
    pub clip_r: f64,
    #[arg(long, value_enum, default_value = "ball")]
    pub clip: ClipArg,
    #[arg(long, default_value = "48x64")]
    pub resolution: Resolution,
    #[arg(long = "max-winding", default_value_t = riemann_core::limits::DEFAULT_MAX_WINDING)]
    pub max_winding: i32,
    /// Also write rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
