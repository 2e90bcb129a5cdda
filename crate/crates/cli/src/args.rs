//! Command-line grammar. Every argument struct is serializable so the
//! manifest can echo the resolved configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "mcf", version, about = "Numerics for O(n)xO(n)-invariant mean curvature flow near the Simons cone")]
pub struct Cli {
    /// Directory for report.json, CSV tables, SVG plots and manifest.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Dimension and mode constants, with the exponent condition.
    Constants(ConstantsArgs),
    /// Curvature of cone, cylinder or sphere profiles against closed forms.
    Curvature(CurvatureArgs),
    /// The smooth minimal surface with Q(0) = b.
    MinimalSurface(MinimalArgs),
    /// Jacobi operator: kernel ladder and top eigenvalue.
    Jacobi(JacobiArgs),
    /// Bessel heat kernel on the cone and the decay experiment.
    HeatKernel(HeatArgs),
    /// Evolve a profile by the flow.
    Evolve(EvolveArgs),
    /// Supersolution residual, Gamma threshold and convexity checks.
    Barriers(BarrierArgs),
    /// Run the acceptance suite.
    VerifyAll(VerifyArgs),
    /// Render a CSV table as a deterministic SVG plot.
    Plot(PlotArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Curvature(_) => "curvature",
            Command::MinimalSurface(_) => "minimal-surface",
            Command::Jacobi(_) => "jacobi",
            Command::HeatKernel(_) => "heat-kernel",
            Command::Evolve(_) => "evolve",
            Command::Barriers(_) => "barriers",
            Command::VerifyAll(_) => "verify-all",
            Command::Plot(_) => "plot",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    /// Weight exponent to test against the exponent condition.
    #[arg(long)]
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Cone,
    Cylinder,
    Sphere,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvatureArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum)]
    pub shape: Shape,
    /// Cylinder or sphere radius.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 101)]
    pub nodes: usize,
    /// Also differentiate the samples with 3- or 5-point stencils.
    #[arg(long)]
    pub fd_width: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct MinimalArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Outer radius; defaults to 1e4 b.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    #[arg(long, default_value_t = 40)]
    pub per_decade: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct JacobiArgs {
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 3)]
    pub j_max: usize,
    #[arg(long, default_value_t = 100)]
    pub per_decade: usize,
    #[arg(long, default_value_t = 50.0)]
    pub r_trunc: f64,
    #[arg(long, default_value_t = 4000)]
    pub nodes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct HeatArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Decay exponent of the initial data.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Comma-separated times; defaults to 1, 10^0.25, ..., 100.
    #[arg(long, value_delimiter = ',')]
    pub times: Vec<f64>,
    /// Also write decay.svg.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Cylinder,
    Sphere,
    Cone,
    Minimal,
    Hyperboloid,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    #[arg(long, value_enum)]
    pub initial: Initial,
    /// Singular time of the cylinder and sphere data.
    #[arg(long, default_value_t = 1.0)]
    pub t_sing: f64,
    /// Neck size of the hyperboloid, or b for the minimal surface.
    #[arg(long, default_value_t = 1.0)]
    pub param: f64,
    #[arg(long, default_value_t = 1000)]
    pub nodes: usize,
    /// Outer radius of the grid; defaults to 1 (sphere: 1/2, cone: 10).
    #[arg(long)]
    pub r_out: Option<f64>,
    #[arg(long, default_value_t = 0.9)]
    pub horizon: f64,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    pub outputs: Vec<f64>,
    #[arg(long)]
    pub amax_cap: Option<f64>,
    #[arg(long)]
    pub qmin_floor: Option<f64>,
    /// Spatial order, 2 or 4.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Fit Amax ~ (T - t)^p over this window of T - t, as "lo,hi".
    #[arg(long, value_delimiter = ',')]
    pub fit_window: Vec<f64>,
    /// Also write rate.svg.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BarrierArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// Defaults to 2 sqrt(C1/C0).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Defaults to C0 - C1/Gamma^2.
    #[arg(long)]
    pub c_bar: Option<f64>,
    /// Bound M on |Q_r| used to sweep the coefficient 1/(1+Q_r^2).
    #[arg(long, default_value_t = 2.0)]
    pub qr_bound: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Reduced problem sizes, same tolerances.
    #[arg(long)]
    pub quick: bool,
    /// Run only these criteria (comma-separated ids 1 to 8).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxesArg {
    Linear,
    Loglog,
}

#[derive(Debug, Args, Serialize)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Column for the horizontal axis.
    #[arg(long)]
    pub x: String,
    /// Columns to plot against x (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub y: Vec<String>,
    #[arg(long, value_enum, default_value = "linear")]
    pub axes: AxesArg,
    /// Annotate the least-squares slope of the first series.
    #[arg(long)]
    pub slope: bool,
    #[arg(long, default_value = "")]
    pub title: String,
}
