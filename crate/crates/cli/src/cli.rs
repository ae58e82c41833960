use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "geolab", version, about = "Half-geodesic experiments on doubled polygons, tube surfaces and ellipsoids")]
#[command(after_help = "Exit status: 0 when every expected verdict holds, 1 on a verdict mismatch, \
2 on invalid parameters or an exhausted budget.\n\
GEOLAB_THREADS caps the number of worker threads.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the half-geodesics of the doubled n-gon.
    PolygonClassify(PolygonClassifyArgs),
    /// Compare exact unfolding distances with the mesh oracle on random pairs.
    PolygonDistance(PolygonDistanceArgs),
    /// Enumerate the closed geodesics of the doubled n-gon up to a length.
    PolygonEnumerate(PolygonEnumerateArgs),
    /// Verify the tube meridians as half-geodesics for each ε.
    TubeVerify(TubeVerifyArgs),
    /// Measure the distortion of the collapse from the tube to the doubled polygon.
    TubeGh(TubeGhArgs),
    /// Curve-shortening probe for short closed geodesics on the tube.
    TubeSystole(TubeSystoleArgs),
    /// Classify the coordinate sections of an ellipsoid.
    EllipsoidClassify(EllipsoidClassifyArgs),
    /// Random search for short closed geodesics on an ellipsoid.
    EllipsoidSearch(EllipsoidSearchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file. Standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Polygon {
    /// Number of polygon sides.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Side length.
    #[arg(long, default_value_t = 1.0)]
    pub side: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Both faces with every half-geodesic drawn.
    Curves,
    /// Ellipse-criterion witness for a pair on the first meridian.
    Ellipse,
}

#[derive(Debug, Args)]
pub struct PolygonClassifyArgs {
    #[command(flatten)]
    pub polygon: Polygon,
    /// Pass tolerance of the k = 2 verification.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Figure drawn with --format svg.
    #[arg(long, value_enum, default_value_t = Figure::Curves)]
    pub figure: Figure,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PolygonDistanceArgs {
    #[command(flatten)]
    pub polygon: Polygon,
    /// Mesh spacing; repeat for a convergence study.
    #[arg(long = "h", default_values_t = [0.05, 0.02, 0.01])]
    pub h: Vec<f64>,
    /// Random pairs per spacing.
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PolygonEnumerateArgs {
    #[command(flatten)]
    pub polygon: Polygon,
    /// Length cutoff. Defaults to twice the estimated diameter.
    #[arg(long)]
    pub lmax: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct Tube {
    /// Base polygon sides.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub side: f64,
    /// Tube radius; repeat for a convergence study.
    #[arg(long = "eps", default_values_t = [0.1, 0.05, 0.025])]
    pub eps: Vec<f64>,
    /// Mesh spacing. Defaults to ε/5 for each ε.
    #[arg(long = "h")]
    pub h: Option<f64>,
}

impl Tube {
    pub fn spacing(&self, eps: f64) -> f64 {
        self.h.unwrap_or(eps / 5.0)
    }
}

#[derive(Debug, Args)]
pub struct TubeVerifyArgs {
    #[command(flatten)]
    pub tube: Tube,
    /// Pass tolerance of the k = 2 verification. Defaults to 5·err(h).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Verification samples per curve.
    #[arg(long, default_value_t = 240)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TubeGhArgs {
    #[command(flatten)]
    pub tube: Tube,
    /// Sample points; all pairs among them are compared.
    #[arg(long, default_value_t = 60)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TubeSystoleArgs {
    #[command(flatten)]
    pub tube: Tube,
    /// Random shortening runs per ε.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Length below which a surviving loop is a violation. Defaults to the side.
    #[arg(long)]
    pub floor: Option<f64>,
    /// Skip the runs started from lifted closed geodesics of the base.
    #[arg(long)]
    pub no_lifts: bool,
    /// Verification samples per survivor.
    #[arg(long, default_value_t = 240)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EllipsoidClassifyArgs {
    /// Semi-axes a ≤ b ≤ c.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.005, 1.01])]
    pub axes: Vec<f64>,
    /// Pass tolerance of the k = 2 verification.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Angular resolution of the shooting sweep.
    #[arg(long, default_value_t = 1e-3)]
    pub resolution: f64,
    /// Verification samples per section.
    #[arg(long, default_value_t = 24)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EllipsoidSearchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.005, 1.01])]
    pub axes: Vec<f64>,
    #[arg(long, default_value_t = 8.0)]
    pub lmax: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}
