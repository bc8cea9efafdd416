use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use torus_spine::{BoundaryKind, Power, SpineKind};

#[derive(Debug, Parser)]
#[command(
    name = "torus-spine",
    version,
    about = "Spines and Cheeger cuts on discrete tori"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form spectral constants for (m, d).
    Constants(ConstantsArgs),
    /// Level-set sweep of the sine tensor profile.
    Sweep(SweepArgs),
    /// Random-shift edge spines on the AND power.
    SpineEdge(SpineArgs),
    /// Random-shift vertex spines on the sum power.
    SpineVertex(SpineArgs),
    /// Check whether an edge or vertex set meets every nontrivial cycle.
    Verify(VerifyArgs),
    /// Exhaustive minimum spine on a tiny torus.
    BruteMin(BruteMinArgs),
    /// Max-flow certificate of vertex expansion on a tiny instance.
    FlowCert(FlowCertArgs),
    /// Monte Carlo estimates on the continuous torus.
    Continuous(ContinuousArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Sweep(_) => "sweep",
            Command::SpineEdge(_) => "spine-edge",
            Command::SpineVertex(_) => "spine-vertex",
            Command::Verify(_) => "verify",
            Command::BruteMin(_) => "brute-min",
            Command::FlowCert(_) => "flow-cert",
            Command::Continuous(_) => "continuous",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Constants(a) => &a.out,
            Command::Sweep(a) => &a.out,
            Command::SpineEdge(a) | Command::SpineVertex(a) => &a.out,
            Command::Verify(a) => &a.out,
            Command::BruteMin(a) => &a.out,
            Command::FlowCert(a) => &a.out,
            Command::Continuous(a) => &a.out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PowerArg {
    One,
    Inf,
}

impl From<PowerArg> for Power {
    fn from(p: PowerArg) -> Power {
        match p {
            PowerArg::One => Power::One,
            PowerArg::Inf => Power::Inf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Edge,
    Vertex,
}

impl From<KindArg> for BoundaryKind {
    fn from(k: KindArg) -> BoundaryKind {
        match k {
            KindArg::Edge => BoundaryKind::Edge,
            KindArg::Vertex => BoundaryKind::Vertex,
        }
    }
}

impl From<KindArg> for SpineKind {
    fn from(k: KindArg) -> SpineKind {
        match k {
            KindArg::Edge => SpineKind::Edge,
            KindArg::Vertex => SpineKind::Vertex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphArg {
    /// The torus given by --m, --d, --power with its zero-label set as U.
    Torus,
    /// A single edge with one Dirichlet endpoint.
    TwoVertex,
    /// A star with three Dirichlet leaves.
    Star,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Report path; `-` writes to stdout. Defaults to
    /// `$TORUS_SPINE_OUT_DIR/<subcommand>.<format>` (directory `reports`).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Omit the timestamp and wall-clock fields from the report.
    #[arg(long)]
    pub no_timestamp: bool,
    /// key=value file supplying defaults for the flags of this subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TorusArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub d: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    #[arg(long, value_enum, default_value = "inf")]
    pub power: PowerArg,
    #[arg(long, value_enum, default_value = "edge")]
    pub kind: KindArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpineArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    /// Worker threads; 1 keeps aggregation strictly sequential.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    #[arg(long, value_enum)]
    pub power: PowerArg,
    /// `trivial` or a file with one vertex per line (coordinates).
    #[arg(
        long,
        conflicts_with = "edge_spine",
        required_unless_present = "edge_spine"
    )]
    pub vertex_spine: Option<String>,
    /// `trivial` or a file with one edge per line (`u coords ; v coords`).
    #[arg(long)]
    pub edge_spine: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BruteMinArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    #[arg(long, value_enum)]
    pub power: PowerArg,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Start the search at size 0 instead of the disjoint-cycle lower bound.
    #[arg(long)]
    pub no_prune: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FlowCertArgs {
    #[arg(long, value_enum, default_value = "torus")]
    pub graph: GraphArg,
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "one")]
    pub power: PowerArg,
    /// Expansion parameter as a rational (`p/q`); defaults to the certified value.
    #[arg(long)]
    pub c: Option<String>,
    /// Random Dirichlet vectors checked against the inequalities.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ContinuousArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = torus_spine::continuous::DEFAULT_STRIP_EPSILON)]
    pub epsilon: f64,
    /// Comma-separated levels in (0, 1).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.01,0.02,0.05,0.1,0.2,0.3,0.5,0.7"
    )]
    pub t_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Also estimate the random-shift spine area at the best level (d <= 3).
    #[arg(long)]
    pub spine_area: bool,
    #[arg(long, default_value_t = torus_spine::continuous::DEFAULT_COVERAGE_SAMPLES)]
    pub coverage_samples: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}
