use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "interlace", version, about = "Random interlacement experiments on Z^d", args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// JSON object of settings keyed by flag name; flags on the command line win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Root seed; replica `i` draws from the stream split off at `i`.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for the replica pool.
    #[arg(long, global = true, env = "INTERLACE_THREADS")]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Leave the timestamp out of output headers.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// What a run with fewer than 100 replicas does.
    #[arg(long, global = true, value_enum, default_value_t = Underpowered::Error)]
    pub on_underpowered: Underpowered,
    /// Run replicas on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Underpowered {
    Error,
    Warn,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Bessel,
    Fourier,
    Killed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    L1,
    Linf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Reenter,
    Halt,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Every abstract constant set to 1. Not values from any source.
    Toy,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Green function values.
    Green(GreenArgs),
    /// Capacity and equilibrium measure of a finite set.
    Capacity(CapacityArgs),
    /// Harnack constant of nested Euclidean balls, checked on random harmonic functions.
    Harnack(HarnackArgs),
    /// Exact ℓ¹ sphere or ball counts with their Peierls-type bounds.
    SphereCount(SphereCountArgs),
    /// Draw one trajectory soup and write it to a file.
    Sample(SampleArgs),
    /// Empirical P[K ⊆ V^u] against exp(-u cap K).
    IdentityCheck(IdentityArgs),
    /// Crossing probabilities over a level grid from coupled fields.
    CrossingSweep(SweepArgs),
    /// P[0 ↔ S(0, r)] in the vacant set.
    Connectivity(ConnectivityArgs),
    /// Power-law exponent fitted to a connectivity curve.
    Alpha(ConnectivityArgs),
    /// Certificate for the start of the renormalization induction.
    RenormCert(CertArgs),
    /// Connectivity exponent against its corollary form.
    LocalBound(LocalBoundArgs),
    /// The elementary logarithmic inequality for a pair a, b >= 0.
    A1Check(A1Args),
}

#[derive(Args, Debug, Serialize)]
pub struct GreenArgs {
    #[arg(long)]
    pub d: usize,
    /// Displacement; the origin when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<i64>>,
    /// Tabulate every canonical displacement with |x|_inf up to this radius.
    #[arg(long, conflicts_with = "x")]
    pub radius: Option<u64>,
    #[arg(long, value_enum, default_value_t = Method::Bessel)]
    pub method: Method,
}

#[derive(Args, Debug, Serialize)]
pub struct CapacityArgs {
    #[arg(long)]
    pub d: usize,
    /// The set K: origin, pair, points:x,y,z;..., cube:S[@x,y,z], l1:R, l2:R, linf:R or shell:<set>.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: String,
    /// Also estimate the capacity from escape walks with this many replicas per point.
    #[arg(long)]
    pub mc_replicas: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct HarnackArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Euclidean radii of U1 ⊆ U2 ⊆ U3.
    #[arg(long, default_value_t = 1)]
    pub u1: u64,
    #[arg(long, default_value_t = 4)]
    pub u2: u64,
    #[arg(long, default_value_t = 8)]
    pub u3: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SphereCountArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub l: u64,
    /// Count the ball instead of the sphere.
    #[arg(long)]
    pub ball: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub d: usize,
    /// The window, in set syntax.
    #[arg(long)]
    pub window: String,
    #[arg(long)]
    pub u: f64,
    /// Where the soup goes.
    #[arg(long)]
    pub soup: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Reenter)]
    pub mode: Mode,
    #[arg(long, default_value_t = interlace_core::interlace::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = interlace_core::interlace::DEFAULT_MARGIN)]
    pub margin: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct IdentityArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: String,
    /// Levels, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub u: Vec<f64>,
    #[arg(long)]
    pub replicas: u64,
    /// The soup window is K's bounding box grown by this much.
    #[arg(long, default_value_t = 1)]
    pub window_margin: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub d: usize,
    /// Source set; the face x_1 = 0 of the cube of side `side` when absent.
    #[arg(long, requires_all = ["target", "window"])]
    pub source: Option<String>,
    #[arg(long, requires_all = ["source", "window"])]
    pub target: Option<String>,
    #[arg(long, requires_all = ["source", "target"])]
    pub window: Option<String>,
    /// Side of the cube crossed between opposite faces.
    #[arg(long, default_value_t = 5)]
    pub side: u64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub u_grid: Vec<f64>,
    #[arg(long)]
    pub replicas: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ConnectivityArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub u: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub radii: Vec<u64>,
    #[arg(long, value_enum, default_value_t = Metric::Linf)]
    pub metric: Metric,
    #[arg(long)]
    pub replicas: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstantArgs {
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub c4: Option<f64>,
    #[arg(long)]
    pub c5: Option<f64>,
    #[arg(long)]
    pub c6: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct CertArgs {
    #[arg(long)]
    pub d: u64,
    #[arg(long)]
    pub eps: f64,
    /// Measured or assumed log p0(u0); the asymptotic closed form is used when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub log_p0: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub constants: ConstantArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct LocalBoundArgs {
    /// Dimension; give either this or --log-d.
    #[arg(long, conflicts_with = "log_d", required_unless_present = "log_d")]
    pub d: Option<f64>,
    #[arg(long)]
    pub log_d: Option<f64>,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1)]
    pub m: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub constants: ConstantArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct A1Args {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
}
