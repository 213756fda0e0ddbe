use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use walklab::walk::{DEFAULT_HEAT_TOL, DEFAULT_SCAN_CAP};
use walklab::DEFAULT_ENUMERATION_CAP;

/// Exact mixing computations for random walks on finite groups.
#[derive(Debug, Parser, Serialize)]
#[command(name = "walklab", version, about)]
pub struct Cli {
    #[command(flatten)]
    #[serde(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Global {
    /// `key = value` file whose entries override command-line flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write data here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// csv or json; each command has its own default.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Also write a JSON summary here (csv output only).
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    /// Seed for randomized experiments and the verify battery.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Progress messages on stderr.
    #[arg(long, global = true)]
    pub progress: bool,
    /// Cache directory for memoized factor curves [env: WALKLAB_CACHE_DIR].
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Largest group enumerated.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
    /// Largest step count or time scanned by mixing-time searches.
    #[arg(long, global = true, default_value_t = DEFAULT_SCAN_CAP)]
    pub time_cap: u64,
    /// Poisson truncation tolerance of continuous-time kernels.
    #[arg(long, global = true, default_value_t = DEFAULT_HEAT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// List the elements of a group.
    Group(GroupArgs),
    /// Volume growth and moderate-growth sides of a generating set.
    Growth(GrowthArgs),
    /// Distance curves and mixing times of a single walk.
    #[command(subcommand)]
    Walk(WalkCommand),
    /// Continuous-time product chains.
    #[command(subcommand)]
    Product(ProductCommand),
    /// Exponential sums and the Laplace criterion.
    #[command(subcommand)]
    Laplace(LaplaceCommand),
    /// Product-chain families described by a spec file.
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Cutoff experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Run the inequality and identity battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GroupArgs {
    /// `Z:<n>`, `H:<m>` or `P:<desc>,<desc>,...`
    #[arg(long)]
    pub group: String,
    /// Comma-separated elements (coordinates joined by `.`) or `std`.
    #[arg(long, default_value = "std")]
    pub gens: String,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GrowthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub target: GroupArgs,
    /// Growth exponent d of the certificate.
    #[arg(long, default_value_t = 1.0)]
    pub cert_d: f64,
    /// Certificate constant A; the smallest valid A when omitted.
    #[arg(long)]
    pub cert_a: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct WalkTarget {
    #[command(flatten)]
    #[serde(flatten)]
    pub group: GroupArgs,
    /// `uniform`, `lazy` or `probs:<p0>,<p1>,...` (indexed by element).
    #[arg(long, default_value = "lazy")]
    pub law: String,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkCommand {
    /// TV and Hellinger curves with the available bounds.
    Curve(CurveArgs),
    /// Mixing time for one metric and clock.
    Mix(MixArgs),
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CurveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub target: WalkTarget,
    #[arg(long, default_value = "discrete")]
    pub clock: String,
    /// Last step of a discrete curve.
    #[arg(long, default_value_t = 64)]
    pub max_steps: u64,
    /// Continuous times: `a,b,c` or `start:step:end`.
    #[arg(long, default_value = "0:0.5:16")]
    pub times: String,
    #[arg(long, default_value_t = 1.0)]
    pub cert_d: f64,
    #[arg(long)]
    pub cert_a: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MixArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub target: WalkTarget,
    #[arg(long, default_value = "tv")]
    pub metric: String,
    #[arg(long, default_value = "discrete")]
    pub clock: String,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductCommand {
    /// Product Hellinger distance, its bounds and the TV bracket.
    Curve(ProductCurveArgs),
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ProductCurveArgs {
    /// A factor as `<group>@<law>` (law defaults to lazy); repeat per factor.
    #[arg(long = "factor", required = true)]
    pub factors: Vec<String>,
    /// Comma-separated coordinate weights summing to 1.
    #[arg(long)]
    pub weights: String,
    #[arg(long, default_value = "0:1:20")]
    pub times: String,
    /// Threshold A of the sandwich upper bound.
    #[arg(long, default_value_t = walklab::product::DEFAULT_SANDWICH_A)]
    pub sandwich_a: f64,
    /// Largest flat product evaluated directly as an oracle.
    #[arg(long, default_value_t = 2000)]
    pub oracle_limit: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplaceCommand {
    /// `λ(c)` and `τ(c)` of one exponential sum.
    Tau(TauArgs),
    /// `T(ε)` of one exponential sum.
    Mix(LaplaceMixArgs),
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SumArgs {
    /// Comma-separated coefficients.
    #[arg(long)]
    pub a: String,
    /// Comma-separated rates.
    #[arg(long)]
    pub lambda: String,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TauArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sum: SumArgs,
    #[arg(long, default_value = "0.5")]
    pub c: String,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LaplaceMixArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sum: SumArgs,
    #[arg(long, default_value = "0.5")]
    pub eps: String,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyCommand {
    /// Per-n cutoff statistics of a family and the trend verdict.
    Scan(ScanArgs),
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScanArgs {
    /// Family spec file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Also invert each proxy sum at the spec's eps values.
    #[arg(long)]
    pub with_mixing: bool,
    /// c values of a Laplace-criterion scan (added to the summary).
    #[arg(long)]
    pub c_grid: Option<String>,
    /// eps values of the criterion scan.
    #[arg(long)]
    pub eps_grid: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrendArgs {
    #[arg(long, default_value_t = 0.2)]
    pub slope_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub growth_ratio: f64,
    #[arg(long, default_value_t = 2.0)]
    pub bounded_ratio: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentCommand {
    /// Heisenberg products with weights n² e^{−n^γ}.
    Heisenberg(HeisenbergArgs),
    /// Lazy-cycle products with random weights.
    Randomized(RandomizedArgs),
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct HeisenbergArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value = "1..60")]
    pub n_range: String,
    /// `formula` or `exact-small`.
    #[arg(long, default_value = "formula")]
    pub mode: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub trend: TrendArgs,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RandomizedArgs {
    /// `poly` or `exp`.
    #[arg(long)]
    pub mode: String,
    /// Exponent of poly mode.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Law of the increments X_i.
    #[arg(long, default_value = "uniform(1,3)")]
    pub dist: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value = "1..400")]
    pub n_range: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub trend: TrendArgs,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// A suite name or `all`.
    pub suite: String,
    /// Check this walk instead of the built-in fixtures.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long, default_value = "std")]
    pub gens: String,
    #[arg(long, default_value = "lazy")]
    pub law: String,
    /// Discrete steps: `a..b`, `a..=b` (both inclusive) or a list.
    #[arg(long, default_value = "0..64")]
    pub steps: String,
    /// Continuous times; defaults depend on the diameter.
    #[arg(long)]
    pub times: Option<String>,
    /// Growth certificate `A,d` for the bound suites.
    #[arg(long)]
    pub cert: Option<String>,
}
