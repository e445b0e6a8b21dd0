use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lda_core::experiments::Format;

#[derive(Parser, Debug)]
#[command(name = "lda", version, about = "Low-density lattice construction and goodness experiments")]
pub struct Cli {
    /// Master seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a regular bipartite skeleton from the configuration model.
    GenGraph(GenGraphArgs),
    /// Verify the four expansion properties of a skeleton.
    CheckExpansion(CheckExpansionArgs),
    /// Randomize a skeleton over F_p and build the Construction-A lattice.
    Build(BuildArgs),
    /// Geometric metrics of a lattice: radii, shortest vector, NSM.
    Metrics(MetricsArgs),
    /// Word error rate over an AWGN channel.
    DecodeSim(DecodeSimArgs),
    /// Monte Carlo frequency of rank-deficient randomizations.
    FullrankMc(FullrankArgs),
    /// Chi-square test of the distribution of H^T u.
    SyndromeTest(SyndromeArgs),
    /// Finite-n evaluation of the asymptotic bound expressions.
    Bounds(BoundsArgs),
    /// Exceedance frequency of the noise norm over a grid of dimensions.
    SemiErgodic(SemiErgodicArgs),
    /// Per-seed goodness metrics with medians.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct GenGraphArgs {
    #[arg(long, required_unless_present = "example")]
    pub n: Option<usize>,
    #[arg(long, required_unless_present = "example")]
    pub dv: Option<usize>,
    #[arg(long, required_unless_present = "example")]
    pub dc: Option<usize>,
    /// Emit the fixed 6-variable, 4-check (2,3)-regular example instead.
    #[arg(long, conflicts_with_all = ["n", "dv", "dc"])]
    pub example: bool,
    /// Maximum number of matchings drawn before giving up.
    #[arg(long, default_value_t = lda_core::graph::DEFAULT_RESAMPLE_BUDGET)]
    pub resample_budget: usize,
}

#[derive(Args, Debug)]
pub struct CheckExpansionArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long = "A")]
    pub a: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long = "B")]
    pub b: f64,
    /// Variable-side radius (default (1-R)/(A+1-R)).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Check-side radius (default 1/(B(1-R)+1)).
    #[arg(long)]
    pub vartheta: Option<f64>,
    /// Largest subset size enumerated.
    #[arg(long, default_value_t = lda_core::graph::DEFAULT_SUBSET_CAP)]
    pub cap: usize,
    /// Random subsets per size instead of exhaustive enumeration.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = lda_core::graph::DEFAULT_MAX_SUBSETS)]
    pub max_subsets: u64,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, conflicts_with = "lambda", required_unless_present = "lambda")]
    pub p: Option<u64>,
    /// Use the smallest prime at least n^lambda.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DecoderArg {
    Ml,
    Bp,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long)]
    pub lattice: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub nsm_samples: u64,
    /// Quantizer for the NSM estimate.
    #[arg(long, value_enum, default_value_t = DecoderArg::Ml)]
    pub quantizer: DecoderArg,
    /// Noise level assumed by the BP quantizer's priors.
    #[arg(long, default_value_t = 0.5)]
    pub bp_sigma: f64,
    #[arg(long, default_value_t = lda_core::lattice::DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u64,
}

#[derive(Args, Debug)]
pub struct BpArgs {
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0.0)]
    pub damping: f64,
}

#[derive(Args, Debug)]
pub struct DecodeSimArgs {
    #[arg(long)]
    pub lattice: PathBuf,
    /// Comma-separated noise standard deviations.
    #[arg(long, value_delimiter = ',', conflicts_with = "vnrs", required_unless_present = "vnrs")]
    pub sigmas: Vec<f64>,
    /// Comma-separated volume-to-noise ratios, converted to sigmas.
    #[arg(long, value_delimiter = ',')]
    pub vnrs: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = DecoderArg::Ml)]
    pub decoder: DecoderArg,
    /// Transmit a uniformly random codeword instead of zero.
    #[arg(long)]
    pub random_codeword: bool,
    #[command(flatten)]
    pub bp: BpArgs,
    #[arg(long, default_value_t = lda_core::lattice::DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u64,
}

#[derive(Args, Debug)]
pub struct FullrankArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated primes.
    #[arg(long, value_delimiter = ',', default_value = "5,11,101")]
    pub p: Vec<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
}

#[derive(Args, Debug)]
pub struct SyndromeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub p: u64,
    /// Syndrome vector, one entry per check (default e_0).
    #[arg(long, value_delimiter = ',')]
    pub u: Vec<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub significance: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EnergyArg {
    Upper,
    Lower,
    Exact,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// JSON parameter set (default: the built-in reference set).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// `a:b:log10`, `a:b:step` or a comma list.
    #[arg(long, default_value = "1e2:1e6:log10")]
    pub n_grid: String,
    #[arg(long, value_enum, default_value_t = EnergyArg::Upper)]
    pub energy: EnergyArg,
    /// Use this value of ln E at every n instead of computing it.
    #[arg(long, allow_hyphen_values = true)]
    pub ln_energy: Option<f64>,
    /// Point budget for `--energy exact`.
    #[arg(long, default_value_t = 10_000_000)]
    pub exact_budget: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    Uniform,
    StudentT,
}

#[derive(Args, Debug)]
pub struct SemiErgodicArgs {
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    pub noise: NoiseArg,
    /// Degrees of freedom for `student-t`.
    #[arg(long, default_value_t = 5.0)]
    pub df: f64,
    #[arg(long, default_value = "10,100,1000")]
    pub n_grid: String,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub p: u64,
    /// Number of consecutive seeds starting at `--seed`.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 2000)]
    pub nsm_samples: u64,
    #[arg(long, default_value_t = 2000)]
    pub wer_trials: u64,
    #[arg(long, default_value_t = lda_core::lattice::DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u64,
}
