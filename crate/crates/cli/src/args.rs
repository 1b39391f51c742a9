use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "elastica", version, about = "Euler elastica image denoising")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Denoise a grayscale or RGB image.
    Denoise(RunArgs),
    /// Denoise multiplicative speckle in the log domain.
    SpeckleDenoise(RunArgs),
    /// Degrade an image with seeded noise.
    AddNoise(AddNoiseArgs),
    /// Print PSNR and SSIM of a test image against a reference.
    Metrics(MetricsArgs),
    /// Write a synthetic ground-truth image.
    Synth(SynthArgs),
    /// Check the n-gradients against finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ee,
    Trv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseType {
    Gaussian,
    Speckle,
}

/// Flags shared by the solver commands. Everything is optional here so that
/// values can fall back to a config file and then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Clean reference; PSNR and SSIM are printed when given.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    /// Per-iteration CSV trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long = "a")]
    pub a: Option<f64>,
    #[arg(long = "b")]
    pub b: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fixed n-step size.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Choose the n-step from the estimated Lipschitz constant instead.
    #[arg(long)]
    pub adaptive_tau: bool,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
    /// Accepted for symmetry with the other commands; solving is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write 0 in the trace time column so traces are reproducible.
    #[arg(long)]
    pub no_timing: bool,
    /// key=value file with the same keys as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AddNoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long = "type", value_enum, default_value = "gaussian")]
    pub kind: NoiseType,
    #[arg(long)]
    pub var: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// disk, shading, checker, circle or layered.
    #[arg(long)]
    pub shape: String,
    /// `HxW`, or a single number for a square image.
    #[arg(long, default_value = "64x64")]
    pub size: String,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
}
