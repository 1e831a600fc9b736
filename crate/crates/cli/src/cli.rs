use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "pt", version, about = "Pattern-theory toolkit: stochastic models of signals, images, and shapes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Discrete hidden Markov models.
    Hmm(HmmArgs),
    /// Kalman filter for a linear-Gaussian model.
    Kalman(KalmanArgs),
    /// Bootstrap particle filter for the clutter tracker.
    Track(TrackArgs),
    /// Ising segmentation by simulated annealing.
    Ising(IsingArgs),
    /// Belief propagation and mean field on a pairwise model.
    Bp(BpArgs),
    /// Probabilistic context-free grammars.
    Pcfg(PcfgArgs),
    /// Image statistics.
    Stats(StatsArgs),
    /// Image synthesis.
    Synth(SynthArgs),
    /// Total-variation diffusion of an image.
    Diffuse(DiffuseArgs),
    /// Landmark shape space.
    Shape(ShapeArgs),
    /// Writes a bundle of demo artifacts.
    Demo(DemoArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; stochastic commands draw one and record it when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; standard output when absent (where the format allows).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON object of flag defaults, keyed by long flag name.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HmmArgs {
    #[command(subcommand)]
    pub op: HmmOp,
}

#[derive(Subcommand, Debug)]
pub enum HmmOp {
    /// Filtered state distributions, CSV `step,state,prob`.
    Filter(HmmIo),
    /// Smoothed state distributions, CSV `step,state,prob`.
    Smooth(HmmIo),
    /// Most probable state path, CSV `step,state`.
    Viterbi(HmmIo),
    /// Sequence log-likelihood.
    Loglik(HmmIo),
    /// Baum-Welch re-estimation; writes the fitted model as JSON.
    Fit {
        #[command(flatten)]
        io: HmmIo,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// CSV of the log-likelihood trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Samples an observation sequence, CSV `obs`.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        length: usize,
        /// Also write the hidden path, CSV `step,state`.
        #[arg(long)]
        states: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
pub struct HmmIo {
    #[arg(long)]
    pub model: PathBuf,
    /// Single-column CSV with header `obs`.
    #[arg(long)]
    pub obs: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct KalmanArgs {
    /// JSON with matrices `a`, `q`, `c`, `r`, `cov0` (nested rows) and `mean0`.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV, one observation vector per row.
    #[arg(long)]
    pub obs: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct TrackArgs {
    /// Tracker model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV of measurements `x,y`; simulated from the model when absent.
    #[arg(long)]
    pub obs: Option<PathBuf>,
    /// Steps to simulate when no measurements are given.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 5000)]
    pub particles: usize,
    /// Per-step kernel density of the x position, CSV `step,x,density`.
    #[arg(long)]
    pub kde: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct IsingArgs {
    #[command(subcommand)]
    pub op: IsingOp,
}

#[derive(Subcommand, Debug)]
pub enum IsingOp {
    /// Anneals the Ising model whose external field is the normalized image.
    Anneal(AnnealArgs),
}

#[derive(Args, Debug)]
pub struct AnnealArgs {
    /// Observed image (PGM or PTF).
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long, default_value_t = 4.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.95)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.05)]
    pub t_min: f64,
    /// Sweeps per temperature level.
    #[arg(long, default_value_t = 10)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    #[arg(long, default_value_t = 1.0)]
    pub field_strength: f64,
    /// Path pattern for one PGM per level; `%02d` (or `%d`) becomes the level.
    #[arg(long)]
    pub snapshots: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpMode {
    SumProduct,
    MaxProduct,
    MeanField,
}

#[derive(Args, Debug)]
pub struct BpArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = BpMode::SumProduct)]
    pub mode: BpMode,
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct PcfgArgs {
    #[command(subcommand)]
    pub op: PcfgOp,
}

#[derive(Subcommand, Debug)]
pub enum PcfgOp {
    /// Samples trees; one line per tree with its yield.
    Sample {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Total probability of a yield.
    Inside(PcfgParse),
    /// Most probable parse of a yield.
    Parse(PcfgParse),
}

#[derive(Args, Debug)]
pub struct PcfgParse {
    #[arg(long)]
    pub grammar: PathBuf,
    #[arg(long = "yield")]
    pub text: String,
    /// Longest run of unary vertices over one span is `unary_cap + 1`.
    #[arg(long, default_value_t = pt_core::pcfg::DEFAULT_UNARY_CAP)]
    pub unary_cap: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(subcommand)]
    pub op: StatsOp,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Raw pixel values.
    Pixels,
    /// Horizontal differences `I(x+1, y) − I(x, y)`.
    Diff,
    /// Every filter of the 3×3 bank.
    Bank,
}

#[derive(Subcommand, Debug)]
pub enum StatsOp {
    /// Kurtosis of an image statistic.
    Kurtosis {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Statistic::Diff)]
        statistic: Statistic,
        #[command(flatten)]
        common: Common,
    },
    /// Radially averaged power spectrum and its power-law fit.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// 2×2 block averaging.
    Renorm {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub op: SynthOp,
}

#[derive(Subcommand, Debug)]
pub enum SynthOp {
    /// Random wavelet expansion.
    Wavelets {
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long)]
        intensity: Option<f64>,
        #[arg(long)]
        scale_min: Option<f64>,
        #[arg(long)]
        scale_max: Option<f64>,
        #[arg(long)]
        aspect: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Dead-leaves occlusion model.
    Deadleaves {
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        exponent: Option<f64>,
        #[arg(long)]
        density: Option<f64>,
        #[arg(long)]
        supersample: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
pub struct DiffuseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Time step; the largest stable step when absent.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// CSV of the energy after each step.
    #[arg(long)]
    pub energy: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ShapeArgs {
    #[command(subcommand)]
    pub op: ShapeOp,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    Normalized,
    Identity,
}

#[derive(Subcommand, Debug)]
pub enum ShapeOp {
    /// Random walk of a landmark circle; CSV `step,vertex,x,y`.
    Walk(WalkArgs),
}

#[derive(Args, Debug)]
pub struct WalkArgs {
    /// Landmarks on the initial unit circle.
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    /// `gauss:σ` or `matern:τ`.
    #[arg(long, default_value = "gauss:0.4")]
    pub kernel: String,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.15)]
    pub step_size: f64,
    #[arg(long, value_enum, default_value_t = Law::Normalized)]
    pub law: Law,
    /// Translation added per step, `dx,dy`.
    #[arg(long, default_value = "1.0,0", allow_hyphen_values = true)]
    pub drift: String,
    /// PGM rendering of every curve.
    #[arg(long)]
    pub render: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoName {
    AnnealStrip,
    ShapeWalk,
    DeadleavesGallery,
    Tracker,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[arg(value_enum)]
    pub name: DemoName,
    #[command(flatten)]
    pub common: Common,
}
