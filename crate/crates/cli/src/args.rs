use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use shadowdecomp::metrics::CropRect;
use shadowdecomp::video::Reference;

#[derive(Debug, Parser)]
#[command(
    name = "shadowdecomp",
    version,
    about = "Video-SAR shadow enhancement by sparse + low-rank + noise decomposition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene with known components and ground truth.
    Synth(SynthArgs),
    /// Align frames to a reference by integer translation.
    Register(RegisterArgs),
    /// Split a stack into shadow, background and noise components.
    Decompose(DecomposeArgs),
    /// Per-frame contrast, EPI and entropy of a stack.
    Metrics(MetricsArgs),
    /// Singular-value CDF of the matricized stack.
    Cdf(CdfArgs),
    /// Threshold + connected-component shadow detection.
    Detect(DetectArgs),
    /// Link detections into tracks.
    Track(TrackArgs),
    /// Score detections (AP) or tracks (MOTA) against ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// `canonical` or a path to a scene spec JSON file.
    #[arg(long, default_value = "canonical")]
    pub spec: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replace the spec's noise with Gaussian noise of this sigma (0 disables noise).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Observed stack output.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth JSON output.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Shadow, background and noise layer outputs, in that order.
    #[arg(long, num_args = 3, value_names = ["S", "B", "N"])]
    pub components: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Input stack (.sbnt file or directory of PGM frames).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Reference: a frame index, or `median` for the per-pixel temporal median.
    #[arg(long, default_value = "median", value_parser = parse_reference)]
    pub reference: Reference,
    /// Optional JSON file with the per-frame shifts and scores.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_reference(s: &str) -> Result<Reference, String> {
    if s == "median" {
        return Ok(Reference::TemporalMedian);
    }
    s.parse::<usize>()
        .map(Reference::Frame)
        .map_err(|_| format!("expected a frame index or `median`, got {s:?}"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mu0 {
    Auto,
    Value(f64),
}

fn parse_mu0(s: &str) -> Result<Mu0, String> {
    if s == "auto" {
        return Ok(Mu0::Auto);
    }
    s.parse::<f64>()
        .map(Mu0::Value)
        .map_err(|_| format!("expected `auto` or a number, got {s:?}"))
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Frames per sub-video; the last window may be shorter.
    #[arg(long, default_value_t = 100)]
    pub window: usize,
    /// Nuclear-norm weight; defaults to sqrt(max(pixels, frames)) per window.
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long, default_value_t = shadowdecomp::solver::DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = shadowdecomp::solver::DEFAULT_RHO)]
    pub rho: f64,
    /// Initial penalty: `auto` (1.25 / largest singular value) or a number.
    #[arg(long, default_value = "auto", value_parser = parse_mu0)]
    pub mu0: Mu0,
    #[arg(long, default_value_t = shadowdecomp::solver::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = shadowdecomp::solver::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Per-pixel weights in [0, 1] for the background step, same shape as the input.
    #[arg(long)]
    pub confidence: Option<PathBuf>,
    /// Exit with status 3 if any window fails to converge.
    #[arg(long)]
    pub strict: bool,
    /// Number of windows decomposed concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

fn parse_crop(s: &str) -> Result<CropRect, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected x,y,w,h, got {s:?}"))?;
    match parts[..] {
        [x, y, w, h] if w > 0 && h > 0 => Ok(CropRect { x, y, w, h }),
        _ => Err(format!("expected x,y,w,h with w, h > 0, got {s:?}")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Offsets(pub Vec<(isize, isize)>);

fn parse_offsets(s: &str) -> Result<Offsets, String> {
    s.split(';')
        .map(|pair| {
            let v: Vec<isize> = pair
                .split(',')
                .map(|p| p.trim().parse::<isize>())
                .collect::<Result<_, _>>()
                .map_err(|_| format!("bad offset {pair:?}"))?;
            match v[..] {
                [dy, dx] if (dy, dx) != (0, 0) => Ok((dy, dx)),
                _ => Err(format!("expected dy,dx (not both zero), got {pair:?}")),
            }
        })
        .collect::<Result<_, _>>()
        .map(Offsets)
}

/// Value mapping applied to a stack before measuring or thresholding it.
#[derive(Debug, Args)]
pub struct Preprocess {
    /// Take absolute values first (for the negative-valued shadow component).
    #[arg(long)]
    pub abs: bool,
    /// Map the stack's min to 0 and max to 1.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Reference stack for EPI.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Region of interest `x,y,w,h`.
    #[arg(long, value_parser = parse_crop)]
    pub crop: Option<CropRect>,
    /// Co-occurrence offsets `dy,dx;dy,dx`.
    #[arg(long, value_parser = parse_offsets, default_value = "0,1;1,0")]
    pub offsets: Offsets,
    #[command(flatten)]
    pub pre: Preprocess,
    /// Also write the full report to this JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Percentages(pub Vec<f64>);

fn parse_percentages(s: &str) -> Result<Percentages, String> {
    s.split(',')
        .map(|p| {
            let k: f64 = p
                .trim()
                .parse()
                .map_err(|_| format!("bad percentage {p:?}"))?;
            if k > 0.0 && k <= 100.0 {
                Ok(k)
            } else {
                Err(format!("percentage must lie in (0, 100], got {k}"))
            }
        })
        .collect::<Result<_, _>>()
        .map(Percentages)
}

#[derive(Debug, Args)]
pub struct CdfArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Comma-separated percentages of singular values.
    #[arg(long, value_parser = parse_percentages, default_value = "1,2,5,10,20,50,100")]
    pub k: Percentages,
    /// CSV output with header `k_percent,cdf`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolarityArg {
    Dark,
    Bright,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Detections CSV output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub threshold: f64,
    #[arg(long, default_value_t = 4)]
    pub min_area: usize,
    #[arg(long, value_enum, default_value_t = PolarityArg::Dark)]
    pub polarity: PolarityArg,
    #[command(flatten)]
    pub pre: Preprocess,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Detections CSV input.
    #[arg(long)]
    pub det: PathBuf,
    /// Tracks CSV output (same columns, with track ids).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    pub iou: f64,
    /// Consecutive unmatched frames a track survives.
    #[arg(long, default_value_t = 3)]
    pub max_missed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Ap,
    Mota,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Detections or tracks CSV.
    #[arg(long)]
    pub det: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = shadowdecomp::eval::DEFAULT_IOU_THRESHOLD)]
    pub iou: f64,
    /// Also write the report to this JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
