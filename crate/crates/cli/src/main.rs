//! `gisc`: file-based pipeline for speckle-encoded snapshot spectral
//! imaging. Each subcommand reads and writes the GSM1/GSC1/GSD1 formats
//! and drops a JSON run manifest beside its output.
//!
//! Exit codes: 0 success, 2 usage or bad parameter, 3 I/O or file format,
//! 4 dimension mismatch, 5 numerical failure.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gisc_core::{CubeDims, DetectorDims, GiscError};

#[derive(Parser, Debug)]
#[command(
    name = "gisc",
    version,
    about = "Speckle sensing simulation and classical reconstruction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize a calibrated speckle sensing matrix (GSM1).
    Calibrate(CalibrateArgs),
    /// Measure a cube through a sensing matrix, optionally adding noise (GSD1).
    Sense(SenseArgs),
    /// Recover a cube from a measurement with DGI or TwIST (GSC1).
    Reconstruct(ReconstructArgs),
    /// Score a reconstruction against a reference; writes a JSON report.
    Eval(EvalArgs),
    /// Select bands, normalize and cut a cube into numbered patches.
    Patch(PatchArgs),
    /// Generate a synthetic piecewise-constant test scene (GSC1).
    Synth(SynthArgs),
    /// Write one 8-bit PGM per band of a cube with samples in [0, 1].
    Export(ExportArgs),
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// Cube dimensions, MxNxL.
    #[arg(long, value_parser = parse_cube_dims)]
    pub cube_dims: CubeDims,
    /// Detector dimensions, MYxNY.
    #[arg(long, value_parser = parse_detector_dims)]
    pub detector: DetectorDims,
    /// Speckle grain (intensity autocorrelation FWHM) in detector pixels; 1 is white.
    #[arg(long, default_value_t = 1.0)]
    pub grain: f64,
    /// Target mean of every column.
    #[arg(long, default_value_t = 1.0)]
    pub mean_intensity: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SenseArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub cube: PathBuf,
    /// SNR in dB against the mean signal power mean(y²), or `inf` for no noise.
    #[arg(long, default_value = "inf")]
    pub snr_db: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Dgi,
    Twist,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegularizerArg {
    /// Soft threshold in the voxel basis.
    L1,
    /// Anisotropic total variation per band.
    Tv,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub meas: PathBuf,
    #[arg(long, default_value_t = 1e-2)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.78)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = RegularizerArg::L1)]
    pub regularizer: RegularizerArg,
    /// Project iterates onto x >= 0.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub nonneg: bool,
    /// Band wavelengths in nm for the output cube, `start:step` or a comma
    /// list. Defaults to band indices 0, 1, 2, ...
    #[arg(long, value_parser = parse_wavelengths)]
    pub wavelengths: Option<Wavelengths>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub rec: PathBuf,
    /// With --meas, adds the composite loss to the report.
    #[arg(long, requires = "meas")]
    pub matrix: Option<PathBuf>,
    #[arg(long, requires = "matrix")]
    pub meas: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub peak: f64,
    /// Loss weights alpha,beta,gamma.
    #[arg(long, default_value = "50,1,50", value_parser = parse_weights)]
    pub weights: (f64, f64, f64),
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PatchArgs {
    /// GSC1 cube, or raw f32 samples when --header is given.
    #[arg(long)]
    pub cube: PathBuf,
    /// Sidecar header for a raw cube.
    #[arg(long)]
    pub header: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    #[arg(long, default_value_t = 128)]
    pub stride: usize,
    /// Inclusive wavelength range in nm, `lo:hi`.
    #[arg(long, default_value = "560:700", value_parser = parse_band_range)]
    pub bands: (f64, f64),
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_parser = parse_cube_dims)]
    pub cube_dims: CubeDims,
    /// Band wavelengths in nm, `start:step` or a comma list.
    #[arg(long, default_value = "560:10", value_parser = parse_wavelengths)]
    pub wavelengths: Wavelengths,
    /// Number of shapes; scales with the area when omitted.
    #[arg(long)]
    pub shapes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub cube: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Wavelengths {
    Grid { start: f64, step: f64 },
    List(Vec<f64>),
}

impl Wavelengths {
    pub fn resolve(&self, l: usize) -> Result<Vec<f64>, GiscError> {
        match self {
            Wavelengths::Grid { start, step } => {
                Ok(gisc_core::cube::wavelength_grid(*start, *step, l))
            }
            Wavelengths::List(v) if v.len() == l => Ok(v.clone()),
            Wavelengths::List(v) => Err(GiscError::Dimension(format!(
                "{} wavelengths given for {l} bands",
                v.len()
            ))),
        }
    }
}

fn split_dims<const N: usize>(s: &str) -> Result<[usize; N], String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() != N {
        return Err(format!("expected {N} sizes separated by 'x', got '{s}'"));
    }
    let mut out = [0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .trim()
            .parse()
            .map_err(|_| format!("'{p}' is not a size"))?;
        if *o == 0 {
            return Err(format!("sizes must be >= 1 in '{s}'"));
        }
    }
    Ok(out)
}

fn parse_cube_dims(s: &str) -> Result<CubeDims, String> {
    let [mx, nx, l] = split_dims::<3>(s)?;
    Ok(CubeDims::new(mx, nx, l))
}

fn parse_detector_dims(s: &str) -> Result<DetectorDims, String> {
    let [my, ny] = split_dims::<2>(s)?;
    Ok(DetectorDims::new(my, ny))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    f64::from_str(s.trim()).map_err(|_| format!("'{s}' is not a number"))
}

fn parse_wavelengths(s: &str) -> Result<Wavelengths, String> {
    if let Some((a, b)) = s.split_once(':') {
        return Ok(Wavelengths::Grid {
            start: parse_f64(a)?,
            step: parse_f64(b)?,
        });
    }
    s.split(',')
        .map(parse_f64)
        .collect::<Result<_, _>>()
        .map(Wavelengths::List)
}

fn parse_band_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
    Ok((parse_f64(a)?, parse_f64(b)?))
}

fn parse_weights(s: &str) -> Result<(f64, f64, f64), String> {
    let v: Vec<f64> = s.split(',').map(parse_f64).collect::<Result<_, _>>()?;
    match v[..] {
        [a, b, g] => Ok((a, b, g)),
        _ => Err(format!("expected alpha,beta,gamma, got '{s}'")),
    }
}

pub fn exit_code(e: &GiscError) -> u8 {
    match e {
        GiscError::Parameter(_) => 2,
        GiscError::Io { .. }
        | GiscError::Format { .. }
        | GiscError::Header(_)
        | GiscError::Truncation { .. } => 3,
        GiscError::Dimension(_)
        | GiscError::Bounds(_)
        | GiscError::Capacity(_)
        | GiscError::Selection { .. } => 4,
        GiscError::DegenerateMatrix(_) | GiscError::Divergence { .. } => 5,
    }
}

fn configure_threads() -> Result<(), GiscError> {
    let Ok(raw) = std::env::var("GISC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        GiscError::Parameter(format!(
            "GISC_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| GiscError::Parameter(format!("cannot size thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::run(&cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
