//! The camera: speckle calibration of `Φ`, noise-free sensing `Y = ΦX`, and
//! additive Gaussian detector noise at a prescribed SNR.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{vectorize, CubeDims, DetectorDims, DetectorImage, HsiCube};
use crate::error::{GiscError, Result};
use crate::matrix::{DenseMatrix, SensingMatrix};
use crate::rng::RngSpec;

/// Upper bound on `rows * cols` for a calibrated matrix (2 GiB of f64).
pub const MAX_MATRIX_ENTRIES: usize = 1 << 28;

/// SNR presets for the two operating points of the noise study.
pub const SNR_TRAINING_DB: f64 = 30.0;
pub const SNR_LOW_DB: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeckleSpec {
    /// Speckle grain size in detector pixels; 1 means spatially white.
    pub correlation_px: f64,
    pub mean_intensity: f64,
    pub rng: RngSpec,
}

impl SpeckleSpec {
    pub fn new(correlation_px: f64, rng: RngSpec) -> Self {
        Self {
            correlation_px,
            mean_intensity: 1.0,
            rng,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.correlation_px >= 1.0) || !self.correlation_px.is_finite() {
            return Err(GiscError::Parameter(format!(
                "correlation_px must be finite and >= 1, got {}",
                self.correlation_px
            )));
        }
        if !(self.mean_intensity > 0.0) || !self.mean_intensity.is_finite() {
            return Err(GiscError::Parameter(format!(
                "mean_intensity must be finite and > 0, got {}",
                self.mean_intensity
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Target `10·log10(mean(y²) / σ²)`; `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub rng: RngSpec,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, rng: RngSpec) -> Self {
        Self { snr_db, rng }
    }

    pub fn noiseless() -> Self {
        Self::new(f64::INFINITY, RngSpec::default())
    }
}

/// Periodic Gaussian low-pass kernel, or `None` for white speckle.
///
/// A field kernel `exp(−d²/2σ²)` gives intensity autocorrelation
/// `exp(−d²/2σ²)` as well (the square of the field correlation), so
/// `σ = grain / (2√(2 ln 2))` makes the grain size the intensity FWHM.
fn grain_kernel(correlation_px: f64) -> Option<Vec<f64>> {
    if correlation_px <= 1.0 {
        return None;
    }
    let sigma = correlation_px / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
    k.iter_mut().for_each(|v| *v /= norm);
    Some(k)
}

/// Circular 1-D convolution along rows then columns of a `my x ny` plane.
fn blur_periodic(plane: &[f64], my: usize, ny: usize, kernel: &[f64]) -> Vec<f64> {
    let radius = (kernel.len() / 2) as isize;
    let wrap = |i: isize, n: usize| i.rem_euclid(n as isize) as usize;
    let mut tmp = vec![0.0; plane.len()];
    for r in 0..my {
        for c in 0..ny {
            let mut s = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                let cc = wrap(c as isize + k as isize - radius, ny);
                s += w * plane[r * ny + cc];
            }
            tmp[r * ny + c] = s;
        }
    }
    let mut out = vec![0.0; plane.len()];
    for r in 0..my {
        for c in 0..ny {
            let mut s = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                let rr = wrap(r as isize + k as isize - radius, my);
                s += w * tmp[rr * ny + c];
            }
            out[r * ny + c] = s;
        }
    }
    out
}

/// One speckle intensity pattern `|g|²`, with `g` a circular complex Gaussian
/// field low-pass filtered to the grain size. Rescaled to the target mean.
fn speckle_column(
    det: DetectorDims,
    spec: &SpeckleSpec,
    kernel: Option<&[f64]>,
    rng: RngSpec,
) -> Vec<f64> {
    let n = det.len();
    let mut rng = rng.rng();
    let mut re: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut im: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    if let Some(k) = kernel {
        re = blur_periodic(&re, det.my, det.ny, k);
        im = blur_periodic(&im, det.my, det.ny, k);
    }
    let mut col: Vec<f64> = re.iter().zip(&im).map(|(a, b)| a * a + b * b).collect();
    let mean = col.iter().sum::<f64>() / n as f64;
    let scale = spec.mean_intensity / mean;
    col.iter_mut().for_each(|v| *v *= scale);
    col
}

/// Synthesizes `Φ`, one independent speckle column per voxel. Column `j` uses
/// substream `spec.rng.stream ⊕ j`, so output is independent of scheduling.
pub fn calibrate(
    cube: CubeDims,
    detector: DetectorDims,
    spec: &SpeckleSpec,
) -> Result<SensingMatrix> {
    spec.validate()?;
    if cube.is_empty() || detector.is_empty() {
        return Err(GiscError::Dimension(format!(
            "calibration dims must be nonzero (cube {cube}, detector {detector})"
        )));
    }
    let cols = cube
        .checked_len()
        .ok_or_else(|| GiscError::Capacity(format!("cube {cube} overflows")))?;
    let rows = detector.len();
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_MATRIX_ENTRIES => {}
        _ => {
            return Err(GiscError::Capacity(format!(
                "{rows}x{cols} matrix exceeds the {MAX_MATRIX_ENTRIES}-entry limit"
            )))
        }
    }
    let kernel = grain_kernel(spec.correlation_px);
    let columns: Vec<Vec<f64>> = (0..cols)
        .into_par_iter()
        .map(|j| {
            speckle_column(
                detector,
                spec,
                kernel.as_deref(),
                spec.rng.substream(j as u64),
            )
        })
        .collect();
    let data = columns.concat();
    SensingMatrix::new_calibrated(
        cube,
        detector,
        DenseMatrix::from_col_major(rows, cols, data)?,
    )
}

/// Noise-free measurement `Y = Φ·vec(x)`.
pub fn sense(phi: &SensingMatrix, cube: &HsiCube) -> Result<DetectorImage> {
    if phi.cube_dims() != cube.dims() {
        return Err(GiscError::Dimension(format!(
            "matrix expects cube {} but got {}",
            phi.cube_dims(),
            cube.dims()
        )));
    }
    let y = phi.dense().matvec(&vectorize(cube))?;
    DetectorImage::new(phi.detector_dims(), y)
}

/// Adds i.i.d. zero-mean Gaussian noise with `σ² = mean(y²) / 10^(snr/10)`.
pub fn add_noise(y: &DetectorImage, spec: &NoiseSpec) -> Result<DetectorImage> {
    if spec.snr_db.is_nan() || spec.snr_db == f64::NEG_INFINITY {
        return Err(GiscError::Parameter(format!(
            "snr_db must be finite or +inf, got {}",
            spec.snr_db
        )));
    }
    if spec.snr_db == f64::INFINITY {
        return Ok(y.clone());
    }
    let sigma = (y.mean_power() / 10f64.powf(spec.snr_db / 10.0)).sqrt();
    let mut rng = spec.rng.rng();
    let noisy = y
        .as_slice()
        .iter()
        .map(|&v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    DetectorImage::new(y.dims(), noisy)
}

/// Realized `10·log10(mean(y²) / var(ε))` with `ε = noisy − clean`.
pub fn realized_snr_db(clean: &DetectorImage, noisy: &DetectorImage) -> Result<f64> {
    if clean.dims() != noisy.dims() {
        return Err(GiscError::Dimension(format!(
            "detector {} vs {}",
            clean.dims(),
            noisy.dims()
        )));
    }
    let n = clean.as_slice().len() as f64;
    let eps: Vec<f64> = noisy
        .as_slice()
        .iter()
        .zip(clean.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    let mean = eps.iter().sum::<f64>() / n;
    let var = eps.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    Ok(10.0 * (clean.mean_power() / var).log10())
}
