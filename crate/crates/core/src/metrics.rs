//! Reconstruction quality: PSNR, windowed SSIM, spectral angle, and the
//! composite training loss `α‖X−X̂‖₁ + β‖Y−ΦX̂‖₁ + γ(1 − ssim)`.

use serde::{Serialize, Serializer};

use crate::cube::{vectorize, DetectorImage, HsiCube};
use crate::error::{GiscError, Result};
use crate::matrix::SensingMatrix;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 1e-4;
pub const SSIM_C2: f64 = 9e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            alpha: 50.0,
            beta: 1.0,
            gamma: 50.0,
        }
    }
}

impl LossWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if [alpha, beta, gamma]
            .iter()
            .any(|w| !(*w >= 0.0) || !w.is_finite())
        {
            return Err(GiscError::Parameter(format!(
                "loss weights must be finite and >= 0, got ({alpha}, {beta}, {gamma})"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }
}

fn same_dims(a: &HsiCube, b: &HsiCube) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(GiscError::Dimension(format!(
            "reference is {} but reconstruction is {}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

fn check_peak(peak: f64) -> Result<()> {
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(GiscError::Parameter(format!(
            "peak must be > 0, got {peak}"
        )));
    }
    Ok(())
}

/// `10·log10(peak² / MSE)` over the whole cube; `+∞` when identical.
pub fn psnr(reference: &HsiCube, rec: &HsiCube, peak: f64) -> Result<f64> {
    same_dims(reference, rec)?;
    check_peak(peak)?;
    Ok(psnr_from_mse(
        mse(reference.as_slice(), rec.as_slice()),
        peak,
    ))
}

pub fn per_band_psnr(reference: &HsiCube, rec: &HsiCube, peak: f64) -> Result<Vec<f64>> {
    same_dims(reference, rec)?;
    check_peak(peak)?;
    Ok((0..reference.dims().l)
        .map(|b| psnr_from_mse(mse(reference.band(b), rec.band(b)), peak))
        .collect())
}

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    let mut w: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - c;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Separable "valid" filtering: output is `(rows−k+1) x (cols−k+1)`.
fn filter_valid(img: &[f64], rows: usize, cols: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (or, oc) = (rows - k + 1, cols - k + 1);
    let mut horiz = vec![0.0; rows * oc];
    for r in 0..rows {
        let row = &img[r * cols..(r + 1) * cols];
        for c in 0..oc {
            horiz[r * oc + c] = taps.iter().zip(&row[c..c + k]).map(|(w, v)| w * v).sum();
        }
    }
    let mut out = vec![0.0; or * oc];
    for r in 0..or {
        for c in 0..oc {
            out[r * oc + c] = taps
                .iter()
                .enumerate()
                .map(|(i, w)| w * horiz[(r + i) * oc + c])
                .sum();
        }
    }
    out
}

/// Mean SSIM of two `rows x cols` planes over all fully contained 11×11
/// Gaussian windows (σ = 1.5).
pub fn ssim_plane(a: &[f64], b: &[f64], rows: usize, cols: usize) -> Result<f64> {
    if a.len() != rows * cols || b.len() != rows * cols {
        return Err(GiscError::Dimension(format!(
            "planes must both be {rows}x{cols}"
        )));
    }
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(GiscError::Dimension(format!(
            "{rows}x{cols} plane is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )));
    }
    let taps = gaussian_taps(SSIM_WINDOW, SSIM_SIGMA);
    let prod = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(x, y)| x * y).collect() };
    let mu_a = filter_valid(a, rows, cols, &taps);
    let mu_b = filter_valid(b, rows, cols, &taps);
    let e_aa = filter_valid(&prod(a, a), rows, cols, &taps);
    let e_bb = filter_valid(&prod(b, b), rows, cols, &taps);
    let e_ab = filter_valid(&prod(a, b), rows, cols, &taps);

    let mut total = 0.0;
    for k in 0..mu_a.len() {
        let (ma, mb) = (mu_a[k], mu_b[k]);
        let (maa, mbb, mab) = (ma * ma, mb * mb, ma * mb);
        let var_a = e_aa[k] - maa;
        let var_b = e_bb[k] - mbb;
        let cov = e_ab[k] - mab;
        total += ((2.0 * mab + SSIM_C1) * (2.0 * cov + SSIM_C2))
            / ((maa + mbb + SSIM_C1) * (var_a + var_b + SSIM_C2));
    }
    Ok(total / mu_a.len() as f64)
}

/// Band-averaged SSIM of two cubes.
pub fn ssim(reference: &HsiCube, rec: &HsiCube) -> Result<f64> {
    same_dims(reference, rec)?;
    let d = reference.dims();
    let mut total = 0.0;
    for band in 0..d.l {
        total += ssim_plane(reference.band(band), rec.band(band), d.mx, d.nx)?;
    }
    Ok(total / d.l as f64)
}

/// Mean spectral angle in radians. Pixels where both spectra vanish score 0;
/// where exactly one vanishes, π/2.
pub fn sam(reference: &HsiCube, rec: &HsiCube) -> Result<f64> {
    same_dims(reference, rec)?;
    let d = reference.dims();
    if d.l < 2 {
        return Err(GiscError::Dimension(format!(
            "spectral angle needs at least 2 bands, cube has {}",
            d.l
        )));
    }
    let (a, b, p) = (reference.as_slice(), rec.as_slice(), d.pixels());
    let mut total = 0.0;
    for px in 0..p {
        let (mut na, mut nb) = (0.0, 0.0);
        for band in 0..d.l {
            let (u, v) = (a[band * p + px], b[band * p + px]);
            na += u * u;
            nb += v * v;
        }
        total += match (na == 0.0, nb == 0.0) {
            (true, true) => 0.0,
            (true, false) | (false, true) => std::f64::consts::FRAC_PI_2,
            _ => {
                // arccos(⟨u,v⟩/‖u‖‖v‖) evaluated as 2·atan2(‖û−v̂‖, ‖û+v̂‖),
                // which stays accurate for small angles.
                let (na, nb) = (na.sqrt(), nb.sqrt());
                let (mut diff, mut sum) = (0.0, 0.0);
                for band in 0..d.l {
                    let (u, v) = (a[band * p + px] / na, b[band * p + px] / nb);
                    diff += (u - v) * (u - v);
                    sum += (u + v) * (u + v);
                }
                2.0 * diff.sqrt().atan2(sum.sqrt())
            }
        };
    }
    Ok(total / p as f64)
}

/// Composite loss with `‖·‖₁` as the sum of absolute entries and
/// band-averaged SSIM.
pub fn composite_loss(
    reference: &HsiCube,
    rec: &HsiCube,
    y: &DetectorImage,
    phi: &SensingMatrix,
    w: &LossWeights,
) -> Result<f64> {
    same_dims(reference, rec)?;
    if phi.cube_dims() != rec.dims() || phi.detector_dims() != y.dims() {
        return Err(GiscError::Dimension(format!(
            "matrix maps {} -> {}, but cube is {} and measurement is {}",
            phi.cube_dims(),
            phi.detector_dims(),
            rec.dims(),
            y.dims()
        )));
    }
    let fidelity: f64 = reference
        .as_slice()
        .iter()
        .zip(rec.as_slice())
        .map(|(x, xh)| (x - xh).abs())
        .sum();
    let predicted = phi.dense().matvec(&vectorize(rec))?;
    let data_term: f64 = y
        .as_slice()
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).abs())
        .sum();
    let structural = 1.0 - ssim(reference, rec)?;
    Ok(w.alpha * fidelity + w.beta * data_term + w.gamma * structural)
}

fn ser_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn ser_db_list<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_infinite() && *x > 0.0 {
            seq.serialize_element("inf")?;
        } else {
            seq.serialize_element(x)?;
        }
    }
    seq.end()
}

/// Scores for one (reference, reconstruction) pair. Infinite PSNR values
/// serialize as the string `"inf"`; `loss` is omitted unless a measurement
/// and matrix were supplied.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    #[serde(serialize_with = "ser_db")]
    pub psnr_db: f64,
    pub ssim: f64,
    pub sam_rad: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
    #[serde(serialize_with = "ser_db_list")]
    pub per_band_psnr: Vec<f64>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn evaluate(
    reference: &HsiCube,
    rec: &HsiCube,
    peak: f64,
    measurement: Option<(&DetectorImage, &SensingMatrix)>,
    weights: &LossWeights,
) -> Result<MetricsReport> {
    let loss = match measurement {
        Some((y, phi)) => Some(composite_loss(reference, rec, y, phi, weights)?),
        None => None,
    };
    Ok(MetricsReport {
        psnr_db: psnr(reference, rec, peak)?,
        ssim: ssim(reference, rec)?,
        sam_rad: sam(reference, rec)?,
        loss,
        per_band_psnr: per_band_psnr(reference, rec, peak)?,
    })
}
