use std::time::Instant;

use super::ReconResult;
use crate::cube::{devectorize, DetectorImage};
use crate::error::{GiscError, Result};
use crate::matrix::{DenseMatrix, SensingMatrix};

/// Differential ghost imaging estimate before clamping:
///
/// `X̂_j = ⟨φ_j y⟩ − (Σy / Σr)·⟨φ_j r⟩`, where `⟨·⟩` averages over detector
/// pixels and `r = Φ·1` acts as the reference bucket.
pub fn dgi_raw(y: &[f64], phi: &DenseMatrix) -> Result<Vec<f64>> {
    if y.len() != phi.rows() {
        return Err(GiscError::Dimension(format!(
            "measurement has {} pixels, matrix has {} rows",
            y.len(),
            phi.rows()
        )));
    }
    if phi.rows() < 2 {
        return Err(GiscError::Dimension(
            "DGI needs at least 2 detector pixels".into(),
        ));
    }
    let r = phi.row_sums();
    let r_total: f64 = r.iter().sum();
    if r_total == 0.0 || !r_total.is_finite() {
        return Err(GiscError::DegenerateMatrix(
            "reference bucket (row sums of Φ) sums to zero".into(),
        ));
    }
    let ratio = y.iter().sum::<f64>() / r_total;
    let m = phi.rows() as f64;
    let corr_y = phi.rmatvec(y)?;
    let corr_r = phi.rmatvec(&r)?;
    Ok(corr_y
        .iter()
        .zip(&corr_r)
        .map(|(cy, cr)| cy / m - ratio * (cr / m))
        .collect())
}

/// DGI reconstruction, clamped at zero.
pub fn dgi(y: &DetectorImage, phi: &SensingMatrix) -> Result<ReconResult> {
    if y.dims() != phi.detector_dims() {
        return Err(GiscError::Dimension(format!(
            "measurement is {} but matrix expects detector {}",
            y.dims(),
            phi.detector_dims()
        )));
    }
    let start = Instant::now();
    let raw = dgi_raw(y.as_slice(), phi.dense())?;
    let clamped: Vec<f64> = raw.into_iter().map(|v| v.max(0.0)).collect();
    let dims = phi.cube_dims();
    let wl: Vec<f64> = (0..dims.l).map(|b| b as f64).collect();
    Ok(ReconResult {
        cube: devectorize(&clamped, dims, &wl)?,
        iterations: 1,
        objective_trace: Vec::new(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{CubeDims, DetectorDims};

    #[test]
    fn zero_measurement_gives_zero() {
        let a = DenseMatrix::from_fn(8, 3, |i, j| 1.0 + ((i + 2 * j) % 5) as f64);
        let out = dgi_raw(&[0.0; 8], &a).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn degenerate_and_shape_errors() {
        let z = DenseMatrix::from_fn(4, 2, |_, _| 0.0);
        assert!(matches!(
            dgi_raw(&[1.0; 4], &z),
            Err(GiscError::DegenerateMatrix(_))
        ));
        let one_row = DenseMatrix::from_fn(1, 2, |_, _| 1.0);
        assert!(matches!(
            dgi_raw(&[1.0], &one_row),
            Err(GiscError::Dimension(_))
        ));
        let a = DenseMatrix::identity(3);
        assert!(dgi_raw(&[1.0; 2], &a).is_err());
    }

    #[test]
    fn scales_linearly_with_measurement() {
        let a = DenseMatrix::from_fn(16, 4, |i, j| 0.5 + ((i * 3 + j * 5) % 7) as f64);
        let y: Vec<f64> = (0..16).map(|i| (i % 4) as f64 + 0.25).collect();
        let base = dgi_raw(&y, &a).unwrap();
        let c = 3.5;
        let scaled: Vec<f64> = y.iter().map(|v| v * c).collect();
        let out = dgi_raw(&scaled, &a).unwrap();
        for (o, b) in out.iter().zip(&base) {
            assert!((o - c * b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn dgi_clamps_and_counts() {
        let det = DetectorDims::new(2, 2);
        let cube = CubeDims::new(1, 2, 1);
        let a = DenseMatrix::from_col_major(4, 2, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0])
            .unwrap();
        let phi = SensingMatrix::new_calibrated(cube, det, a).unwrap();
        let y = DetectorImage::new(det, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let res = dgi(&y, &phi).unwrap();
        assert_eq!(res.iterations, 1);
        assert!(res.objective_trace.is_empty());
        assert!(res.cube.as_slice().iter().all(|&v| v >= 0.0));
        assert!(res.cube.as_slice()[0] > res.cube.as_slice()[1]);
    }
}
