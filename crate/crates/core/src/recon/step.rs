use crate::error::{GiscError, Result};
use crate::matrix::DenseMatrix;

const MIN_ITERS: usize = 50;
const MAX_ITERS: usize = 2000;

/// Power-iteration estimate of `‖A‖₂²`, the largest eigenvalue of `AᵀA`,
/// started from the all-ones vector.
pub fn estimate_step(a: &DenseMatrix) -> Result<f64> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v = vec![1.0 / (a.cols() as f64).sqrt(); a.cols()];
    let mut est = 0.0;
    for it in 0..MAX_ITERS {
        let av = a.matvec(&v)?;
        let rayleigh = av.iter().map(|x| x * x).sum::<f64>();
        let w = a.rmatvec(&av)?;
        let wn = norm(&w);
        if wn == 0.0 || !wn.is_finite() {
            if it == 0 && a.as_slice().iter().all(|&x| x == 0.0) {
                return Err(GiscError::DegenerateMatrix(
                    "zero matrix has no step size".into(),
                ));
            }
            // All-ones start orthogonal to the row space: restart off-axis.
            if it == 0 {
                v = (0..a.cols())
                    .map(|k| 1.0 + (k as f64 * 0.618_034).fract())
                    .collect();
                let n = norm(&v);
                v.iter_mut().for_each(|x| *x /= n);
                continue;
            }
            return Ok(rayleigh.max(est));
        }
        let converged = it >= MIN_ITERS && (rayleigh - est).abs() <= 1e-12 * rayleigh;
        est = rayleigh;
        if converged {
            break;
        }
        v = w.into_iter().map(|x| x / wn).collect();
    }
    Ok(est)
}
