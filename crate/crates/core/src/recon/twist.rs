//! Two-step iterative shrinkage/thresholding (TwIST) for
//! `min ½‖y − Ax‖² + λ·R(x)`.
//!
//! Each iteration forms the shrinkage step `z = Ψ(x_t + Aᵀ(y − Ax_t)/s)` and
//! the two-step combination
//! `x_{t+1} = (1−α)·x_{t−1} + (α−β)·x_t + β·z`.
//! The combination is kept only if it does not raise the objective; otherwise
//! the plain shrinkage step `z` is taken, and if even that fails the step
//! normalizer `s` is doubled. The recorded objective is therefore
//! non-increasing.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::prox::{soft_threshold, tv_aniso, TvProx};
use super::step::estimate_step;
use super::ReconResult;
use crate::cube::{devectorize, CubeDims, DetectorImage};
use crate::error::{GiscError, Result};
use crate::matrix::{DenseMatrix, SensingMatrix};

const TV_INNER_ITERS: usize = 30;
const MAX_BACKTRACKS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    /// `R(x) = ‖x‖₁` in the voxel basis.
    SoftThresholdL1,
    /// Anisotropic 2-D total variation of each band.
    TvPerBand,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistConfig {
    pub lambda_reg: f64,
    pub alpha_tw: f64,
    pub beta_tw: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub regularizer: Regularizer,
    /// Project every iterate onto `x ≥ 0`.
    pub nonneg: bool,
}

impl Default for TwistConfig {
    fn default() -> Self {
        Self {
            lambda_reg: 1e-2,
            alpha_tw: 1.78,
            beta_tw: 1.0,
            max_iters: 500,
            tol: 1e-6,
            regularizer: Regularizer::SoftThresholdL1,
            nonneg: true,
        }
    }
}

impl TwistConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GiscError::Parameter(msg));
        if !(self.lambda_reg > 0.0) || !self.lambda_reg.is_finite() {
            return bad(format!("lambda_reg must be > 0, got {}", self.lambda_reg));
        }
        if !(self.beta_tw > 0.0 && self.beta_tw <= 2.0) {
            return bad(format!("beta_tw must lie in (0, 2], got {}", self.beta_tw));
        }
        if !self.alpha_tw.is_finite() {
            return bad(format!("alpha_tw must be finite, got {}", self.alpha_tw));
        }
        if self.max_iters < 1 {
            return bad("max_iters must be >= 1".into());
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        Ok(())
    }
}

/// Vector-level solver output.
#[derive(Clone, Debug)]
pub struct TwistOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    /// Step normalizer in effect at termination.
    pub step: f64,
}

struct Shrink {
    regularizer: Regularizer,
    nonneg: bool,
    dims: CubeDims,
    tv: Option<TvProx>,
}

impl Shrink {
    fn apply(&mut self, v: &[f64], tau: f64) -> Vec<f64> {
        let mut out = match self.regularizer {
            Regularizer::SoftThresholdL1 => v.iter().map(|&x| soft_threshold(x, tau)).collect(),
            Regularizer::TvPerBand => self
                .tv
                .get_or_insert_with(|| TvProx::new(self.dims, TV_INNER_ITERS))
                .apply(v, tau),
        };
        if self.nonneg {
            out.iter_mut().for_each(|x| *x = x.max(0.0));
        }
        out
    }

    fn penalty(&self, x: &[f64]) -> f64 {
        match self.regularizer {
            Regularizer::SoftThresholdL1 => x.iter().map(|v| v.abs()).sum(),
            Regularizer::TvPerBand => tv_aniso(x, self.dims),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let diff = new
        .iter()
        .zip(old)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if diff == 0.0 {
        return 0.0;
    }
    diff / norm(old).max(norm(new))
}

/// Runs TwIST on a generic dense operator. `dims` gives the band layout of
/// `x` (needed by the TV regularizer) and must match `a.cols()`.
pub fn twist_solve(
    y: &[f64],
    a: &DenseMatrix,
    dims: CubeDims,
    cfg: &TwistConfig,
) -> Result<TwistOutcome> {
    cfg.validate()?;
    if y.len() != a.rows() {
        return Err(GiscError::Dimension(format!(
            "measurement has {} entries, operator has {} rows",
            y.len(),
            a.rows()
        )));
    }
    if dims.len() != a.cols() {
        return Err(GiscError::Dimension(format!(
            "layout {dims} has {} voxels, operator has {} columns",
            dims.len(),
            a.cols()
        )));
    }
    let mut s = estimate_step(a)?;
    let mut shrink = Shrink {
        regularizer: cfg.regularizer,
        nonneg: cfg.nonneg,
        dims,
        tv: None,
    };
    let lambda = cfg.lambda_reg;

    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        let ax = a.matvec(x)?;
        Ok(y.iter().zip(&ax).map(|(yi, axi)| yi - axi).collect())
    };
    let objective = |r: &[f64], x: &[f64], shrink: &Shrink| {
        0.5 * r.iter().map(|v| v * v).sum::<f64>() + lambda * shrink.penalty(x)
    };

    let n = a.cols();
    let mut x_prev = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut r = y.to_vec();
    let mut f = objective(&r, &x, &shrink);
    let mut trace = Vec::new();
    let mut use_two_step = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iters {
        iterations = it;
        let grad = a.rmatvec(&r)?;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let v: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi + gi / s).collect();
            let z = shrink.apply(&v, lambda / s);
            if z.iter().any(|v| !v.is_finite()) {
                return Err(GiscError::Divergence {
                    iteration: it,
                    detail: "shrinkage step produced a non-finite iterate".into(),
                });
            }
            if use_two_step {
                let mut cand: Vec<f64> = x_prev
                    .iter()
                    .zip(&x)
                    .zip(&z)
                    .map(|((xp, xc), zc)| {
                        (1.0 - cfg.alpha_tw) * xp
                            + (cfg.alpha_tw - cfg.beta_tw) * xc
                            + cfg.beta_tw * zc
                    })
                    .collect();
                if cfg.nonneg {
                    cand.iter_mut().for_each(|v| *v = v.max(0.0));
                }
                if cand.iter().all(|v| v.is_finite()) {
                    let rc = residual(&cand)?;
                    let fc = objective(&rc, &cand, &shrink);
                    if fc <= f {
                        accepted = Some((cand, rc, fc));
                        break;
                    }
                }
            }
            let rz = residual(&z)?;
            let fz = objective(&rz, &z, &shrink);
            if !fz.is_finite() {
                return Err(GiscError::Divergence {
                    iteration: it,
                    detail: format!("objective became {fz}"),
                });
            }
            if fz <= f {
                accepted = Some((z, rz, fz));
                break;
            }
            s *= 2.0;
        }
        let Some((x_new, r_new, f_new)) = accepted else {
            // No descent available at any step size: x is stationary to
            // working precision.
            trace.push(f);
            break;
        };
        let change = relative_change(&x_new, &x);
        x_prev = std::mem::replace(&mut x, x_new);
        r = r_new;
        f = f_new;
        trace.push(f);
        use_two_step = true;
        if change < cfg.tol {
            break;
        }
    }

    Ok(TwistOutcome {
        x,
        iterations,
        objective_trace: trace,
        step: s,
    })
}

/// TwIST reconstruction of a cube; negatives are clamped when the
/// nonnegativity projection is off.
pub fn twist(y: &DetectorImage, phi: &SensingMatrix, cfg: &TwistConfig) -> Result<ReconResult> {
    if y.dims() != phi.detector_dims() {
        return Err(GiscError::Dimension(format!(
            "measurement is {} but matrix expects detector {}",
            y.dims(),
            phi.detector_dims()
        )));
    }
    let start = Instant::now();
    let dims = phi.cube_dims();
    let out = twist_solve(y.as_slice(), phi.dense(), dims, cfg)?;
    let x: Vec<f64> = out.x.iter().map(|v| v.max(0.0)).collect();
    let wl: Vec<f64> = (0..dims.l).map(|b| b as f64).collect();
    Ok(ReconResult {
        cube: devectorize(&x, dims, &wl)?,
        iterations: out.iterations,
        objective_trace: out.objective_trace,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
