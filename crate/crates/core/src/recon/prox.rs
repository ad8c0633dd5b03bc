//! Proximal denoisers used as the shrinkage step of the iterative solvers.

use crate::cube::CubeDims;

/// `sign(v)·max(|v| − t, 0)`.
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Anisotropic total variation summed over bands: `Σ |∂_r x| + |∂_c x|`
/// with forward differences and no wrap-around.
pub fn tv_aniso(x: &[f64], dims: CubeDims) -> f64 {
    let (mx, nx) = (dims.mx, dims.nx);
    let mut tv = 0.0;
    for band in x.chunks(dims.pixels()) {
        for r in 0..mx {
            for c in 0..nx {
                let v = band[r * nx + c];
                if r + 1 < mx {
                    tv += (band[(r + 1) * nx + c] - v).abs();
                }
                if c + 1 < nx {
                    tv += (band[r * nx + c + 1] - v).abs();
                }
            }
        }
    }
    tv
}

/// Proximal map of `τ·TV` per band, solved on the dual by projected
/// gradient (iterative clipping of the dual field to `[−τ, τ]`).
///
/// The dual field is kept between calls as a warm start.
#[derive(Clone, Debug)]
pub struct TvProx {
    dims: CubeDims,
    inner_iters: usize,
    // Dual variables on vertical and horizontal edges, stored per pixel.
    p_r: Vec<f64>,
    p_c: Vec<f64>,
}

impl TvProx {
    pub fn new(dims: CubeDims, inner_iters: usize) -> Self {
        Self {
            dims,
            inner_iters,
            p_r: vec![0.0; dims.len()],
            p_c: vec![0.0; dims.len()],
        }
    }

    /// `x = v − Dᵀp`.
    fn primal(&self, v: &[f64], out: &mut [f64]) {
        let (mx, nx, p) = (self.dims.mx, self.dims.nx, self.dims.pixels());
        for b in 0..self.dims.l {
            let o = b * p;
            for r in 0..mx {
                for c in 0..nx {
                    let k = o + r * nx + c;
                    // Dᵀ applied to the edge fields: −div p.
                    let mut dt = 0.0;
                    if r + 1 < mx {
                        dt -= self.p_r[k];
                    }
                    if r > 0 {
                        dt += self.p_r[k - nx];
                    }
                    if c + 1 < nx {
                        dt -= self.p_c[k];
                    }
                    if c > 0 {
                        dt += self.p_c[k - 1];
                    }
                    out[k] = v[k] - dt;
                }
            }
        }
    }

    pub fn apply(&mut self, v: &[f64], tau: f64) -> Vec<f64> {
        let (mx, nx, p) = (self.dims.mx, self.dims.nx, self.dims.pixels());
        let mut x = vec![0.0; v.len()];
        if tau <= 0.0 {
            x.copy_from_slice(v);
            return x;
        }
        // ‖D‖² ≤ 8 for 2-D forward differences.
        let step = 1.0 / 8.0;
        // Rescale a warm start if the threshold changed.
        for q in self.p_r.iter_mut().chain(self.p_c.iter_mut()) {
            *q = q.clamp(-tau, tau);
        }
        for _ in 0..self.inner_iters {
            self.primal(v, &mut x);
            for b in 0..self.dims.l {
                let o = b * p;
                for r in 0..mx {
                    for c in 0..nx {
                        let k = o + r * nx + c;
                        if r + 1 < mx {
                            let g = x[k + nx] - x[k];
                            self.p_r[k] = (self.p_r[k] + step * g).clamp(-tau, tau);
                        }
                        if c + 1 < nx {
                            let g = x[k + 1] - x[k];
                            self.p_c[k] = (self.p_c[k] + step * g).clamp(-tau, tau);
                        }
                    }
                }
            }
        }
        self.primal(v, &mut x);
        x
    }
}
