//! Brute-force reference implementations shared by the integration tests.
//! Each one follows the textbook definition directly and shares no code
//! with the library beyond plain data accessors.

#![allow(dead_code)]

use gisc_core::{CubeDims, DenseMatrix, HsiCube, RngSpec};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_cube(dims: CubeDims, rng: &mut impl Rng) -> HsiCube {
    let wl = (0..dims.l).map(|b| 400.0 + 10.0 * b as f64).collect();
    let data = (0..dims.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    HsiCube::new(dims, wl, data).unwrap()
}

/// `reference + N(0, sd²)`, clipped to `[0, 1]`.
pub fn perturbed(reference: &HsiCube, sd: f64, rng: &mut impl Rng) -> HsiCube {
    let data = reference
        .as_slice()
        .iter()
        .map(|v| (v + sd * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0))
        .collect();
    HsiCube::new(reference.dims(), reference.wavelengths().to_vec(), data).unwrap()
}

pub fn gaussian_matrix(rows: usize, cols: usize, scale: f64, spec: RngSpec) -> DenseMatrix {
    let mut rng = spec.rng();
    DenseMatrix::from_fn(rows, cols, |_, _| {
        scale * rng.sample::<f64, _>(StandardNormal)
    })
}

pub fn to_nalgebra(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn spectral_norm_sq(a: &DenseMatrix) -> f64 {
    let s = to_nalgebra(a).singular_values();
    let m = s.iter().cloned().fold(0.0, f64::max);
    m * m
}

fn at(c: &HsiCube, b: usize, r: usize, col: usize) -> f64 {
    let d = c.dims();
    c.as_slice()[b * d.mx * d.nx + r * d.nx + col]
}

pub fn psnr(a: &HsiCube, b: &HsiCube, peak: f64) -> f64 {
    let d = a.dims();
    let mut se = 0.0;
    for band in 0..d.l {
        for r in 0..d.mx {
            for c in 0..d.nx {
                let e = at(a, band, r, c) - at(b, band, r, c);
                se += e * e;
            }
        }
    }
    let mse = se / d.len() as f64;
    10.0 * (peak * peak / mse).log10()
}

/// Direct 2-D windowed SSIM with centred second moments.
pub fn ssim(a: &HsiCube, b: &HsiCube) -> f64 {
    const K: usize = 11;
    let sigma: f64 = 1.5;
    let mut w = [[0.0f64; K]; K];
    let mut total_w = 0.0;
    for (i, row) in w.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
            total_w += *v;
        }
    }
    w.iter_mut().flatten().for_each(|v| *v /= total_w);
    let (c1, c2) = (1e-4, 9e-4);
    let d = a.dims();
    let mut acc = 0.0;
    for band in 0..d.l {
        let mut band_acc = 0.0;
        let mut count = 0usize;
        for r0 in 0..=d.mx - K {
            for c0 in 0..=d.nx - K {
                let (mut ma, mut mb) = (0.0, 0.0);
                for i in 0..K {
                    for j in 0..K {
                        ma += w[i][j] * at(a, band, r0 + i, c0 + j);
                        mb += w[i][j] * at(b, band, r0 + i, c0 + j);
                    }
                }
                let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..K {
                    for j in 0..K {
                        let da = at(a, band, r0 + i, c0 + j) - ma;
                        let db = at(b, band, r0 + i, c0 + j) - mb;
                        va += w[i][j] * da * da;
                        vb += w[i][j] * db * db;
                        cov += w[i][j] * da * db;
                    }
                }
                band_acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                    / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                count += 1;
            }
        }
        acc += band_acc / count as f64;
    }
    acc / d.l as f64
}

pub fn sam(a: &HsiCube, b: &HsiCube) -> f64 {
    let d = a.dims();
    let mut total = 0.0;
    for r in 0..d.mx {
        for c in 0..d.nx {
            let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
            for band in 0..d.l {
                let (u, v) = (at(a, band, r, c), at(b, band, r, c));
                dot += u * v;
                na += u * u;
                nb += v * v;
            }
            total += (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0).acos();
        }
    }
    total / (d.mx * d.nx) as f64
}

/// `α·Σ|X−X̂| + β·Σ|Y−ΦX̂| + γ(1 − ssim)` with a row-by-row product.
pub fn composite_loss(
    reference: &HsiCube,
    rec: &HsiCube,
    y: &[f64],
    phi: &DenseMatrix,
    (alpha, beta, gamma): (f64, f64, f64),
) -> f64 {
    let d = rec.dims();
    let fidelity: f64 = reference
        .as_slice()
        .iter()
        .zip(rec.as_slice())
        .map(|(p, q)| (p - q).abs())
        .sum();
    let mut data = 0.0;
    for (i, yi) in y.iter().enumerate() {
        let mut pred = 0.0;
        for band in 0..d.l {
            for r in 0..d.mx {
                for c in 0..d.nx {
                    pred += phi.get(i, band * d.mx * d.nx + r * d.nx + c) * at(rec, band, r, c);
                }
            }
        }
        data += (yi - pred).abs();
    }
    alpha * fidelity + beta * data + gamma * (1.0 - ssim(reference, rec))
}

/// Differential GI straight from the sums, one voxel at a time.
pub fn dgi(y: &[f64], phi: &DenseMatrix) -> Vec<f64> {
    let m = phi.rows();
    let r: Vec<f64> = (0..m)
        .map(|i| (0..phi.cols()).map(|j| phi.get(i, j)).sum())
        .collect();
    let sy: f64 = y.iter().sum();
    let sr: f64 = r.iter().sum();
    (0..phi.cols())
        .map(|j| {
            let mut py = 0.0;
            let mut pr = 0.0;
            for i in 0..m {
                py += phi.get(i, j) * y[i];
                pr += phi.get(i, j) * r[i];
            }
            py / m as f64 - (sy / sr) * (pr / m as f64)
        })
        .collect()
}

pub fn lasso_objective(a: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    0.5 * (y - a * x).norm_squared() + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

/// Plain ISTA with step `1/‖A‖²`.
pub fn ista(a: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, iters: usize) -> DVector<f64> {
    let s = a.singular_values().max();
    let l = s * s;
    let at = a.transpose();
    let mut x = DVector::zeros(a.ncols());
    for _ in 0..iters {
        let v = &x + (&at * (y - a * &x)) / l;
        x = v.map(|t| t.signum() * (t.abs() - lambda / l).max(0.0));
    }
    x
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
    }
}
