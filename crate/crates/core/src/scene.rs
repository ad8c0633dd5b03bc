//! Synthetic test scenes: a smooth background with a handful of flat
//! rectangles and discs, each carrying its own smooth spectrum.

use rand::Rng;

use crate::cube::{CubeDims, HsiCube};
use crate::dataio::normalize;
use crate::error::{GiscError, Result};
use crate::rng::RngSpec;

fn bump_spectrum(rng: &mut impl Rng, l: usize) -> Vec<f64> {
    let center = rng.gen_range(0.0..l as f64);
    let width = rng.gen_range(0.6..1.5) * (l as f64).max(2.0) / 2.0;
    let amp = rng.gen_range(0.5..1.0);
    let floor = rng.gen_range(0.05..0.25);
    (0..l)
        .map(|b| {
            let d = (b as f64 - center) / width;
            floor + amp * (-0.5 * d * d).exp()
        })
        .collect()
}

/// Piecewise-constant scene normalized to max 1, with a shape count that
/// scales with the spatial area.
pub fn synthetic_scene(dims: CubeDims, wavelengths: Vec<f64>, rng: RngSpec) -> Result<HsiCube> {
    synthetic_scene_with(dims, wavelengths, rng, 3 + dims.pixels() / 64)
}

/// Like [`synthetic_scene`] with an explicit number of shapes.
pub fn synthetic_scene_with(
    dims: CubeDims,
    wavelengths: Vec<f64>,
    rng: RngSpec,
    shapes: usize,
) -> Result<HsiCube> {
    if dims.is_empty() {
        return Err(GiscError::Dimension(format!(
            "scene dims {dims} must be nonzero"
        )));
    }
    let mut rng = rng.rng();
    let (mx, nx, l) = (dims.mx, dims.nx, dims.l);
    let p = dims.pixels();
    let mut data = vec![0.0; dims.len()];
    let background: Vec<f64> = (0..l)
        .map(|b| 0.05 + 0.05 * (b as f64 / l as f64))
        .collect();
    for b in 0..l {
        data[b * p..(b + 1) * p]
            .iter_mut()
            .for_each(|v| *v = background[b]);
    }
    let extent = mx.min(nx) as f64;
    for _ in 0..shapes {
        let spectrum = bump_spectrum(&mut rng, l);
        let (cr, cc) = (rng.gen_range(0.0..mx as f64), rng.gen_range(0.0..nx as f64));
        let half = rng.gen_range(0.12..0.3) * extent;
        let disc = rng.gen_bool(0.5);
        for r in 0..mx {
            for c in 0..nx {
                let (dr, dc) = (r as f64 + 0.5 - cr, c as f64 + 0.5 - cc);
                let inside = if disc {
                    dr * dr + dc * dc <= half * half
                } else {
                    dr.abs() <= half && dc.abs() <= half * 0.8
                };
                if inside {
                    for b in 0..l {
                        data[b * p + r * nx + c] = spectrum[b];
                    }
                }
            }
        }
    }
    Ok(normalize(&HsiCube::new(dims, wavelengths, data)?))
}
