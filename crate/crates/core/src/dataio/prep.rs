//! Dataset preparation: spectral band selection, spatial patching and
//! global max normalization.

use serde::{Deserialize, Serialize};

use crate::cube::{CubeDims, HsiCube};
use crate::error::{GiscError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchSpec {
    pub size: usize,
    pub stride: usize,
    pub band_lo_nm: f64,
    pub band_hi_nm: f64,
}

impl PatchSpec {
    /// 128×128 patches at stride 128 over 560–700 nm.
    pub fn standard() -> Self {
        Self {
            size: 128,
            stride: 128,
            band_lo_nm: 560.0,
            band_hi_nm: 700.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 1 || self.stride < 1 {
            return Err(GiscError::Parameter(format!(
                "patch size and stride must be >= 1 (size {}, stride {})",
                self.size, self.stride
            )));
        }
        if !(self.band_lo_nm <= self.band_hi_nm) {
            return Err(GiscError::Parameter(format!(
                "band range [{}, {}] is empty",
                self.band_lo_nm, self.band_hi_nm
            )));
        }
        Ok(())
    }
}

/// Keeps the bands with `lo ≤ λ ≤ hi`, in order.
pub fn select_bands(cube: &HsiCube, lo_nm: f64, hi_nm: f64) -> Result<HsiCube> {
    let keep: Vec<usize> = cube
        .wavelengths()
        .iter()
        .enumerate()
        .filter(|(_, &w)| lo_nm <= w && w <= hi_nm)
        .map(|(b, _)| b)
        .collect();
    if keep.is_empty() {
        return Err(GiscError::Selection { lo_nm, hi_nm });
    }
    let d = cube.dims();
    let mut data = Vec::with_capacity(keep.len() * d.pixels());
    for &b in &keep {
        data.extend_from_slice(cube.band(b));
    }
    let wl = keep.iter().map(|&b| cube.wavelengths()[b]).collect();
    HsiCube::new(CubeDims::new(d.mx, d.nx, keep.len()), wl, data)
}

/// Top-left corners of every fully contained patch, row-major.
pub fn patch_offsets(
    mx: usize,
    nx: usize,
    size: usize,
    stride: usize,
) -> Result<Vec<(usize, usize)>> {
    if size > mx || size > nx {
        return Err(GiscError::Dimension(format!(
            "patch size {size} exceeds spatial dims {mx}x{nx}"
        )));
    }
    let rows = (mx - size) / stride + 1;
    let cols = (nx - size) / stride + 1;
    Ok((0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i * stride, j * stride)))
        .collect())
}

fn crop(cube: &HsiCube, r0: usize, c0: usize, size: usize) -> Result<HsiCube> {
    let d = cube.dims();
    let mut data = Vec::with_capacity(size * size * d.l);
    for b in 0..d.l {
        let band = cube.band(b);
        for r in r0..r0 + size {
            data.extend_from_slice(&band[r * d.nx + c0..r * d.nx + c0 + size]);
        }
    }
    HsiCube::new(
        CubeDims::new(size, size, d.l),
        cube.wavelengths().to_vec(),
        data,
    )
}

/// Square spatial patches at every stride offset. Band filtering is a
/// separate step ([`select_bands`]).
pub fn extract_patches(cube: &HsiCube, spec: &PatchSpec) -> Result<Vec<HsiCube>> {
    spec.validate()?;
    let d = cube.dims();
    patch_offsets(d.mx, d.nx, spec.size, spec.stride)?
        .into_iter()
        .map(|(r, c)| crop(cube, r, c, spec.size))
        .collect()
}

/// Tiles patches produced with `stride == size` back into an `mx x nx` cube.
pub fn assemble_patches(patches: &[HsiCube], mx: usize, nx: usize) -> Result<HsiCube> {
    let first = patches
        .first()
        .ok_or_else(|| GiscError::Dimension("no patches to assemble".into()))?;
    let pd = first.dims();
    let size = pd.mx;
    if pd.nx != size || mx % size != 0 || nx % size != 0 {
        return Err(GiscError::Dimension(format!(
            "cannot tile {size}x{size} patches into {mx}x{nx}"
        )));
    }
    let offsets = patch_offsets(mx, nx, size, size)?;
    if offsets.len() != patches.len() {
        return Err(GiscError::Dimension(format!(
            "{mx}x{nx} needs {} patches, got {}",
            offsets.len(),
            patches.len()
        )));
    }
    let dims = CubeDims::new(mx, nx, pd.l);
    let mut data = vec![0.0; dims.len()];
    for (p, &(r0, c0)) in patches.iter().zip(&offsets) {
        if p.dims() != pd {
            return Err(GiscError::Dimension("patches differ in shape".into()));
        }
        for b in 0..pd.l {
            let src = p.band(b);
            for r in 0..size {
                let dst = b * dims.pixels() + (r0 + r) * nx + c0;
                data[dst..dst + size].copy_from_slice(&src[r * size..(r + 1) * size]);
            }
        }
    }
    HsiCube::new(dims, first.wavelengths().to_vec(), data)
}

/// Divides by the global maximum; an all-zero cube comes back unchanged.
pub fn normalize(cube: &HsiCube) -> HsiCube {
    let max = cube.max_value();
    if max == 0.0 {
        return cube.clone();
    }
    cube.map(|v| v / max)
        .expect("scaling keeps samples finite and >= 0")
}
