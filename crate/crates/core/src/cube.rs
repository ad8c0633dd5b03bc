//! Hyperspectral cubes, detector images and the vectorization convention
//! that ties them to sensing-matrix columns.
//!
//! A cube is flattened band-major: every voxel of band 0 precedes every voxel
//! of band 1, and within a band pixels follow a row-major raster. Voxel
//! `(b, r, c)` lands at `b * mx * nx + r * nx + c`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GiscError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubeDims {
    pub mx: usize,
    pub nx: usize,
    pub l: usize,
}

impl CubeDims {
    pub fn new(mx: usize, nx: usize, l: usize) -> Self {
        Self { mx, nx, l }
    }

    pub fn pixels(&self) -> usize {
        self.mx * self.nx
    }

    /// Total voxel count, `None` on overflow.
    pub fn checked_len(&self) -> Option<usize> {
        self.mx.checked_mul(self.nx)?.checked_mul(self.l)
    }

    pub fn len(&self) -> usize {
        self.mx * self.nx * self.l
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for CubeDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.mx, self.nx, self.l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectorDims {
    pub my: usize,
    pub ny: usize,
}

impl DetectorDims {
    pub fn new(my: usize, ny: usize) -> Self {
        Self { my, ny }
    }

    pub fn len(&self) -> usize {
        self.my * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for DetectorDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.my, self.ny)
    }
}

/// Flat position of voxel `(band, row, col)`.
pub fn canonical_index(band: usize, row: usize, col: usize, dims: CubeDims) -> Result<usize> {
    if band >= dims.l || row >= dims.mx || col >= dims.nx {
        return Err(GiscError::Bounds(format!(
            "voxel (b={band}, r={row}, c={col}) outside cube {dims}"
        )));
    }
    Ok(band * dims.pixels() + row * dims.nx + col)
}

/// Inverse of [`canonical_index`]: returns `(band, row, col)`.
pub fn voxel_of(index: usize, dims: CubeDims) -> Result<(usize, usize, usize)> {
    if index >= dims.len() {
        return Err(GiscError::Bounds(format!(
            "flat index {index} outside cube {dims} ({} voxels)",
            dims.len()
        )));
    }
    let band = index / dims.pixels();
    let rem = index % dims.pixels();
    Ok((band, rem / dims.nx, rem % dims.nx))
}

/// Evenly spaced wavelength grid `start, start + step, ...` with `l` entries.
pub fn wavelength_grid(start_nm: f64, step_nm: f64, l: usize) -> Vec<f64> {
    (0..l).map(|b| start_nm + step_nm * b as f64).collect()
}

/// A hyperspectral object `x(m, n, λ)`, stored in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct HsiCube {
    dims: CubeDims,
    wavelengths: Vec<f64>,
    data: Vec<f64>,
}

impl HsiCube {
    pub fn new(dims: CubeDims, wavelengths: Vec<f64>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(GiscError::Dimension(format!(
                "cube {dims} has a zero extent"
            )));
        }
        let len = dims
            .checked_len()
            .ok_or_else(|| GiscError::Dimension(format!("cube {dims} overflows usize")))?;
        if data.len() != len {
            return Err(GiscError::Dimension(format!(
                "cube {dims} needs {len} samples, got {}",
                data.len()
            )));
        }
        if wavelengths.len() != dims.l {
            return Err(GiscError::Dimension(format!(
                "cube {dims} needs {} wavelengths, got {}",
                dims.l,
                wavelengths.len()
            )));
        }
        if wavelengths.iter().any(|w| !w.is_finite())
            || wavelengths.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(GiscError::Parameter(
                "wavelengths must be finite and strictly increasing".into(),
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(GiscError::Parameter(format!(
                "cube sample {pos} is {} (samples must be finite and >= 0)",
                data[pos]
            )));
        }
        Ok(Self {
            dims,
            wavelengths,
            data,
        })
    }

    pub fn zeros(dims: CubeDims, wavelengths: Vec<f64>) -> Result<Self> {
        Self::new(dims, wavelengths, vec![0.0; dims.len()])
    }

    /// Cube with a single voxel set to `value` and everything else zero.
    pub fn one_hot(
        dims: CubeDims,
        wavelengths: Vec<f64>,
        index: usize,
        value: f64,
    ) -> Result<Self> {
        voxel_of(index, dims)?;
        let mut data = vec![0.0; dims.len()];
        data[index] = value;
        Self::new(dims, wavelengths, data)
    }

    pub fn dims(&self) -> CubeDims {
        self.dims
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, band: usize, row: usize, col: usize) -> Result<f64> {
        Ok(self.data[canonical_index(band, row, col, self.dims)?])
    }

    /// Row-major plane of one band.
    pub fn band(&self, band: usize) -> &[f64] {
        let p = self.dims.pixels();
        &self.data[band * p..(band + 1) * p]
    }

    /// Spectrum at one spatial pixel, one value per band.
    pub fn spectrum(&self, row: usize, col: usize) -> Vec<f64> {
        let p = self.dims.pixels();
        let off = row * self.dims.nx + col;
        (0..self.dims.l).map(|b| self.data[b * p + off]).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Same samples under a new wavelength axis.
    pub fn with_wavelengths(self, wavelengths: Vec<f64>) -> Result<Self> {
        Self::new(self.dims, wavelengths, self.data)
    }

    /// Applies `f` to every sample. The result must still satisfy the cube
    /// invariants.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.dims,
            self.wavelengths.clone(),
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// Flattened object vector `X`.
pub fn vectorize(cube: &HsiCube) -> Vec<f64> {
    cube.data.clone()
}

/// Rebuilds a cube from its flattened vector.
pub fn devectorize(x: &[f64], dims: CubeDims, wavelengths: &[f64]) -> Result<HsiCube> {
    if Some(x.len()) != dims.checked_len() {
        return Err(GiscError::Dimension(format!(
            "vector of length {} does not fit cube {dims}",
            x.len()
        )));
    }
    HsiCube::new(dims, wavelengths.to_vec(), x.to_vec())
}

/// Single-shot detector frame `y(m, n)`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorImage {
    dims: DetectorDims,
    data: Vec<f64>,
}

impl DetectorImage {
    pub fn new(dims: DetectorDims, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(GiscError::Dimension(format!(
                "detector {dims} has a zero extent"
            )));
        }
        if data.len() != dims.len() {
            return Err(GiscError::Dimension(format!(
                "detector {dims} needs {} samples, got {}",
                dims.len(),
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(GiscError::Parameter(format!(
                "detector sample {pos} is not finite"
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> DetectorDims {
        self.dims
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Mean signal power `mean(y²)`.
    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64
    }
}
