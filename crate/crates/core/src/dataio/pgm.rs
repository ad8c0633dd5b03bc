use std::fs;
use std::path::{Path, PathBuf};

use crate::cube::HsiCube;
use crate::error::{GiscError, Result};

/// 8-bit level of a normalized sample, rounding half up.
pub fn gray_level(v: f64) -> u8 {
    (255.0 * v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Binary PGM (P5) of one `rows x cols` plane.
pub fn encode_pgm(plane: &[f64], rows: usize, cols: usize) -> Vec<u8> {
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(plane.iter().map(|&v| gray_level(v)));
    out
}

pub fn band_file_name(wavelength_nm: f64) -> String {
    format!("band_{wavelength_nm}nm.pgm")
}

/// Writes one `band_<λ>nm.pgm` per band into `dir`. Samples must lie in
/// `[0, 1]`.
pub fn export_band_images(cube: &HsiCube, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    if cube.max_value() > 1.0 {
        return Err(GiscError::Parameter(format!(
            "band export expects samples in [0, 1], max is {}",
            cube.max_value()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| GiscError::io(dir, e))?;
    let d = cube.dims();
    let mut written = Vec::with_capacity(d.l);
    for (b, &wl) in cube.wavelengths().iter().enumerate() {
        let path = dir.join(band_file_name(wl));
        fs::write(&path, encode_pgm(cube.band(b), d.mx, d.nx))
            .map_err(|e| GiscError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
