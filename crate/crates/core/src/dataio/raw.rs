//! Plain-float raw cube ingestion with a sidecar text header.
//!
//! The sidecar holds `key = value` lines (`#` starts a comment):
//!
//! ```text
//! rows = 1024
//! cols = 1392
//! bands = 31
//! wavelengths = 400:10        # start:step, or a comma-separated list
//! interleave = bip            # bsq (band-sequential) or bip (per-pixel spectra)
//! ```
//!
//! Samples are little-endian f32, `rows·cols·bands` of them.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::cube::{wavelength_grid, CubeDims, HsiCube};
use crate::error::{GiscError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interleave {
    /// Band-sequential, identical to the canonical cube order.
    Bsq,
    /// Pixel-interleaved: `[row][col][band]`.
    Bip,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawHeader {
    pub dims: CubeDims,
    pub wavelengths: Vec<f64>,
    pub interleave: Interleave,
}

impl RawHeader {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = HashMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| GiscError::Header(format!("expected key = value, got {line:?}")))?;
            kv.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        let get = |k: &str| {
            kv.get(k)
                .ok_or_else(|| GiscError::Header(format!("missing key {k:?}")))
        };
        let num = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| GiscError::Header(format!("{k} is not an unsigned integer")))
        };
        let dims = CubeDims::new(num("rows")?, num("cols")?, num("bands")?);
        let wl_text = get("wavelengths")?;
        let parse_f = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| GiscError::Header(format!("bad wavelength {s:?}")))
        };
        let wavelengths = if let Some((start, step)) = wl_text.split_once(':') {
            wavelength_grid(parse_f(start)?, parse_f(step)?, dims.l)
        } else {
            wl_text
                .split(',')
                .map(parse_f)
                .collect::<Result<Vec<_>>>()?
        };
        let interleave = match kv
            .get("interleave")
            .map(|s| s.to_ascii_lowercase())
            .as_deref()
        {
            None | Some("bsq") => Interleave::Bsq,
            Some("bip") => Interleave::Bip,
            Some(other) => return Err(GiscError::Header(format!("unknown interleave {other:?}"))),
        };
        Ok(Self {
            dims,
            wavelengths,
            interleave,
        })
    }
}

pub fn decode_raw_cube(header: &RawHeader, bytes: &[u8]) -> Result<HsiCube> {
    let d = header.dims;
    let n = d
        .checked_len()
        .ok_or_else(|| GiscError::Header(format!("cube {d} overflows")))?;
    if Some(bytes.len()) != n.checked_mul(4) {
        return Err(GiscError::Truncation {
            expected: n * 4,
            found: bytes.len(),
        });
    }
    let samples: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let data = match header.interleave {
        Interleave::Bsq => samples,
        Interleave::Bip => {
            let mut out = vec![0.0; n];
            for px in 0..d.pixels() {
                for b in 0..d.l {
                    out[b * d.pixels() + px] = samples[px * d.l + b];
                }
            }
            out
        }
    };
    HsiCube::new(d, header.wavelengths.clone(), data)
}

/// Reads `data_path` using the sidecar at `header_path`.
pub fn read_raw_cube(
    data_path: impl AsRef<Path>,
    header_path: impl AsRef<Path>,
) -> Result<HsiCube> {
    let (dp, hp) = (data_path.as_ref(), header_path.as_ref());
    let text = fs::read_to_string(hp).map_err(|e| GiscError::io(hp, e))?;
    let bytes = fs::read(dp).map_err(|e| GiscError::io(dp, e))?;
    decode_raw_cube(&RawHeader::parse(&text)?, &bytes)
}
