//! Binary containers, all little-endian with 32-bit float payloads.
//!
//! | file     | magic  | header (u32 unless noted)               | payload                         |
//! |----------|--------|-----------------------------------------|---------------------------------|
//! | cube     | `GSC1` | mx, nx, l, then l × f64 wavelengths (nm) | mx·nx·l × f32, canonical order  |
//! | matrix   | `GSM1` | rows, cols, mx, nx, l, my, ny           | rows·cols × f32, column-major   |
//! | detector | `GSD1` | my, ny                                  | my·ny × f32, row-major          |
//!
//! In memory everything is f64; writing rounds to f32, so a write/read cycle
//! is exact for any value already representable in f32.

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::cube::{CubeDims, DetectorDims, DetectorImage, HsiCube};
use crate::error::{GiscError, Result};
use crate::matrix::{DenseMatrix, SensingMatrix};

pub const CUBE_MAGIC: &[u8; 4] = b"GSC1";
pub const MATRIX_MAGIC: &[u8; 4] = b"GSM1";
pub const DETECTOR_MAGIC: &[u8; 4] = b"GSD1";

fn to_f32(v: f64, what: &str, index: usize) -> Result<f32> {
    let f = v as f32;
    if !f.is_finite() {
        return Err(GiscError::Parameter(format!(
            "{what} sample {index} ({v}) does not fit in f32"
        )));
    }
    Ok(f)
}

fn dim_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| GiscError::Header(format!("{what} = {v} exceeds u32")))
}

fn put_samples(buf: &mut Vec<u8>, data: &[f64], what: &str) -> Result<()> {
    buf.reserve(data.len() * 4);
    for (i, &v) in data.iter().enumerate() {
        buf.write_f32::<LittleEndian>(to_f32(v, what, i)?)
            .expect("vec write");
    }
    Ok(())
}

struct Reader<'a> {
    cur: Cursor<&'a [u8]>,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8], magic: &[u8; 4]) -> Result<Self> {
        let mut found = [0u8; 4];
        let n = bytes.len().min(4);
        found[..n].copy_from_slice(&bytes[..n]);
        if n < 4 || &found != magic {
            return Err(GiscError::Format {
                expected: String::from_utf8_lossy(magic).into_owned(),
                found: String::from_utf8_lossy(&found[..n]).into_owned(),
            });
        }
        let mut cur = Cursor::new(bytes);
        cur.set_position(4);
        Ok(Self { cur })
    }

    fn remaining(&self) -> usize {
        self.cur.get_ref().len() - self.cur.position() as usize
    }

    fn need(&self, bytes: usize) -> Result<()> {
        let have = self.remaining();
        if have < bytes {
            return Err(GiscError::Truncation {
                expected: self.cur.position() as usize + bytes,
                found: self.cur.get_ref().len(),
            });
        }
        Ok(())
    }

    fn u32s<const N: usize>(&mut self) -> Result<[usize; N]> {
        self.need(4 * N)?;
        let mut out = [0usize; N];
        for v in out.iter_mut() {
            *v = self.cur.read_u32::<LittleEndian>().expect("length checked") as usize;
        }
        Ok(out)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = n
            .checked_mul(8)
            .ok_or_else(|| GiscError::Header("count overflows".into()))?;
        self.need(bytes)?;
        Ok((0..n)
            .map(|_| self.cur.read_f64::<LittleEndian>().expect("length checked"))
            .collect())
    }

    /// Reads exactly `n` f32 samples, which must end the file.
    fn samples_to_end(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = n
            .checked_mul(4)
            .ok_or_else(|| GiscError::Header("payload size overflows".into()))?;
        let have = self.remaining();
        if have != bytes {
            return Err(GiscError::Truncation {
                expected: self.cur.position() as usize + bytes,
                found: self.cur.get_ref().len(),
            });
        }
        let mut raw = vec![0u8; bytes];
        self.cur.read_exact(&mut raw).expect("length checked");
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect())
    }
}

fn checked_product(parts: &[usize], what: &str) -> Result<usize> {
    parts
        .iter()
        .try_fold(1usize, |acc, &p| acc.checked_mul(p))
        .ok_or_else(|| GiscError::Header(format!("{what} dimensions {parts:?} overflow")))
}

pub fn encode_cube(cube: &HsiCube) -> Result<Vec<u8>> {
    let d = cube.dims();
    let mut buf = Vec::with_capacity(16 + 8 * d.l + 4 * d.len());
    buf.extend_from_slice(CUBE_MAGIC);
    for (v, name) in [(d.mx, "mx"), (d.nx, "nx"), (d.l, "l")] {
        buf.write_u32::<LittleEndian>(dim_u32(v, name)?)
            .expect("vec write");
    }
    for &w in cube.wavelengths() {
        buf.write_f64::<LittleEndian>(w).expect("vec write");
    }
    put_samples(&mut buf, cube.as_slice(), "cube")?;
    Ok(buf)
}

pub fn decode_cube(bytes: &[u8]) -> Result<HsiCube> {
    let mut r = Reader::new(bytes, CUBE_MAGIC)?;
    let [mx, nx, l] = r.u32s::<3>()?;
    let n = checked_product(&[mx, nx, l], "cube")?;
    let wavelengths = r.f64s(l)?;
    let data = r.samples_to_end(n)?;
    HsiCube::new(CubeDims::new(mx, nx, l), wavelengths, data)
}

pub fn encode_matrix(phi: &SensingMatrix) -> Result<Vec<u8>> {
    let (c, d) = (phi.cube_dims(), phi.detector_dims());
    let mut buf = Vec::with_capacity(32 + 4 * phi.rows() * phi.cols());
    buf.extend_from_slice(MATRIX_MAGIC);
    for (v, name) in [
        (phi.rows(), "rows"),
        (phi.cols(), "cols"),
        (c.mx, "mx"),
        (c.nx, "nx"),
        (c.l, "l"),
        (d.my, "my"),
        (d.ny, "ny"),
    ] {
        buf.write_u32::<LittleEndian>(dim_u32(v, name)?)
            .expect("vec write");
    }
    put_samples(&mut buf, phi.dense().as_slice(), "matrix")?;
    Ok(buf)
}

pub fn decode_matrix(bytes: &[u8]) -> Result<SensingMatrix> {
    let mut r = Reader::new(bytes, MATRIX_MAGIC)?;
    let [rows, cols, mx, nx, l, my, ny] = r.u32s::<7>()?;
    let n = checked_product(&[rows, cols], "matrix")?;
    if Some(rows) != my.checked_mul(ny) || Some(cols) != checked_product(&[mx, nx, l], "cube").ok()
    {
        return Err(GiscError::Header(format!(
            "matrix {rows}x{cols} inconsistent with cube {mx}x{nx}x{l} and detector {my}x{ny}"
        )));
    }
    let data = r.samples_to_end(n)?;
    SensingMatrix::new(
        CubeDims::new(mx, nx, l),
        DetectorDims::new(my, ny),
        DenseMatrix::from_col_major(rows, cols, data)?,
    )
}

pub fn encode_detector(y: &DetectorImage) -> Result<Vec<u8>> {
    let d = y.dims();
    let mut buf = Vec::with_capacity(12 + 4 * d.len());
    buf.extend_from_slice(DETECTOR_MAGIC);
    buf.write_u32::<LittleEndian>(dim_u32(d.my, "my")?)
        .expect("vec write");
    buf.write_u32::<LittleEndian>(dim_u32(d.ny, "ny")?)
        .expect("vec write");
    put_samples(&mut buf, y.as_slice(), "detector")?;
    Ok(buf)
}

pub fn decode_detector(bytes: &[u8]) -> Result<DetectorImage> {
    let mut r = Reader::new(bytes, DETECTOR_MAGIC)?;
    let [my, ny] = r.u32s::<2>()?;
    let n = checked_product(&[my, ny], "detector")?;
    let data = r.samples_to_end(n)?;
    DetectorImage::new(DetectorDims::new(my, ny), data)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| GiscError::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| GiscError::io(path, e))
}

pub fn write_cube(path: impl AsRef<Path>, cube: &HsiCube) -> Result<()> {
    write_file(path.as_ref(), &encode_cube(cube)?)
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<HsiCube> {
    decode_cube(&read_file(path.as_ref())?)
}

pub fn write_matrix(path: impl AsRef<Path>, phi: &SensingMatrix) -> Result<()> {
    write_file(path.as_ref(), &encode_matrix(phi)?)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<SensingMatrix> {
    decode_matrix(&read_file(path.as_ref())?)
}

pub fn write_detector(path: impl AsRef<Path>, y: &DetectorImage) -> Result<()> {
    write_file(path.as_ref(), &encode_detector(y)?)
}

pub fn read_detector(path: impl AsRef<Path>) -> Result<DetectorImage> {
    decode_detector(&read_file(path.as_ref())?)
}
