//! Dense column-major matrices and the calibrated sensing matrix.

use rayon::prelude::*;

use crate::cube::{CubeDims, DetectorDims};
use crate::error::{GiscError, Result};

const ROW_BLOCK: usize = 256;

/// Dense real matrix stored column-contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| GiscError::Dimension(format!("{rows}x{cols} overflows usize")))?;
        if data.len() != len {
            return Err(GiscError::Dimension(format!(
                "{rows}x{cols} matrix needs {len} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from a closure `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    /// `A x`. Each output row accumulates columns in ascending order, so the
    /// result does not depend on the thread count.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(GiscError::Dimension(format!(
                "matvec: matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.rows];
        y.par_chunks_mut(ROW_BLOCK)
            .enumerate()
            .for_each(|(blk, out)| {
                let r0 = blk * ROW_BLOCK;
                for (j, &xj) in x.iter().enumerate() {
                    let col = &self.data[j * self.rows + r0..j * self.rows + r0 + out.len()];
                    for (o, a) in out.iter_mut().zip(col) {
                        *o += a * xj;
                    }
                }
            });
        Ok(y)
    }

    /// `Aᵀ v`.
    pub fn rmatvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(GiscError::Dimension(format!(
                "rmatvec: matrix has {} rows, vector has {} entries",
                self.rows,
                v.len()
            )));
        }
        Ok(self
            .data
            .par_chunks(self.rows.max(1))
            .map(|col| col.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Row sums `A 1`.
    pub fn row_sums(&self) -> Vec<f64> {
        let ones = vec![1.0; self.cols];
        self.matvec(&ones).expect("length matches by construction")
    }
}

/// Calibrated sensing matrix `Φ`: column `j` is the detector pattern of a unit
/// source at voxel `j` (canonical order).
#[derive(Clone, Debug, PartialEq)]
pub struct SensingMatrix {
    cube: CubeDims,
    detector: DetectorDims,
    inner: DenseMatrix,
}

impl SensingMatrix {
    /// Wraps a dense matrix after checking shape and the column invariants.
    pub fn new(cube: CubeDims, detector: DetectorDims, inner: DenseMatrix) -> Result<Self> {
        if cube.is_empty() || detector.is_empty() {
            return Err(GiscError::Dimension(format!(
                "sensing matrix dims must be nonzero (cube {cube}, detector {detector})"
            )));
        }
        if inner.rows != detector.len() || inner.cols != cube.len() {
            return Err(GiscError::Dimension(format!(
                "matrix is {}x{} but cube {cube} and detector {detector} need {}x{}",
                inner.rows,
                inner.cols,
                detector.len(),
                cube.len()
            )));
        }
        for j in 0..inner.cols {
            let col = inner.column(j);
            if col.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(GiscError::Parameter(format!(
                    "column {j} has a negative or non-finite entry"
                )));
            }
        }
        Ok(Self {
            cube,
            detector,
            inner,
        })
    }

    /// Like [`SensingMatrix::new`] but also requires every column sum to be
    /// strictly positive, as produced by calibration.
    pub fn new_calibrated(
        cube: CubeDims,
        detector: DetectorDims,
        inner: DenseMatrix,
    ) -> Result<Self> {
        let phi = Self::new(cube, detector, inner)?;
        for j in 0..phi.inner.cols {
            if phi.inner.column(j).iter().sum::<f64>() <= 0.0 {
                return Err(GiscError::DegenerateMatrix(format!(
                    "column {j} sums to zero"
                )));
            }
        }
        Ok(phi)
    }

    pub fn cube_dims(&self) -> CubeDims {
        self.cube
    }

    pub fn detector_dims(&self) -> DetectorDims {
        self.detector
    }

    pub fn rows(&self) -> usize {
        self.inner.rows
    }

    pub fn cols(&self) -> usize {
        self.inner.cols
    }

    pub fn dense(&self) -> &DenseMatrix {
        &self.inner
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.inner.column(j)
    }
}
