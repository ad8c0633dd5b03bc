//! Simulation and classical reconstruction for a speckle-encoded snapshot
//! spectral camera.
//!
//! A hyperspectral cube `x(m, n, λ)` is flattened band-major into `X`; a
//! calibrated matrix `Φ` holds one speckle pattern per voxel, and one detector
//! frame is `Y = ΦX + ε`. The crate builds `Φ`, senses cubes, recovers them
//! with differential ghost imaging or TwIST, and scores the result.

pub mod cube;
pub mod dataio;
pub mod error;
pub mod forward;
pub mod matrix;
pub mod metrics;
pub mod recon;
pub mod rng;
pub mod scene;

pub use cube::{
    canonical_index, devectorize, vectorize, CubeDims, DetectorDims, DetectorImage, HsiCube,
};
pub use error::{GiscError, Result};
pub use forward::{add_noise, calibrate, sense, NoiseSpec, SpeckleSpec};
pub use matrix::{DenseMatrix, SensingMatrix};
pub use metrics::{composite_loss, psnr, sam, ssim, LossWeights, MetricsReport};
pub use recon::{dgi, estimate_step, twist, ReconResult, Regularizer, TwistConfig};
pub use rng::RngSpec;
