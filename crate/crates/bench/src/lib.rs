//! Shared fixtures for the benchmarks in `benches/`.

use gisc_core::cube::wavelength_grid;
use gisc_core::scene::synthetic_scene;
use gisc_core::{
    add_noise, calibrate, sense, CubeDims, DetectorDims, DetectorImage, HsiCube, NoiseSpec,
    RngSpec, SensingMatrix, SpeckleSpec,
};

pub struct Fixture {
    pub scene: HsiCube,
    pub phi: SensingMatrix,
    pub y: DetectorImage,
}

/// Scene, 2 px speckle matrix and a 30 dB measurement.
pub fn fixture(dims: CubeDims, detector: DetectorDims, seed: u64) -> Fixture {
    let scene = synthetic_scene(
        dims,
        wavelength_grid(560.0, 10.0, dims.l),
        RngSpec::new(seed, 0),
    )
    .expect("scene");
    let phi = calibrate(dims, detector, &speckle(seed)).expect("calibration");
    let clean = sense(&phi, &scene).expect("sense");
    let y = add_noise(&clean, &NoiseSpec::new(30.0, RngSpec::new(seed, 2))).expect("noise");
    Fixture { scene, phi, y }
}

pub fn speckle(seed: u64) -> SpeckleSpec {
    SpeckleSpec::new(2.0, RngSpec::new(seed, 1))
}
