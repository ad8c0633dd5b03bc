//! Desk-scale pipeline study: synthetic scenes, calibration, noisy sensing,
//! and both classical reconstructions across SNRs and regularization weights.
//!
//! cargo run --release -p gisc-core --example end_to_end -- <seeds> <lambdas> [shapes]
//! e.g. `-- 0,1,2 1000,3000 7`

use gisc_core::cube::wavelength_grid;
use gisc_core::forward::{
    add_noise, calibrate, sense, NoiseSpec, SpeckleSpec, SNR_LOW_DB, SNR_TRAINING_DB,
};
use gisc_core::metrics::psnr;
use gisc_core::recon::{dgi, twist, Regularizer, TwistConfig};
use gisc_core::scene::{synthetic_scene, synthetic_scene_with};
use gisc_core::{CubeDims, DetectorDims, RngSpec};

fn list<T: std::str::FromStr>(s: Option<&String>, default: &str) -> Vec<T>
where
    T::Err: std::fmt::Debug,
{
    s.map(String::as_str)
        .unwrap_or(default)
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect()
}

fn main() -> gisc_core::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seeds: Vec<u64> = list(args.get(1), "0");
    let lambdas: Vec<f64> = list(args.get(2), "3000");
    let shapes: Option<usize> = args.get(3).map(|s| s.parse().unwrap());
    let dims = CubeDims::new(16, 16, 5);
    let wl = wavelength_grid(560.0, 35.0, 5);
    println!("seed  snr  dgi_psnr  lambda  twist_psnr  iters");
    for &seed in &seeds {
        let scene = match shapes {
            Some(n) => synthetic_scene_with(dims, wl.clone(), RngSpec::new(seed, 0), n)?,
            None => synthetic_scene(dims, wl.clone(), RngSpec::new(seed, 0))?,
        };
        let phi = calibrate(
            dims,
            DetectorDims::new(64, 64),
            &SpeckleSpec::new(2.0, RngSpec::new(seed, 1 << 32)),
        )?;
        let clean = sense(&phi, &scene)?;
        for snr in [SNR_TRAINING_DB, SNR_LOW_DB] {
            let y = add_noise(&clean, &NoiseSpec::new(snr, RngSpec::new(seed, 2 << 32)))?;
            let c = clean.as_slice();
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            let fluct = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / c.len() as f64;
            let noise_var = clean.mean_power() / 10f64.powf(snr / 10.0);
            println!(
                "# fluctuation-to-noise {:.2} dB",
                10.0 * (fluct / noise_var).log10()
            );
            let d = dgi(&y, &phi)?.cube.with_wavelengths(wl.clone())?;
            let dp = psnr(&scene, &d, 1.0)?;
            for &lambda in &lambdas {
                let cfg = TwistConfig {
                    lambda_reg: lambda,
                    regularizer: Regularizer::TvPerBand,
                    max_iters: 2000,
                    tol: 1e-7,
                    ..TwistConfig::default()
                };
                let t = twist(&y, &phi, &cfg)?;
                let tp = psnr(&scene, &t.cube.with_wavelengths(wl.clone())?, 1.0)?;
                println!(
                    "{seed:4}  {snr:3}  {dp:8.3}  {lambda:6}  {tp:10.3}  {}",
                    t.iterations
                );
            }
        }
    }
    Ok(())
}
