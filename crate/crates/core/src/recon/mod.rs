//! Classical reconstructions mapping `(Y, Φ)` back to a cube.

mod dgi;
mod prox;
mod step;
mod twist;

pub use dgi::{dgi, dgi_raw};
pub use prox::{soft_threshold, tv_aniso, TvProx};
pub use step::estimate_step;
pub use twist::{twist, twist_solve, Regularizer, TwistConfig, TwistOutcome};

use crate::cube::HsiCube;

/// A reconstructed cube plus solver telemetry.
#[derive(Clone, Debug)]
pub struct ReconResult {
    pub cube: HsiCube,
    pub iterations: usize,
    /// Objective after each iteration; empty for non-iterative methods.
    pub objective_trace: Vec<f64>,
    pub wall_time_s: f64,
}
