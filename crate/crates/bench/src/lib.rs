//! Shared fixtures for the benchmarks.

use frontlab_core::simulate::Coupling;
use frontlab_core::{Params, SimConfig};

/// The three unstable parameter sets used throughout the benchmarks.
pub const CASES: [(f64, f64, f64); 3] = [(1.0, 1.0, -1.0), (1.0, 1.0, -0.5), (0.5, 2.0, -1.0)];

pub fn critical(d: f64, alpha: f64, mu: f64) -> Params {
    Params::critical(d, alpha, mu, 1.0).expect("benchmark parameters are valid")
}

/// Short cosine-coupled run on a domain of `2 half_length`.
pub fn short_run(half_length: f64, t_final: f64) -> SimConfig {
    SimConfig {
        params: critical(1.0, 1.0, -0.5),
        half_length,
        t_final,
        coupling: Coupling::Cosine { ell: 1.4791 },
        ..SimConfig::default()
    }
}
