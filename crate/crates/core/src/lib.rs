//! Spectral and dynamical analysis of invasion fronts in a coupled
//! Fisher-KPP / Swift-Hohenberg system
//!
//! ```text
//! u_t = d u_xx + s u_x + alpha u (1 - u^2) + beta sigma(x) v
//! v_t = -(d_xx + 1)^2 v + s v_x + mu v
//! ```
//!
//! written in a frame moving with speed `s`. The crate covers
//!
//! * dispersion relations and their spatial roots ([`dispersion`]),
//! * essential and exponentially weighted spectra ([`spectra`]),
//! * double roots, resonance poles and the absolute spectrum ([`absspec`]),
//! * the stability regions in parameter space ([`regions`]),
//! * closed-form pointwise Green's functions ([`greens`]),
//! * an IMEX finite-difference solver with front diagnostics ([`simulate`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod absspec;
pub mod dispersion;
pub mod error;
pub mod export;
pub mod greens;
pub mod params;
pub mod poly;
pub mod regions;
pub mod simulate;
pub mod spectra;

pub use num_complex::Complex64;

pub use absspec::{AbsSpectrum, DoubleRoot, DoubleRootKind, ShAbs, TriplePoint};
pub use dispersion::{MorseSplit, Relation, UState, VRootSet};
pub use error::{Error, Result};
pub use greens::{G12Case, GreensEval};
pub use params::Params;
pub use regions::{Region, RegionLabel};
pub use simulate::{FrontTrace, SimConfig, SimResult};
pub use spectra::{Boundaries, Component, SpectralCurve};

/// Shorthand for building complex numbers.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
