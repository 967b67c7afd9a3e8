//! Absolute spectrum of the asymptotic operator at the invaded state:
//! double roots and resonance poles, pinching, triple points, the
//! Swift-Hohenberg closed forms, curve tracing and the absolute spreading
//! speed.

mod closed;
mod numeric;
mod pinch;
mod trace;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use closed::{double_roots_closed, full_triple_point, psi, sh_abs_closed, v_branch_point, zeta, ShAbs};
pub use numeric::{double_roots_numeric, LambdaBox};
pub use pinch::{is_pinched, is_pinched_avoiding};
pub use trace::{
    max_re_at, pair_straddles, s_abs, s_abs_with, trace_abs_spectrum, trace_with, AbsBranch, AbsPoint, Family,
    TraceOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DoubleRootKind {
    /// Collision of the two u-roots.
    UBranch,
    /// Collision of two v-roots.
    VBranch,
    /// A u-root meeting a v-root.
    ResonancePole,
}

impl DoubleRootKind {
    pub fn name(self) -> &'static str {
        match self {
            DoubleRootKind::UBranch => "u_branch",
            DoubleRootKind::VBranch => "v_branch",
            DoubleRootKind::ResonancePole => "resonance_pole",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleRoot {
    pub lambda: Complex64,
    pub nu: Complex64,
    pub kind: DoubleRootKind,
    pub pinched: bool,
    /// Nondegenerate: the defining 2x2 system has an invertible Jacobian.
    pub simple: bool,
}

/// Point where three spatial roots share their real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriplePoint {
    pub lambda: Complex64,
    pub eta: f64,
    /// Indices into the real-part-sorted list of six roots.
    pub members: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SingularPoint {
    DoubleRoot(DoubleRoot),
    TriplePoint(TriplePoint),
}

impl SingularPoint {
    pub fn lambda(&self) -> Complex64 {
        match self {
            SingularPoint::DoubleRoot(d) => d.lambda,
            SingularPoint::TriplePoint(t) => t.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsSpectrum {
    /// Frame speed the spectrum was computed at.
    pub s: f64,
    pub curves: Vec<AbsBranch>,
    pub singular_points: Vec<SingularPoint>,
    pub max_re: f64,
    /// Point of the spectrum attaining `max_re`, with its equal-real-part pair.
    pub argmax: AbsPoint,
    pub argmax_family: Family,
    /// Set when the wavenumber window hit its cap before all branches left
    /// the region of interest.
    pub truncated: bool,
}

/// Members of the sorted six-root list whose real part lies within `tol` of `eta`.
pub(crate) fn members_near(sorted: &[Complex64], eta: f64, tol: f64) -> Vec<usize> {
    sorted
        .iter()
        .enumerate()
        .filter(|(_, z)| (z.re - eta).abs() <= tol)
        .map(|(i, _)| i)
        .collect()
}
