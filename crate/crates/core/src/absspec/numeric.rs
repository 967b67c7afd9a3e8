use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{closed, pinch, DoubleRoot, DoubleRootKind};
use crate::dispersion::{d_u0, d_u_dnu, d_v, d_v_dnu, d_v_dnu2, roots_u, v_roots_raw, UState};
use crate::error::{Error, Result};
use crate::params::Params;

/// Axis-aligned rectangle in the complex `lambda` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl LambdaBox {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Result<Self> {
        let b = LambdaBox { re, im };
        if ![re.0, re.1, im.0, im.1].iter().all(|x| x.is_finite()) || re.0 > re.1 || im.0 > im.1 {
            return Err(Error::Domain("lambda box must be finite and ordered".into()));
        }
        Ok(b)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1
    }
}

/// Residuals and Jacobian of the 2x2 system defining a double root of `kind`.
fn system(kind: DoubleRootKind, lam: Complex64, nu: Complex64, p: &Params) -> ([Complex64; 2], [[Complex64; 2]; 2]) {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        DoubleRootKind::UBranch => (
            [d_u0(lam, nu, p), d_u_dnu(nu, p)],
            [[-one, d_u_dnu(nu, p)], [zero, Complex64::new(2.0 * p.d, 0.0)]],
        ),
        DoubleRootKind::VBranch => (
            [d_v(lam, nu, p), d_v_dnu(nu, p)],
            [[-one, d_v_dnu(nu, p)], [zero, d_v_dnu2(nu)]],
        ),
        DoubleRootKind::ResonancePole => (
            [d_u0(lam, nu, p), d_v(lam, nu, p)],
            [[-one, d_u_dnu(nu, p)], [-one, d_v_dnu(nu, p)]],
        ),
    }
}

fn newton(kind: DoubleRootKind, mut lam: Complex64, mut nu: Complex64, p: &Params) -> Option<(Complex64, Complex64)> {
    for _ in 0..60 {
        let (f, j) = system(kind, lam, nu, p);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() < 1e-300 || !det.re.is_finite() {
            return None;
        }
        let dl = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dn = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        lam -= dl;
        nu -= dn;
        if !(lam.re.is_finite() && lam.im.is_finite() && nu.re.is_finite() && nu.im.is_finite()) {
            return None;
        }
        if lam.norm() > 1e8 || nu.norm() > 1e4 {
            return None;
        }
        if dl.norm() <= 1e-15 * (1.0 + lam.norm()) && dn.norm() <= 1e-15 * (1.0 + nu.norm()) {
            break;
        }
    }
    let (f, _) = system(kind, lam, nu, p);
    let scale = 1.0 + lam.norm() + nu.norm().powi(4);
    (f[0].norm() <= 1e-9 * scale && f[1].norm() <= 1e-7 * scale).then_some((lam, nu))
}

fn is_simple(kind: DoubleRootKind, nu: Complex64, p: &Params) -> bool {
    match kind {
        DoubleRootKind::UBranch => true,
        DoubleRootKind::VBranch => d_v_dnu2(nu).norm() > 1e-8,
        DoubleRootKind::ResonancePole => (d_u_dnu(nu, p) - d_v_dnu(nu, p)).norm() > 1e-8,
    }
}

/// Double roots and resonance poles inside `bbox` by Newton iteration from a
/// `grid x grid` lattice of seeds.
///
/// At the linear spreading speed every closed-form root inside the box must
/// be recovered; a miss is reported as [`Error::OracleMismatch`].
pub fn double_roots_numeric(p: &Params, bbox: &LambdaBox, grid: usize) -> Result<Vec<DoubleRoot>> {
    let grid = grid.max(2);
    let mut found: Vec<DoubleRoot> = Vec::new();
    for a in 0..grid {
        for b in 0..grid {
            let lam0 = Complex64::new(
                bbox.re.0 + (bbox.re.1 - bbox.re.0) * a as f64 / (grid - 1) as f64,
                bbox.im.0 + (bbox.im.1 - bbox.im.0) * b as f64 / (grid - 1) as f64,
            );
            let (um, up) = roots_u(lam0, p, UState::AtZero);
            let vr = v_roots_raw(lam0, p)?;
            let mut seeds: Vec<(DoubleRootKind, Complex64)> = vec![
                (DoubleRootKind::UBranch, um),
                (DoubleRootKind::UBranch, up),
                (DoubleRootKind::ResonancePole, um),
                (DoubleRootKind::ResonancePole, up),
            ];
            seeds.extend(vr.iter().map(|&z| (DoubleRootKind::VBranch, z)));
            seeds.extend(vr.iter().map(|&z| (DoubleRootKind::ResonancePole, z)));
            for (kind, nu0) in seeds {
                let Some((lam, nu)) = newton(kind, lam0, nu0, p) else { continue };
                if !bbox.contains(lam) {
                    continue;
                }
                let dup = found.iter().any(|d| {
                    d.kind == kind && (d.lambda - lam).norm() <= 1e-7 && (d.nu - nu).norm() <= 1e-7
                });
                if !dup {
                    found.push(DoubleRoot { lambda: lam, nu, kind, pinched: false, simple: is_simple(kind, nu, p) });
                }
            }
        }
    }
    found.sort_by(|x, y| {
        (x.kind as u8)
            .cmp(&(y.kind as u8))
            .then(x.lambda.re.total_cmp(&y.lambda.re))
            .then(x.lambda.im.total_cmp(&y.lambda.im))
    });

    if p.at_critical_speed() {
        for c in closed::double_roots_closed_unflagged(p)? {
            if !bbox.contains(c.lambda) {
                continue;
            }
            let hit = found.iter().any(|d| {
                d.kind == c.kind && (d.lambda - c.lambda).norm() <= 1e-10 * (1.0 + c.lambda.norm())
            });
            if !hit {
                return Err(Error::OracleMismatch(format!(
                    "closed-form {} at lambda = {} not recovered",
                    c.kind.name(),
                    c.lambda
                )));
            }
        }
    }

    let all: Vec<Complex64> = found.iter().map(|d| d.lambda).collect();
    for i in 0..found.len() {
        let others: Vec<Complex64> = all
            .iter()
            .enumerate()
            .filter(|&(j, l)| j != i && (l - found[i].lambda).norm() > 1e-9)
            .map(|(_, &l)| l)
            .collect();
        found[i].pinched = pinch::is_pinched_avoiding(&found[i], p, &others)?;
    }
    Ok(found)
}
