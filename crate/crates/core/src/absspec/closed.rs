use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{members_near, pinch, DoubleRoot, DoubleRootKind, TriplePoint};
use crate::dispersion::{d_u_dnu, d_v_dnu, d_v_dnu2, sorted_roots, Relation};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::poly;
use crate::spectra::region_boundaries;

/// Bisection of a sign change of `f` on `[a, b]` down to machine precision.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Real root of the increasing cubic `a3 x^3 + a1 x + a0` with `a3, a1 > 0`.
fn increasing_cubic_root(a3: f64, a1: f64, a0: f64) -> f64 {
    let f = |x: f64| (a3 * x * x + a1) * x + a0;
    let r = 1.0 + (a0 / a1).abs() + (a0.abs() / a3).cbrt();
    bisect(f, -r, r)
}

fn lambda_on_v(nu: Complex64, p: &Params) -> Complex64 {
    let q = nu * nu + 1.0;
    -q * q + p.s * nu + p.mu
}

/// Roots of `4 nu^3 + 4 nu - s`, the v-double-root condition.
fn v_double_root_nus(p: &Params) -> Result<Vec<Complex64>> {
    let c = [Complex64::new(-p.s, 0.0), Complex64::new(4.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(4.0, 0.0)];
    poly::roots(&c)
}

/// The v-branch point `(lambda, nu)` with nonnegative `Im lambda`.
pub fn v_branch_point(p: &Params) -> Result<(Complex64, Complex64)> {
    let nus = v_double_root_nus(p)?;
    let best = nus
        .into_iter()
        .map(|nu| (lambda_on_v(nu, p), nu))
        .max_by(|a, b| a.0.im.total_cmp(&b.0.im))
        .expect("cubic has three roots");
    Ok(best)
}

/// Coefficient `zeta` of the square-root expansion at the v-branch point.
pub fn zeta(p: &Params) -> Result<Complex64> {
    let (_, nu) = v_branch_point(p)?;
    let direct = -1.0 / (6.0 * nu * nu + 2.0);
    // -2 dD/dlambda / d2D/dnu2 with dD/dlambda = -1
    let ratio = 2.0 / d_v_dnu2(nu);
    if (direct - ratio).norm() > 1e-10 * direct.norm().max(1.0) {
        return Err(Error::Consistency(format!("zeta forms disagree: {direct} vs {ratio}")));
    }
    Ok(direct)
}

/// Closed-form double roots and resonance poles at the linear spreading speed,
/// with pinching flags.
///
/// Order: u-branch point, the conjugate v-branch pair (upper first), the real
/// v-double root, then the resonance poles with `nu = -sqrt(.)` for `+C` and
/// `-C`, followed by those with `nu = +sqrt(.)`.
pub fn double_roots_closed(p: &Params) -> Result<Vec<DoubleRoot>> {
    let mut out = double_roots_closed_unflagged(p)?;
    let all: Vec<Complex64> = out.iter().map(|d| d.lambda).collect();
    for i in 0..out.len() {
        let others: Vec<Complex64> =
            all.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &l)| l).collect();
        out[i].pinched = pinch::is_pinched_avoiding(&out[i], p, &others)?;
    }
    Ok(out)
}

pub(crate) fn double_roots_closed_unflagged(p: &Params) -> Result<Vec<DoubleRoot>> {
    p.require_critical("closed-form double roots")?;
    let (d, a, mu) = (p.d, p.alpha, p.mu);
    let i = Complex64::new(0.0, 1.0);
    let r3 = 3f64.sqrt();
    let q = a * d;
    let c3 = (64.0 + 54.0 * q * (40.0 - 27.0 * q) + 6.0 * r3 * (q * (16.0 + 27.0 * q).powi(3)).sqrt()).cbrt();
    let lin = (27.0 * q - 2.0) / (3.0 * c3);
    let base = Complex64::new(mu - 1.0 / 3.0, 0.0);
    let l2 = base + (i * r3 - 1.0) * lin + (1.0 + i * r3) * c3 / 24.0;
    let l3 = base - (i * r3 + 1.0) * lin + (1.0 - i * r3) * c3 / 24.0;
    let l4 = base + 2.0 * lin - c3 / 12.0;

    let nus = v_double_root_nus(p)?;
    let nu_for = |lam: Complex64| {
        *nus.iter()
            .min_by(|x, y| (lambda_on_v(**x, p) - lam).norm().total_cmp(&(lambda_on_v(**y, p) - lam).norm()))
            .expect("three roots")
    };

    let mut out = Vec::with_capacity(8);
    let u_nu = Complex64::new(-(a / d).sqrt(), 0.0);
    out.push(DoubleRoot { lambda: Complex64::new(0.0, 0.0), nu: u_nu, kind: DoubleRootKind::UBranch, pinched: false, simple: true });
    for lam in [l2, l3, l4] {
        let nu = nu_for(lam);
        out.push(DoubleRoot {
            lambda: lam,
            nu,
            kind: DoubleRootKind::VBranch,
            pinched: false,
            simple: d_v_dnu2(nu).norm() > 1e-8,
        });
    }

    // resonance poles: nu^2 = -1 - d/2 +- C with C^2 = mu + d - alpha + d^2/4
    let c4 = Complex64::new(mu + d - a + d * d / 4.0, 0.0).sqrt();
    for outer in [-1.0, 1.0] {
        for inner in [1.0, -1.0] {
            let x = Complex64::new(-1.0 - d / 2.0, 0.0) + inner * c4;
            let nu = outer * x.sqrt();
            let lam = a + d * x + 2.0 * q.sqrt() * nu;
            let jac = d_u_dnu(nu, p) - d_v_dnu(nu, p);
            out.push(DoubleRoot {
                lambda: lam,
                nu,
                kind: DoubleRootKind::ResonancePole,
                pinched: false,
                simple: jac.norm() > 1e-8,
            });
        }
    }
    Ok(out)
}

/// Closed forms for the absolute spectrum of the Swift-Hohenberg part alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShAbs {
    pub s: f64,
    pub mu: f64,
    /// Weight at which three v-roots share their real part.
    pub eta_tr: f64,
    pub lambda_tr: f64,
    /// Same triple point from the radical expression in `s` alone.
    pub lambda_tr_radical: f64,
    pub eta_dr: f64,
    /// Pinched double roots, upper half-plane first.
    pub lambda_dr: [Complex64; 2],
}

impl ShAbs {
    /// Point of the complex branch joining the triple point (`eta = eta_tr`)
    /// to the upper double root (`eta = eta_dr`); the lower branch is its
    /// conjugate.
    pub fn branch(&self, eta: f64) -> Result<Complex64> {
        let lo = self.eta_tr.min(self.eta_dr);
        let hi = self.eta_tr.max(self.eta_dr);
        if !(eta >= lo - 1e-12 && eta <= hi + 1e-12) {
            return Err(Error::Range(format!("branch weight {eta} outside [{lo}, {hi}]")));
        }
        let s = self.s;
        let e2 = eta * eta;
        let e3 = e2 * eta;
        let rad = (-(8.0 * e3 + s) * (32.0 * e3 + 8.0 * eta + s)).max(0.0).sqrt();
        let kappa = (12.0 * e2 + 4.0 - rad / eta).max(0.0).sqrt();
        let re = 24.0 * e2 * e2 + 8.0 * e2 + 3.5 * s * eta + self.mu + (8.0 * s * eta + s * s) / (16.0 * e2);
        let im = (-4.0 * e3 - s / 2.0 + rad / 2.0) * kappa;
        Ok(Complex64::new(re, -im))
    }

    /// `n` samples of the upper branch, uniform in the weight.
    pub fn sample_branch(&self, n: usize) -> Result<Vec<(f64, Complex64)>> {
        let n = n.max(2);
        (0..n)
            .map(|j| {
                let t = j as f64 / (n - 1) as f64;
                let eta = if j == n - 1 { self.eta_dr } else { self.eta_tr + t * (self.eta_dr - self.eta_tr) };
                self.branch(eta).map(|l| (eta, l))
            })
            .collect()
    }
}

pub fn sh_abs_closed(p: &Params) -> Result<ShAbs> {
    let (s, mu) = (p.s, p.mu);
    if !(s > 0.0) {
        return Err(Error::Domain("Swift-Hohenberg closed forms need s > 0".into()));
    }
    if !(mu < 0.0) {
        return Err(Error::Domain("Swift-Hohenberg closed forms need mu < 0".into()));
    }
    let eta_tr = increasing_cubic_root(20.0, 4.0, s);
    let e2 = eta_tr * eta_tr;
    let lambda_tr = -e2 * e2 - 2.0 * e2 + s * eta_tr - 1.0 + mu;

    let c1 = (-45.0 * s + (960.0 + 2025.0 * s * s).sqrt()).cbrt();
    let big_a = -4.0 * 225f64.cbrt() + 15f64.cbrt() * c1 * c1;
    let lambda_tr_radical = mu - 1.0 + s * big_a / (30.0 * c1) - big_a.powi(2) / (450.0 * c1 * c1)
        - big_a.powi(4) / (810000.0 * c1.powi(4));
    if (lambda_tr - lambda_tr_radical).abs() > 1e-9 * lambda_tr.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "triple point forms disagree: {lambda_tr} vs {lambda_tr_radical}"
        )));
    }

    let eta_dr = increasing_cubic_root(32.0, 8.0, s);

    let i = Complex64::new(0.0, 1.0);
    let r3 = 3f64.sqrt();
    let s2 = s * s;
    let c2 = (512.0 + 4320.0 * s2 - 729.0 * s2 * s2 + 3.0 * r3 * (s2 * (64.0 + 27.0 * s2).powi(3)).sqrt()).cbrt();
    let lin = (27.0 * s2 - 8.0) / (6.0 * c2);
    let base = Complex64::new(mu - 1.0 / 3.0, 0.0);
    let upper = base + (i * r3 - 1.0) * lin + (1.0 + i * r3) * c2 / 48.0;
    let lower = upper.conj();

    Ok(ShAbs { s, mu, eta_tr, lambda_tr, lambda_tr_radical, eta_dr, lambda_dr: [upper, lower] })
}

/// Real part mismatch between the v-mode at its extremal wavenumber and the
/// u-mode at zero wavenumber, as a function of the weight.
pub fn psi(eta: f64, p: &Params) -> f64 {
    let (d, a) = (p.d, p.alpha);
    let e2 = eta * eta;
    4.0 * e2 * e2 + (4.0 - d) * e2 - 2.0 * (a * d).sqrt() * eta + p.mu - a - a * d / (4.0 * e2)
}

/// Triple point where the u-root at zero wavenumber meets a conjugate pair of
/// v-roots.
pub fn full_triple_point(p: &Params) -> Result<TriplePoint> {
    p.require_critical("triple point")?;
    if !(p.mu < 0.0) {
        return Err(Error::NoTriplePoint("mu must be negative".into()));
    }
    let b = region_boundaries(p.alpha, p.d)?;
    let eta_star = p.eta_star();
    let at_star = psi(eta_star, p);
    let eta_tr = if at_star.abs() <= 1e-14 * (1.0 + p.mu.abs()) || p.mu == b.mu_abs0 {
        eta_star
    } else if at_star < 0.0 {
        return Err(Error::NoTriplePoint(format!(
            "mu = {} is below the absolute-instability boundary {}",
            p.mu, b.mu_abs0
        )));
    } else {
        let mut hi = 0.5 * eta_star;
        while psi(hi, p) >= 0.0 {
            hi *= 0.5;
            if hi.abs() < 1e-300 {
                return Err(Error::NoTriplePoint("no sign change on (eta_star, 0)".into()));
            }
        }
        bisect(|e| psi(e, p), eta_star, hi)
    };
    let root = p.d.sqrt() * eta_tr + p.alpha.sqrt();
    let lambda = Complex64::new(root * root, 0.0);
    let sorted = sorted_roots(Relation::Full, lambda, p)?;
    let mut near = members_near(&sorted, eta_tr, 1e-7);
    if near.len() != 3 {
        near = (0..6).collect();
        near.sort_by(|&x, &y| (sorted[x].re - eta_tr).abs().total_cmp(&(sorted[y].re - eta_tr).abs()));
        near.truncate(3);
        near.sort();
    }
    Ok(TriplePoint { lambda, eta: eta_tr, members: [near[0], near[1], near[2]] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::dispersion::{d_u0, d_v, morse_split_tol};

    fn crit(d: f64, a: f64, mu: f64) -> Params {
        Params::critical(d, a, mu, 1.0).unwrap()
    }

    #[test]
    fn closed_forms_solve_their_systems() {
        for (d, a, mu) in [(1.0, 1.0, -0.5), (0.5, 2.0, -1.0), (2.0, 0.3, -4.0)] {
            let p = crit(d, a, mu);
            for dr in double_roots_closed_unflagged(&p).unwrap() {
                let scale = 1.0 + dr.lambda.norm() + dr.nu.norm().powi(4);
                match dr.kind {
                    DoubleRootKind::UBranch => {
                        assert!(d_u0(dr.lambda, dr.nu, &p).norm() < 1e-12 * scale);
                        assert!(d_u_dnu(dr.nu, &p).norm() < 1e-12 * scale);
                    }
                    DoubleRootKind::VBranch => {
                        assert!(d_v(dr.lambda, dr.nu, &p).norm() < 1e-9 * scale);
                        assert!(d_v_dnu(dr.nu, &p).norm() < 1e-9 * scale);
                    }
                    DoubleRootKind::ResonancePole => {
                        assert!(d_u0(dr.lambda, dr.nu, &p).norm() < 1e-9 * scale);
                        assert!(d_v(dr.lambda, dr.nu, &p).norm() < 1e-9 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn u_branch_point_is_zero() {
        let dr = double_roots_closed(&crit(1.3, 0.7, -2.0)).unwrap();
        assert_eq!(dr[0].lambda, c64(0.0, 0.0));
        assert!(dr[0].pinched);
    }

    #[test]
    fn resonance_pole_examples() {
        let dr = double_roots_closed(&crit(1.0, 1.0, -0.5)).unwrap();
        assert!((dr[4].lambda.re + 0.902838).abs() < 1e-6);
        assert!((dr[5].lambda.re + 0.902838).abs() < 1e-6);
        let dr = double_roots_closed(&crit(0.5, 2.0, -1.0)).unwrap();
        assert!((dr[4].lambda.re - 0.150255).abs() < 1e-6);
        assert!(dr[4].pinched && dr[5].pinched);
        for r in &dr[6..] {
            if r.lambda.re >= 0.0 {
                assert!(!r.pinched);
            }
        }
    }

    #[test]
    fn v_branch_pair_is_pinched_and_conjugate() {
        let dr = double_roots_closed(&crit(1.0, 1.0, -1.0)).unwrap();
        assert!((dr[1].lambda - dr[2].lambda.conj()).norm() < 1e-12);
        assert!(dr[1].pinched && dr[2].pinched);
        assert!(dr[1].lambda.re < 0.0);
    }

    #[test]
    fn zeta_examples() {
        for (d, a, mu) in [(1.0, 1.0, -1.0), (0.5, 2.0, -1.0), (3.0, 0.2, -0.1)] {
            let z = zeta(&crit(d, a, mu)).unwrap();
            assert!(z.re > 0.0);
        }
        let p = crit(1.0, 1.0, -1.0);
        let (lam, nu) = v_branch_point(&p).unwrap();
        assert!(lam.im > 0.0);
        let other = -1.0 / (6.0 * nu.conj() * nu.conj() + 2.0);
        assert!((other - zeta(&p).unwrap().conj()).norm() < 1e-14);
    }

    #[test]
    fn sh_caption_values() {
        let p = Params::new(1.0, 1.0, -0.5, 1.0, 0.5).unwrap();
        let sh = sh_abs_closed(&p).unwrap();
        assert!((sh.lambda_tr + 1.586).abs() < 2e-3);
        assert!((sh.eta_tr + 0.117).abs() < 2e-3);
        let sh = sh_abs_closed(&p.with_s(10.0)).unwrap();
        assert!((sh.lambda_tr + 9.863).abs() < 2e-3);
        assert!((sh.eta_tr + 0.7101).abs() < 2e-3);
        let sh = sh_abs_closed(&p.with_s(2.0)).unwrap();
        assert!((sh.eta_dr + 0.2119269).abs() < 1e-6);
        assert!((20.0 * sh.eta_tr.powi(3) + 4.0 * sh.eta_tr + 2.0).abs() < 1e-10);
        assert!(sh_abs_closed(&p.with_s(0.0)).is_err());
    }

    #[test]
    fn sh_branch_endpoints_and_monotonicity() {
        for s in [0.5, 2.0, 10.0] {
            let p = Params::new(1.0, 1.0, -0.5, 1.0, s).unwrap();
            let sh = sh_abs_closed(&p).unwrap();
            let start = sh.branch(sh.eta_tr).unwrap();
            let end = sh.branch(sh.eta_dr).unwrap();
            assert!((start - c64(sh.lambda_tr, 0.0)).norm() < 1e-6);
            assert!((end - sh.lambda_dr[0]).norm() < 1e-6);
            let pts = sh.sample_branch(100).unwrap();
            for w in pts.windows(2) {
                assert!(w[1].1.re > w[0].1.re);
            }
        }
    }

    #[test]
    fn triple_point_examples() {
        let b = region_boundaries(1.0, 1.0).unwrap();
        let p = crit(1.0, 1.0, b.mu_abs0);
        assert!((psi(p.eta_star(), &p)).abs() < 1e-12);
        let tp = full_triple_point(&p).unwrap();
        assert_eq!(tp.eta, -1.0);
        assert_eq!(tp.lambda, c64(0.0, 0.0));

        let p = crit(1.0, 1.0, -1.0);
        assert!((psi(-1.0, &p) - (p.mu - b.mu_abs0)).abs() < 1e-12);
        let tp = full_triple_point(&p).unwrap();
        assert!(tp.lambda.re > 0.0);
        assert!((tp.lambda.re - 0.167432).abs() < 1e-5);
        assert!(morse_split_tol(tp.lambda, &p, 1e-7).unwrap().in_abs);
        assert!(matches!(full_triple_point(&crit(1.0, 1.0, -9.0)), Err(Error::NoTriplePoint(_))));
    }
}
