//! Essential and exponentially weighted essential spectra of the asymptotic
//! operators at the invaded state, and the closed-form region boundaries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    U,
    V,
}

impl Component {
    pub fn name(self) -> &'static str {
        match self {
            Component::U => "U",
            Component::V => "V",
        }
    }
}

/// Sampled curve `k -> lambda(k)` of a weighted essential spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub component: Component,
    pub eta: f64,
    pub samples: Vec<(f64, Complex64)>,
}

/// `lambda` such that `D_u^0(lambda, eta + ik) = 0`.
pub fn sigma_u(k: f64, eta: f64, p: &Params) -> Complex64 {
    let (d, s, a) = (p.d, p.s, p.alpha);
    Complex64::new(-d * k * k + d * eta * eta + s * eta + a, (s + 2.0 * d * eta) * k)
}

/// `lambda` such that `D_v(lambda, eta + ik) = 0`.
pub fn sigma_v(k: f64, eta: f64, p: &Params) -> Complex64 {
    let s = p.s;
    let e2 = eta * eta;
    let q = 1.0 + e2;
    let re = -k.powi(4) + (2.0 + 6.0 * e2) * k * k - q * q + s * eta + p.mu;
    let im = 4.0 * eta * k.powi(3) + (s - 4.0 * eta.powi(3) - 4.0 * eta) * k;
    Complex64::new(re, im)
}

pub fn sigma(component: Component, k: f64, eta: f64, p: &Params) -> Complex64 {
    match component {
        Component::U => sigma_u(k, eta, p),
        Component::V => sigma_v(k, eta, p),
    }
}

/// Default half-width of the wavenumber window for [`ess_curve`].
pub fn default_k_max(eta: f64) -> f64 {
    4.0 * (3.0 * eta * eta + 1.0).sqrt() + 2.0
}

pub const DEFAULT_CURVE_POINTS: usize = 2001;

/// `n` uniform samples on `[-k_max, k_max]`.
pub fn ess_curve(component: Component, eta: f64, k_max: f64, n: usize, p: &Params) -> Result<SpectralCurve> {
    if n < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    if !(k_max > 0.0) || !k_max.is_finite() {
        return Err(Error::Domain("k_max must be positive".into()));
    }
    let samples = (0..n)
        .map(|i| {
            // symmetric construction keeps k(-i) = -k(i) bit-exactly
            let j = 2 * i as i64 - (n as i64 - 1);
            let k = k_max * j as f64 / (n - 1) as f64;
            (k, sigma(component, k, eta, p))
        })
        .collect();
    Ok(SpectralCurve { component, eta, samples })
}

/// Largest real part along the weighted spectral curve.
pub fn max_growth(component: Component, eta: f64, p: &Params) -> f64 {
    match component {
        Component::U => p.d * eta * eta + p.s * eta + p.alpha,
        Component::V => 8.0 * eta.powi(4) + 4.0 * eta * eta + p.s * eta + p.mu,
    }
}

/// Parameter values of `mu` separating the stability regions at `s = s_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    /// Onset of remnant instability.
    pub mu_rem: f64,
    /// Onset of unstable absolute spectrum.
    pub mu_abs0: f64,
    /// Onset of an unstable pinched resonance pole, when `alpha > d + d^2/2`.
    pub mu_pw: Option<f64>,
}

pub fn region_boundaries(alpha: f64, d: f64) -> Result<Boundaries> {
    if !(alpha > 0.0 && d > 0.0) || !alpha.is_finite() || !d.is_finite() {
        return Err(Error::Domain("alpha and d must be positive".into()));
    }
    let mu_rem = 2.0 * alpha - 4.0 * alpha / d - 8.0 * alpha * alpha / (d * d);
    let mu_abs0 = d * d / 4.0 - 4.0 * alpha / d - 4.0 * alpha * alpha / (d * d);
    let mu_pw = if alpha - d - d * d / 2.0 > 0.0 {
        Some(
            alpha - alpha * alpha / (4.0 * d * d) - d * d * (2.0 + d).powi(4) / (64.0 * alpha * alpha)
                + (4.0 - 4.0 * d - d * d) / 8.0,
        )
    } else {
        None
    };
    Ok(Boundaries { mu_rem, mu_abs0, mu_pw })
}

/// Outcome of the remnant-instability test with both evaluation routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemnantReport {
    pub unstable: bool,
    /// `min over eta < 0 of max(U, V) growth`.
    pub min_growth: f64,
    pub eta_min: f64,
}

/// Whether no exponential weight `eta < 0` stabilizes both components.
pub fn remnant_test(p: &Params) -> Result<bool> {
    remnant_report(p).map(|r| r.unstable)
}

pub fn remnant_report(p: &Params) -> Result<RemnantReport> {
    p.require_critical("remnant test")?;
    let phi = |eta: f64| max_growth(Component::U, eta, p).max(max_growth(Component::V, eta, p));
    let eta_star = p.eta_star();

    // phi is convex, so a golden-section search on a bracket around eta_star
    // finds the global minimum over eta < 0.
    let (mut a, mut b) = (2.0 * eta_star, -1e-6);
    while phi(a) < phi(eta_star) && a > -1e6 {
        a *= 2.0;
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    while (b - a).abs() > 1e-13 * (1.0 + a.abs()) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = phi(x2);
        }
    }
    let (mut eta_min, mut min_growth) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let at_star = phi(eta_star);
    if at_star <= min_growth {
        eta_min = eta_star;
        min_growth = at_star;
    }
    let numeric = min_growth > 1e-12;

    let b = region_boundaries(p.alpha, p.d)?;
    let closed = p.mu > b.mu_rem.min(0.0);
    if numeric != closed && (p.mu - b.mu_rem).abs() > 1e-6 {
        return Err(Error::Consistency(format!(
            "remnant test: numeric minimum {min_growth:e} disagrees with closed-form boundary {}",
            b.mu_rem
        )));
    }
    Ok(RemnantReport { unstable: closed, min_growth, eta_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::dispersion::{d_u0, d_v};
    use proptest::prelude::*;

    fn crit(d: f64, a: f64, mu: f64) -> Params {
        Params::critical(d, a, mu, 1.0).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let p = crit(1.0, 1.0, -1.0);
        assert!(sigma_u(0.0, p.eta_star(), &p).norm() < 1e-15);
        assert_eq!(sigma_u(0.0, 0.0, &p), c64(1.0, 0.0));
        assert_eq!(sigma_u(1.0, 0.0, &p), c64(0.0, 2.0));
        assert_eq!(sigma_v(0.0, 0.0, &p), c64(-2.0, 0.0));
    }

    #[test]
    fn v_growth_attained_at_extremal_wavenumber() {
        let p = crit(1.0, 1.0, -3.0);
        for eta in [-1.3_f64, -0.4, 0.0, 0.7] {
            let k = (3.0 * eta * eta + 1.0).sqrt();
            assert!((sigma_v(k, eta, &p).re - max_growth(Component::V, eta, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn growth_examples() {
        let p = crit(1.0, 1.0, -9.0);
        assert!(max_growth(Component::U, p.eta_star(), &p).abs() < 1e-15);
        assert!((max_growth(Component::V, -1.0, &p) - 1.0).abs() < 1e-15);
        assert!(max_growth(Component::V, 0.0, &p) < 0.0);
    }

    #[test]
    fn boundary_examples() {
        let b = region_boundaries(1.0, 1.0).unwrap();
        assert_eq!(b.mu_rem, -10.0);
        assert_eq!(b.mu_abs0, -7.75);
        assert!(b.mu_pw.is_none());
        let b = region_boundaries(2.0, 0.5).unwrap();
        assert!((b.mu_pw.unwrap() + 1.8193970).abs() < 1e-6);
        assert!(region_boundaries(0.0, 1.0).is_err());
    }

    #[test]
    fn curve_shapes() {
        let p = crit(1.0, 1.0, -9.0);
        let c = ess_curve(Component::U, 0.0, 3.0, 101, &p).unwrap();
        assert_eq!(c.samples[50], (0.0, c64(1.0, 0.0)));
        for i in 0..101 {
            let (k, l) = c.samples[i];
            let (k2, l2) = c.samples[100 - i];
            assert_eq!(k, -k2);
            assert!((l - l2.conj()).norm() < 1e-14);
        }
        let v = ess_curve(Component::V, p.eta_star(), default_k_max(p.eta_star()), DEFAULT_CURVE_POINTS, &p).unwrap();
        assert!(v.samples.iter().any(|(_, l)| l.re > 0.0));
        assert!(ess_curve(Component::U, 0.0, 1.0, 1, &p).is_err());
    }

    #[test]
    fn remnant_examples() {
        assert!(remnant_test(&crit(1.0, 1.0, -9.0)).unwrap());
        assert!(!remnant_test(&crit(1.0, 1.0, -11.0)).unwrap());
        assert!(!remnant_test(&crit(1.0, 1.0, -10.0)).unwrap());
        let off = Params::new(1.0, 1.0, -9.0, 1.0, 1.0).unwrap();
        assert!(remnant_test(&off).is_err());
    }

    #[test]
    fn remnant_flips_once_across_boundary() {
        let mut flips = 0;
        let mut prev = None;
        for i in 0..=40 {
            let mu = -10.4 + 0.02 * i as f64;
            let now = remnant_test(&crit(1.0, 1.0, mu)).unwrap();
            if let Some(pv) = prev {
                if pv != now {
                    flips += 1;
                }
            }
            prev = Some(now);
        }
        assert_eq!(flips, 1);
    }

    proptest! {
        #[test]
        fn boundaries_ordered(a in 0.05..8.0f64, d in 0.05..8.0f64) {
            let b = region_boundaries(a, d).unwrap();
            prop_assert!(b.mu_rem <= b.mu_abs0 + 1e-12);
            if let Some(pw) = b.mu_pw {
                prop_assert!(b.mu_abs0 < pw);
            }
        }

        #[test]
        fn sigma_solves_dispersion(k in -4.0..4.0f64, eta in -2.0..1.0f64, mu in -5.0..0.0f64, s in 0.0..4.0f64) {
            let p = Params::new(1.3, 0.8, mu, 1.0, s).unwrap();
            let nu = c64(eta, k);
            prop_assert!(d_u0(sigma_u(k, eta, &p), nu, &p).norm() < 1e-12 * (1.0 + k * k));
            prop_assert!(d_v(sigma_v(k, eta, &p), nu, &p).norm() < 1e-11 * (1.0 + k.powi(4)));
        }

        #[test]
        fn v_growth_matches_grid_maximum(eta in -1.5..0.5f64) {
            let p = crit(1.0, 1.0, -2.0);
            let km = 2.0 * (3.0 * eta * eta + 1.0).sqrt();
            let c = ess_curve(Component::V, eta, km, 20001, &p).unwrap();
            let grid = c.samples.iter().map(|(_, l)| l.re).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((grid - max_growth(Component::V, eta, &p)).abs() < 1e-6);
        }

        #[test]
        fn remnant_matches_closed_form(d in 0.3..3.0f64, a in 0.3..3.0f64, mu in -30.0..-0.01f64) {
            let b = region_boundaries(a, d).unwrap();
            prop_assume!((mu - b.mu_rem).abs() > 1e-6);
            let r = remnant_report(&crit(d, a, mu)).unwrap();
            prop_assert_eq!(r.unstable, mu > b.mu_rem.min(0.0));
        }
    }
}
