//! Polynomial root finding through companion-matrix eigenvalues.
//!
//! Coefficients are always given in ascending order, `c[0] + c[1] z + ...`.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

const NEWTON_POLISH_STEPS: usize = 3;

/// Horner evaluation of `p(z)` and `p'(z)`.
pub fn eval_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

pub fn eval(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// All roots of a polynomial of exact degree `c.len() - 1`.
///
/// The variable is rescaled so the monic coefficients are of unit size, the
/// companion matrix is reduced to complex Schur form, and every eigenvalue is
/// polished by a few guarded Newton steps on the original polynomial.
pub fn roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    if lead.norm() < 1e-300 || !lead.re.is_finite() || !lead.im.is_finite() {
        return Err(Error::Degree);
    }
    if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("non-finite polynomial coefficient".into()));
    }

    let mut rho: f64 = 0.0;
    for (k, a) in c.iter().enumerate().take(n) {
        let m = (a / lead).norm();
        if m > 0.0 {
            rho = rho.max(m.powf(1.0 / (n - k) as f64));
        }
    }
    if rho == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }

    // monic coefficients of q(w) = p(rho w) / (lead rho^n)
    let mut monic = vec![Complex64::new(0.0, 0.0); n];
    for (k, m) in monic.iter_mut().enumerate() {
        *m = c[k] / lead * rho.powi(k as i32 - n as i32);
    }

    let mut comp = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = -monic[i];
    }
    // the unshifted QR sweep can cycle on symmetric root configurations
    let eig: Vec<Complex64> = match Schur::try_new(comp, f64::EPSILON, 2_000).and_then(|s| s.eigenvalues()) {
        Some(e) => e.iter().copied().collect(),
        None => {
            let mut full = monic.clone();
            full.push(Complex64::new(1.0, 0.0));
            aberth(&full)?
        }
    };

    let mut out: Vec<Complex64> = eig.iter().map(|w| w * rho).collect();
    for z in out.iter_mut() {
        *z = polish(c, *z);
    }
    Ok(out)
}

/// Simultaneous Aberth-Ehrlich iteration for a polynomial whose roots are of unit size.
fn aberth(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4)).collect();
    for _ in 0..1_000 {
        let mut largest: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                largest = largest.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if largest < 1e-15 {
            return Ok(z);
        }
    }
    if z.iter().all(|w| eval(c, *w).norm() < 1e-10) {
        Ok(z)
    } else {
        Err(Error::Continuation("polynomial root iteration did not converge".into()))
    }
}

/// Guarded Newton refinement; a step is kept only if it lowers the residual.
pub fn polish(c: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut res = eval(c, z).norm();
    for _ in 0..NEWTON_POLISH_STEPS {
        let (p, dp) = eval_with_derivative(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let r = eval(c, cand).norm();
        if r < res {
            z = cand;
            res = r;
        } else {
            break;
        }
    }
    z
}

/// Roots of a quartic `c[0] + ... + c[4] z^4`.
pub fn solve_quartic(c: [Complex64; 5]) -> Result<[Complex64; 4]> {
    let r = roots(&c)?;
    Ok([r[0], r[1], r[2], r[3]])
}

/// Residual scale used to judge root accuracy: `max(1, max|c| * max(1,|z|)^n)`.
pub fn residual_scale(c: &[Complex64], z: Complex64) -> f64 {
    let cmax = c.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let n = c.len().saturating_sub(1) as i32;
    (cmax * z.norm().max(1.0).powi(n)).max(1.0)
}

/// Real roots of a real polynomial, ascending.
pub fn real_roots(c: &[f64], imag_tol: f64) -> Result<Vec<f64>> {
    let cc: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut out: Vec<f64> = roots(&cc)?
        .into_iter()
        .filter(|z| z.im.abs() <= imag_tol * z.norm().max(1.0))
        .map(|z| z.re)
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn factored_quartic() {
        let r = solve_quartic([c(4.0), c(0.0), c(-5.0), c(0.0), c(1.0)]).unwrap();
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.total_cmp(b));
        for (got, want) in re.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(r.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn quadruple_zero() {
        let r = solve_quartic([c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        assert!(r.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn degree_loss_rejected() {
        assert_eq!(
            solve_quartic([c(1.0), c(1.0), c(0.0), c(0.0), c(1e-310)]),
            Err(Error::Degree)
        );
    }

    #[test]
    fn real_roots_of_cubic() {
        // 20 x^3 + 4 x + 2 has exactly one real root
        let r = real_roots(&[2.0, 4.0, 0.0, 20.0], 1e-10).unwrap();
        assert_eq!(r.len(), 1);
        assert!((20.0 * r[0].powi(3) + 4.0 * r[0] + 2.0).abs() < 1e-12);
    }

    fn cplx() -> impl Strategy<Value = Complex64> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Complex64::new(a, b))
    }

    proptest! {
        #[test]
        fn vieta_relations(a0 in cplx(), a1 in cplx(), a2 in cplx(), a3 in cplx()) {
            let coeffs = [a0, a1, a2, a3, Complex64::new(1.0, 0.0)];
            let r = solve_quartic(coeffs).unwrap();
            let sum: Complex64 = r.iter().sum();
            let prod: Complex64 = r.iter().product();
            prop_assert!((sum + a3).norm() < 1e-8);
            prop_assert!((prod - a0).norm() < 1e-8);
            for z in r {
                let res = eval(&coeffs, z).norm();
                prop_assert!(res <= 1e-9 * residual_scale(&coeffs, z));
            }
        }
    }
}
