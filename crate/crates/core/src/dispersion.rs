//! Dispersion relations of the linearization at the invaded state `u = v = 0`
//! (and at `u = 1` for the u-equation), together with their spatial roots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::params::Params;
use crate::poly;

/// Default tolerance for equality of real parts in the Morse test.
pub const TOL_ABS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    /// u-equation linearized at `u = 0`.
    U0,
    /// u-equation linearized at `u = 1`, where `f'(1) = -2 alpha`.
    U1,
    /// Swift-Hohenberg equation.
    V,
    /// Product `U0 * V` of the full system at the invaded state.
    Full,
}

impl Relation {
    /// Number of spatial roots with positive real part as `Re lambda -> +inf`.
    pub fn morse_index(self) -> usize {
        match self {
            Relation::U0 | Relation::U1 => 1,
            Relation::V => 2,
            Relation::Full => 3,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Relation::U0 | Relation::U1 => 2,
            Relation::V => 4,
            Relation::Full => 6,
        }
    }
}

#[inline]
pub fn d_u0(lambda: Complex64, nu: Complex64, p: &Params) -> Complex64 {
    p.d * nu * nu + p.s * nu + p.alpha - lambda
}

#[inline]
pub fn d_u1(lambda: Complex64, nu: Complex64, p: &Params) -> Complex64 {
    p.d * nu * nu + p.s * nu - 2.0 * p.alpha - lambda
}

#[inline]
pub fn d_v(lambda: Complex64, nu: Complex64, p: &Params) -> Complex64 {
    let q = nu * nu + 1.0;
    -q * q + p.s * nu + p.mu - lambda
}

/// `d/dnu` of [`d_u0`] (identical for [`d_u1`]).
#[inline]
pub fn d_u_dnu(nu: Complex64, p: &Params) -> Complex64 {
    2.0 * p.d * nu + p.s
}

/// `d/dnu` of [`d_v`].
#[inline]
pub fn d_v_dnu(nu: Complex64, p: &Params) -> Complex64 {
    -4.0 * nu * (nu * nu + 1.0) + p.s
}

/// `d^2/dnu^2` of [`d_v`].
#[inline]
pub fn d_v_dnu2(nu: Complex64) -> Complex64 {
    -12.0 * nu * nu - 4.0
}

/// Value of the selected dispersion relation at `(lambda, nu)`.
pub fn eval_dispersion(which: Relation, lambda: Complex64, nu: Complex64, p: &Params) -> Result<Complex64> {
    ensure_finite("lambda", lambda)?;
    ensure_finite("nu", nu)?;
    Ok(match which {
        Relation::U0 => d_u0(lambda, nu, p),
        Relation::U1 => d_u1(lambda, nu, p),
        Relation::V => d_v(lambda, nu, p),
        Relation::Full => d_u0(lambda, nu, p) * d_v(lambda, nu, p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UState {
    AtZero,
    AtOne,
}

/// The two roots `(nu_minus, nu_plus)` of the u-dispersion relation.
///
/// `nu_plus` takes the principal square root with a plus sign.
pub fn roots_u(lambda: Complex64, p: &Params, state: UState) -> (Complex64, Complex64) {
    let fprime = match state {
        UState::AtZero => p.alpha,
        UState::AtOne => -2.0 * p.alpha,
    };
    let disc = (p.s * p.s - 4.0 * p.d * fprime + 4.0 * p.d * lambda).sqrt();
    let centre = -p.s / (2.0 * p.d);
    (centre - disc / (2.0 * p.d), centre + disc / (2.0 * p.d))
}

/// Coefficients of `D_v(lambda, .)` in ascending powers of `nu`.
pub fn v_coefficients(lambda: Complex64, p: &Params) -> [Complex64; 5] {
    [
        Complex64::new(p.mu - 1.0, 0.0) - lambda,
        Complex64::new(p.s, 0.0),
        Complex64::new(-2.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ]
}

/// Unlabelled roots of `D_v(lambda, .)`.
pub fn v_roots_raw(lambda: Complex64, p: &Params) -> Result<[Complex64; 4]> {
    poly::solve_quartic(v_coefficients(lambda, p))
}

/// Right-shift used to define pinch labels: far enough right that the
/// `-nu^4` balance dominates.
pub fn lambda_big(p: &Params) -> f64 {
    let b = 1.0 + p.mu.abs() + p.alpha + p.s * p.s + 1.0;
    10.0 * b * b
}

/// Roots of the Swift-Hohenberg dispersion relation with two labellings.
///
/// `pinch_label[i]` is the label of `roots[i]` obtained by continuation from
/// `lambda_big`, where labels 1 and 2 have negative real part and 3 and 4
/// positive real part. `rank_label[i]` orders the roots by real part with ties
/// broken by ascending imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VRootSet {
    pub roots: [Complex64; 4],
    pub pinch_label: [u8; 4],
    pub rank_label: [u8; 4],
}

impl VRootSet {
    /// Root carrying pinch label `label` (1-based).
    pub fn pinched(&self, label: u8) -> Complex64 {
        let i = self.pinch_label.iter().position(|&l| l == label).expect("label in 1..=4");
        self.roots[i]
    }

    /// Root of rank `rank` (1-based) in the real-part ordering.
    pub fn ranked(&self, rank: u8) -> Complex64 {
        let i = self.rank_label.iter().position(|&l| l == rank).expect("rank in 1..=4");
        self.roots[i]
    }

    /// Roots in pinch order `nu_1, ..., nu_4`.
    pub fn in_pinch_order(&self) -> [Complex64; 4] {
        [self.pinched(1), self.pinched(2), self.pinched(3), self.pinched(4)]
    }
}

/// Options for the pinch-label continuation in [`roots_v_with`].
#[derive(Debug, Clone, Copy)]
pub struct PinchOptions {
    /// Starting point on the real axis; `None` uses [`lambda_big`].
    pub lambda_big: Option<f64>,
    /// Largest step in the path parameter `t in [0, 1]`.
    pub max_step: f64,
}

impl Default for PinchOptions {
    fn default() -> Self {
        PinchOptions { lambda_big: None, max_step: 1.0 / 16.0 }
    }
}

pub fn roots_v(lambda: Complex64, p: &Params) -> Result<VRootSet> {
    roots_v_with(lambda, p, &PinchOptions::default())
}

fn cmp_re_im(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn min_separation(z: &[Complex64; 4], i: usize) -> f64 {
    (0..4).filter(|&j| j != i).map(|j| (z[i] - z[j]).norm()).fold(f64::INFINITY, f64::min)
}

const PERMS4: [[usize; 4]; 24] = [
    [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
    [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
    [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
    [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
];

/// Permutation `perm` minimizing `sum |next[perm[i]] - cur[i]|`.
pub(crate) fn best_match4(cur: &[Complex64; 4], next: &[Complex64; 4]) -> [usize; 4] {
    let mut best = PERMS4[0];
    let mut best_cost = f64::INFINITY;
    for perm in PERMS4.iter() {
        let cost: f64 = (0..4).map(|i| (next[perm[i]] - cur[i]).norm()).sum();
        if cost < best_cost {
            best_cost = cost;
            best = *perm;
        }
    }
    best
}

/// Roots of `D_v(lambda, .)` with pinch labels from continuation along the
/// straight segment joining `lambda_big` to `lambda`.
pub fn roots_v_with(lambda: Complex64, p: &Params, opts: &PinchOptions) -> Result<VRootSet> {
    ensure_finite("lambda", lambda)?;
    let start = Complex64::new(opts.lambda_big.unwrap_or_else(|| lambda_big(p)), 0.0);

    let mut cur = v_roots_raw(start, p)?;
    cur.sort_by(|a, b| (a.re > 0.0).cmp(&(b.re > 0.0)).then(a.im.total_cmp(&b.im)));
    if !(cur[1].re < 0.0 && cur[2].re > 0.0) {
        return Err(Error::Continuation(format!(
            "no 2+2 root split at lambda_big = {}",
            start.re
        )));
    }

    let path = lambda - start;
    let mut t = 0.0_f64;
    let mut h = opts.max_step;
    while t < 1.0 {
        let tn = (t + h).min(1.0);
        let lam = start + path * tn;
        let next = v_roots_raw(lam, p)?;
        let scale = next.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let perm = best_match4(&cur, &next);
        let last = tn >= 1.0;

        let mut ok = true;
        for i in 0..4 {
            let moved = (next[perm[i]] - cur[i]).norm();
            if moved <= 0.3 * min_separation(&cur, i) {
                continue;
            }
            // At the endpoint a coincident pair may be assigned either way.
            let coincident = (0..4)
                .filter(|&j| j != perm[i])
                .any(|j| (next[j] - next[perm[i]]).norm() <= 1e-7 * scale);
            if !(last && coincident) {
                ok = false;
                break;
            }
        }

        if ok {
            if !last {
                let tightest = (0..4).map(|i| min_separation(&next, i)).fold(f64::INFINITY, f64::min);
                if tightest < 1e-8 * scale {
                    return Err(Error::PinchAmbiguous { at: lam });
                }
            }
            cur = [next[perm[0]], next[perm[1]], next[perm[2]], next[perm[3]]];
            t = tn;
            h = (h * 1.5).min(opts.max_step);
        } else {
            h *= 0.5;
            if h < 1e-12 {
                return Err(Error::PinchAmbiguous { at: lam });
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| cmp_re_im(&cur[a], &cur[b]));
    let mut rank_label = [0u8; 4];
    for (r, &i) in order.iter().enumerate() {
        rank_label[i] = r as u8 + 1;
    }
    Ok(VRootSet { roots: cur, pinch_label: [1, 2, 3, 4], rank_label })
}

/// Spatial roots of `which` at `lambda`, sorted by real part then imaginary part.
pub fn sorted_roots(which: Relation, lambda: Complex64, p: &Params) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(which.degree());
    match which {
        Relation::U0 => {
            let (a, b) = roots_u(lambda, p, UState::AtZero);
            out.extend([a, b]);
        }
        Relation::U1 => {
            let (a, b) = roots_u(lambda, p, UState::AtOne);
            out.extend([a, b]);
        }
        Relation::V => out.extend(v_roots_raw(lambda, p)?),
        Relation::Full => {
            let (a, b) = roots_u(lambda, p, UState::AtZero);
            out.extend([a, b]);
            out.extend(v_roots_raw(lambda, p)?);
        }
    }
    out.sort_by(cmp_re_im);
    Ok(out)
}

/// Result of the Morse-index test for membership in the absolute spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseSplit {
    pub sorted_six: [Complex64; 6],
    /// `Re nu_4 - Re nu_3` in the sorted list.
    pub gap: f64,
    pub in_abs: bool,
}

pub fn morse_split(lambda: Complex64, p: &Params) -> Result<MorseSplit> {
    morse_split_tol(lambda, p, TOL_ABS)
}

pub fn morse_split_tol(lambda: Complex64, p: &Params, tol: f64) -> Result<MorseSplit> {
    ensure_finite("lambda", lambda)?;
    let r = sorted_roots(Relation::Full, lambda, p)?;
    let sorted_six = [r[0], r[1], r[2], r[3], r[4], r[5]];
    let gap = r[3].re - r[2].re;
    Ok(MorseSplit { sorted_six, gap, in_abs: gap <= tol })
}

/// Gap `Re rho_{i+1} - Re rho_i` at the Morse index `i` of `which`.
pub fn morse_gap(which: Relation, lambda: Complex64, p: &Params) -> Result<f64> {
    let r = sorted_roots(which, lambda, p)?;
    let i = which.morse_index();
    Ok(r[i].re - r[i - 1].re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use proptest::prelude::*;

    fn p112() -> Params {
        Params::new(1.0, 1.0, -1.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn direct_evaluations() {
        let p = p112();
        let z = eval_dispersion(Relation::U0, c64(0.0, 0.0), c64(-1.0, 0.0), &p).unwrap();
        assert_eq!(z, c64(0.0, 0.0));
        let z = eval_dispersion(Relation::V, c64(0.0, 0.0), c64(0.0, 0.0), &p).unwrap();
        assert_eq!(z, c64(-2.0, 0.0));
        let (l, n) = (c64(0.3, -0.7), c64(-0.4, 1.1));
        let full = eval_dispersion(Relation::Full, l, n, &p).unwrap();
        let prod = eval_dispersion(Relation::U0, l, n, &p).unwrap() * eval_dispersion(Relation::V, l, n, &p).unwrap();
        assert!((full - prod).norm() < 1e-14);
        assert!(eval_dispersion(Relation::V, c64(f64::NAN, 0.0), n, &p).is_err());
    }

    #[test]
    fn u_roots_examples() {
        let p = p112();
        let (m, pl) = roots_u(c64(0.0, 0.0), &p, UState::AtZero);
        assert!((m - c64(-1.0, 0.0)).norm() < 1e-15 && (pl - c64(-1.0, 0.0)).norm() < 1e-15);
        let (m, pl) = roots_u(c64(1.0, 0.0), &p, UState::AtZero);
        assert!((m - c64(-2.0, 0.0)).norm() < 1e-15 && pl.norm() < 1e-15);
        let (m, pl) = roots_u(c64(0.0, 0.0), &p, UState::AtOne);
        assert!((m.re + 1.0 + 3f64.sqrt()).abs() < 1e-14);
        assert!((pl.re + 1.0 - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn pinch_split_far_right() {
        let p = p112();
        let set = roots_v(c64(lambda_big(&p), 0.0), &p).unwrap();
        assert!(set.pinched(1).re < 0.0 && set.pinched(2).re < 0.0);
        assert!(set.pinched(3).re > 0.0 && set.pinched(4).re > 0.0);
        let m = morse_split(c64(lambda_big(&p), 0.0), &p).unwrap();
        assert!(m.gap > 0.0 && !m.in_abs);
        assert_eq!(m.sorted_six.iter().filter(|z| z.re > 0.0).count(), 3);
    }

    #[test]
    fn rank_labels_nondecreasing() {
        let p = p112();
        let set = roots_v(c64(-0.5, 1.3), &p).unwrap();
        for r in 1..4u8 {
            assert!(set.ranked(r).re <= set.ranked(r + 1).re);
        }
    }

    #[test]
    fn halved_step_gives_same_labels() {
        let p = p112();
        for lam in [c64(-0.5, 1.3), c64(-3.0, -2.0), c64(0.2, 0.0), c64(-1.2, 5.0)] {
            let a = roots_v_with(lam, &p, &PinchOptions { lambda_big: None, max_step: 1.0 / 16.0 }).unwrap();
            let b = roots_v_with(lam, &p, &PinchOptions { lambda_big: None, max_step: 1.0 / 32.0 }).unwrap();
            for l in 1..=4u8 {
                assert!((a.pinched(l) - b.pinched(l)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn u_roots_reproduce_polynomial() {
        let p = Params::new(0.7, 1.3, -1.0, 0.0, 0.9).unwrap();
        let lam = c64(0.4, -1.1);
        let (a, b) = roots_u(lam, &p, UState::AtZero);
        // d (nu - a)(nu - b) = d nu^2 - d(a+b) nu + d a b
        assert!((-p.d * (a + b) - p.s).norm() < 1e-12);
        assert!((p.d * a * b - (p.alpha - lam)).norm() < 1e-12);
    }

    fn params_strategy() -> impl Strategy<Value = Params> {
        (0.2..3.0f64, 0.2..3.0f64, -5.0..-0.01f64, 0.0..4.0f64)
            .prop_map(|(d, a, mu, s)| Params::new(d, a, mu, 1.0, s).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn v_roots_residual(p in params_strategy(), re in -5.0..5.0f64, im in -5.0..5.0f64) {
            let lam = c64(re, im);
            let set = roots_v(lam, &p).unwrap();
            for nu in set.roots {
                let scale = 1f64.max(lam.norm()).max(nu.norm().powi(4));
                prop_assert!(d_v(lam, nu, &p).norm() <= 1e-9 * scale);
            }
        }

        #[test]
        fn conjugate_symmetry(p in params_strategy(), re in -5.0..5.0f64, im in 0.1..5.0f64) {
            let lam = c64(re, im);
            let a = roots_v(lam, &p).unwrap();
            let b = roots_v(lam.conj(), &p).unwrap();
            for l in 1..=4u8 {
                let za = a.pinched(l).conj();
                prop_assert!(b.roots.iter().any(|z| (z - za).norm() < 1e-8));
            }
            let ma = morse_split(lam, &p).unwrap();
            let mb = morse_split(lam.conj(), &p).unwrap();
            prop_assert!((ma.gap - mb.gap).abs() < 1e-9);
        }
    }
}
