//! Pointwise Green's functions of the asymptotic linear operator: the
//! Swift-Hohenberg kernel `G22` and the coupled kernel `G12` for the
//! step-like u-operator with rate `alpha` ahead of the interface and `-2 alpha`
//! behind it.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::{d_u0, d_u1, roots_u, v_roots_raw, UState};
use crate::error::{ensure_finite, Error, Result};
use crate::params::Params;
use crate::simulate::banded::solve_tridiagonal;

const ROOT_SEPARATION_GUARD: f64 = 1e-6;
const POLE_GUARD: f64 = 1e-6;

/// Spatial configuration of `(x, y)` relative to the interface at `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum G12Case {
    /// `y > 0`, `x >= y`.
    SourceAheadRight,
    /// `y > 0`, `0 <= x < y`.
    SourceAheadBetween,
    /// `y > 0`, `x < 0`.
    SourceAheadBehind,
    /// `y < 0`, `x >= 0`.
    SourceBehindAhead,
    /// `y < 0`, `y <= x < 0`.
    SourceBehindBetween,
    /// `y < 0`, `x < y`.
    SourceBehindLeft,
}

impl G12Case {
    pub fn of(x: f64, y: f64) -> Self {
        if y > 0.0 {
            if x >= y {
                G12Case::SourceAheadRight
            } else if x >= 0.0 {
                G12Case::SourceAheadBetween
            } else {
                G12Case::SourceAheadBehind
            }
        } else if x >= 0.0 {
            G12Case::SourceBehindAhead
        } else if x >= y {
            G12Case::SourceBehindBetween
        } else {
            G12Case::SourceBehindLeft
        }
    }
}

/// Spatial roots entering both kernels at a fixed `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRoots {
    /// v-roots; the first two have negative real part.
    pub nu: [Complex64; 4],
    /// Partial-fraction weights `1 / prod_{j != i} (nu_i - nu_j)`.
    pub c: [Complex64; 4],
    /// u-roots ahead of the interface `(minus, plus)`.
    pub ahead: (Complex64, Complex64),
    /// u-roots behind the interface `(minus, plus)`.
    pub behind: (Complex64, Complex64),
}

impl KernelRoots {
    pub fn new(lambda: Complex64, p: &Params) -> Result<Self> {
        ensure_finite("lambda", lambda)?;
        let mut nu = v_roots_raw(lambda, p)?;
        let right = nu.iter().filter(|z| z.re > 0.0).count();
        if right != 2 || nu.iter().any(|z| z.re == 0.0) {
            return Err(Error::Domain(format!(
                "lambda = {lambda} is not to the right of the Swift-Hohenberg essential spectrum"
            )));
        }
        nu.sort_by(|a, b| (a.re > 0.0).cmp(&(b.re > 0.0)).then(a.im.total_cmp(&b.im)));
        let mut min_sep = f64::INFINITY;
        for i in 0..4 {
            for j in i + 1..4 {
                min_sep = min_sep.min((nu[i] - nu[j]).norm());
            }
        }
        if min_sep < ROOT_SEPARATION_GUARD {
            return Err(Error::PoleProximity { what: "branch point of the v-relation".into(), at: lambda });
        }
        let mut c = [Complex64::new(0.0, 0.0); 4];
        for i in 0..4 {
            let mut prod = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if j != i {
                    prod *= nu[i] - nu[j];
                }
            }
            c[i] = 1.0 / prod;
        }
        Ok(KernelRoots {
            nu,
            c,
            ahead: roots_u(lambda, p, UState::AtZero),
            behind: roots_u(lambda, p, UState::AtOne),
        })
    }
}

/// `order`-th x-derivative of the Swift-Hohenberg kernel, normalized so
/// that the third derivative jumps by `+1` at `x = y`.
pub fn g22_derivative(lambda: Complex64, x: f64, y: f64, p: &Params, order: u32) -> Result<Complex64> {
    let r = KernelRoots::new(lambda, p)?;
    Ok(g22_with(&r, x, y, order))
}

pub fn g22(lambda: Complex64, x: f64, y: f64, p: &Params) -> Result<Complex64> {
    g22_derivative(lambda, x, y, p, 0)
}

fn g22_with(r: &KernelRoots, x: f64, y: f64, order: u32) -> Complex64 {
    let z = x - y;
    let term = |j: usize| r.c[j] * r.nu[j].powu(order) * (r.nu[j] * z).exp();
    if z >= 0.0 {
        term(0) + term(1)
    } else {
        -(term(2) + term(3))
    }
}

/// Evaluation of the coupled kernel together with the data used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreensEval {
    pub lambda: Complex64,
    pub x: f64,
    pub y: f64,
    pub value: Complex64,
    pub case_id: G12Case,
    pub c: [Complex64; 4],
    /// Homogeneous-mode amplitudes, for sources ahead of (`y > 0`) or behind
    /// (`y < 0`) the interface.
    pub coefficients: [Complex64; 4],
}

struct G12Setup {
    r: KernelRoots,
    lambda: Complex64,
    beta: f64,
    du0: [Complex64; 4],
    du1: [Complex64; 4],
}

impl G12Setup {
    fn new(lambda: Complex64, p: &Params) -> Result<Self> {
        let r = KernelRoots::new(lambda, p)?;
        let cut = p.alpha - p.s * p.s / (4.0 * p.d);
        if lambda.im == 0.0 && lambda.re <= cut {
            return Err(Error::Domain(format!("lambda = {lambda} lies on the branch cut of the u-roots")));
        }
        let du0 = r.nu.map(|n| d_u0(lambda, n, p));
        let du1 = r.nu.map(|n| d_u1(lambda, n, p));
        let scale = 1.0 + lambda.norm();
        for j in 0..4 {
            if du0[j].norm() < POLE_GUARD * scale || du1[j].norm() < POLE_GUARD * scale {
                return Err(Error::PoleProximity { what: format!("resonance pole (u-root meets nu_{})", j + 1), at: lambda });
            }
        }
        let (a_m, a_p) = r.ahead;
        if (a_m - a_p).norm() < POLE_GUARD {
            return Err(Error::PoleProximity { what: "u-branch point".into(), at: lambda });
        }
        if (a_m - r.behind.1).norm() < POLE_GUARD {
            return Err(Error::PoleProximity { what: "interface matching degeneracy".into(), at: lambda });
        }
        Ok(G12Setup { r, lambda, beta: p.beta, du0, du1 })
    }

    /// Particular part `sign * beta * sum_j c_j / D(nu_j) nu_j^k e^{nu_j (x - y)}`.
    fn particular(&self, js: [usize; 2], behind: bool, sign: f64, x: f64, y: f64, k: u32) -> Complex64 {
        let den = if behind { &self.du1 } else { &self.du0 };
        js.iter()
            .map(|&j| self.r.c[j] / den[j] * self.r.nu[j].powu(k) * (self.r.nu[j] * (x - y)).exp())
            .sum::<Complex64>()
            * (sign * self.beta)
    }

    fn mode(nu: Complex64, x: f64, k: u32) -> Complex64 {
        nu.powu(k) * (nu * x).exp()
    }

    /// `k`-th derivative at `x` with homogeneous amplitudes `a`.
    fn eval(&self, a: &[Complex64; 4], x: f64, y: f64, k: u32) -> Complex64 {
        let (n0m, n0p) = self.r.ahead;
        let (n1m, n1p) = self.r.behind;
        match G12Case::of(x, y) {
            G12Case::SourceAheadRight => a[0] * Self::mode(n0m, x, k) - self.particular([0, 1], false, 1.0, x, y, k),
            G12Case::SourceAheadBetween => {
                -a[1] * Self::mode(n0m, x, k) - a[2] * Self::mode(n0p, x, k) + self.particular([2, 3], false, 1.0, x, y, k)
            }
            G12Case::SourceAheadBehind => a[3] * Self::mode(n1p, x, k) + self.particular([2, 3], true, 1.0, x, y, k),
            G12Case::SourceBehindAhead => a[0] * Self::mode(n0m, x, k) - self.particular([0, 1], false, 1.0, x, y, k),
            G12Case::SourceBehindBetween => {
                -a[1] * Self::mode(n1m, x, k) - a[2] * Self::mode(n1p, x, k) - self.particular([0, 1], true, 1.0, x, y, k)
            }
            G12Case::SourceBehindLeft => a[3] * Self::mode(n1p, x, k) + self.particular([2, 3], true, 1.0, x, y, k),
        }
    }

    /// Jumps of value and slope at `0` and `y` as an affine function of the amplitudes.
    fn jumps(&self, a: &[Complex64; 4], y: f64) -> Vector4<Complex64> {
        let mut out = Vector4::zeros();
        let mut n = 0;
        for at in [0.0, y] {
            for k in 0..2 {
                out[n] = self.eval(a, at, y, k) - self.eval(a, next_down(at), y, k);
                n += 1;
            }
        }
        out
    }

    /// Amplitudes making the kernel continuously differentiable.
    fn solve(&self, y: f64) -> Result<[Complex64; 4]> {
        if y == 0.0 {
            return Err(Error::Domain("source point y = 0 sits on the interface".into()));
        }
        let zero = [Complex64::new(0.0, 0.0); 4];
        let f0 = self.jumps(&zero, y);
        let mut m = Matrix4::<Complex64>::zeros();
        for col in 0..4 {
            let mut e = zero;
            e[col] = Complex64::new(1.0, 0.0);
            let fc = self.jumps(&e, y) - f0;
            m.set_column(col, &fc);
        }
        let sol = m
            .lu()
            .solve(&(-f0))
            .ok_or_else(|| Error::PoleProximity { what: "singular matching system".into(), at: self.lambda })?;
        Ok([sol[0], sol[1], sol[2], sol[3]])
    }
}

fn next_down(x: f64) -> f64 {
    if x == 0.0 {
        -f64::MIN_POSITIVE
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

/// Coupled kernel: solves `(L_u - lambda) G = -beta G22(., y)` with decay on
/// both sides of the interface.
pub fn g12_infty(lambda: Complex64, x: f64, y: f64, p: &Params) -> Result<GreensEval> {
    g12_derivative(lambda, x, y, p, 0)
}

/// `order`-th x-derivative of [`g12_infty`].
pub fn g12_derivative(lambda: Complex64, x: f64, y: f64, p: &Params, order: u32) -> Result<GreensEval> {
    let setup = G12Setup::new(lambda, p)?;
    let a = setup.solve(y)?;
    Ok(GreensEval {
        lambda,
        x,
        y,
        value: setup.eval(&a, x, y, order),
        case_id: G12Case::of(x, y),
        c: setup.r.c,
        coefficients: a,
    })
}

/// Profile `x -> G12(x, y)` on a list of points, sharing one coefficient solve.
pub fn g12_profile(lambda: Complex64, y: f64, xs: &[f64], p: &Params) -> Result<Vec<Complex64>> {
    let setup = G12Setup::new(lambda, p)?;
    let a = setup.solve(y)?;
    Ok(xs.iter().map(|&x| setup.eval(&a, x, y, 0)).collect())
}

/// Condensed closed-form amplitudes expressed through the mixed sums
/// `sum_j c_j (n - nu_j) / D(nu_j)`; kept as an audit of the matching solve.
pub fn condensed_coefficients(lambda: Complex64, y: f64, p: &Params) -> Result<[Complex64; 4]> {
    let s = G12Setup::new(lambda, p)?;
    let (n0m, n0p) = s.r.ahead;
    let (n1m, n1p) = s.r.behind;
    let nu = s.r.nu;
    let c = s.r.c;
    let big_d = |den: &[Complex64; 4], n: Complex64| (0..4).map(|j| c[j] * (n - nu[j]) / den[j]).sum::<Complex64>();
    let bj = |j: usize, n: Complex64| (1.0 / s.du0[j] - 1.0 / s.du1[j]) * c[j] * (n - nu[j]);
    let ey = |z: Complex64| (-z * y).exp();
    let p1 = (n0p - n1p) / (n0m - n1p);
    let p2 = (n0m - n1m) / (n0m - n1p);
    let beta = p.beta;
    let out = if y > 0.0 {
        let d0m = big_d(&s.du0, n0m);
        let d0p = big_d(&s.du0, n0p);
        let tail = |n: Complex64| bj(2, n) * ey(nu[2]) + bj(3, n) * ey(nu[3]);
        let b1 = p1 / (n0m - n0p) * d0m * ey(n0p) - d0p * ey(n0m) / (n0m - n0p) - tail(n1p) / (n1p - n0m);
        let b2 = -p1 / (n0m - n0p) * d0m * ey(n0p) + tail(n1p) / (n1p - n0m);
        let b3 = d0m * ey(n0p) / (n0m - n0p);
        let b4 = -d0m * ey(n0p) / (n0m - n1p) - tail(n0m) / (n0m - n1p);
        [b1, b2, b3, b4]
    } else if y < 0.0 {
        let d1p = big_d(&s.du1, n1p);
        let d1m = big_d(&s.du1, n1m);
        let tail = |n: Complex64| bj(0, n) * ey(nu[0]) + bj(1, n) * ey(nu[1]);
        let h1 = d1p / (n0m - n1p) * ey(n1m) - tail(n1p) / (n0m - n1p);
        let h2 = -d1p / (n1m - n1p) * ey(n1m);
        let h3 = p2 / (n1m - n1p) * d1p * ey(n1m) + tail(n0m) / (n0m - n1p);
        let h4 = -p2 / (n1m - n1p) * d1p * ey(n1m) + d1m / (n1m - n1p) * ey(n1p) - tail(n0m) / (n0m - n1p);
        [h1, h2, h3, h4]
    } else {
        return Err(Error::Domain("source point y = 0 sits on the interface".into()));
    };
    Ok(out.map(|z| z * beta))
}

/// Amplitudes from the matching solve, without evaluating the kernel.
pub fn matching_coefficients(lambda: Complex64, y: f64, p: &Params) -> Result<[Complex64; 4]> {
    G12Setup::new(lambda, p)?.solve(y)
}

/// Boundedness of the coupled kernel as `lambda -> 0` at the spreading speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovableReport {
    pub radii: Vec<f64>,
    /// Largest `|G12|` over the sampled angles and points, per radius.
    pub max_abs: Vec<f64>,
    /// Ratio of the values at the smallest and largest radius.
    pub growth: f64,
    pub bounded: bool,
    /// Log-log slope of the largest single amplitude `|b_3|` against `|lambda|`.
    pub amplitude_slope: f64,
    /// Same as `max_abs` for the mirrored source `-y`.
    pub mirrored_max_abs: Vec<f64>,
}

pub fn verify_removable_singularity(p: &Params, y: f64) -> Result<RemovableReport> {
    p.require_critical("removable-singularity check")?;
    if !(y > 0.0) {
        return Err(Error::Domain("source point must satisfy y > 0".into()));
    }
    let radii = vec![1e-2, 1e-3, 1e-4];
    let angles = [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75].map(|t| t * std::f64::consts::PI);
    let xs = [-1.5 * y, 0.5 * y, 2.0 * y];
    let mut max_abs = Vec::new();
    let mut mirrored = Vec::new();
    let mut amp = Vec::new();
    for &r in &radii {
        let (mut m, mut mm, mut am) = (0.0_f64, 0.0_f64, 0.0_f64);
        for &th in &angles {
            let lam = Complex64::from_polar(r, th);
            for v in g12_profile(lam, y, &xs, p)? {
                m = m.max(v.norm());
            }
            let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
            for v in g12_profile(lam, -y, &neg, p)? {
                mm = mm.max(v.norm());
            }
            am = am.max(condensed_coefficients(lam, y, p)?[2].norm());
        }
        max_abs.push(m);
        mirrored.push(mm);
        amp.push(am);
    }
    let growth = max_abs[max_abs.len() - 1] / max_abs[0];
    let n = radii.len() as f64;
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = amp.iter().map(|a| a.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    Ok(RemovableReport { radii, max_abs, growth, bounded: growth < 10.0, amplitude_slope: slope, mirrored_max_abs: mirrored })
}

/// Direct finite-difference solution of the coupled kernel equation on
/// `[-half_width, half_width]` with `n` nodes, closed by the decaying-mode
/// Robin conditions.
pub fn g12_bvp(lambda: Complex64, y: f64, p: &Params, half_width: f64, n: usize) -> Result<(Vec<f64>, Vec<Complex64>)> {
    if n < 5 || !(half_width > 0.0) {
        return Err(Error::Domain("BVP grid too small".into()));
    }
    let r = KernelRoots::new(lambda, p)?;
    let h = 2.0 * half_width / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| -half_width + i as f64 * h).collect();
    let (d, s) = (p.d, p.s);
    let rate = |x: f64| {
        if x > 0.0 {
            p.alpha
        } else if x < 0.0 {
            -2.0 * p.alpha
        } else {
            -0.5 * p.alpha
        }
    };
    let lo_c = Complex64::new(d / (h * h) - s / (2.0 * h), 0.0);
    let up_c = Complex64::new(d / (h * h) + s / (2.0 * h), 0.0);
    let mut sub = vec![lo_c; n];
    let mut sup = vec![up_c; n];
    let mut diag: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(-2.0 * d / (h * h) + rate(x), 0.0) - lambda).collect();
    let mut rhs: Vec<Complex64> = xs.iter().map(|&x| -p.beta * g22_with(&r, x, y, 0)).collect();

    // ghost nodes from G' = nu G at each end
    let left_rate = r.behind.1;
    let right_rate = r.ahead.0;
    sup[0] = lo_c + up_c;
    diag[0] -= lo_c * 2.0 * h * left_rate;
    sub[n - 1] = lo_c + up_c;
    diag[n - 1] += up_c * 2.0 * h * right_rate;
    sub[0] = Complex64::new(0.0, 0.0);
    sup[n - 1] = Complex64::new(0.0, 0.0);

    solve_tridiagonal(&sub, &mut diag, &sup, &mut rhs)?;
    Ok((xs, rhs))
}
