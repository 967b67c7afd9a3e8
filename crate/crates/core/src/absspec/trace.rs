use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{members_near, pinch, AbsSpectrum, DoubleRoot, DoubleRootKind, SingularPoint, TriplePoint};
use crate::dispersion::{d_u_dnu, d_v_dnu, d_v_dnu2, lambda_big, sorted_roots, Relation};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::poly;

/// Which pair of spatial roots shares its real part along a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Two v-roots `nu` and `nu + ik`.
    VV,
    /// A v-root `nu` and the u-root `nu + ik`.
    UV,
    /// The two u-roots, on the real ray left of the u-branch point.
    UU,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::VV => "vv",
            Family::UV => "uv",
            Family::UU => "uu",
        }
    }

    fn slots(self) -> usize {
        match self {
            Family::VV => 3,
            Family::UV => 4,
            Family::UU => 1,
        }
    }

    fn kind_at_zero(self) -> DoubleRootKind {
        match self {
            Family::VV => DoubleRootKind::VBranch,
            Family::UV => DoubleRootKind::ResonancePole,
            Family::UU => DoubleRootKind::UBranch,
        }
    }
}

const FAMILIES: [Family; 3] = [Family::VV, Family::UV, Family::UU];

/// Sample of the absolute spectrum: `lambda` has spatial roots `nu` and
/// `nu + ik` with equal real part straddling the Morse split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsPoint {
    pub k: f64,
    pub lambda: Complex64,
    pub nu: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsBranch {
    pub id: usize,
    pub family: Family,
    pub points: Vec<AbsPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Wavenumber spacing of the sampling grid.
    pub k_step: f64,
    /// Largest wavenumber before the trace is declared truncated.
    pub k_cap: f64,
    /// Curves are cut where `Re lambda` drops below this; `None` uses
    /// `mu - |mu| - 1`.
    pub left_cutoff: Option<f64>,
    /// Tolerance on real parts when counting roots on either side of a pair.
    pub filter_tol: f64,
    /// Also classify double roots and locate triple points.
    pub singular_points: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { k_step: 2.5e-3, k_cap: 200.0, left_cutoff: None, filter_tol: 1e-7, singular_points: true }
    }
}

fn lambda_on_v(w: Complex64, p: &Params) -> Complex64 {
    let q = w * w + 1.0;
    -q * q + p.s * w + p.mu
}

/// `(lambda, nu)` candidates of `fam` at wavenumber `k`.
fn candidates(fam: Family, k: f64, p: &Params) -> Result<Vec<(Complex64, Complex64)>> {
    let i = Complex64::new(0.0, 1.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    match fam {
        Family::VV => {
            // (2w + ik)(2w^2 + 2ikw - k^2 + 2) = s
            let c = [2.0 * i * k - i * k.powi(3) - p.s, re(4.0 - 4.0 * k * k), 6.0 * i * k, re(4.0)];
            Ok(poly::roots(&c)?.into_iter().map(|w| (lambda_on_v(w, p), w)).collect())
        }
        Family::UV => {
            // D_u^0(lambda, w + ik) = 0 with lambda on the v-relation at w
            let c = [
                re(1.0 + p.alpha - p.mu - p.d * k * k) + i * p.s * k,
                2.0 * i * p.d * k,
                re(2.0 + p.d),
                re(0.0),
                re(1.0),
            ];
            Ok(poly::roots(&c)?.into_iter().map(|w| (lambda_on_v(w, p), w)).collect())
        }
        Family::UU => {
            let lam = p.alpha - p.s * p.s / (4.0 * p.d) - p.d * k * k / 4.0;
            Ok(vec![(re(lam), Complex64::new(p.eta_star(), -k / 2.0))])
        }
    }
}

/// Whether the roots at `lambda` with real part `eta` sit across the Morse split:
/// at most two roots lie strictly left and at most two strictly right.
pub fn pair_straddles(lambda: Complex64, eta: f64, p: &Params, tol: f64) -> Result<bool> {
    let r = sorted_roots(Relation::Full, lambda, p)?;
    let below = r.iter().filter(|z| z.re < eta - tol).count();
    let above = r.iter().filter(|z| z.re > eta + tol).count();
    Ok(below < Relation::Full.morse_index() && above < 6 - Relation::Full.morse_index())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for perm in permutations(n - 1) {
        for pos in 0..n {
            let mut p = perm.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Reorders `next` so that slot `i` continues `prev[i]`.
fn link(prev: &[(Complex64, Complex64)], next: Vec<(Complex64, Complex64)>, perms: &[Vec<usize>]) -> Vec<(Complex64, Complex64)> {
    let mut best = &perms[0];
    let mut best_cost = f64::INFINITY;
    for perm in perms {
        let cost: f64 = (0..prev.len()).map(|i| (next[perm[i]].1 - prev[i].1).norm()).sum();
        if cost < best_cost {
            best_cost = cost;
            best = perm;
        }
    }
    best.iter().map(|&j| next[j]).collect()
}

#[derive(Clone, Copy)]
struct Sample {
    k: f64,
    lambda: Complex64,
    nu: Complex64,
    pass: bool,
}

struct Ctx<'a> {
    p: &'a Params,
    cutoff: f64,
    big: f64,
    tol: f64,
}

impl Ctx<'_> {
    fn passes(&self, lambda: Complex64, nu: Complex64) -> Result<bool> {
        if lambda.re < self.cutoff || lambda.norm() > self.big {
            return Ok(false);
        }
        pair_straddles(lambda, nu.re, self.p, self.tol)
    }

    /// Candidate of `fam` at `k` nearest to `guess`.
    fn follow(&self, fam: Family, k: f64, guess: Complex64) -> Result<Sample> {
        let c = candidates(fam, k, self.p)?;
        let (lambda, nu) = c
            .into_iter()
            .min_by(|a, b| (a.1 - guess).norm().total_cmp(&(b.1 - guess).norm()))
            .expect("nonempty candidate set");
        Ok(Sample { k, lambda, nu, pass: self.passes(lambda, nu)? })
    }

    /// Last passing sample before the filter flips between `good` and `bad`.
    fn boundary(&self, fam: Family, good: Sample, bad: Sample) -> Result<Sample> {
        let (mut g, mut b) = (good, bad);
        for _ in 0..60 {
            if (b.k - g.k).abs() <= 1e-13 * (1.0 + g.k.abs()) {
                break;
            }
            let m = self.follow(fam, 0.5 * (g.k + b.k), g.nu)?;
            if m.pass {
                g = m;
            } else {
                b = m;
            }
        }
        Ok(g)
    }

    /// Maximum of `Re lambda` on a smooth passing stretch `[a, b]`.
    fn golden(&self, fam: Family, a: Sample, b: Sample, guess: Complex64) -> Result<Sample> {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (a.k, b.k);
        let mut x1 = self.follow(fam, hi - g * (hi - lo), guess)?;
        let mut x2 = self.follow(fam, lo + g * (hi - lo), guess)?;
        for _ in 0..80 {
            if (hi - lo).abs() <= 1e-12 {
                break;
            }
            if x1.lambda.re >= x2.lambda.re {
                hi = x2.k;
                x2 = x1;
                x1 = self.follow(fam, hi - g * (hi - lo), x2.nu)?;
            } else {
                lo = x1.k;
                x1 = x2;
                x2 = self.follow(fam, lo + g * (hi - lo), x1.nu)?;
            }
        }
        let best = [a, b, x1, x2]
            .into_iter()
            .filter(|s| s.pass)
            .max_by(|x, y| x.lambda.re.total_cmp(&y.lambda.re));
        Ok(best.unwrap_or(a))
    }
}

/// Absolute spectrum in the frame moving with speed `s`.
pub fn trace_abs_spectrum(p: &Params, s: f64) -> Result<AbsSpectrum> {
    trace_with(p, s, &TraceOptions::default())
}

pub fn trace_with(p: &Params, s: f64, opts: &TraceOptions) -> Result<AbsSpectrum> {
    let p = Params::new(p.d, p.alpha, p.mu, p.beta, s)?;
    if !(opts.k_step > 0.0 && opts.k_cap > opts.k_step) {
        return Err(Error::Domain("invalid wavenumber grid".into()));
    }
    let ctx = Ctx {
        p: &p,
        cutoff: opts.left_cutoff.unwrap_or(p.mu - p.mu.abs() - 1.0),
        big: lambda_big(&p),
        tol: opts.filter_tol,
    };

    let perms: Vec<Vec<Vec<usize>>> = FAMILIES.iter().map(|f| permutations(f.slots())).collect();
    let mut prev: Vec<Vec<(Complex64, Complex64)>> = Vec::new();
    let mut series: Vec<Vec<Vec<Sample>>> = FAMILIES.iter().map(|f| vec![Vec::new(); f.slots()]).collect();
    let mut truncated = false;

    let mut j = 0usize;
    loop {
        let k = j as f64 * opts.k_step;
        let mut any_right = false;
        for (fi, &fam) in FAMILIES.iter().enumerate() {
            let mut c = candidates(fam, k, &p)?;
            if j > 0 {
                c = link(&prev[fi], c, &perms[fi]);
            }
            for (slot, &(lambda, nu)) in c.iter().enumerate() {
                any_right |= lambda.re >= ctx.cutoff && lambda.re <= ctx.big;
                let pass = ctx.passes(lambda, nu)?;
                series[fi][slot].push(Sample { k, lambda, nu, pass });
            }
            if j == 0 {
                prev.push(c);
            } else {
                prev[fi] = c;
            }
        }
        if !any_right && k > 1.0 {
            break;
        }
        if k >= opts.k_cap {
            truncated = true;
            break;
        }
        j += 1;
    }

    // grid maximum, then refinement around every competitive local maximum
    let mut grid_best = f64::NEG_INFINITY;
    for fam_series in &series {
        for s in fam_series {
            for x in s.iter().filter(|x| x.pass) {
                grid_best = grid_best.max(x.lambda.re);
            }
        }
    }
    let mut best: Option<(Family, Sample)> = None;
    let consider = |fam: Family, x: Sample, best: &mut Option<(Family, Sample)>| {
        if x.pass && !matches!(best, Some((_, b)) if x.lambda.re <= b.lambda.re) {
            *best = Some((fam, x));
        }
    };
    let band = 0.05 * (1.0 + grid_best.abs());
    for (fi, &fam) in FAMILIES.iter().enumerate() {
        for s in &series[fi] {
            for idx in 0..s.len() {
                let x = s[idx];
                if !x.pass || x.lambda.re < grid_best - band {
                    continue;
                }
                let left = idx.checked_sub(1).map(|i| s[i]);
                let right = s.get(idx + 1).copied();
                let beats = |n: Option<Sample>| !matches!(n, Some(n) if n.pass && n.lambda.re > x.lambda.re);
                if !(beats(left) && beats(right)) {
                    continue;
                }
                consider(fam, x, &mut best);
                for n in [left, right].into_iter().flatten() {
                    if n.pass {
                        let (a, b) = if n.k < x.k { (n, x) } else { (x, n) };
                        consider(fam, ctx.golden(fam, a, b, x.nu)?, &mut best);
                    } else {
                        consider(fam, ctx.boundary(fam, x, n)?, &mut best);
                    }
                }
            }
        }
    }

    let mut curves = Vec::new();
    for (fi, &fam) in FAMILIES.iter().enumerate() {
        for s in &series[fi] {
            let mut run: Vec<AbsPoint> = Vec::new();
            for x in s.iter().chain(std::iter::once(&Sample {
                k: f64::NAN,
                lambda: Complex64::new(f64::NAN, 0.0),
                nu: Complex64::new(f64::NAN, 0.0),
                pass: false,
            })) {
                if x.pass {
                    run.push(AbsPoint { k: x.k, lambda: x.lambda, nu: x.nu });
                } else if !run.is_empty() {
                    let mirror: Vec<AbsPoint> = run
                        .iter()
                        .rev()
                        .map(|q| AbsPoint { k: -q.k, lambda: q.lambda.conj(), nu: q.nu.conj() })
                        .collect();
                    curves.push(AbsBranch { id: curves.len(), family: fam, points: std::mem::take(&mut run) });
                    curves.push(AbsBranch { id: curves.len(), family: fam, points: mirror });
                }
            }
        }
    }

    let mut singular_points = Vec::new();
    if opts.singular_points {
        let zero: Vec<(Family, Sample)> = FAMILIES
            .iter()
            .enumerate()
            .flat_map(|(fi, &fam)| series[fi].iter().map(move |s| (fam, s[0])))
            .collect();
        let lambdas: Vec<Complex64> = zero.iter().map(|(_, x)| x.lambda).collect();
        for (i, (fam, x)) in zero.iter().enumerate() {
            let kind = fam.kind_at_zero();
            let nu = x.nu;
            let simple = match kind {
                DoubleRootKind::UBranch => true,
                DoubleRootKind::VBranch => d_v_dnu2(nu).norm() > 1e-8,
                DoubleRootKind::ResonancePole => (d_u_dnu(nu, &p) - d_v_dnu(nu, &p)).norm() > 1e-8,
            };
            let mut dr = DoubleRoot { lambda: x.lambda, nu, kind, pinched: false, simple };
            let others: Vec<Complex64> = lambdas
                .iter()
                .enumerate()
                .filter(|&(j, l)| j != i && (l - x.lambda).norm() > 1e-9)
                .map(|(_, &l)| l)
                .collect();
            dr.pinched = pinch::is_pinched_avoiding(&dr, &p, &others)?;
            singular_points.push(SingularPoint::DoubleRoot(dr));
        }

        let mut triples: Vec<TriplePoint> = Vec::new();
        for (fi, &fam) in FAMILIES.iter().enumerate() {
            for s in &series[fi] {
                for w in s.windows(2) {
                    if w[0].pass == w[1].pass {
                        continue;
                    }
                    let (good, bad) = if w[0].pass { (w[0], w[1]) } else { (w[1], w[0]) };
                    if bad.lambda.re < ctx.cutoff || bad.lambda.norm() > ctx.big {
                        continue;
                    }
                    let edge = ctx.boundary(fam, good, bad)?;
                    let sorted = sorted_roots(Relation::Full, edge.lambda, &p)?;
                    let near = members_near(&sorted, edge.nu.re, 1e-6);
                    if near.len() >= 3 && !triples.iter().any(|t| (t.lambda - edge.lambda).norm() < 1e-6) {
                        let tp = TriplePoint {
                            lambda: edge.lambda,
                            eta: edge.nu.re,
                            members: [near[0], near[1], near[2]],
                        };
                        let mirrored = TriplePoint { lambda: tp.lambda.conj(), ..tp };
                        triples.push(tp);
                        if tp.lambda.im.abs() > 1e-9 {
                            triples.push(mirrored);
                        }
                    }
                }
            }
        }
        singular_points.extend(triples.into_iter().map(SingularPoint::TriplePoint));
    }

    let (max_re, argmax, argmax_family) = match best {
        Some((fam, x)) => (x.lambda.re, AbsPoint { k: x.k, lambda: x.lambda, nu: x.nu }, fam),
        None => (
            f64::NEG_INFINITY,
            AbsPoint { k: f64::NAN, lambda: Complex64::new(f64::NAN, f64::NAN), nu: Complex64::new(f64::NAN, f64::NAN) },
            Family::UU,
        ),
    };
    Ok(AbsSpectrum { s, curves, singular_points, max_re, argmax, argmax_family, truncated })
}

/// Largest real part of the absolute spectrum at frame speed `s`.
pub fn max_re_at(p: &Params, s: f64) -> Result<f64> {
    let opts = TraceOptions { singular_points: false, ..TraceOptions::default() };
    Ok(trace_with(p, s, &opts)?.max_re)
}

/// Marginal growth below which the absolute spectrum counts as stable.
const STABLE_TOL: f64 = 1e-10;

/// Absolute spreading speed: the frame speed at which the absolute spectrum
/// crosses into the stable half-plane.
pub fn s_abs(p: &Params, s_lo: f64, s_hi: f64) -> Result<f64> {
    s_abs_with(p, s_lo, s_hi, 1e-3)
}

pub fn s_abs_with(p: &Params, s_lo: f64, s_hi: f64, tol: f64) -> Result<f64> {
    let s_star = p.s_star();
    if max_re_at(p, s_lo)? <= STABLE_TOL {
        return Err(Error::Domain(format!("absolute spectrum is already stable at s = {s_lo}")));
    }
    let cap = 10.0 * s_star;
    let (mut lo, mut hi) = (s_lo, s_hi.max(s_lo * (1.0 + 1e-6)));
    while max_re_at(p, hi)? > STABLE_TOL {
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            if max_re_at(p, cap)? > STABLE_TOL {
                return Err(Error::NoStabilizingSpeed { cap });
            }
            hi = cap;
        }
    }
    while hi - lo > tol {
        let m = 0.5 * (lo + hi);
        if max_re_at(p, m)? > STABLE_TOL {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absspec::full_triple_point;
    use crate::dispersion::{d_u0, d_v, morse_split_tol};

    fn crit(d: f64, a: f64, mu: f64) -> Params {
        Params::critical(d, a, mu, 1.0).unwrap()
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn max_re_reference_values() {
        let p = crit(1.0, 1.0, -1.0);
        let tr = trace_abs_spectrum(&p, p.s).unwrap();
        assert!((tr.max_re - 0.167432).abs() < 1e-4, "{}", tr.max_re);
        assert!((tr.max_re - full_triple_point(&p).unwrap().lambda.re).abs() < 1e-4);
        assert!(!tr.truncated);

        let p = crit(1.0, 1.0, -0.5);
        assert!((max_re_at(&p, p.s).unwrap() - 0.206445).abs() < 1e-4);
    }

    #[test]
    fn remnant_region_has_marginal_spectrum() {
        let p = crit(1.0, 1.0, -9.0);
        let m = max_re_at(&p, p.s).unwrap();
        assert!(m <= 1e-9 && m > -1e-6, "{m}");
    }

    #[test]
    fn curve_points_satisfy_both_relations() {
        let p = crit(1.0, 1.0, -1.0);
        let tr = trace_abs_spectrum(&p, p.s).unwrap();
        let mut n = 0;
        for b in &tr.curves {
            for q in b.points.iter().step_by(7) {
                let nu2 = q.nu + Complex64::new(0.0, q.k);
                let scale = 1.0 + q.lambda.norm() + q.nu.norm().powi(4) + nu2.norm().powi(4);
                match b.family {
                    Family::VV => {
                        assert!(d_v(q.lambda, q.nu, &p).norm() < 1e-10 * scale);
                        assert!(d_v(q.lambda, nu2, &p).norm() < 1e-10 * scale);
                    }
                    Family::UV => {
                        assert!(d_v(q.lambda, q.nu, &p).norm() < 1e-10 * scale);
                        assert!(d_u0(q.lambda, nu2, &p).norm() < 1e-10 * scale);
                    }
                    Family::UU => {
                        assert!(d_u0(q.lambda, q.nu, &p).norm() < 1e-10 * scale);
                        assert!(d_u0(q.lambda, nu2, &p).norm() < 1e-10 * scale);
                    }
                }
                assert!(morse_split_tol(q.lambda, &p, 1e-6).unwrap().in_abs);
                n += 1;
            }
        }
        assert!(n > 50);
    }

    #[test]
    fn curves_are_conjugation_symmetric() {
        let p = crit(0.5, 2.0, -1.0);
        let tr = trace_abs_spectrum(&p, p.s).unwrap();
        let all: Vec<Complex64> = tr.curves.iter().flat_map(|b| b.points.iter().map(|q| q.lambda)).collect();
        for z in all.iter().step_by(11) {
            assert!(all.iter().any(|w| (w - z.conj()).norm() < 1e-12));
        }
    }

    #[test]
    fn triple_point_found_by_trace() {
        let p = crit(1.0, 1.0, -1.0);
        let tr = trace_abs_spectrum(&p, p.s).unwrap();
        let want = full_triple_point(&p).unwrap().lambda;
        assert!(tr
            .singular_points
            .iter()
            .any(|sp| matches!(sp, SingularPoint::TriplePoint(t) if (t.lambda - want).norm() < 1e-6)));
    }

    #[test]
    fn s_abs_stops_when_already_stable() {
        let p = crit(1.0, 1.0, -9.0);
        assert!(s_abs(&p, p.s, 2.0 * p.s).is_err());
    }
}
