//! Classification of parameter points into stability regions, the decay rate
//! `gamma_v` of the v-component and region maps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::absspec::max_re_at;
use crate::dispersion::v_roots_raw;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::spectra::{region_boundaries, Boundaries};

const TIE_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Stable essential spectrum in a suitable weight.
    Rst,
    /// Remnant instability with stable absolute spectrum.
    Rrem,
    /// Unstable absolute spectrum without unstable resonance poles.
    Rabs,
    /// Pinched resonance poles in the unstable half-plane.
    Rpw,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Rst => "Rst",
            Region::Rrem => "Rrem",
            Region::Rabs => "Rabs",
            Region::Rpw => "Rpw",
        }
    }

    fn rank(self) -> u8 {
        self as u8
    }
}

/// Signed distances `mu - boundary`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub to_rem: f64,
    pub to_abs0: f64,
    pub to_pw: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub label: Region,
    pub margins: Margins,
    pub boundaries: Boundaries,
}

/// Region of `(d, alpha, mu)` in the frame of the linear spreading speed.
pub fn classify(d: f64, alpha: f64, mu: f64) -> Result<RegionLabel> {
    if !mu.is_finite() || mu >= 0.0 {
        return Err(Error::Domain(format!("mu must be negative, got {mu}")));
    }
    let b = region_boundaries(alpha, d)?;
    let label = if mu <= b.mu_rem.min(0.0) + TIE_BAND {
        Region::Rst
    } else if b.mu_pw.is_some_and(|pw| mu > pw + TIE_BAND) {
        Region::Rpw
    } else if mu > b.mu_abs0 + TIE_BAND {
        Region::Rabs
    } else {
        Region::Rrem
    };
    let margins = Margins { to_rem: mu - b.mu_rem, to_abs0: mu - b.mu_abs0, to_pw: b.mu_pw.map(|pw| mu - pw) };
    Ok(RegionLabel { label, margins, boundaries: b })
}

/// Sampling of the region `Omega`: `Re lambda in [mu, 0]`, `|lambda| < m_l`,
/// and not to the right of the weighted v-spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaSpec {
    pub m_l: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl OmegaSpec {
    pub fn for_params(p: &Params) -> Self {
        OmegaSpec { m_l: 4.0 * (1.0 + p.mu.abs() + p.alpha), n_re: 256, n_im: 256 }
    }

    pub fn refined(&self, factor: usize) -> Self {
        OmegaSpec { n_re: self.n_re * factor, n_im: self.n_im * factor, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaV {
    pub gamma: f64,
    pub argmax: Complex64,
    pub m_l: f64,
    /// `(Re lambda, max over Im lambda of the larger decaying root real part)`.
    pub profile: Vec<(f64, f64)>,
}

/// Roots of `D_v(lambda, .)` sorted by real part.
fn sorted_v(lambda: Complex64, p: &Params) -> Result<[Complex64; 4]> {
    let mut r = v_roots_raw(lambda, p)?;
    r.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(r)
}

/// `lambda` lies right of the spectrum weighted by `eta_star`: exactly two
/// roots with real part above `eta_star`.
fn right_of_weighted(r: &[Complex64; 4], eta_star: f64) -> bool {
    r.iter().filter(|z| z.re > eta_star).count() == 2
}

/// Real part of the slower-decaying of the two decaying v-roots, or `None`
/// outside `Omega`.
fn omega_value(lambda: Complex64, p: &Params, m_l: f64) -> Result<Option<f64>> {
    if lambda.re < p.mu || lambda.re > 0.0 || lambda.norm() >= m_l {
        return Ok(None);
    }
    let r = sorted_v(lambda, p)?;
    if right_of_weighted(&r, p.eta_star()) {
        return Ok(None);
    }
    // right of the unweighted spectrum the decaying pair carries labels 1, 2
    if !(r[1].re < 1e-12 && r[2].re > -1e-12) {
        return Err(Error::Consistency(format!("decaying roots not separated at lambda = {lambda}")));
    }
    Ok(Some(r[1].re))
}

fn nelder_mead(f: impl Fn(f64, f64) -> f64, start: (f64, f64), scale: (f64, f64)) -> (f64, f64, f64) {
    let mut pts = [
        (start.0, start.1),
        (start.0 + scale.0, start.1),
        (start.0, start.1 + scale.1),
    ];
    let mut vals = pts.map(|(x, y)| f(x, y));
    for _ in 0..400 {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (b, m, w) = (idx[0], idx[1], idx[2]);
        let spread = (vals[w] - vals[b]).abs();
        let size = ((pts[w].0 - pts[b].0).abs() + (pts[w].1 - pts[b].1).abs()).max((pts[m].0 - pts[b].0).abs() + (pts[m].1 - pts[b].1).abs());
        if spread < 1e-13 && size < 1e-10 {
            break;
        }
        let c = ((pts[b].0 + pts[m].0) / 2.0, (pts[b].1 + pts[m].1) / 2.0);
        let at = |t: f64| (c.0 + t * (pts[w].0 - c.0), c.1 + t * (pts[w].1 - c.1));
        let r = at(-1.0);
        let fr = f(r.0, r.1);
        if fr < vals[b] {
            let e = at(-2.0);
            let fe = f(e.0, e.1);
            if fe < fr {
                pts[w] = e;
                vals[w] = fe;
            } else {
                pts[w] = r;
                vals[w] = fr;
            }
        } else if fr < vals[m] {
            pts[w] = r;
            vals[w] = fr;
        } else {
            let k = if fr < vals[w] { at(-0.5) } else { at(0.5) };
            let fk = f(k.0, k.1);
            if fk < vals[w].min(fr) {
                pts[w] = k;
                vals[w] = fk;
            } else {
                for i in [m, w] {
                    pts[i] = ((pts[i].0 + pts[b].0) / 2.0, (pts[i].1 + pts[b].1) / 2.0);
                    vals[i] = f(pts[i].0, pts[i].1);
                }
            }
        }
    }
    let i = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[i].0, pts[i].1, vals[i])
}

/// Decay rate `gamma_v = -max Re nu_{1,2}(lambda)` over `lambda in Omega`.
pub fn gamma_v(p: &Params, omega: &OmegaSpec) -> Result<GammaV> {
    p.require_critical("gamma_v")?;
    if !(p.mu < 0.0) {
        return Err(Error::Domain("gamma_v needs mu < 0".into()));
    }
    if omega.n_re < 2 || omega.n_im < 2 || !(omega.m_l > 0.0) {
        return Err(Error::Domain("invalid Omega sampling".into()));
    }
    let m_l = omega.m_l;
    let rows: Vec<Result<(f64, f64, f64)>> = (0..omega.n_re)
        .into_par_iter()
        .map(|i| {
            let x = p.mu + (0.0 - p.mu) * i as f64 / (omega.n_re - 1) as f64;
            let y_cap = (m_l * m_l - x * x).max(0.0).sqrt() * (1.0 - 1e-12);
            let mut best = (f64::NEG_INFINITY, 0.0);
            let mut last_in: Option<f64> = None;
            for j in 0..omega.n_im {
                let y = y_cap * j as f64 / (omega.n_im - 1) as f64;
                match omega_value(Complex64::new(x, y), p, m_l)? {
                    Some(v) => {
                        if v > best.0 {
                            best = (v, y);
                        }
                        last_in = Some(y);
                    }
                    None => {
                        if let Some(a) = last_in.take() {
                            // locate the edge of Omega between a and y
                            let (mut lo, mut hi) = (a, y);
                            for _ in 0..50 {
                                let mid = 0.5 * (lo + hi);
                                if omega_value(Complex64::new(x, mid), p, m_l)?.is_some() {
                                    lo = mid;
                                } else {
                                    hi = mid;
                                }
                            }
                            if let Some(v) = omega_value(Complex64::new(x, lo), p, m_l)? {
                                if v > best.0 {
                                    best = (v, lo);
                                }
                            }
                        }
                    }
                }
            }
            Ok((x, best.1, best.0))
        })
        .collect();
    let rows: Vec<(f64, f64, f64)> = rows.into_iter().collect::<Result<_>>()?;

    let &(x0, y0, v0) = rows
        .iter()
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .expect("at least two rows");
    if !v0.is_finite() {
        return Err(Error::Domain("Omega is empty for these parameters".into()));
    }

    let h = ((0.0 - p.mu) / (omega.n_re - 1) as f64, m_l / (omega.n_im - 1) as f64);
    let objective = |x: f64, y: f64| match omega_value(Complex64::new(x, y.abs()), p, m_l) {
        Ok(Some(v)) => -v,
        _ => f64::INFINITY,
    };
    let (x1, y1, f1) = nelder_mead(objective, (x0, y0), (h.0.max(1e-6), h.1.max(1e-6)));
    let (arg, vmax) = if -f1 > v0 { (Complex64::new(x1, y1.abs()), -f1) } else { (Complex64::new(x0, y0), v0) };

    if vmax >= 0.0 {
        return Err(Error::Domain("Omega touches weighted-spectrum boundary".into()));
    }
    let profile = rows.iter().map(|&(x, _, v)| (x, v)).collect();
    Ok(GammaV { gamma: -vmax, argmax: arg, m_l, profile })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub ok: bool,
    /// `3 gamma_v - s_star / (2 d)`.
    pub margin: f64,
    pub gamma_v: f64,
    pub m_l: f64,
}

/// Decay-rate condition `3 gamma_v > s_star / (2d)`.
pub fn check_decay_condition(p: &Params) -> Result<DecayCheck> {
    let region = classify(p.d, p.alpha, p.mu)?.label;
    if !matches!(region, Region::Rrem | Region::Rabs) {
        return Err(Error::Domain(format!("decay condition is defined in Rrem and Rabs, not {}", region.name())));
    }
    let g = gamma_v(p, &OmegaSpec::for_params(p))?;
    let margin = 3.0 * g.gamma - p.s_star() / (2.0 * p.d);
    Ok(DecayCheck { ok: margin > 0.0, margin, gamma_v: g.gamma, m_l: g.m_l })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Plane {
    /// `x = d`, `y = alpha` at fixed `mu`.
    AlphaD { mu: f64 },
    /// `x = d`, `y = mu` at fixed `alpha`.
    MuD { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub y: f64,
    pub d: f64,
    pub alpha: f64,
    pub mu: f64,
    pub label: Region,
    pub boundaries: Boundaries,
    pub max_re: Option<f64>,
}

/// Region map on an `res x res` grid of cell centres over `x_range x y_range`.
pub fn sweep(plane: Plane, x_range: (f64, f64), y_range: (f64, f64), res: usize, with_max_re: bool) -> Result<Vec<SweepRow>> {
    if res == 0 || !(x_range.0 < x_range.1) || !(y_range.0 < y_range.1) {
        return Err(Error::Domain("sweep needs res > 0 and increasing ranges".into()));
    }
    let rows: Vec<Result<SweepRow>> = (0..res * res)
        .into_par_iter()
        .map(|n| {
            let (i, j) = (n % res, n / res);
            let x = x_range.0 + (x_range.1 - x_range.0) * (i as f64 + 0.5) / res as f64;
            let y = y_range.0 + (y_range.1 - y_range.0) * (j as f64 + 0.5) / res as f64;
            let (d, alpha, mu) = match plane {
                Plane::AlphaD { mu } => (x, y, mu),
                Plane::MuD { alpha } => (x, alpha, y),
            };
            let c = classify(d, alpha, mu)?;
            let max_re = if with_max_re {
                let p = Params::critical(d, alpha, mu, 1.0)?;
                Some(max_re_at(&p, p.s)?)
            } else {
                None
            };
            Ok(SweepRow { x, y, d, alpha, mu, label: c.label, boundaries: c.boundaries, max_re })
        })
        .collect();
    rows.into_iter().collect()
}

/// Labels met along increasing `mu` at fixed `(d, alpha)`, consecutive
/// repeats removed.
pub fn label_sequence(d: f64, alpha: f64, mus: &[f64]) -> Result<Vec<Region>> {
    let mut out: Vec<Region> = Vec::new();
    for &mu in mus {
        let l = classify(d, alpha, mu)?.label;
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    Ok(out)
}

/// Whether a label sequence only moves towards less stable regions.
pub fn is_monotone(seq: &[Region]) -> bool {
    seq.windows(2).all(|w| w[0].rank() < w[1].rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn golden_labels() {
        for (d, a, mu, want) in [
            (1.0, 1.0, -9.0, Region::Rrem),
            (1.0, 1.0, -1.0, Region::Rabs),
            (1.0, 1.0, -0.5, Region::Rabs),
            (0.5, 2.0, -1.0, Region::Rpw),
            (1.0, 1.0, -11.0, Region::Rst),
        ] {
            assert_eq!(classify(d, a, mu).unwrap().label, want, "{d} {a} {mu}");
        }
        assert!(classify(1.0, 1.0, 0.5).unwrap_err().is_domain());
    }

    #[test]
    fn ties_resolve_to_stable_side() {
        assert_eq!(classify(1.0, 1.0, -10.0).unwrap().label, Region::Rst);
        assert_eq!(classify(1.0, 1.0, -7.75).unwrap().label, Region::Rrem);
    }

    #[test]
    fn margins_agree_in_sign() {
        let c = classify(1.0, 1.0, -9.0).unwrap();
        assert!(c.margins.to_rem > 0.0 && c.margins.to_abs0 < 0.0);
    }

    #[test]
    fn gamma_v_reference() {
        let p = Params::critical(1.0, 1.0, -1.0, 1.0).unwrap();
        let g = gamma_v(&p, &OmegaSpec::for_params(&p)).unwrap();
        assert!((g.gamma - 0.3856).abs() < 2e-3, "{}", g.gamma);
        assert!(3.0 * g.gamma > 1.0);
        let c = check_decay_condition(&p).unwrap();
        assert!(c.ok && c.margin > 0.0);
    }

    #[test]
    fn decay_check_outside_regions_is_domain_error() {
        let p = Params::critical(0.5, 2.0, -1.0, 1.0).unwrap();
        assert!(check_decay_condition(&p).unwrap_err().is_domain());
    }

    #[test]
    fn four_labels_on_reference_plane() {
        let rows = sweep(Plane::AlphaD { mu: -1.0 / 3.0 }, (0.0, 4.0), (0.0, 6.0), 40, false).unwrap();
        for l in [Region::Rst, Region::Rrem, Region::Rabs, Region::Rpw] {
            assert!(rows.iter().any(|r| r.label == l), "{l:?} missing");
        }
        let again = sweep(Plane::AlphaD { mu: -1.0 / 3.0 }, (0.0, 4.0), (0.0, 6.0), 40, false).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn rst_band_in_mu_plane() {
        let rows = sweep(Plane::MuD { alpha: 3.0 }, (0.0, 4.0), (-40.0, -0.01), 20, false).unwrap();
        for r in rows {
            assert_eq!(r.label == Region::Rst, r.mu <= r.boundaries.mu_rem.min(0.0) + TIE_BAND);
        }
    }

    proptest! {
        #[test]
        fn labels_monotone_in_mu(d in 0.1..4.0f64, a in 0.1..6.0f64) {
            let mus: Vec<f64> = (1..=400).map(|i| -60.0 + 60.0 * i as f64 / 401.0).collect();
            let seq = label_sequence(d, a, &mus).unwrap();
            prop_assert!(is_monotone(&seq), "{:?}", seq);
            if seq.contains(&Region::Rpw) {
                prop_assert!(a - d - d * d / 2.0 > 0.0);
            }
        }

        #[test]
        fn remnant_possible_when_boundary_negative(d in 0.1..4.0f64, a in 0.1..6.0f64) {
            let b = region_boundaries(a, d).unwrap();
            if b.mu_rem < 0.0 {
                let mu = 0.5 * (b.mu_rem + b.mu_abs0.min(-1e-9));
                let l = classify(d, a, mu.min(-1e-9)).unwrap().label;
                prop_assert!(l != Region::Rpw);
            }
        }
    }
}
