//! Post-processing of simulation traces: speed and decay fits, weights,
//! resonant wavenumber selection and the delay experiment.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run, Coupling, FrontTrace, SimConfig};
use crate::absspec::trace_abs_spectrum;
use crate::dispersion::{roots_u, sorted_roots, Relation, UState};
use crate::error::{Error, Result};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tracker {
    Core,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedFit {
    pub speed: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

/// Least squares line `y = slope x + intercept` with its coefficient of determination.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

fn window_indices(times: &[f64], window: (f64, f64)) -> Result<Vec<usize>> {
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::Range(format!("invalid window [{t0}, {t1}]")));
    }
    let (first, last) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Range("empty trace".into())),
    };
    let slack = 1e-9 * (1.0 + last.abs());
    if t0 < first - slack || t1 > last + slack {
        return Err(Error::Range(format!("window [{t0}, {t1}] outside trace [{first}, {last}]")));
    }
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= t0 - slack && times[i] <= t1 + slack).collect();
    if times.len() >= 2 {
        let spacing = (last - first) / (times.len() - 1) as f64;
        if t1 - t0 <= 10.0 * spacing {
            return Err(Error::Range(format!("window [{t0}, {t1}] spans fewer than ten output intervals")));
        }
    }
    if idx.len() < 3 {
        return Err(Error::Range("fewer than three samples in window".into()));
    }
    Ok(idx)
}

/// Fitted speed of a front tracker over a time window.
pub fn fit_speed(trace: &FrontTrace, window: (f64, f64), which: Tracker) -> Result<SpeedFit> {
    let idx = window_indices(&trace.times, window)?;
    let pos = match which {
        Tracker::Core => &trace.core_pos,
        Tracker::Edge => &trace.edge_pos,
    };
    let xs: Vec<f64> = idx.iter().map(|&i| trace.times[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| pos[i]).collect();
    let (speed, intercept, r2) = linear_fit(&xs, &ys);
    Ok(SpeedFit { speed, intercept, r2, n: xs.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `log weighted_norm` against `log(1 + t)`.
    pub exponent: f64,
    pub r2: f64,
    pub window: (f64, f64),
    /// Set when the tail rises above its running minimum by more than the noise allowance.
    pub low_confidence: bool,
}

/// Algebraic decay exponent of the weighted norm. Without a window the last
/// decade of the trace (from `max(1, T/10)` to `T`) is used.
pub fn weighted_decay(trace: &FrontTrace, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let t_end = *trace.times.last().ok_or_else(|| Error::Range("empty trace".into()))?;
    let window = window.unwrap_or(((t_end / 10.0).max(1.0), t_end));
    let idx = window_indices(&trace.times, window)?;
    let mut xs = Vec::with_capacity(idx.len());
    let mut ys = Vec::with_capacity(idx.len());
    for &i in &idx {
        let w = trace.weighted_norm[i];
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Range(format!("weighted norm not positive at t = {}", trace.times[i])));
        }
        xs.push((1.0 + trace.times[i]).ln());
        ys.push(w.ln());
    }
    let (exponent, _, r2) = linear_fit(&xs, &ys);
    let mut low = f64::INFINITY;
    let mut rises = false;
    for &y in &ys {
        if y > low + 0.1 {
            rises = true;
        }
        low = low.min(y);
    }
    Ok(DecayFit { exponent, r2, window, low_confidence: rises || r2 < 0.9 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLinearFit {
    /// Slope of `log v_sup_norm` against `t`.
    pub rate: f64,
    pub r2: f64,
}

/// Exponential rate of the v sup-norm over a window.
pub fn v_decay_rate(trace: &FrontTrace, window: (f64, f64)) -> Result<LogLinearFit> {
    let idx = window_indices(&trace.times, window)?;
    let xs: Vec<f64> = idx.iter().map(|&i| trace.times[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| trace.v_sup_norm[i].max(f64::MIN_POSITIVE).ln()).collect();
    let (rate, _, r2) = linear_fit(&xs, &ys);
    Ok(LogLinearFit { rate, r2 })
}

/// Exponential weights: rate `right` on `x >= 1`, rate `left` on `x <= -1`,
/// blended smoothly in between with value 1 at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub u_right: f64,
    pub u_left: f64,
    pub v_right: f64,
    pub v_left: f64,
}

impl WeightSpec {
    /// u-weight at the critical rate `s_star / 2d`; the v-weight uses the
    /// smallest rate allowed by the decay condition, one third of that.
    pub fn for_params(p: &Params, delta: f64) -> Self {
        let kappa = p.s_star() / (2.0 * p.d);
        WeightSpec { u_right: kappa, u_left: delta, v_right: kappa / 3.0, v_left: delta }
    }

    pub fn with_gamma_v(self, gamma_v: f64) -> Self {
        WeightSpec { v_right: gamma_v, ..self }
    }
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

fn blended_weight(x: f64, right: f64, left: f64) -> f64 {
    let chi = smooth_step((x + 1.0) / 2.0);
    (-right * x * chi + left * x * (1.0 - chi)).exp()
}

pub fn weight_u(x: f64, spec: &WeightSpec) -> f64 {
    blended_weight(x, spec.u_right, spec.u_left)
}

pub fn weight_v(x: f64, spec: &WeightSpec) -> f64 {
    blended_weight(x, spec.v_right, spec.v_left)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllStar {
    /// Wavenumber separating the resonant u- and v-modes.
    pub ell: f64,
    /// The v-root sharing its real part with the u-root.
    pub nu: Complex64,
    pub nu_u: Complex64,
    pub lambda_max: Complex64,
}

/// Resonant wavenumber at the most unstable point of the absolute spectrum at `s_star`.
pub fn ell_star(p: &Params) -> Result<EllStar> {
    let q = p.with_s(p.s_star());
    let spec = trace_abs_spectrum(&q, q.s)?;
    if !(spec.max_re > 0.0) {
        return Err(Error::NoResonance);
    }
    let lambda = spec.argmax.lambda;
    let lambda = if lambda.im < 0.0 { lambda.conj() } else { lambda };
    let (_, nu_u) = roots_u(lambda, &q, UState::AtZero);
    let vs = sorted_roots(Relation::V, lambda, &q)?;
    let nu = vs
        .into_iter()
        .min_by(|a, b| (a.re - nu_u.re).abs().total_cmp(&(b.re - nu_u.re).abs()))
        .expect("quartic has four roots");
    if (nu.re - nu_u.re).abs() > 1e-6 * (1.0 + nu_u.norm()) {
        return Err(Error::NoResonance);
    }
    Ok(EllStar { ell: (nu_u.im - nu.im).abs(), nu, nu_u, lambda_max: lambda })
}

/// Speed `-Re(lambda_ell) / Re(nu)` of the mode `e^{(nu + i ell) x}` forced in the u-equation.
pub fn envelope_speed(ell: f64, nu: Complex64, p: &Params) -> Result<f64> {
    if !(nu.re < 0.0) {
        return Err(Error::Domain(format!("envelope speed needs Re nu < 0, got {}", nu.re)));
    }
    let w = nu + Complex64::new(0.0, ell);
    let lambda = p.d * w * w + p.s * w + p.alpha;
    Ok(-lambda.re / nu.re)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayScan {
    pub betas: Vec<f64>,
    /// First time the edge leads the uncoupled run by more than the threshold.
    pub departures: Vec<Option<f64>>,
    /// Departure relative to the strongest coupling; `None` when censored.
    pub delays: Vec<Option<f64>>,
    pub slope_vs_log10beta: f64,
    pub intercept: f64,
    pub threshold: f64,
}

/// First time `edge - baseline_edge` exceeds `threshold`.
pub fn departure_time(trace: &FrontTrace, baseline: &FrontTrace, threshold: f64) -> Option<f64> {
    trace
        .times
        .iter()
        .zip(trace.edge_pos.iter().zip(&baseline.edge_pos))
        .find(|(_, (e, b))| *e - *b > threshold)
        .map(|(t, _)| *t)
}

/// Runs `template` for every coupling strength and an uncoupled baseline in
/// parallel and fits the delay of the resonant mode against `log10 beta`.
pub fn delay_scan(p: &Params, betas: &[f64], template: &SimConfig, threshold: f64) -> Result<DelayScan> {
    if betas.len() < 2 || betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::Config("delay scan needs at least two positive coupling strengths".into()));
    }
    if !matches!(template.coupling, Coupling::Cosine { .. }) {
        return Err(Error::Config("delay scan requires cosine coupling".into()));
    }
    let mut all = vec![0.0];
    all.extend_from_slice(betas);
    let traces: Vec<FrontTrace> = all
        .par_iter()
        .map(|&b| {
            let cfg = SimConfig { params: p.with_beta(b), ..template.clone() };
            run(&cfg).map(|r| r.trace)
        })
        .collect::<Result<_>>()?;
    let baseline = &traces[0];
    let departures: Vec<Option<f64>> = traces[1..].iter().map(|tr| departure_time(tr, baseline, threshold)).collect();
    let strongest = (0..betas.len()).max_by(|&i, &j| betas[i].total_cmp(&betas[j])).expect("nonempty");
    let origin = departures[strongest]
        .ok_or_else(|| Error::Range("the strongest coupling never departs from the baseline".into()))?;
    let delays: Vec<Option<f64>> = departures.iter().map(|d| d.map(|d| d - origin)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        betas.iter().zip(&delays).filter_map(|(b, d)| d.map(|d| (b.log10(), d))).unzip();
    if xs.len() < 2 {
        return Err(Error::Range("fewer than two uncensored delays".into()));
    }
    let (slope, intercept, _) = linear_fit(&xs, &ys);
    Ok(DelayScan { betas: betas.to_vec(), departures, delays, slope_vs_log10beta: slope, intercept, threshold })
}
