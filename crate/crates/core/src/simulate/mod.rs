//! Finite-difference simulation of the coupled system in a comoving frame,
//! with front tracking and diagnostics.
//!
//! Time stepping is IMEX backward Euler: the linear v-operator and the
//! diffusion-advection part of the u-equation are implicit, reaction and
//! coupling are explicit at the old time level.

mod analysis;
pub mod banded;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use banded::BandedLu;

pub use analysis::{
    delay_scan, departure_time, ell_star, envelope_speed, fit_speed, v_decay_rate, weight_u, weight_v, weighted_decay, DecayFit,
    DelayScan, EllStar, LogLinearFit, SpeedFit, Tracker, WeightSpec,
};

/// Spatial profile `sigma(x)` multiplying the coupling term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coupling {
    Constant,
    Cosine { ell: f64 },
    /// Piecewise-linear interpolation of `(x, sigma)` pairs, constant beyond the ends.
    Table { points: Vec<(f64, f64)> },
}

impl Coupling {
    pub fn sigma(&self, x: f64) -> f64 {
        match self {
            Coupling::Constant => 1.0,
            Coupling::Cosine { ell } => (ell * x).cos(),
            Coupling::Table { points } => interpolate(points, x),
        }
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    match points.len() {
        0 => 0.0,
        1 => points[0].1,
        _ => {
            if x <= points[0].0 {
                return points[0].1;
            }
            let last = points[points.len() - 1];
            if x >= last.0 {
                return last.1;
            }
            let i = points.partition_point(|p| p.0 <= x);
            let (a, b) = (points[i - 1], points[i]);
            a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
        }
    }
}

/// Initial data: `u0 = (1 - tanh(steepness x)) / 2` and a Gaussian v-bump,
/// unless explicit profiles on the interior grid are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialData {
    pub steepness: f64,
    pub v_amplitude: f64,
    pub v_center: f64,
    pub v_width: f64,
    pub u_profile: Option<Vec<f64>>,
    pub v_profile: Option<Vec<f64>>,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData { steepness: 0.5, v_amplitude: 0.1, v_center: 0.0, v_width: 2.0, u_profile: None, v_profile: None }
    }
}

/// Reference trajectory for the weighted perturbation norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    None,
    /// A fixed profile on the interior grid.
    Frozen { profile: Vec<f64> },
    /// The uncoupled solution from the same initial data, advanced in lockstep.
    Companion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub params: Params,
    /// Domain is `[-half_length, half_length]`.
    pub half_length: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Speed of the comoving frame; `None` uses the linear spreading speed.
    pub s_frame: Option<f64>,
    pub coupling: Coupling,
    pub initial: InitialData,
    /// Time between recorded trace samples.
    pub output_every: f64,
    pub edge_threshold: f64,
    pub reference: Reference,
    /// Weight rate behind the interface.
    pub weight_delta: f64,
    pub snapshot_times: Vec<f64>,
    /// The run stops once the leading edge is this close to the right boundary.
    pub boundary_guard: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            params: Params { d: 1.0, alpha: 1.0, mu: -1.0, beta: 0.0, s: 2.0 },
            half_length: 200.0,
            dx: 0.1,
            dt: 0.05,
            t_final: 100.0,
            s_frame: None,
            coupling: Coupling::Constant,
            initial: InitialData::default(),
            output_every: 1.0,
            edge_threshold: 1e-3,
            reference: Reference::None,
            weight_delta: 1e-3,
            snapshot_times: Vec::new(),
            boundary_guard: 20.0,
        }
    }
}

impl SimConfig {
    pub fn frame_speed(&self) -> f64 {
        self.s_frame.unwrap_or_else(|| self.params.s_star())
    }

    /// Interior grid `x_i = -L + i dx`, `i = 1 .. N-2`.
    pub fn grid(&self) -> Vec<f64> {
        let cells = (2.0 * self.half_length / self.dx).round() as usize;
        (1..cells).map(|i| -self.half_length + i as f64 * self.dx).collect()
    }

    pub fn initial_fields(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = self.grid();
        let ic = &self.initial;
        let u = match &ic.u_profile {
            Some(u) if u.len() == x.len() => u.clone(),
            Some(u) => return Err(Error::Config(format!("u profile has {} points, grid has {}", u.len(), x.len()))),
            None => x.iter().map(|&x| 0.5 * (1.0 - (ic.steepness * x).tanh())).collect(),
        };
        let v = match &ic.v_profile {
            Some(v) if v.len() == x.len() => v.clone(),
            Some(v) => return Err(Error::Config(format!("v profile has {} points, grid has {}", v.len(), x.len()))),
            None => x
                .iter()
                .map(|&x| ic.v_amplitude * (-((x - ic.v_center) / ic.v_width).powi(2)).exp())
                .collect(),
        };
        Ok((u, v))
    }

    /// Largest stable step for the explicit reaction and coupling terms.
    pub fn dt_max(&self, u0: &[f64]) -> f64 {
        let umax = u0.iter().fold(0.0_f64, |m, u| m.max(u.abs()));
        let smax = self.grid().iter().fold(0.0_f64, |m, &x| m.max(self.coupling.sigma(x).abs()));
        0.5 / (self.params.alpha * (1.0 + umax * umax) + self.params.beta.abs() * smax)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        let finite = [self.half_length, self.dx, self.dt, self.t_final, self.output_every];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite numerical setting".into()));
        }
        if !(self.dx > 0.0 && self.dt > 0.0 && self.half_length > 0.0) {
            return Err(Error::Config("dx, dt and L must be positive".into()));
        }
        let ratio = self.half_length / self.dx;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 4.0 {
            return Err(Error::Config("L / dx must be an integer of at least 4".into()));
        }
        if !(self.t_final >= 0.0 && self.output_every > 0.0) {
            return Err(Error::Config("t_final must be nonnegative and output_every positive".into()));
        }
        if self.frame_speed() < 0.0 || !self.frame_speed().is_finite() {
            return Err(Error::Config("frame speed must be nonnegative".into()));
        }
        let (u0, _) = self.initial_fields()?;
        let bound = self.dt_max(&u0);
        if self.dt > bound {
            return Err(Error::Config(format!("dt = {} exceeds the explicit bound {bound}", self.dt)));
        }
        if let Reference::Frozen { profile } = &self.reference {
            if profile.len() != u0.len() {
                return Err(Error::Config("frozen reference does not match the grid".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    /// Rightmost crossing of `u = 1/2`.
    pub core_pos: Vec<f64>,
    /// Rightmost point with `|u|` above the edge threshold.
    pub edge_pos: Vec<f64>,
    /// `sup |u - reference| / (omega (1 + |x|))`; NaN without a reference.
    pub weighted_norm: Vec<f64>,
    pub v_sup_norm: Vec<f64>,
}

impl FrontTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    pub trace: FrontTrace,
    pub snapshots: Vec<Snapshot>,
    /// Time at which the run stopped because the edge neared the boundary.
    pub stopped_early: Option<f64>,
}

/// Linear crossing position of `level` by the interpolant between nodes `i` and `i + 1`.
fn crossing(x: &[f64], f: &[f64], i: usize, level: f64) -> f64 {
    let (a, b) = (f[i], f[i + 1]);
    if a == b {
        x[i]
    } else {
        x[i] + (x[i + 1] - x[i]) * (a - level) / (a - b)
    }
}

/// Rightmost downward crossing of `1/2`.
pub fn core_position(x: &[f64], u: &[f64], left: f64) -> f64 {
    (0..u.len().saturating_sub(1))
        .rev()
        .find(|&i| u[i] >= 0.5 && u[i + 1] < 0.5)
        .map_or(left, |i| crossing(x, u, i, 0.5))
}

/// Rightmost point where `|u|` falls below `threshold`.
pub fn edge_position(x: &[f64], u: &[f64], threshold: f64, left: f64) -> f64 {
    match (0..u.len()).rev().find(|&i| u[i].abs() > threshold) {
        None => left,
        Some(i) if i + 1 < u.len() => {
            let a = u[i].abs();
            let b = u[i + 1].abs();
            x[i] + (x[i + 1] - x[i]) * (a - threshold) / (a - b)
        }
        Some(i) => x[i],
    }
}

/// Implicit operators shared by every step of a run.
struct Operators {
    v_lu: BandedLu<f64>,
    u_lu: BandedLu<f64>,
    /// Contribution of the left Dirichlet value `u = 1` to the first row.
    u_left: f64,
}

impl Operators {
    fn new(n: usize, p: &Params, s: f64, dx: f64, dt: f64) -> Result<Self> {
        let h2 = dx * dx;
        let h4 = h2 * h2;
        // v: (1 + dt(1 - mu)) I + dt D4 + 2 dt D2 - dt s D1
        let mut d = vec![vec![0.0; n]; 5];
        for i in 0..n {
            d[0][i] = dt / h4;
            d[1][i] = -4.0 * dt / h4 + 2.0 * dt / h2 + dt * s / (2.0 * dx);
            d[2][i] = 1.0 + dt * (1.0 - p.mu) + 6.0 * dt / h4 - 4.0 * dt / h2;
            d[3][i] = -4.0 * dt / h4 + 2.0 * dt / h2 - dt * s / (2.0 * dx);
            d[4][i] = dt / h4;
        }
        // ghost values v_{-1} = -v_1 from v = v_xx = 0 at both ends
        d[2][0] -= dt / h4;
        d[2][n - 1] -= dt / h4;
        let v_lu = BandedLu::factor(n, 2, 2, &d)?;

        let mut e = vec![vec![0.0; n]; 3];
        for i in 0..n {
            e[0][i] = -dt * (p.d / h2 - s / (2.0 * dx));
            e[1][i] = 1.0 + 2.0 * dt * p.d / h2;
            e[2][i] = -dt * (p.d / h2 + s / (2.0 * dx));
        }
        let u_lu = BandedLu::factor(n, 1, 1, &e)?;
        Ok(Operators { v_lu, u_lu, u_left: dt * (p.d / h2 - s / (2.0 * dx)) })
    }

    fn step_u(&self, u: &mut [f64], v: &[f64], sigma: &[f64], p: &Params, dt: f64) {
        for i in 0..u.len() {
            let w = u[i];
            u[i] = w + dt * (p.alpha * w * (1.0 - w * w) + p.beta * sigma[i] * v[i]);
        }
        u[0] += self.u_left;
        self.u_lu.solve(u);
    }
}

fn weighted_sup(x: &[f64], u: &[f64], reference: &[f64], spec: &WeightSpec) -> f64 {
    x.iter()
        .zip(u.iter().zip(reference))
        .map(|(&x, (a, b))| (a - b).abs() / (weight_u(x, spec) * (1.0 + x.abs())))
        .fold(0.0, f64::max)
}

/// Runs the simulation described by `cfg`.
pub fn run(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let p = cfg.params;
    let s = cfg.frame_speed();
    let x = cfg.grid();
    let n = x.len();
    let (mut u, mut v) = cfg.initial_fields()?;
    let sigma: Vec<f64> = x.iter().map(|&x| cfg.coupling.sigma(x)).collect();
    let ops = Operators::new(n, &p, s, cfg.dx, cfg.dt)?;
    let spec = WeightSpec::for_params(&p, cfg.weight_delta);

    let mut companion = match cfg.reference {
        Reference::Companion => Some(u.clone()),
        _ => None,
    };
    let zero_v = vec![0.0; n];

    let steps = (cfg.t_final / cfg.dt).round() as usize;
    let every = ((cfg.output_every / cfg.dt).round() as usize).max(1);
    let left = -cfg.half_length;
    let mut trace = FrontTrace::default();
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = cfg.snapshot_times.clone();
    pending.sort_by(|a, b| a.total_cmp(b));
    pending.reverse();

    let record = |t: f64, u: &[f64], v: &[f64], companion: &Option<Vec<f64>>, trace: &mut FrontTrace| {
        let wn = match (&cfg.reference, companion) {
            (Reference::Companion, Some(c)) => weighted_sup(&x, u, c, &spec),
            (Reference::Frozen { profile }, _) => weighted_sup(&x, u, profile, &spec),
            _ => f64::NAN,
        };
        trace.times.push(t);
        trace.core_pos.push(core_position(&x, u, left));
        trace.edge_pos.push(edge_position(&x, u, cfg.edge_threshold, left));
        trace.weighted_norm.push(wn);
        trace.v_sup_norm.push(v.iter().fold(0.0, |m: f64, a| m.max(a.abs())));
    };

    record(0.0, &u, &v, &companion, &mut trace);
    while pending.last().is_some_and(|&ts| ts <= 0.0) {
        pending.pop();
        snapshots.push(Snapshot { t: 0.0, u: u.clone(), v: v.clone() });
    }

    let mut stopped_early = None;
    let mut t = 0.0;
    for k in 1..=steps {
        ops.step_u(&mut u, &v, &sigma, &p, cfg.dt);
        if let Some(c) = companion.as_mut() {
            ops.step_u(c, &zero_v, &sigma, &p, cfg.dt);
        }
        ops.v_lu.solve(&mut v);
        t = k as f64 * cfg.dt;

        if u.iter().chain(v.iter()).any(|a| !a.is_finite() || a.abs() > 1e100) {
            return Err(Error::Blowup { t });
        }
        while pending.last().is_some_and(|&ts| ts <= t + 1e-9 * cfg.dt) {
            pending.pop();
            snapshots.push(Snapshot { t, u: u.clone(), v: v.clone() });
        }
        if k % every == 0 || k == steps {
            record(t, &u, &v, &companion, &mut trace);
            let edge = *trace.edge_pos.last().expect("just recorded");
            if edge > cfg.half_length - cfg.boundary_guard {
                stopped_early = Some(t);
                break;
            }
        }
    }
    Ok(SimResult { x, u, v, t, trace, snapshots, stopped_early })
}
