//! One handler per subcommand.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clap::parser::ValueSource;
use clap::ArgMatches;
use frontlab_core::absspec::{
    double_roots_closed, double_roots_numeric, full_triple_point, s_abs_with, sh_abs_closed, trace_with, DoubleRoot,
    LambdaBox, SingularPoint, TraceOptions,
};
use frontlab_core::export::{Cell, Table};
use frontlab_core::greens::{g12_profile, g22};
use frontlab_core::regions::{check_decay_condition, classify, gamma_v, sweep, OmegaSpec, Plane, Region};
use frontlab_core::simulate::{delay_scan, ell_star, fit_speed, run, Coupling, Reference, SimConfig, Tracker};
use frontlab_core::spectra::{default_k_max, ess_curve, region_boundaries};
use frontlab_core::{c64, Complex64, Component, Error, Params};
use serde_json::{json, Value};

use crate::args::{Cli, Command, ComponentArg, CouplingArg, GreensKind, GridArgs, ParamArgs, PlaneArg};
use crate::repro;
use crate::report::Report;

pub fn dispatch(cli: &Cli, matches: &ArgMatches) -> Result<()> {
    let out = cli.out.as_deref();
    let report = match &cli.command {
        Command::Classify { params, decay } => classify_cmd(params, *decay)?,
        Command::Boundaries { params } => boundaries_cmd(params)?,
        Command::EssSpectrum { params, component, eta, k_max, n } => ess_cmd(params, *component, *eta, *k_max, *n)?,
        Command::AbsSpectrum { params, k_step } => abs_cmd(params, *k_step)?,
        Command::DoubleRoots { params, numeric, grid } => double_roots_cmd(params, *numeric, *grid)?,
        Command::TriplePoint { params } => triple_cmd(params)?,
        Command::ShAbs { params, n } => sh_abs_cmd(params, *n)?,
        Command::Sabs { params, s_hi, tol } => sabs_cmd(params, *s_hi, *tol)?,
        Command::GammaV { params, grid } => gamma_cmd(params, *grid)?,
        Command::CheckPi { params } => check_pi_cmd(params)?,
        Command::Greens { params, kind, lambda_re, lambda_im, y, x_min, x_max, n } => {
            greens_cmd(params, *kind, c64(*lambda_re, *lambda_im), *y, (*x_min, *x_max), *n)?
        }
        Command::Simulate { params, grid, config, coupling, ell, companion, snapshots, snapshot_dir, fit_window } => {
            let sub = matches.subcommand_matches("simulate").expect("simulate matches");
            let cfg = simulate_config(params, grid, config.as_deref(), *coupling, *ell, *companion, snapshots, sub)?;
            simulate_cmd(&cfg, snapshot_dir.as_deref(), fit_window)?
        }
        Command::DelayScan { params, grid, betas, ell, threshold } => delay_cmd(params, grid, betas, *ell, *threshold)?,
        Command::Sweep { plane, fixed, x_range, y_range, res, max_re } => {
            sweep_cmd(*plane, *fixed, (x_range[0], x_range[1]), (y_range[0], y_range[1]), *res, *max_re)?
        }
        Command::ReproFigure { id, res, t_final } => {
            let dir = out.map(Path::to_path_buf).unwrap_or_else(|| repro::default_dir(*id));
            return repro::write(*id, &dir, *res, *t_final, cli.format);
        }
    };
    report.emit(cli.format, out)
}

pub fn cx(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn classify_cmd(params: &ParamArgs, decay: bool) -> Result<Report> {
    let label = classify(params.d, params.alpha, params.mu)?;
    let mut v = json!({
        "d": params.d,
        "alpha": params.alpha,
        "mu": params.mu,
        "label": label.label.name(),
        "boundaries": label.boundaries,
        "margins": label.margins,
    });
    if decay && matches!(label.label, Region::Rrem | Region::Rabs) {
        let c = check_decay_condition(&params.invasion_params()?)?;
        v["gamma_v"] = json!(c.gamma_v);
        v["decay_ok"] = json!(c.ok);
        v["decay_margin"] = json!(c.margin);
    }
    Ok(Report::summary(v))
}

fn boundaries_cmd(params: &ParamArgs) -> Result<Report> {
    let b = region_boundaries(params.alpha, params.d)?;
    Ok(Report::summary(json!({
        "d": params.d,
        "alpha": params.alpha,
        "mu_rem": b.mu_rem,
        "mu_abs0": b.mu_abs0,
        "mu_pw": b.mu_pw,
    })))
}

fn ess_cmd(params: &ParamArgs, component: ComponentArg, eta: Option<f64>, k_max: Option<f64>, n: usize) -> Result<Report> {
    let p = params.invasion_params()?;
    let eta = eta.unwrap_or(p.eta_star());
    let k_max = k_max.unwrap_or(default_k_max(eta));
    let comps = match component {
        ComponentArg::U => vec![Component::U],
        ComponentArg::V => vec![Component::V],
        ComponentArg::Both => vec![Component::U, Component::V],
    };
    let mut table = Table::new(&["component", "k", "re", "im"]);
    let mut growth = serde_json::Map::new();
    for c in comps {
        let curve = ess_curve(c, eta, k_max, n, &p)?;
        let best = curve.samples.iter().map(|(_, l)| l.re).fold(f64::NEG_INFINITY, f64::max);
        growth.insert(c.name().to_string(), json!(best));
        for (k, l) in &curve.samples {
            table.push(vec![c.name().into(), (*k).into(), l.re.into(), l.im.into()]);
        }
    }
    Ok(Report::with_table(json!({ "eta": eta, "k_max": k_max, "max_re": growth }), table))
}

fn singular_json(sp: &SingularPoint) -> Value {
    match sp {
        SingularPoint::DoubleRoot(d) => double_root_json(d),
        SingularPoint::TriplePoint(t) => json!({
            "type": "triple_point",
            "lambda": cx(t.lambda),
            "eta": t.eta,
            "members": t.members,
        }),
    }
}

fn double_root_json(d: &DoubleRoot) -> Value {
    json!({
        "type": "double_root",
        "kind": d.kind.name(),
        "lambda": cx(d.lambda),
        "nu": cx(d.nu),
        "pinched": d.pinched,
        "simple": d.simple,
    })
}

fn abs_cmd(params: &ParamArgs, k_step: f64) -> Result<Report> {
    let p = params.invasion_params()?;
    let spec = trace_with(&p, p.s, &TraceOptions { k_step, ..TraceOptions::default() })?;
    let mut table = Table::new(&["branch", "family", "k", "re", "im", "nu_re", "nu_im"]);
    for b in &spec.curves {
        for x in &b.points {
            table.push(vec![
                b.id.into(),
                b.family.name().into(),
                x.k.into(),
                x.lambda.re.into(),
                x.lambda.im.into(),
                x.nu.re.into(),
                x.nu.im.into(),
            ]);
        }
    }
    let summary = json!({
        "s": spec.s,
        "max_re": spec.max_re,
        "argmax": { "lambda": cx(spec.argmax.lambda), "nu": cx(spec.argmax.nu), "k": spec.argmax.k },
        "argmax_family": spec.argmax_family.name(),
        "truncated": spec.truncated,
        "singular_points": spec.singular_points.iter().map(singular_json).collect::<Vec<_>>(),
    });
    Ok(Report::with_table(summary, table))
}

fn double_root_table(roots: &[DoubleRoot]) -> Table {
    let mut table = Table::new(&["kind", "re", "im", "nu_re", "nu_im", "pinched"]);
    for d in roots {
        table.push(vec![
            d.kind.name().into(),
            d.lambda.re.into(),
            d.lambda.im.into(),
            d.nu.re.into(),
            d.nu.im.into(),
            d.pinched.to_string().into(),
        ]);
    }
    table
}

fn double_roots_cmd(params: &ParamArgs, numeric: bool, grid: usize) -> Result<Report> {
    let p = params.invasion_params()?;
    let closed = double_roots_closed(&p)?;
    let roots = if numeric {
        let (mut lo, mut hi) = (c64(f64::INFINITY, f64::INFINITY), c64(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for d in &closed {
            lo = c64(lo.re.min(d.lambda.re), lo.im.min(d.lambda.im));
            hi = c64(hi.re.max(d.lambda.re), hi.im.max(d.lambda.im));
        }
        let bbox = LambdaBox::new((lo.re - 1.0, hi.re + 1.0), (lo.im - 1.0, hi.im + 1.0))?;
        double_roots_numeric(&p, &bbox, grid)?
    } else {
        closed
    };
    let summary = json!({
        "s": p.s,
        "method": if numeric { "numeric" } else { "closed" },
        "count": roots.len(),
    });
    Ok(Report::with_table(summary, double_root_table(&roots)))
}

fn triple_cmd(params: &ParamArgs) -> Result<Report> {
    let p = params.invasion_params()?;
    let t = full_triple_point(&p)?;
    Ok(Report::summary(json!({ "lambda": cx(t.lambda), "eta": t.eta, "members": t.members })))
}

fn sh_abs_cmd(params: &ParamArgs, n: usize) -> Result<Report> {
    let p = params.invasion_params()?;
    let sh = sh_abs_closed(&p)?;
    let mut table = Table::new(&["eta", "re", "im"]);
    for (eta, l) in sh.sample_branch(n)? {
        table.push(vec![eta.into(), l.re.into(), l.im.into()]);
    }
    let summary = json!({
        "s": sh.s,
        "mu": sh.mu,
        "eta_tr": sh.eta_tr,
        "lambda_tr": sh.lambda_tr,
        "eta_dr": sh.eta_dr,
        "lambda_dr": sh.lambda_dr.iter().map(|z| cx(*z)).collect::<Vec<_>>(),
    });
    Ok(Report::with_table(summary, table))
}

fn sabs_cmd(params: &ParamArgs, s_hi: Option<f64>, tol: f64) -> Result<Report> {
    let p = params.invasion_params()?;
    let lo = p.s_star();
    let hi = s_hi.unwrap_or(2.0 * lo);
    let s = s_abs_with(&p, lo, hi, tol)?;
    Ok(Report::summary(json!({ "d": p.d, "alpha": p.alpha, "mu": p.mu, "s_star": lo, "s_abs": s })))
}

fn gamma_cmd(params: &ParamArgs, grid: usize) -> Result<Report> {
    let p = params.invasion_params()?;
    let spec = OmegaSpec { n_re: grid, n_im: grid, ..OmegaSpec::for_params(&p) };
    let g = gamma_v(&p, &spec)?;
    let mut table = Table::new(&["re_lambda", "gamma"]);
    for (x, y) in &g.profile {
        table.push(vec![(*x).into(), (*y).into()]);
    }
    Ok(Report::with_table(json!({ "gamma_v": g.gamma, "argmax": cx(g.argmax), "m_l": g.m_l }), table))
}

fn check_pi_cmd(params: &ParamArgs) -> Result<Report> {
    let p = params.invasion_params()?;
    let c = check_decay_condition(&p)?;
    Ok(Report::summary(json!({
        "ok": c.ok,
        "margin": c.margin,
        "gamma_v": c.gamma_v,
        "threshold": p.s_star() / (2.0 * p.d),
        "m_l": c.m_l,
    })))
}

fn greens_cmd(params: &ParamArgs, kind: GreensKind, lambda: Complex64, y: f64, xs: (f64, f64), n: usize) -> Result<Report> {
    let p = params.invasion_params()?;
    if n < 2 || !(xs.0 < xs.1) {
        return Err(Error::Domain("need n >= 2 and x_min < x_max".into()).into());
    }
    let grid: Vec<f64> = (0..n).map(|i| xs.0 + (xs.1 - xs.0) * i as f64 / (n - 1) as f64).collect();
    let values: Vec<Complex64> = match kind {
        GreensKind::G22 => grid.iter().map(|&x| g22(lambda, x, y, &p)).collect::<frontlab_core::Result<_>>()?,
        GreensKind::G12 => g12_profile(lambda, y, &grid, &p)?,
    };
    let mut table = Table::new(&["x", "re", "im"]);
    for (x, v) in grid.iter().zip(&values) {
        table.push(vec![(*x).into(), v.re.into(), v.im.into()]);
    }
    let name = match kind {
        GreensKind::G22 => "g22",
        GreensKind::G12 => "g12",
    };
    Ok(Report::with_table(json!({ "kind": name, "lambda": cx(lambda), "y": y }), table))
}

fn explicit(m: &ArgMatches, id: &str) -> bool {
    matches!(m.value_source(id), Some(ValueSource::CommandLine) | Some(ValueSource::EnvVariable))
}

#[allow(clippy::too_many_arguments)]
fn simulate_config(
    params: &ParamArgs,
    grid: &GridArgs,
    config: Option<&Path>,
    coupling: CouplingArg,
    ell: Option<f64>,
    companion: bool,
    snapshots: &[f64],
    m: &ArgMatches,
) -> Result<SimConfig> {
    let mut cfg = match config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<SimConfig>(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => SimConfig::default(),
    };
    let fresh = config.is_none();
    let pr = &mut cfg.params;
    for (id, slot, value) in [
        ("d", &mut pr.d, params.d),
        ("alpha", &mut pr.alpha, params.alpha),
        ("mu", &mut pr.mu, params.mu),
        ("beta", &mut pr.beta, params.beta),
    ] {
        if fresh || explicit(m, id) {
            *slot = value;
        }
    }
    cfg.params.s = cfg.params.s_star();
    if params.s.is_some() {
        cfg.s_frame = params.s;
    }
    params_check(&cfg.params)?;
    grid.apply(&mut cfg);
    if fresh || explicit(m, "coupling") || ell.is_some() {
        cfg.coupling = match coupling {
            CouplingArg::Constant if ell.is_none() => Coupling::Constant,
            _ => Coupling::Cosine { ell: ell.map_or_else(|| ell_star(&cfg.params).map(|e| e.ell), Ok)? },
        };
    }
    if companion {
        cfg.reference = Reference::Companion;
    }
    if !snapshots.is_empty() {
        cfg.snapshot_times = snapshots.to_vec();
    }
    Ok(cfg)
}

fn params_check(p: &Params) -> Result<()> {
    p.validate()?;
    if !(p.mu < 0.0) {
        return Err(Error::Domain(format!("mu must be negative, got {}", p.mu)).into());
    }
    Ok(())
}

pub fn trace_table(trace: &frontlab_core::FrontTrace) -> Table {
    let mut table = Table::new(&["t", "core_pos", "edge_pos", "weighted_norm", "v_sup"]);
    for i in 0..trace.len() {
        table.push(vec![
            trace.times[i].into(),
            trace.core_pos[i].into(),
            trace.edge_pos[i].into(),
            trace.weighted_norm[i].into(),
            trace.v_sup_norm[i].into(),
        ]);
    }
    table
}

fn snapshot_table(x: &[f64], u: &[f64], v: &[f64]) -> Table {
    let mut table = Table::new(&["x", "u", "v"]);
    for i in 0..x.len() {
        table.push(vec![x[i].into(), u[i].into(), v[i].into()]);
    }
    table
}

/// Speed fits over `window`, or over the second half of the recorded trace.
pub fn speed_summary(trace: &frontlab_core::FrontTrace, window: Option<(f64, f64)>, s_frame: f64) -> Value {
    let end = trace.times.last().copied().unwrap_or(0.0);
    let window = window.unwrap_or((end / 2.0, end));
    let mut v = json!({ "window": [window.0, window.1], "s_frame": s_frame });
    for (name, which) in [("core", Tracker::Core), ("edge", Tracker::Edge)] {
        v[name] = match fit_speed(trace, window, which) {
            Ok(f) => json!({ "speed": f.speed, "lab_speed": f.speed + s_frame, "r2": f.r2 }),
            Err(e) => json!({ "error": e.to_string() }),
        };
    }
    v
}

fn simulate_cmd(cfg: &SimConfig, snapshot_dir: Option<&Path>, fit_window: &[f64]) -> Result<Report> {
    let window = match fit_window {
        [] => None,
        [a, b] => Some((*a, *b)),
        _ => return Err(Error::Config("fit window takes two values t0,t1".into()).into()),
    };
    let res = run(cfg)?;
    if let Some(dir) = snapshot_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for snap in &res.snapshots {
            let path = dir.join(format!("snapshot_t{:09.3}.csv", snap.t));
            snapshot_table(&res.x, &snap.u, &snap.v).write_csv(&path)?;
        }
    }
    let mut summary = json!({
        "config": cfg,
        "t_end": res.t,
        "stopped_early": res.stopped_early,
        "fits": speed_summary(&res.trace, window, cfg.frame_speed()),
        "snapshots": res.snapshots.iter().map(|s| s.t).collect::<Vec<_>>(),
    });
    summary["config"]["initial"]["u_profile"] = Value::Null;
    summary["config"]["initial"]["v_profile"] = Value::Null;
    Ok(Report::with_table(summary, trace_table(&res.trace)))
}

pub fn delay_template(p: &Params, ell: f64, grid: &GridArgs) -> SimConfig {
    let mut cfg = SimConfig {
        params: *p,
        half_length: 600.0,
        dx: 0.1,
        dt: 0.05,
        t_final: 500.0,
        output_every: 0.25,
        coupling: Coupling::Cosine { ell },
        ..SimConfig::default()
    };
    grid.apply(&mut cfg);
    cfg
}

fn delay_cmd(params: &ParamArgs, grid: &GridArgs, betas: &[f64], ell: Option<f64>, threshold: f64) -> Result<Report> {
    let p = params.invasion_params()?.with_s(params.invasion_params()?.s_star());
    let resonance = ell_star(&p)?;
    let ell = ell.unwrap_or(resonance.ell);
    let template = delay_template(&p, ell, grid);
    let scan = delay_scan(&p, betas, &template, threshold)?;
    let predicted = -(10f64.ln()) / resonance.lambda_max.re;
    let mut table = Table::new(&["beta", "log10_beta", "departure", "delay"]);
    for i in 0..scan.betas.len() {
        let opt = |x: Option<f64>| x.map_or(Cell::Text("censored".into()), Cell::Num);
        table.push(vec![
            scan.betas[i].into(),
            scan.betas[i].log10().into(),
            opt(scan.departures[i]),
            opt(scan.delays[i]),
        ]);
    }
    let summary = json!({
        "ell": ell,
        "lambda_max": cx(resonance.lambda_max),
        "slope_vs_log10beta": scan.slope_vs_log10beta,
        "predicted_slope": predicted,
        "threshold": threshold,
    });
    Ok(Report::with_table(summary, table))
}

pub fn sweep_table(rows: &[frontlab_core::regions::SweepRow]) -> Table {
    let mut table = Table::new(&["x", "y", "d", "alpha", "mu", "label", "mu_rem", "mu_abs0", "mu_pw", "max_re"]);
    for r in rows {
        table.push(vec![
            r.x.into(),
            r.y.into(),
            r.d.into(),
            r.alpha.into(),
            r.mu.into(),
            r.label.name().into(),
            r.boundaries.mu_rem.into(),
            r.boundaries.mu_abs0.into(),
            r.boundaries.mu_pw.map_or(Cell::Text(String::new()), Cell::Num),
            r.max_re.map_or(Cell::Text(String::new()), Cell::Num),
        ]);
    }
    table
}

pub fn plane(plane: PlaneArg, fixed: f64) -> Plane {
    match plane {
        PlaneArg::AlphaD => Plane::AlphaD { mu: fixed },
        PlaneArg::MuD => Plane::MuD { alpha: fixed },
    }
}

fn sweep_cmd(pl: PlaneArg, fixed: f64, xr: (f64, f64), yr: (f64, f64), res: usize, max_re: bool) -> Result<Report> {
    let rows = sweep(plane(pl, fixed), xr, yr, res, max_re)?;
    let mut counts = serde_json::Map::new();
    for r in [Region::Rst, Region::Rrem, Region::Rabs, Region::Rpw] {
        counts.insert(r.name().into(), json!(rows.iter().filter(|x| x.label == r).count()));
    }
    let summary = json!({ "plane": format!("{:?}", plane(pl, fixed)), "res": res, "counts": counts });
    Ok(Report::with_table(summary, sweep_table(&rows)))
}
