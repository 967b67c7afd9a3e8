//! Data bundles behind the reference figures, one directory per figure.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use frontlab_core::absspec::{sh_abs_closed, trace_abs_spectrum, SingularPoint};
use frontlab_core::export::Table;
use frontlab_core::regions::{gamma_v, sweep, OmegaSpec, Plane};
use frontlab_core::simulate::{delay_scan, ell_star, run, Coupling, SimConfig};
use frontlab_core::Params;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{FigureId, Format, GridArgs};
use crate::commands::{cx, delay_template, speed_summary, sweep_table, trace_table};
use crate::report::{rounded, Report};

pub fn default_dir(id: FigureId) -> PathBuf {
    let name = match id {
        FigureId::Regions => "regions",
        FigureId::ShAbs => "sh-abs",
        FigureId::AbsSpec => "abs-spec",
        FigureId::CheckingHypothesis => "checking-hypothesis",
        FigureId::SimGrid => "sim-grid",
        FigureId::Delay => "delay",
    };
    PathBuf::from(format!("repro-{name}"))
}

struct Bundle {
    dir: PathBuf,
    format: Format,
    files: Vec<Value>,
}

impl Bundle {
    fn add(&mut self, stem: &str, description: &str, report: Report) -> Result<()> {
        let ext = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let name = format!("{stem}.{ext}");
        report.emit(self.format, Some(&self.dir.join(&name)))?;
        self.files.push(json!({ "file": name, "content": description }));
        Ok(())
    }

    fn finish(self, figure: &str, extra: Value) -> Result<()> {
        let manifest = json!({ "figure": figure, "files": self.files, "summary": rounded(&extra) });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(self.dir.join("manifest.json"), text).context("writing manifest")
    }
}

fn table(columns: &[&str], rows: impl IntoIterator<Item = Vec<frontlab_core::export::Cell>>) -> Table {
    let mut t = Table::new(columns);
    for r in rows {
        t.push(r);
    }
    t
}

pub fn write(id: FigureId, dir: &Path, res: usize, t_final: Option<f64>, format: Format) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut b = Bundle { dir: dir.to_path_buf(), format, files: Vec::new() };
    match id {
        FigureId::Regions => {
            let a = sweep(Plane::AlphaD { mu: -1.0 / 3.0 }, (0.05, 3.0), (0.05, 3.0), res, false)?;
            b.add("regions_mu_-0.333", "stability regions over (d, alpha) at mu = -1/3", Report::with_table(json!({}), sweep_table(&a)))?;
            let m = sweep(Plane::MuD { alpha: 3.0 }, (0.5, 10.0), (-10.0, -0.05), res, false)?;
            b.add("regions_alpha_3", "stability regions over (d, mu) at alpha = 3", Report::with_table(json!({}), sweep_table(&m)))?;
            b.finish("stability regions in parameter space", json!({ "res": res }))
        }
        FigureId::ShAbs => {
            let mut points = Vec::new();
            for s in [0.5, 2.0, 10.0] {
                let sh = sh_abs_closed(&Params::new(1.0, 1.0, -0.5, 0.0, s)?)?;
                let rows = sh.sample_branch(401)?.into_iter().map(|(e, l)| vec![e.into(), l.re.into(), l.im.into()]);
                let t = table(&["eta", "re", "im"], rows);
                b.add(&format!("sh_branch_s{s}"), &format!("upper complex branch of the Swift-Hohenberg absolute spectrum, s = {s}"), Report::with_table(json!({}), t))?;
                points.push(json!({
                    "s": s,
                    "eta_tr": sh.eta_tr,
                    "lambda_tr": sh.lambda_tr,
                    "eta_dr": sh.eta_dr,
                    "lambda_dr": cx(sh.lambda_dr[0]),
                }));
            }
            b.finish("Swift-Hohenberg absolute spectrum at d = alpha = 1, mu = -1/2", json!({ "points": points }))
        }
        FigureId::AbsSpec => {
            let mut maxima = Vec::new();
            for (d, a, mu) in [(1.0, 1.0, -1.0), (1.0, 1.0, -0.5), (0.5, 2.0, -1.0)] {
                let p = Params::critical(d, a, mu, 1.0)?;
                let spec = trace_abs_spectrum(&p, p.s)?;
                let rows = spec.curves.iter().flat_map(|c| {
                    c.points.iter().map(move |x| vec![c.id.into(), c.family.name().into(), x.k.into(), x.lambda.re.into(), x.lambda.im.into()])
                });
                let t = table(&["branch", "family", "k", "re", "im"], rows);
                let stem = format!("abs_spectrum_d{d}_alpha{a}_mu{mu}");
                b.add(&stem, "absolute spectrum curves at s = s*", Report::with_table(json!({}), t))?;
                let sp = spec.singular_points.iter().map(|s| match s {
                    SingularPoint::DoubleRoot(r) => vec![r.kind.name().into(), r.lambda.re.into(), r.lambda.im.into(), r.pinched.to_string().into()],
                    SingularPoint::TriplePoint(t) => vec!["triple_point".into(), t.lambda.re.into(), t.lambda.im.into(), String::new().into()],
                });
                b.add(&format!("{stem}_points"), "double roots and triple points on the absolute spectrum", Report::with_table(json!({}), table(&["type", "re", "im", "pinched"], sp)))?;
                maxima.push(json!({ "d": d, "alpha": a, "mu": mu, "max_re": spec.max_re }));
            }
            b.finish("absolute spectra at the linear spreading speed", json!({ "maxima": maxima }))
        }
        FigureId::CheckingHypothesis => {
            let p = Params::critical(1.0, 1.0, -1.0, 1.0)?;
            let g = gamma_v(&p, &OmegaSpec::for_params(&p))?;
            let t = table(&["re_lambda", "gamma"], g.profile.iter().map(|(x, y)| vec![(*x).into(), (*y).into()]));
            b.add("gamma_profile", "largest decaying v-root real part over Omega against Re lambda", Report::with_table(json!({}), t))?;
            b.finish("decay-rate condition at d = alpha = 1, mu = -1", json!({ "gamma_v": g.gamma, "threshold": p.s_star() / 6.0 }))
        }
        FigureId::SimGrid => {
            let cases = [(1.0, 1.0, -1.0), (1.0, 1.0, -0.5), (0.5, 2.0, -1.0)];
            let t_final = t_final.unwrap_or(300.0);
            let results: Vec<Result<(String, Report, Value)>> = cases
                .par_iter()
                .map(|&(d, a, mu)| {
                    let p = Params::critical(d, a, mu, 1.0)?;
                    let e = ell_star(&p)?;
                    let cfg = SimConfig {
                        params: p,
                        half_length: 600.0,
                        t_final,
                        coupling: Coupling::Cosine { ell: e.ell },
                        ..SimConfig::default()
                    };
                    let r = run(&cfg)?;
                    let fits = speed_summary(&r.trace, Some((t_final / 3.0, r.t)), cfg.frame_speed());
                    let stem = format!("trace_d{d}_alpha{a}_mu{mu}");
                    Ok((stem, Report::with_table(json!({}), trace_table(&r.trace)), json!({ "d": d, "alpha": a, "mu": mu, "ell": e.ell, "fits": fits })))
                })
                .collect();
            let mut fits = Vec::new();
            for r in results {
                let (stem, rep, fit) = r?;
                b.add(&stem, "front trackers of the cosine-coupled system in the frame of s*", rep)?;
                fits.push(fit);
            }
            b.finish("simulations in the three unstable cases", json!({ "runs": fits }))
        }
        FigureId::Delay => {
            let p = Params::critical(1.0, 1.0, -0.5, 1.0)?;
            let e = ell_star(&p)?;
            let grid = GridArgs { t_final, ..GridArgs::default() };
            let template = delay_template(&p, e.ell, &grid);
            let betas = [1.0, 1e-4, 1e-8, 1e-12, 1e-16];
            let scan = delay_scan(&p, &betas, &template, 2.0)?;
            let rows = (0..betas.len()).map(|i| {
                vec![betas[i].into(), betas[i].log10().into(), scan.delays[i].unwrap_or(f64::NAN).into()]
            });
            b.add("delay", "delay of the resonant mode against log10 beta", Report::with_table(json!({}), table(&["beta", "log10_beta", "delay"], rows)))?;
            b.finish(
                "resonance delay at d = alpha = 1, mu = -1/2",
                json!({ "slope": scan.slope_vs_log10beta, "predicted": -(10f64.ln()) / e.lambda_max.re }),
            )
        }
    }
}
