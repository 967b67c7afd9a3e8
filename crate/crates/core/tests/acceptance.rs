//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 8-10 run full simulations and take a few minutes in an optimized
//! build. The process exits 0 regardless of the outcome; the printed lines are
//! the result.

use std::time::Instant;

use frontlab_core::absspec::{double_roots_closed, double_roots_numeric, s_abs, sh_abs_closed, LambdaBox};
use frontlab_core::greens::{g12_bvp, g12_derivative, g12_infty, g22};
use frontlab_core::regions::{check_decay_condition, classify, gamma_v, OmegaSpec, Region};
use frontlab_core::simulate::{
    delay_scan, ell_star, fit_speed, run, weighted_decay, Coupling, InitialData, Reference, SimConfig, Tracker,
};
use frontlab_core::spectra::region_boundaries;
use frontlab_core::{c64, Complex64, DoubleRootKind, FrontTrace, Params, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String)>;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn boundaries() -> Outcome {
    let b = region_boundaries(1.0, 1.0)?;
    let pw = region_boundaries(2.0, 0.5)?.mu_pw;
    let exact = b.mu_rem == -10.0 && b.mu_abs0 == -7.75;
    let pw_ok = pw.is_some_and(|m| close(m, -1.8193970, 1e-6));
    Ok((exact && pw_ok, format!("mu_rem {} mu_abs0 {} mu_pw(2, 0.5) {:?}", b.mu_rem, b.mu_abs0, pw)))
}

fn classification() -> Outcome {
    let golden = [
        ((1.0, 1.0, -9.0), Region::Rrem),
        ((1.0, 1.0, -1.0), Region::Rabs),
        ((1.0, 1.0, -0.5), Region::Rabs),
        ((0.5, 2.0, -1.0), Region::Rpw),
        ((1.0, 1.0, -11.0), Region::Rst),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for ((d, a, mu), want) in golden {
        let got = classify(d, a, mu)?.label;
        ok &= got == want;
        parts.push(format!("({d},{a},{mu})->{}", got.name()));
    }
    Ok((ok, parts.join(" ")))
}

fn sh_closed_forms() -> Outcome {
    let want = [(0.5, -1.586, -0.117), (2.0, -2.447, -0.326), (10.0, -9.863, -0.7101)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (s, lam, eta) in want {
        let sh = sh_abs_closed(&Params::new(1.0, 1.0, -0.5, 0.0, s)?)?;
        let e = sh.eta_tr;
        let cubic = 20.0 * e * e * e + 4.0 * e + s;
        let hit = close(sh.lambda_tr, lam, 2e-3) && close(e, eta, 2e-3) && cubic.abs() < 1e-10;
        ok &= hit;
        parts.push(format!("s={s}: lambda_tr {:.4} eta_tr {:.4} cubic {:.1e}{}", sh.lambda_tr, e, cubic, if hit { "" } else { " (off)" }));
    }
    Ok((ok, parts.join("; ")))
}

fn double_root_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut pinch_ok = true;
    for _ in 0..20 {
        let d = rng.gen_range(0.5..2.0);
        let a = rng.gen_range(0.5..2.0);
        let mu = rng.gen_range(-4.0..-0.2);
        let p = Params::critical(d, a, mu, 1.0)?;
        let closed = double_roots_closed(&p)?;
        let (mut lo, mut hi) = (c64(f64::INFINITY, f64::INFINITY), c64(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for r in &closed {
            lo = c64(lo.re.min(r.lambda.re), lo.im.min(r.lambda.im));
            hi = c64(hi.re.max(r.lambda.re), hi.im.max(r.lambda.im));
        }
        let bbox = LambdaBox::new((lo.re - 1.0, hi.re + 1.0), (lo.im - 1.0, hi.im + 1.0))?;
        let numeric = double_roots_numeric(&p, &bbox, 24)?;
        for c in &closed {
            let gap = numeric
                .iter()
                .filter(|n| n.kind == c.kind)
                .map(|n| (n.lambda - c.lambda).norm() / (1.0 + c.lambda.norm()))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(gap);
        }
        // order: u-branch, v-branch pair, real v-root, then rp- and rp+ poles
        pinch_ok &= closed[1].pinched && closed[2].pinched;
        pinch_ok &= closed[1].kind == DoubleRootKind::VBranch && closed[2].kind == DoubleRootKind::VBranch;
        for r in &closed[6..8] {
            if r.nu.re >= 0.0 {
                pinch_ok &= !r.pinched;
            }
        }
    }
    Ok((worst <= 1e-9 && pinch_ok, format!("20 tuples, worst relative gap {worst:.2e}, pinch flags {}", if pinch_ok { "consistent" } else { "inconsistent" })))
}

fn spreading_speeds() -> Outcome {
    let want = [((1.0, 1.0, -1.0), 2.2762), ((1.0, 1.0, -0.5), 2.3547), ((0.5, 2.0, -1.0), 3.3382)];
    let mut ok = true;
    let mut parts = Vec::new();
    for ((d, a, mu), target) in want {
        let p = Params::critical(d, a, mu, 1.0)?;
        let s = s_abs(&p, p.s_star(), 2.0 * p.s_star())?;
        ok &= close(s, target, 1e-2);
        parts.push(format!("({d},{a},{mu}) {s:.4} vs {target}"));
    }
    Ok((ok, parts.join("; ")))
}

fn decay_condition() -> Outcome {
    let p = Params::critical(1.0, 1.0, -1.0, 1.0)?;
    let check = check_decay_condition(&p)?;
    let base = OmegaSpec::for_params(&p);
    let coarse = gamma_v(&p, &base)?.gamma;
    let fine = gamma_v(&p, &base.refined(2))?.gamma;
    let ok = check.ok && 3.0 * check.gamma_v > 1.0 && close(coarse, fine, 1e-3);
    Ok((ok, format!("ok {} 3 gamma_v {:.5}, gamma_v {coarse:.6} vs refined {fine:.6}", check.ok, 3.0 * check.gamma_v)))
}

/// Adjacent float on the left of `x`.
fn just_below(x: f64) -> f64 {
    if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else if x < 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        -f64::from_bits(1)
    }
}

fn greens_checks() -> Outcome {
    let p = Params::critical(1.0, 1.0, -1.0, 1.0)?;
    let pairs = [
        (c64(0.7, 0.4), 1.3),
        (c64(0.3, -0.8), -0.8),
        (c64(1.5, 0.0), 0.5),
        (c64(0.2, 1.2), 2.0),
        (c64(2.0, 2.0), -1.7),
    ];

    // third-derivative jump from one-sided second-order differences
    let h = 1e-3;
    let mut jump_err: f64 = 0.0;
    for &(lam, y) in &pairs {
        let f = |j: f64| g22(lam, y + j * h, y, &p);
        let right = (-5.0 * f(0.0)? + 18.0 * f(1.0)? - 24.0 * f(2.0)? + 14.0 * f(3.0)? - 3.0 * f(4.0)?) / (2.0 * h * h * h);
        let left = (5.0 * f(0.0)? - 18.0 * f(-1.0)? + 24.0 * f(-2.0)? - 14.0 * f(-3.0)? + 3.0 * f(-4.0)?) / (2.0 * h * h * h);
        jump_err = jump_err.max((right - left - 1.0).norm());
    }

    let mut residual: f64 = 0.0;
    for &(lam, y) in &pairs {
        for i in 0..400 {
            let x = -10.0 + 20.0 * (i as f64 + 0.5) / 400.0;
            let rate = if x >= 0.0 { p.alpha } else { -2.0 * p.alpha };
            let g = |k| g12_derivative(lam, x, y, &p, k).map(|e| e.value);
            let r = p.d * g(2)? + p.s * g(1)? + (rate - lam) * g(0)? + p.beta * g22(lam, x, y, &p)?;
            residual = residual.max(r.norm());
        }
    }

    let mut matching: f64 = 0.0;
    for &(lam, y) in &pairs {
        for at in [0.0, y] {
            for k in 0..2 {
                let a = g12_derivative(lam, at, y, &p, k)?.value;
                let b = g12_derivative(lam, just_below(at), y, &p, k)?.value;
                matching = matching.max((a - b).norm());
            }
        }
    }

    let mut bvp: f64 = 0.0;
    for &(lam, y) in &pairs {
        let (xs, g) = g12_bvp(lam, y, &p, 40.0, 16001)?;
        for (x, gb) in xs.iter().zip(&g) {
            if x.abs() <= 10.0 {
                let want: Complex64 = g12_infty(lam, *x, y, &p)?.value;
                bvp = bvp.max((gb - want).norm());
            }
        }
    }

    let ok = jump_err <= 1e-3 && residual < 1e-5 && matching <= 1e-6 && bvp <= 1e-4;
    Ok((ok, format!("jump error {jump_err:.1e}, residual {residual:.1e}, interface {matching:.1e}, bvp {bvp:.1e}")))
}

fn core_at(trace: &FrontTrace, t: f64) -> f64 {
    let i = trace.times.partition_point(|&s| s < t).min(trace.len() - 1);
    if i == 0 || trace.times[i] == t {
        return trace.core_pos[i];
    }
    let (t0, t1) = (trace.times[i - 1], trace.times[i]);
    let w = (t - t0) / (t1 - t0);
    (1.0 - w) * trace.core_pos[i - 1] + w * trace.core_pos[i]
}

fn front_stability() -> Outcome {
    let p = Params::critical(1.0, 1.0, -9.0, 0.0)?;
    let grid = SimConfig { params: p, half_length: 200.0, dx: 0.05, dt: 0.05, t_final: 200.0, ..SimConfig::default() };
    let settle = SimConfig { initial: InitialData { v_amplitude: 0.0, ..InitialData::default() }, ..grid.clone() };
    let front = run(&settle)?.u;

    let perturbed = SimConfig {
        params: p.with_beta(1.0),
        initial: InitialData { u_profile: Some(front), v_amplitude: 0.1, v_width: 2.0, ..InitialData::default() },
        reference: Reference::Companion,
        ..grid
    };
    let r = run(&perturbed)?;
    let drift = core_at(&r.trace, 150.0) - core_at(&r.trace, 50.0);
    let fit = weighted_decay(&r.trace, Some((20.0, 200.0)))?;
    let ok = drift.abs() < 0.5 && close(fit.exponent, -1.5, 0.4);
    Ok((ok, format!("core drift {drift:.3} over [50, 150], weighted decay exponent {:.3} (r2 {:.3})", fit.exponent, fit.r2)))
}

fn resonant_acceleration() -> Outcome {
    let p = Params::critical(1.0, 1.0, -0.5, 1.0)?;
    let e = ell_star(&p)?;
    let cfg = SimConfig {
        params: p,
        half_length: 600.0,
        dx: 0.1,
        dt: 0.05,
        t_final: 400.0,
        coupling: Coupling::Cosine { ell: e.ell },
        ..SimConfig::default()
    };
    let r = run(&cfg)?;
    let fit = fit_speed(&r.trace, (100.0, 400.0), Tracker::Edge)?;
    let lab = fit.speed + cfg.frame_speed();
    let ell_ok = close(e.ell, 1.4872, 1e-3);
    let speed_ok = (lab / 2.3547 - 1.0).abs() <= 0.05;
    Ok((
        ell_ok && speed_ok,
        format!(
            "ell_star {:.4} ({}), lab edge speed {lab:.4} vs 2.3547 ({})",
            e.ell,
            if ell_ok { "within 1e-3 of 1.4872" } else { "outside 1e-3 of 1.4872" },
            if speed_ok { "within 5%" } else { "outside 5%" },
        ),
    ))
}

fn delay_law() -> Outcome {
    let p = Params::critical(1.0, 1.0, -0.5, 1.0)?;
    let e = ell_star(&p)?;
    let template = SimConfig {
        params: p,
        half_length: 600.0,
        dx: 0.1,
        dt: 0.05,
        t_final: 500.0,
        output_every: 0.25,
        coupling: Coupling::Cosine { ell: e.ell },
        ..SimConfig::default()
    };
    let scan = delay_scan(&p, &[1.0, 1e-4, 1e-8, 1e-12, 1e-16], &template, 2.0)?;
    let target = -11.1516;
    let slope = scan.slope_vs_log10beta;
    let ok = (slope / target - 1.0).abs() <= 0.15;
    let delays: Vec<String> = scan.delays.iter().map(|d| d.map_or("censored".into(), |d| format!("{d:.2}"))).collect();
    Ok((
        ok,
        format!(
            "slope {slope:.4} vs {target} (computed -ln10/Re lambda_max {:.4}), delays [{}]",
            -(10f64.ln()) / e.lambda_max.re,
            delays.join(", ")
        ),
    ))
}

fn unmodified_system() -> Outcome {
    // Without the cosine coupling the acceleration needs round-off to seed the
    // resonant mode and does not appear on desk-scale horizons.
    let p = Params::critical(1.0, 1.0, -0.5, 1.0)?;
    let cfg = SimConfig { params: p, half_length: 300.0, t_final: 200.0, ..SimConfig::default() };
    let r = run(&cfg)?;
    let fit = fit_speed(&r.trace, (100.0, 200.0), Tracker::Edge)?;
    let lab = fit.speed + cfg.frame_speed();
    let ok = lab < 2.3547 - 0.1;
    Ok((ok, format!("demo only: unmodified system spreads at {lab:.4} by t = 200, below s_abs 2.3547; the long-time acceleration and the nonlinear stability constants are not reproduced")))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 11] = [
        (1, boundaries),
        (2, classification),
        (3, sh_closed_forms),
        (4, double_root_oracle),
        (5, spreading_speeds),
        (6, decay_condition),
        (7, greens_checks),
        (8, front_stability),
        (9, resonant_acceleration),
        (10, delay_law),
        (11, unmodified_system),
    ];
    let mut passed = 0;
    for (n, check) in criteria {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        passed += usize::from(ok);
        println!("criterion {n}: {} — {detail} [{:.1} s]", if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
}
