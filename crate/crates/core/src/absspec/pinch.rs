use num_complex::Complex64;

use super::{closed, DoubleRoot};
use crate::dispersion::{lambda_big, sorted_roots, Relation};
use crate::error::{Error, Result};
use crate::params::Params;

fn seg_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let ab = b - a;
    let t = ((z - a) * ab.conj()).re / ab.norm_sqr();
    (a + ab * t.clamp(0.0, 1.0) - z).norm()
}

/// Whether the two roots colliding at `dr` separate to opposite sides of the
/// Morse split when `lambda` is pushed far into the right half-plane.
pub fn is_pinched(dr: &DoubleRoot, p: &Params) -> Result<bool> {
    let others: Vec<Complex64> = if p.at_critical_speed() {
        closed::double_roots_closed_unflagged(p)?
            .into_iter()
            .map(|d| d.lambda)
            .filter(|l| (l - dr.lambda).norm() > 1e-9 * (1.0 + dr.lambda.norm()))
            .collect()
    } else {
        Vec::new()
    };
    is_pinched_avoiding(dr, p, &others)
}

/// [`is_pinched`] with an explicit list of other double roots the path must
/// avoid.
pub fn is_pinched_avoiding(dr: &DoubleRoot, p: &Params, others: &[Complex64]) -> Result<bool> {
    let scale = 1.0 + dr.lambda.norm();
    let eps = 1e-6 * scale;
    let start = dr.lambda + eps;
    let big = lambda_big(p).max(dr.lambda.re + 10.0 * scale);
    let mut end = Complex64::new(big, dr.lambda.im);

    let delta = 1e-3 * scale;
    let grazes = |a: Complex64, b: Complex64| others.iter().any(|&o| seg_distance(a, b, o) < 1e-6 * scale);
    let mut waypoints = vec![start];
    if grazes(start, end) {
        let lift = Complex64::new(0.0, delta);
        waypoints.push(start + lift);
        end += lift;
    }
    waypoints.push(end);

    let roots0 = sorted_roots(Relation::Full, start, p)?;
    let mut idx: Vec<usize> = (0..6).collect();
    idx.sort_by(|&a, &b| (roots0[a] - dr.nu).norm().total_cmp(&(roots0[b] - dr.nu).norm()));
    let mut tracked = [roots0[idx[0]], roots0[idx[1]]];
    let mut current = roots0;

    for leg in waypoints.windows(2) {
        let (a, b) = (leg[0], leg[1]);
        let mut t = 0.0_f64;
        let mut h = 1e-3_f64;
        while t < 1.0 {
            let tn = (t + h).min(1.0);
            let lam = a + (b - a) * tn;
            let next = sorted_roots(Relation::Full, lam, p)?;
            let mut ok = true;
            let mut moved = tracked;
            let mut used = [usize::MAX; 2];
            for (m, z) in tracked.iter().enumerate() {
                let sep = current
                    .iter()
                    .filter(|w| (*w - z).norm() > 0.0)
                    .map(|w| (w - z).norm())
                    .fold(f64::INFINITY, f64::min);
                let (j, dist) = next
                    .iter()
                    .enumerate()
                    .map(|(j, w)| (j, (w - z).norm()))
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .expect("six roots");
                if dist > 0.3 * sep || used.contains(&j) {
                    ok = false;
                    break;
                }
                used[m] = j;
                moved[m] = next[j];
            }
            if ok {
                tracked = moved;
                current = next;
                t = tn;
                h = (h * 1.5).min(0.05);
            } else {
                h *= 0.5;
                if h < 1e-14 {
                    return Err(Error::Continuation(format!("lost track of colliding roots near lambda = {lam}")));
                }
            }
        }
    }

    let pos = |z: Complex64| {
        current
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - z).norm().total_cmp(&(y.1 - z).norm()))
            .map(|(j, _)| j)
            .expect("six roots")
    };
    let split = Relation::Full.morse_index();
    let (i0, i1) = (pos(tracked[0]), pos(tracked[1]));
    Ok((i0 < split) != (i1 < split))
}
