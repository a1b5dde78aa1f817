//! Direct sampling of the no-escape condition at the worst point.

use std::f64::consts::PI;

use crate::model::SearchParams;
use crate::par::{self, Execution};
use crate::velocity::{envelope_gap, t_window};

/// Squared distance from the sensor's outer tip to P after the sweep turned by `theta`.
pub fn chi_squared(theta: f64, p: &SearchParams) -> f64 {
    let outer = p.r0 + p.r;
    outer * outer + p.r0 * p.r0 - 2.0 * p.r0 * outer * theta.cos()
}

/// Minimum over `n_samples` uniform times in the window of
/// `chi^2 - (VT (2 pi R0 / vs + t))^2`. Non-negative means the wavefront from
/// P never overtakes the outer tip.
pub fn check_confinement(vs: f64, p: &SearchParams, n_samples: usize) -> f64 {
    check_confinement_with(vs, p, n_samples, Execution::default())
}

pub fn check_confinement_with(vs: f64, p: &SearchParams, n_samples: usize, exec: Execution) -> f64 {
    let n = n_samples.max(2);
    let window = t_window(vs, p);
    let lead = 2.0 * PI * p.r0 / vs;
    par::argmin_range(exec, n, |i| {
        let t = window * i as f64 / (n - 1) as f64;
        let reach = p.vt * (lead + t);
        chi_squared(vs * t / p.r0, p) - reach * reach
    })
    .map_or(f64::NAN, |(_, v)| v)
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Grid argmin of `f(., vs)` over the window, refined by golden-section search
/// to a bracket of `1e-9`.
pub fn brute_force_t_star(vs: f64, p: &SearchParams, n_samples: usize) -> f64 {
    brute_force_t_star_with(vs, p, n_samples, Execution::default())
}

pub fn brute_force_t_star_with(vs: f64, p: &SearchParams, n_samples: usize, exec: Execution) -> f64 {
    let n = n_samples.max(3);
    let window = t_window(vs, p);
    let step = window / (n - 1) as f64;
    let f = |t: f64| envelope_gap(t, vs, p);
    let (i, _) = par::argmin_range(exec, n, |i| f(i as f64 * step)).expect("non-empty grid");

    let mut a = (i as f64 - 1.0).max(0.0) * step;
    let mut b = ((i + 1) as f64 * step).min(window);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-9 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // a minimum on the window edge stays on the edge
    [mid, 0.0, window]
        .into_iter()
        .filter(|t| (t - mid).abs() <= step)
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(mid)
}
