//! Point evaders against the first circular sweep.
//!
//! The sensor rides the circle of radius `R0` from the +y axis, turning
//! counter-clockwise. An evader escapes when it reaches `R0 + r` before the
//! sensor passes over it.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::SearchParams;
use crate::par::{self, Execution};

/// Straight-line evader at speed `VT`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evader {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// Escape time of `e`, or `None` if the sensor catches it first.
pub fn escape_time(e: &Evader, vs: f64, p: &SearchParams, dt: f64) -> Option<f64> {
    let escape = p.r0 + p.r;
    let (hs, hc) = e.heading.sin_cos();
    let omega = vs / p.r0;
    let at = |t: f64| (e.x + p.vt * t * hc, e.y + p.vt * t * hs);
    let (x0, y0) = at(0.0);
    if x0.hypot(y0) >= escape {
        return Some(0.0);
    }
    // sensor angle minus evader angle, unwrapped, starting in (0, 2 pi]; the
    // sensor passes over the evader whenever this crosses a multiple of 2 pi
    let mut psi = y0.atan2(x0);
    let mut lag = (FRAC_PI_2 - psi).rem_euclid(2.0 * PI);
    if lag == 0.0 {
        lag = 2.0 * PI;
    }
    let band = (p.r0 - p.r)..=(p.r0 + p.r);
    let horizon = 4.0 * PI * p.r0 / vs + escape / p.vt;
    let mut t = 0.0;
    let mut prev_rho = x0.hypot(y0);
    while t < horizon {
        let t1 = t + dt;
        let (x, y) = at(t1);
        let rho = x.hypot(y);
        let dpsi = (y.atan2(x) - psi + PI).rem_euclid(2.0 * PI) - PI;
        psi += dpsi;
        let next = lag + omega * dt - dpsi;
        let crossed = (next / (2.0 * PI)).floor() != (lag / (2.0 * PI)).floor();
        if crossed && (band.contains(&rho) || band.contains(&prev_rho)) {
            return None;
        }
        if rho >= escape {
            let frac = (escape - prev_rho) / (rho - prev_rho);
            return Some(t + frac.clamp(0.0, 1.0) * dt);
        }
        lag = next;
        prev_rho = rho;
        t = t1;
    }
    None
}

/// Worst-point escape against a random greedy population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub worst_escape_time: Option<f64>,
    pub worst_heading: Option<f64>,
    pub n_evaders: usize,
    pub n_escaped: usize,
    pub min_random_escape_time: Option<f64>,
    /// The worst point escapes no later than any random evader.
    pub dominated: bool,
}

/// Escapes from P just behind the sensor (on the +x side of the +y axis) over headings from radially outward
/// (pi/2) round to the sensor's direction of motion (pi), against `n` evaders
/// drawn uniformly in the disk that run radially outward.
pub fn worst_point_dominance(vs: f64, p: &SearchParams, n: usize, seed: u64, exec: Execution) -> DominanceReport {
    let dt = 1e-3 * p.r0 / vs;
    let p_start = (1e-9 * p.r0, p.r0);
    let headings: Vec<f64> = (0..=180).map(|k| FRAC_PI_2 + FRAC_PI_2 * k as f64 / 180.0).collect();
    let worst = par::map(exec, &headings, |&h| {
        let e = Evader {
            x: p_start.0,
            y: p_start.1,
            heading: h,
        };
        (h, escape_time(&e, vs, p, dt))
    })
    .into_iter()
    .filter_map(|(h, t)| t.map(|t| (h, t)))
    .min_by(|a, b| a.1.total_cmp(&b.1));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let evaders: Vec<Evader> = (0..n)
        .map(|_| {
            let rho = p.r0 * rng.gen::<f64>().sqrt();
            let phi = rng.gen_range(0.0..2.0 * PI);
            Evader {
                x: rho * phi.cos(),
                y: rho * phi.sin(),
                heading: phi,
            }
        })
        .collect();
    let times: Vec<Option<f64>> = par::map(exec, &evaders, |e| escape_time(e, vs, p, dt));
    let escaped: Vec<f64> = times.iter().flatten().copied().collect();
    let min_random = escaped.iter().copied().reduce(f64::min);
    let dominated = match (worst, min_random) {
        (Some((_, w)), Some(m)) => w <= m + dt,
        (Some(_), None) => true,
        (None, None) => true,
        (None, Some(_)) => false,
    };
    DominanceReport {
        worst_escape_time: worst.map(|w| w.1),
        worst_heading: worst.map(|w| w.0),
        n_evaders: n,
        n_escaped: escaped.len(),
        min_random_escape_time: min_random,
        dominated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity::{v_critical_arc, v_one_cycle};

    fn reference() -> SearchParams {
        SearchParams::new(100.0, 10.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn radial_escape_from_p_below_one_cycle_speed() {
        let p = reference();
        let vs = 0.9 * v_one_cycle(&p);
        let e = Evader {
            x: 1e-7,
            y: 100.0,
            heading: FRAC_PI_2,
        };
        let t = escape_time(&e, vs, &p, 1e-3).unwrap();
        assert!((t - 10.0).abs() < 1e-6, "{t}");
    }

    #[test]
    fn sensor_catches_radial_runner_above_critical_speed() {
        let p = reference();
        let e = Evader {
            x: 1e-7,
            y: 100.0,
            heading: FRAC_PI_2,
        };
        assert_eq!(escape_time(&e, v_critical_arc(&p), &p, 1e-3), None);
    }

    #[test]
    fn evader_ahead_of_the_sensor_is_caught() {
        let p = reference();
        // at angle pi, a quarter turn ahead, running outward slowly
        let e = Evader {
            x: -100.0,
            y: 0.0,
            heading: PI,
        };
        assert_eq!(escape_time(&e, 0.9 * v_one_cycle(&p), &p, 1e-3), None);
    }
}
