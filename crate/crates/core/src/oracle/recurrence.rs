//! Step-by-step iteration of the radius recurrence with per-step time sums.

use std::f64::consts::PI;

use crate::model::SearchParams;
use crate::planner::STOP_SLACK;

/// Radii and times accumulated one cycle at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTrace {
    /// `R_0 ..= R_N`.
    pub radii: Vec<f64>,
    pub n_iterations: usize,
    pub t_in_total: f64,
    pub t_circular_total: f64,
}

/// Iterates `R <- R - delta_eff(R)` until `R <= r`, summing the advance
/// times, the final descent `R_N / vs`, every traversal and the radius-`r`
/// circle. `None` when the radius stops shrinking before `max_steps`.
pub fn iterate(vs: f64, p: &SearchParams, max_steps: usize) -> Option<RecurrenceTrace> {
    let mut radii = vec![p.r0];
    let mut t_in = 0.0;
    let mut t_circ = 0.0;
    let mut radius = p.r0;
    while radius > p.r + STOP_SLACK {
        if radii.len() > max_steps {
            return None;
        }
        let delta = (p.r * (vs - p.vt) - 2.0 * PI * radius * p.vt) / vs;
        if delta <= 0.0 {
            return None;
        }
        let delta_eff = delta * vs / (vs + p.vt);
        t_circ += 2.0 * PI * radius / vs;
        radius -= delta_eff;
        radii.push(radius);
        if radius > p.r + STOP_SLACK {
            t_in += delta_eff / vs;
        }
    }
    t_in += radius / vs;
    t_circ += 2.0 * PI * p.r / vs;
    Some(RecurrenceTrace {
        n_iterations: radii.len() - 1,
        radii,
        t_in_total: t_in,
        t_circular_total: t_circ,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_instance_takes_45_cycles() {
        let p = SearchParams::new(100.0, 10.0, 1.0, 1.0).unwrap();
        let vs = 2.0 * PI * 10.0 + 2.0;
        let trace = iterate(vs, &p, 10_000).unwrap();
        assert_eq!(trace.n_iterations, 45);
        assert!((trace.t_in_total - 1.413).abs() < 0.01);
    }

    #[test]
    fn stalls_below_critical_speed() {
        let p = SearchParams::new(100.0, 10.0, 1.0, 0.0).unwrap();
        assert!(iterate(60.0, &p, 10_000).is_none());
    }
}
