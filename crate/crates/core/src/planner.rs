//! Circular shrinking sweep schedule, end game and total cleaning time.
//!
//! After cycle `i` at bounding radius `R_i` the formation advances inwards by
//! `delta_eff`, giving the affine recurrence `R_{i+1} = c3 R_i + c1`. Cycles
//! continue until the radius drops to `r`; a radius-`r` circle, a descent of
//! `r` and a right/left linear sweep then finish the region.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SweepError};
use crate::model::{
    approx_eq_rel, CycleDrift, CycleRecord, EndGameRecord, SearchParams, SweepPlan, DEFAULT_REL_TOL,
};
use crate::velocity::v_critical_taylor;

/// Absolute slack on the stop test `R_N <= r`.
pub const STOP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionCoefficients {
    pub c1: f64,
    pub c3: f64,
    /// `(2 pi / vs) c1`.
    pub c4: f64,
    /// `c1 / (1 - c3)`: the radius at which inward progress vanishes.
    pub fixed_point: f64,
}

fn require_above_vt(vs: f64, p: &SearchParams) -> Result<()> {
    if vs.is_finite() && vs > p.vt {
        Ok(())
    } else {
        Err(SweepError::domain(
            "vs",
            format!("sweeper speed {vs} must exceed VT = {}", p.vt),
        ))
    }
}

pub fn recursion_coefficients(vs: f64, p: &SearchParams) -> Result<RecursionCoefficients> {
    require_above_vt(vs, p)?;
    let c1 = -p.r * (vs - p.vt) / (vs + p.vt);
    let c3 = 1.0 + 2.0 * PI * p.vt / (vs + p.vt);
    Ok(RecursionCoefficients {
        c1,
        c3,
        c4: 2.0 * PI / vs * c1,
        fixed_point: p.r * (vs - p.vt) / (2.0 * PI * p.vt),
    })
}

/// Inward progress after one traversal at radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Advance {
    /// Slack between the sensor's reach and the region's spread.
    pub delta: f64,
    /// Advance once the region keeps spreading during the inward motion.
    pub delta_eff: f64,
    pub t_in: f64,
}

pub fn advance_distance(radius: f64, vs: f64, p: &SearchParams) -> Result<Advance> {
    require_above_vt(vs, p)?;
    let mut delta = (p.r * (vs - p.vt) - 2.0 * PI * radius * p.vt) / vs;
    if delta < 0.0 {
        // rounding noise exactly at the critical speed is not a failure
        if delta < -1e-12 * p.r.max(radius) {
            return Err(SweepError::NoProgress { radius, delta });
        }
        delta = 0.0;
    }
    let delta_eff = delta * vs / (vs + p.vt);
    Ok(Advance {
        delta,
        delta_eff,
        t_in: delta_eff / vs,
    })
}

/// `R_i` from the closed form of the recurrence.
pub fn radius_at(i: usize, vs: f64, p: &SearchParams) -> Result<f64> {
    let c = recursion_coefficients(vs, p)?;
    Ok(radius_closed(i, &c, p))
}

fn radius_closed(i: usize, c: &RecursionCoefficients, p: &SearchParams) -> f64 {
    c.c3.powi(i as i32) * (p.r0 - c.fixed_point) + c.fixed_point
}

fn require_progress(vs: f64, p: &SearchParams) -> Result<()> {
    let vc = v_critical_taylor(p);
    if vs.is_finite() && vs > vc {
        Ok(())
    } else {
        Err(SweepError::domain(
            "vs",
            format!("sweeper speed {vs} must exceed the critical speed {vc}"),
        ))
    }
}

/// Number of shrinking cycles before the bounding radius reaches `r`.
pub fn num_iterations(vs: f64, p: &SearchParams) -> Result<usize> {
    require_progress(vs, p)?;
    let c = recursion_coefficients(vs, p)?;
    let spread = p.r * (vs - p.vt);
    let ratio = (2.0 * PI * p.r * p.vt - spread) / (2.0 * PI * p.r0 * p.vt - spread);
    let estimate = (ratio.ln() / c.c3.ln()).ceil().max(0.0);
    if !estimate.is_finite() || estimate > 1e9 {
        return Err(SweepError::domain(
            "vs",
            format!("iteration count is not representable (ratio {ratio})"),
        ));
    }
    // The logarithm can land a hair on the wrong side of an integer; settle
    // it against the closed-form radius.
    let mut n = estimate as usize;
    let done = |k: usize| radius_closed(k, &c, p) <= p.r + STOP_SLACK;
    while !done(n) {
        n += 1;
    }
    while n > 0 && done(n - 1) {
        n -= 1;
    }
    Ok(n)
}

/// Closed-form `(t_in_total, t_circular_total)`.
///
/// Inward time sums the advances after cycles `0..N-1` plus the final descent
/// `R_N / vs`; circular time sums every cycle plus the radius-`r` circle.
pub fn aggregate_times(vs: f64, p: &SearchParams) -> Result<(f64, f64)> {
    let n = num_iterations(vs, p)?;
    let c = recursion_coefficients(vs, p)?;
    Ok(aggregate_closed(n, vs, &c, p))
}

fn aggregate_closed(n: usize, vs: f64, c: &RecursionCoefficients, p: &SearchParams) -> (f64, f64) {
    let t_in = if n == 0 {
        p.r0 / vs
    } else {
        let a = 2.0 * PI * p.r0 * p.vt - p.r * (vs - p.vt);
        p.r0 / vs + c.c3.powi(n as i32 - 1) * a / (vs * (vs + p.vt))
    };
    let radii_sum =
        n as f64 * c.fixed_point + (p.r0 - c.fixed_point) * (c.c3.powi(n as i32) - 1.0) / (c.c3 - 1.0);
    let t_circ = 2.0 * PI * (radii_sum + p.r) / vs;
    (t_in, t_circ)
}

/// End-game radius, linear sweep times and the cleaning condition.
pub fn end_game(vs: f64, p: &SearchParams) -> Result<EndGameRecord> {
    require_above_vt(vs, p)?;
    let r_last = p.r * p.vt * (2.0 * PI + 1.0) / vs;
    let t_right = r_last / (vs - p.vt);
    let t_left = 2.0 * vs * r_last / (vs - p.vt).powi(2);
    let t_one = t_right + t_left;
    Ok(EndGameRecord {
        r_last,
        t_last_circle: 2.0 * PI * p.r / vs,
        t_linear_descent: p.r / vs,
        t_right,
        t_left,
        t_one,
        feasible: (p.r - r_last) / p.vt > t_one,
    })
}

/// Slack of the end-game condition: positive exactly when the plan cleans.
pub fn end_game_margin(record: &EndGameRecord, p: &SearchParams) -> f64 {
    (p.r - record.r_last) / p.vt - record.t_one
}

/// Velocity increment above which the end game is guaranteed to clean, in
/// the closed form `VT (1 + pi + sqrt(pi^2 + 6 pi + 7) - 2 pi alpha)`.
/// Non-positive values mean every increment works.
pub fn delta_v_threshold(alpha: f64, vt: f64) -> f64 {
    vt * (1.0 + PI + (PI * PI + 6.0 * PI + 7.0).sqrt() - 2.0 * PI * alpha)
}

/// Root of the end-game condition itself: `(r - R_last) / VT > t_one` holds
/// exactly when the increment exceeds this value.
pub fn delta_v_threshold_exact(alpha: f64, vt: f64) -> f64 {
    vt * (PI + 0.5 + (PI * PI + 5.0 * PI + 2.25).sqrt() - 2.0 * PI * alpha)
}

/// Plan at the given sweeper speed without the feasibility gate.
pub fn plan_at_speed(p: &SearchParams, vs: f64) -> Result<SweepPlan> {
    let n = num_iterations(vs, p)?;
    let coeffs = recursion_coefficients(vs, p)?;
    let (t_in_total, t_circular_total) = aggregate_closed(n, vs, &coeffs, p);
    let end = end_game(vs, p)?;

    let mut cycles = Vec::with_capacity(n);
    let mut radius_rec = p.r0;
    for i in 0..n {
        let radius = radius_closed(i, &coeffs, p);
        let last = i + 1 == n;
        let t_in = if last {
            radius_closed(n, &coeffs, p) / vs
        } else {
            advance_distance(radius, vs, p)?.t_in
        };
        let step = advance_distance(radius_rec, vs, p)?;
        let t_in_rec = if last { (radius_rec - step.delta_eff) / vs } else { step.t_in };
        let delta_eff = advance_distance(radius, vs, p)?.delta_eff;
        let drift = (!approx_eq_rel(radius, radius_rec, DEFAULT_REL_TOL)
            || !approx_eq_rel(t_in, t_in_rec, DEFAULT_REL_TOL))
        .then_some(CycleDrift {
            radius_recursive: radius_rec,
            t_in_recursive: t_in_rec,
        });
        cycles.push(CycleRecord {
            index: i,
            radius,
            t_sweep: 2.0 * PI * radius / vs,
            delta_eff,
            t_in,
            drift,
        });
        radius_rec -= step.delta_eff;
    }

    Ok(SweepPlan {
        params: *p,
        vs,
        n_iterations: n,
        cycles,
        t_in_total,
        t_circular_total,
        t_total: t_circular_total + t_in_total + end.t_one,
        end_game: end,
    })
}

/// Complete plan at `vs = v_critical_taylor + deltaV`.
pub fn build_plan(p: &SearchParams) -> Result<SweepPlan> {
    if !(p.delta_v > 0.0) {
        return Err(SweepError::domain(
            "deltaV",
            format!("must be positive to make inward progress, got {}", p.delta_v),
        ));
    }
    let plan = plan_at_speed(p, v_critical_taylor(p) + p.delta_v)?;
    if !plan.end_game.feasible {
        return Err(SweepError::Infeasible {
            delta_v: p.delta_v,
            threshold: delta_v_threshold(p.alpha(), p.vt),
            margin: end_game_margin(&plan.end_game, p),
        });
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> SearchParams {
        SearchParams::new(100.0, 10.0, 1.0, 1.0).unwrap()
    }

    const VS: f64 = 64.831_853_071_795_86;

    #[test]
    fn coefficients_at_reference_speed() {
        let c = recursion_coefficients(VS, &reference()).unwrap();
        assert!((c.c3 - 1.095_443).abs() < 1e-5, "{}", c.c3);
        assert!((c.c1 + 9.696_16).abs() < 1e-4, "{}", c.c1);
        assert!((c.fixed_point - 101.592).abs() < 0.01);
        assert!(approx_eq_rel(c.fixed_point * (1.0 - c.c3), c.c1, 1e-12));
        assert!((c.c4 - 2.0 * PI / VS * c.c1).abs() < 1e-15);
        assert!(recursion_coefficients(1.0, &reference()).is_err());
    }

    #[test]
    fn advance_at_reference_speed() {
        let p = reference();
        let a = advance_distance(100.0, VS, &p).unwrap();
        // r (vs - VT) - 2 pi R VT over vs: (638.3185 - 628.3185) / 64.8319
        assert!((a.delta - 10.0 / VS).abs() < 1e-12);
        assert!((a.delta_eff - 10.0 / (VS + 1.0)).abs() < 1e-12);
        let fp = recursion_coefficients(VS, &p).unwrap().fixed_point;
        assert!(advance_distance(fp, VS, &p).unwrap().delta.abs() < 1e-12);
        let vc = v_critical_taylor(&p);
        assert!(advance_distance(100.0, vc, &p).unwrap().delta.abs() < 1e-9);
        assert!(matches!(
            advance_distance(150.0, VS, &p),
            Err(SweepError::NoProgress { .. })
        ));
    }

    #[test]
    fn iterations_at_reference_speed() {
        let p = reference();
        assert_eq!(num_iterations(VS, &p).unwrap(), 45);
        let one = SearchParams::new(10.0, 10.0, 1.0, 0.0).unwrap();
        assert_eq!(num_iterations(v_critical_taylor(&one) + 1.0, &one).unwrap(), 0);
        assert!(num_iterations(v_critical_taylor(&p), &p).is_err());
    }

    #[test]
    fn radius_after_one_cycle() {
        let p = reference();
        assert_eq!(radius_at(0, VS, &p).unwrap(), 100.0);
        let r1 = radius_at(1, VS, &p).unwrap();
        assert!((r1 - (100.0 - 10.0 / (VS + 1.0))).abs() < 1e-10);
        assert!((r1 - 99.8481).abs() < 1e-3, "{r1}");
    }

    #[test]
    fn end_game_at_reference_speed() {
        let e = end_game(VS, &reference()).unwrap();
        assert!((e.r_last - 1.1234).abs() < 1e-3);
        assert!((e.t_right - 0.0176).abs() < 1e-3);
        assert!((e.t_left - 0.0358).abs() < 1e-3);
        assert!((e.t_one - 0.0533).abs() < 1e-3);
        assert!(e.feasible);
        let far = end_game(1e9, &reference()).unwrap();
        assert!(far.r_last < 1e-6 && far.t_one < 1e-12 && far.feasible);
    }

    #[test]
    fn thresholds() {
        assert!((delta_v_threshold(10.0, 1.0) + 52.71).abs() < 0.01);
        assert!((delta_v_threshold(1.0, 1.0) - 3.835).abs() < 0.01);
        assert!(delta_v_threshold(2.0, 1.0) < delta_v_threshold(1.5, 1.0));
        assert!(delta_v_threshold_exact(1.0, 1.0) < delta_v_threshold(1.0, 1.0));
    }

    #[test]
    fn exact_threshold_is_the_end_game_root() {
        for alpha in [1.0, 1.2, 1.4] {
            let dv = delta_v_threshold_exact(alpha, 1.0);
            let p = SearchParams::new(alpha * 10.0, 10.0, 1.0, 0.0).unwrap();
            let vc = v_critical_taylor(&p);
            let at = |d: f64| end_game_margin(&end_game(vc + d, &p).unwrap(), &p);
            assert!(at(dv).abs() < 1e-9, "alpha {alpha}: {}", at(dv));
            assert!(at(dv - 1e-3) < 0.0 && at(dv + 1e-3) > 0.0);
        }
    }

    #[test]
    fn reference_plan() {
        let plan = build_plan(&reference()).unwrap();
        assert_eq!(plan.n_iterations, 45);
        assert_eq!(plan.cycles.len(), 45);
        assert!((plan.t_total - 349.3854).abs() < 1e-3, "{}", plan.t_total);
        assert!((plan.t_in_total - 1.413).abs() < 0.01);
        assert_eq!(
            plan.t_total,
            plan.t_circular_total + plan.t_in_total + plan.end_game.t_one
        );
        assert_eq!(plan.cycles[0].t_sweep, 2.0 * PI * 100.0 / plan.vs);
        assert!(plan.cycles.iter().all(|c| c.drift.is_none()));
        assert!(plan.cycles.windows(2).all(|w| w[1].radius < w[0].radius));
    }

    #[test]
    fn alpha_one_plan_is_end_game_only() {
        let p = SearchParams::new(10.0, 10.0, 1.0, 5.0).unwrap();
        let plan = build_plan(&p).unwrap();
        assert_eq!(plan.n_iterations, 0);
        assert!(plan.cycles.is_empty());
        assert!(plan.end_game.feasible);
        assert!((plan.t_in_total - 10.0 / plan.vs).abs() < 1e-15);
        assert!((plan.t_circular_total - 2.0 * PI * 10.0 / plan.vs).abs() < 1e-12);
    }

    #[test]
    fn infeasible_plan_reports_threshold() {
        let p = SearchParams::new(10.0, 10.0, 1.0, 1.0).unwrap();
        match build_plan(&p) {
            Err(SweepError::Infeasible { threshold, .. }) => {
                assert!((threshold - 3.835).abs() < 0.01)
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn zero_increment_is_rejected() {
        let p = SearchParams::new(100.0, 10.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            build_plan(&p),
            Err(SweepError::Domain { field: "deltaV", .. })
        ));
    }
}
