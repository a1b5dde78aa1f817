//! Critical sweeper velocities and the confinement gap `f(t, vs)`.
//!
//! `f(t, vs)` compares the squared distance from the sensor's outer tip to the
//! worst point P with the squared radius of the wavefront P emits, normalised
//! by `2 R0 (R0 + r)`. A velocity confines the region when `f >= 0` over the
//! quarter-turn window `[0, pi R0 / (2 vs)]` that follows the first cycle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SweepError};
use crate::model::SearchParams;

/// Default bisection tolerance, in velocity units.
pub const DEFAULT_BISECTION_EPS: f64 = 1e-9;
/// Bisection gives up after this many halvings.
pub const MAX_BISECTION_ITERATIONS: usize = 200;

/// Lower bound that holds for any sweep pattern: `pi R0 VT / r`.
pub fn v_lower_bound(p: &SearchParams) -> f64 {
    PI * p.r0 * p.vt / p.r
}

/// Velocity that exactly covers the spread during a single traversal.
pub fn v_one_cycle(p: &SearchParams) -> f64 {
    2.0 * PI * p.r0 * p.vt / p.r
}

/// Speed that traverses `2 pi + asin(r / R0)` while P spreads by `r`.
pub fn v_critical_arc(p: &SearchParams) -> f64 {
    (2.0 * PI + (p.r / p.r0).asin()) * p.r0 * p.vt / p.r
}

/// First-order (in `r / R0`) version of [`v_critical_arc`]; the planner's base speed.
pub fn v_critical_taylor(p: &SearchParams) -> f64 {
    v_one_cycle(p) + p.vt
}

/// Closed-form velocity that zeroes the approximated gap at its approximated minimiser.
pub fn v_s2(p: &SearchParams) -> f64 {
    let SearchParams { r0, r, vt, .. } = *p;
    let s = r0 * (r0 + r);
    (PI * r0 * vt * (r0 + r) + vt * (s * (PI * PI * s + r * r)).sqrt()) / (r * (r0 + r))
}

/// `v_critical_taylor - v_s2` in rationalised form (no cancellation).
pub fn velocity_gap_vc_vs2(p: &SearchParams) -> f64 {
    let SearchParams { r0, r, vt, .. } = *p;
    let s = r0 * (r0 + r);
    vt * (2.0 * PI * s + r * r) / ((PI * r0 + r) * (r0 + r) + (s * (PI * PI * s + r * r)).sqrt())
}

/// Upper end of the minimisation window, a quarter turn at radius `R0`.
pub fn t_window(vs: f64, p: &SearchParams) -> f64 {
    PI * p.r0 / (2.0 * vs)
}

/// `f(t, vs)`.
pub fn envelope_gap(t: f64, vs: f64, p: &SearchParams) -> f64 {
    let SearchParams { r0, r, vt, .. } = *p;
    let k = 1.0 / (2.0 * r0 * (r0 + r));
    let reach = vt * (2.0 * PI * r0 / vs + t);
    let half_angle = 0.5 * vs * t / r0;
    // 1 - cos(x) = 2 sin^2(x/2) keeps the O(1e-6) minimum accurate
    k * (r * r - reach * reach) + 2.0 * half_angle.sin().powi(2)
}

/// `df/dt (t, vs)`.
pub fn envelope_gap_derivative(t: f64, vs: f64, p: &SearchParams) -> f64 {
    let SearchParams { r0, r, vt, .. } = *p;
    -vt * vt / (r0 * (r0 + r)) * (2.0 * PI * r0 / vs + t) + (vs * t / r0).sin() * vs / r0
}

fn envelope_gap_second_derivative(t: f64, vs: f64, p: &SearchParams) -> f64 {
    let SearchParams { r0, r, vt, .. } = *p;
    -vt * vt / (r0 * (r0 + r)) + (vs * t / r0).cos() * vs * vs / (r0 * r0)
}

/// Minimiser of `f(., vs)` over the window together with the quartic
/// substitution coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeGap {
    /// Location of the minimum of `f(., vs)` on `[0, window]`.
    pub t_star: f64,
    pub f_at_t_star: f64,
    pub vs: f64,
    /// `1 / (2 R0 (R0 + r))`.
    pub k: f64,
    /// `VT^4 / (vs^2 (R0 + r)^2)`.
    pub l: f64,
    pub quad_a: f64,
    pub quad_b: f64,
    pub quad_c: f64,
    /// Roots of `a M^2 + b M + c`, smaller first, when real.
    pub m_roots: Option<[f64; 2]>,
    /// `sqrt(M_small) - 2 pi R0 / vs`: the zero crossing of the quartic
    /// substitution. It is not the minimiser of `f`.
    pub t_star_quadratic: Option<f64>,
    pub window: f64,
    /// The minimum sits on the window's upper edge rather than at an interior
    /// stationary point.
    pub clamped: bool,
}

/// Coefficients `(k, l, a, b, c)` of the quadratic in `M = (2 pi R0 / vs + t)^2`.
pub fn quadratic_coefficients(vs: f64, p: &SearchParams) -> (f64, f64, f64, f64, f64) {
    let SearchParams { r0, r, vt, .. } = *p;
    let k = 1.0 / (2.0 * r0 * (r0 + r));
    let l = vt.powi(4) / (vs * vs * (r0 + r).powi(2));
    let a = k * k * vt.powi(4);
    let b = l - 2.0 * k * k * r * r * vt * vt - 2.0 * k * vt * vt;
    let c = 2.0 * k * r * r + k * k * r.powi(4);
    (k, l, a, b, c)
}

/// Real roots of the quadratic in `M`, smaller first.
pub fn quadratic_m_roots(vs: f64, p: &SearchParams) -> Result<[f64; 2]> {
    let (_, _, a, b, c) = quadratic_coefficients(vs, p);
    let disc = b * b - 4.0 * a * c;
    if !(disc >= 0.0) {
        return Err(SweepError::Numerical {
            discriminant: disc,
            a,
            b,
            c,
        });
    }
    // stable form: q carries the sign of -b
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = (q / a, c / q);
    Ok(if r1 <= r2 { [r1, r2] } else { [r2, r1] })
}

/// Locates the minimum of `f(., vs)` on the window.
///
/// `f'` is negative at `t = 0` and increases until `cos(vs t / R0)` drops to
/// `VT^2 R0 / (vs^2 (R0 + r))`; the first zero of `f'` before that peak is the
/// minimiser. Without such a zero `f` decreases across the whole window and
/// the minimum is clamped to the upper edge.
pub fn t_star_exact(vs: f64, p: &SearchParams) -> Result<EnvelopeGap> {
    if !(vs.is_finite() && vs > 0.0) {
        return Err(SweepError::domain("vs", format!("must be positive, got {vs}")));
    }
    let window = t_window(vs, p);
    let (k, l, a, b, c) = quadratic_coefficients(vs, p);
    let m_roots = quadratic_m_roots(vs, p).ok();
    let t_star_quadratic = m_roots.map(|[m, _]| m.sqrt() - 2.0 * PI * p.r0 / vs);

    let q = p.vt * p.vt * p.r0 / (vs * vs * (p.r0 + p.r));
    let t_peak = if q < 1.0 {
        (p.r0 / vs * q.acos()).min(window)
    } else {
        0.0
    };
    let d = |t: f64| envelope_gap_derivative(t, vs, p);

    let (t_star, clamped) = if t_peak > 0.0 && d(t_peak) > 0.0 {
        (first_root_increasing(d, 0.0, t_peak, vs, p), false)
    } else {
        (window, true)
    };
    Ok(EnvelopeGap {
        t_star,
        f_at_t_star: envelope_gap(t_star, vs, p),
        vs,
        k,
        l,
        quad_a: a,
        quad_b: b,
        quad_c: c,
        m_roots,
        t_star_quadratic,
        window,
        clamped,
    })
}

/// Root of an increasing `d` on `[lo, hi]` with `d(lo) < 0 < d(hi)`: Newton
/// steps from the right, bracketed by bisection.
fn first_root_increasing(d: impl Fn(f64) -> f64, lo: f64, hi: f64, vs: f64, p: &SearchParams) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut t = hi;
    for _ in 0..200 {
        let dt = d(t);
        if dt == 0.0 {
            return t;
        }
        if dt < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = envelope_gap_second_derivative(t, vs, p);
        let newton = t - dt / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == t || hi - lo <= 4.0 * f64::EPSILON * hi {
            return next;
        }
        t = next;
    }
    t
}

/// Minimiser predicted by the small-angle expansion of the sine in `f'`.
pub fn t_star_approx(vs: f64, p: &SearchParams) -> Result<f64> {
    let SearchParams { r0, r, vt, .. } = *p;
    let denom = vs * vs * (r0 + r) - vt * vt * r0;
    if !(vs > 0.0 && denom > 0.0) {
        return Err(SweepError::domain(
            "vs",
            format!("vs^2 (R0 + r) must exceed VT^2 R0 (vs = {vs})"),
        ));
    }
    Ok(2.0 * PI * r0 * r0 * vt * vt / (vs * denom))
}

/// `f` at its minimiser: the scalar whose root is the minimal no-escape velocity.
pub fn minimal_gap(vs: f64, p: &SearchParams) -> Result<f64> {
    Ok(t_star_exact(vs, p)?.f_at_t_star)
}

/// Outcome of [`bisect_critical`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bisection {
    pub v: f64,
    pub gap: f64,
    pub iterations: usize,
    /// Bracket width after each halving.
    pub widths: Vec<f64>,
}

/// Bisects `g(v) = f(t*(v), v)` on `[lo, hi]` until the bracket is at most `eps` wide.
pub fn bisect_critical(lo: f64, hi: f64, eps: f64, p: &SearchParams) -> Result<Bisection> {
    if !(eps > 0.0) {
        return Err(SweepError::domain("eps", format!("must be positive, got {eps}")));
    }
    let g_lo = minimal_gap(lo, p)?;
    let g_hi = minimal_gap(hi, p)?;
    if !(lo < hi && g_lo < 0.0 && g_hi > 0.0) {
        return Err(SweepError::Bracket { lo, hi, g_lo, g_hi });
    }
    let (mut lo, mut hi, mut g_lo) = (lo, hi, g_lo);
    let mut widths = Vec::new();
    for k in 1..=MAX_BISECTION_ITERATIONS {
        let x = 0.5 * (lo + hi);
        let g_x = minimal_gap(x, p)?;
        if g_lo * g_x > 0.0 {
            lo = x;
            g_lo = g_x;
        } else {
            hi = x;
        }
        widths.push(hi - lo);
        if hi - lo <= eps {
            return Ok(Bisection {
                v: x,
                gap: g_x,
                iterations: k,
                widths,
            });
        }
    }
    Err(SweepError::MaxIter {
        iterations: MAX_BISECTION_ITERATIONS,
        width: hi - lo,
    })
}

/// Every named critical velocity of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalVelocitySet {
    pub v_lb: f64,
    pub v_one_cycle: f64,
    pub v_c_arc: f64,
    pub v_c_taylor: f64,
    pub v_s2: f64,
    pub v_bisection: f64,
    pub epsilon: f64,
}

impl CriticalVelocitySet {
    /// Named velocities, ascending for any valid instance.
    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("v_lb", self.v_lb),
            ("v_one_cycle", self.v_one_cycle),
            ("v_bisection", self.v_bisection),
            ("v_s2", self.v_s2),
            ("v_c_taylor", self.v_c_taylor),
            ("v_c_arc", self.v_c_arc),
        ]
    }
}

/// Evaluates every critical velocity; the bisection runs between
/// `v_one_cycle` and `v_c_arc`.
pub fn critical_velocities(p: &SearchParams, eps: f64) -> Result<CriticalVelocitySet> {
    let v_one = v_one_cycle(p);
    let v_arc = v_critical_arc(p);
    let bisection = bisect_critical(v_one, v_arc, eps, p)?;
    Ok(CriticalVelocitySet {
        v_lb: v_lower_bound(p),
        v_one_cycle: v_one,
        v_c_arc: v_arc,
        v_c_taylor: v_critical_taylor(p),
        v_s2: v_s2(p),
        v_bisection: bisection.v,
        epsilon: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> SearchParams {
        SearchParams::new(100.0, 10.0, 1.0, 1.0).unwrap()
    }

    fn unit(alpha: f64) -> SearchParams {
        SearchParams::new(alpha * 10.0, 10.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn lower_bound_values() {
        assert!((v_lower_bound(&reference()) - 31.415_926_5).abs() < 1e-7);
        assert!((v_lower_bound(&unit(1.0)) - PI).abs() < 1e-12);
        let p = SearchParams::new(200.0, 10.0, 2.0, 0.0).unwrap();
        assert!((v_lower_bound(&p) - 125.663_7).abs() < 1e-4);
    }

    #[test]
    fn one_cycle_is_twice_the_lower_bound() {
        assert!((v_one_cycle(&reference()) - 62.831_853_07).abs() < 1e-7);
        assert!((v_one_cycle(&unit(1.0)) - 2.0 * PI).abs() < 1e-12);
        for a in [1.0, 3.3, 17.0, 250.0] {
            let p = unit(a);
            assert!((v_one_cycle(&p) - 2.0 * v_lower_bound(&p)).abs() < 1e-12 * v_one_cycle(&p));
        }
    }

    #[test]
    fn arc_critical_values() {
        assert!((v_critical_arc(&reference()) - 63.833_5).abs() < 1e-3);
        assert!((v_critical_arc(&unit(1.0)) - 2.5 * PI).abs() < 1e-12);
        // (2 pi + asin(0.01)) * 100
        let p = SearchParams::new(1000.0, 10.0, 1.0, 0.0).unwrap();
        assert!((v_critical_arc(&p) - 629.318_547_8).abs() < 1e-6);
    }

    #[test]
    fn taylor_critical_values() {
        assert!((v_critical_taylor(&reference()) - 63.831_9).abs() < 1e-3);
        let p = SearchParams::new(50.0, 5.0, 2.0, 0.0).unwrap();
        assert!((v_critical_taylor(&p) - 127.663_7).abs() < 1e-4);
        for a in [1.0, 2.0, 10.0, 123.0] {
            let p = unit(a);
            assert!((v_critical_taylor(&p) - v_one_cycle(&p) - p.vt).abs() < 1e-9);
            assert!(v_critical_taylor(&p) <= v_critical_arc(&p));
        }
    }

    #[test]
    fn vs2_values() {
        assert!((v_s2(&reference()) - 62.846_318_37).abs() < 1e-7);
        for a in [1.0, 2.0, 10.0, 100.0] {
            let p = unit(a);
            assert!(v_s2(&p) > v_one_cycle(&p), "alpha = {a}");
        }
        let far = unit(1e6);
        assert!((v_s2(&far) / (2.0 * PI * 1e6) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gap_matches_difference_of_velocities() {
        assert!((velocity_gap_vc_vs2(&reference()) - 0.985_5).abs() < 1e-3);
        for a in [1.0, 1.5, 10.0, 400.0] {
            let p = unit(a);
            let direct = v_critical_taylor(&p) - v_s2(&p);
            let closed = velocity_gap_vc_vs2(&p);
            assert!(closed > 0.0);
            assert!((closed - direct).abs() <= 1e-6 * closed, "alpha {a}: {closed} vs {direct}");
        }
    }

    #[test]
    fn gap_vanishes_at_origin_for_one_cycle_speed() {
        let p = reference();
        assert!(envelope_gap(0.0, v_one_cycle(&p), &p).abs() < 1e-15);
    }

    #[test]
    fn derivative_at_origin() {
        let p = reference();
        for vs in [30.0, 62.8, 100.0] {
            let expected = -2.0 * PI * p.vt * p.vt / ((p.r0 + p.r) * vs);
            assert!((envelope_gap_derivative(0.0, vs, &p) - expected).abs() < 1e-15);
        }
        let v1 = v_one_cycle(&p);
        assert!(envelope_gap_derivative(t_window(v1, &p), v1, &p) > 0.0);
    }

    #[test]
    fn one_cycle_speed_has_negative_minimum() {
        let p = reference();
        let gap = t_star_exact(v_one_cycle(&p), &p).unwrap();
        assert!(!gap.clamped);
        assert!((gap.f_at_t_star + 1.047e-6).abs() < 5e-9, "{}", gap.f_at_t_star);
        assert!(envelope_gap_derivative(gap.t_star, gap.vs, &p).abs() < 1e-12);
        // the quartic substitution lands at the zero crossing near 0.00115
        let tq = gap.t_star_quadratic.unwrap();
        assert!((tq - 0.0012).abs() < 1e-4, "{tq}");
        let [m1, m2] = gap.m_roots.unwrap();
        assert!((m1 - 100.0230).abs() < 1e-3, "{m1}");
        assert!((m2 - 44_089.844).abs() < 1e-2, "{m2}");
    }

    #[test]
    fn minimum_is_clamped_when_f_never_turns() {
        let p = reference();
        let gap = t_star_exact(1.0, &p).unwrap();
        assert!(gap.clamped);
        assert_eq!(gap.t_star, gap.window);
    }

    #[test]
    fn approx_minimiser() {
        let p = reference();
        let v1 = v_one_cycle(&p);
        let approx = t_star_approx(v1, &p).unwrap();
        let exact = t_star_exact(v1, &p).unwrap().t_star;
        assert!((approx - exact).abs() <= 0.25 * exact);
        let mut last = f64::INFINITY;
        for vs in [10.0, 100.0, 1e3, 1e4, 1e6] {
            let t = t_star_approx(vs, &p).unwrap();
            assert!(t < last && t > 0.0);
            last = t;
        }
        let one = unit(1.0);
        let t = t_star_approx(2.0 * PI, &one).unwrap();
        assert!(t.is_finite() && t > 0.0);
        assert!(t_star_approx(0.5, &p).is_err());
    }

    #[test]
    fn bisection_rejects_degenerate_bracket() {
        let p = reference();
        let v = v_one_cycle(&p);
        assert!(matches!(
            bisect_critical(v, v, 1e-9, &p),
            Err(SweepError::Bracket { .. })
        ));
        let hi = v_critical_arc(&p);
        assert!(matches!(
            bisect_critical(hi, hi + 1.0, 1e-9, &p),
            Err(SweepError::Bracket { .. })
        ));
    }

    #[test]
    fn bisection_halves_the_bracket() {
        let p = reference();
        let (lo, hi) = (v_one_cycle(&p), v_critical_arc(&p));
        let b = bisect_critical(lo, hi, 1e-9, &p).unwrap();
        let mut prev = hi - lo;
        for w in &b.widths {
            // subtraction of nearby endpoints costs an ulp or two of hi
            assert!((w - 0.5 * prev).abs() <= 1e-12 * prev + 4.0 * f64::EPSILON * hi);
            prev = *w;
        }
        assert!(b.v > 62.831_85 && b.v < 62.85, "{}", b.v);
        assert!(b.gap.abs() <= 1e-9);
    }

    #[test]
    fn bisection_reports_exhaustion() {
        let p = reference();
        let err = bisect_critical(v_one_cycle(&p), v_critical_arc(&p), 1e-30, &p).unwrap_err();
        assert!(matches!(err, SweepError::MaxIter { iterations: 200, .. }));
    }
}
