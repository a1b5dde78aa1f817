//! Acceptance suite: golden numbers, cross-checks and the full grid run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{approx_eq_rel, SearchParams};
use crate::oracle::{check_confinement, recurrence, simulate, GridConfig};
use crate::par::Execution;
use crate::planner::{
    aggregate_times, build_plan, delta_v_threshold, num_iterations, plan_at_speed, radius_at,
};
use crate::study::{study_alpha, study_delta_v, Range};
use crate::velocity::{
    bisect_critical, envelope_gap, t_star_exact, t_window, v_critical_arc, v_critical_taylor,
    v_lower_bound, v_one_cycle, v_s2, velocity_gap_vc_vs2,
};

/// Reference total cleaning time at `(100, 10, 1, 1)`.
pub const REFERENCE_T_TOTAL: f64 = 349.3854;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Skip the grid simulation.
    pub quick: bool,
    /// Seed for the random parameter draws.
    pub seed: u64,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quick: false,
            seed: 7,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    /// `None` when skipped.
    pub passed: Option<bool>,
    pub detail: Vec<String>,
}

impl CheckResult {
    pub fn status(&self) -> &'static str {
        match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub quick: bool,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Collects named sub-checks for one criterion.
struct Checker {
    ok: bool,
    detail: Vec<String>,
}

impl Checker {
    fn new() -> Self {
        Checker {
            ok: true,
            detail: Vec::new(),
        }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let pass = (got - want).abs() <= tol;
        self.record(pass, format!("{what} = {got:.10} (want {want} +/- {tol:e})"));
    }

    fn that(&mut self, pass: bool, line: String) {
        self.record(pass, line);
    }

    fn record(&mut self, pass: bool, line: String) {
        self.ok &= pass;
        let mark = if pass { "ok" } else { "MISMATCH" };
        self.detail.push(format!("{mark}: {line}"));
    }

    fn fail(&mut self, line: String) {
        self.record(false, line);
    }

    fn finish(self, id: u32, name: &str) -> CheckResult {
        CheckResult {
            id,
            name: name.to_string(),
            passed: Some(self.ok),
            detail: self.detail,
        }
    }
}

fn reference() -> SearchParams {
    SearchParams::new(100.0, 10.0, 1.0, 1.0).expect("reference instance is valid")
}

pub fn check_critical_velocities() -> CheckResult {
    let p = reference();
    let mut c = Checker::new();
    c.close("v_one_cycle", v_one_cycle(&p), 62.831_853_07, 1e-7);
    c.close("v_c_arc", v_critical_arc(&p), 63.8335, 1e-3);
    c.close("v_c_taylor", v_critical_taylor(&p), 63.8319, 1e-3);
    c.close("v_s2", v_s2(&p), 62.846_318_37, 1e-7);
    c.close("v_c_taylor - v_s2", velocity_gap_vc_vs2(&p), 0.9855, 1e-3);
    c.finish(1, "critical velocities")
}

pub fn check_minimizer() -> CheckResult {
    let p = reference();
    let mut c = Checker::new();
    match t_star_exact(v_one_cycle(&p), &p) {
        Ok(g) => {
            c.close("t* at v_one_cycle", g.t_star, 0.0012, 1e-4);
            c.close("f(t*, v_one_cycle)", g.f_at_t_star, -1.047e-6, 5e-8);
        }
        Err(e) => c.fail(format!("t_star_exact: {e}")),
    }
    c.finish(2, "minimizer and gap")
}

pub fn check_plan_totals() -> CheckResult {
    let p = reference();
    let mut c = Checker::new();
    match build_plan(&p) {
        Ok(plan) => {
            c.close("t_total", plan.t_total, REFERENCE_T_TOTAL, 1e-3);
            c.close("R_last", plan.end_game.r_last, 1.1234, 1e-3);
            c.close("t_right", plan.end_game.t_right, 0.0176, 1e-3);
            c.close("t_left", plan.end_game.t_left, 0.0358, 1e-3);
            c.close("t_one", plan.end_game.t_one, 0.0533, 1e-3);
        }
        Err(e) => c.fail(format!("build_plan: {e}")),
    }
    c.finish(3, "plan totals")
}

/// Random instance in the draw box with deltaV above the cleaning threshold.
fn draw(rng: &mut ChaCha8Rng) -> SearchParams {
    loop {
        let alpha = rng.gen_range(1.5..=200.0);
        let vt = rng.gen_range(0.1..=10.0);
        let dv = rng.gen_range(0.1 * vt..=10.0 * vt);
        let r = rng.gen_range(0.5..=20.0);
        if dv > delta_v_threshold(alpha, vt) {
            if let Ok(p) = SearchParams::new(alpha * r, r, vt, dv) {
                return p;
            }
        }
    }
}

pub fn check_recursion_equivalence(seed: u64) -> CheckResult {
    const DRAWS: usize = 500;
    const REL: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Checker::new();
    let mut bad = 0;
    for k in 0..DRAWS {
        let p = draw(&mut rng);
        let vs = v_critical_taylor(&p) + p.delta_v;
        let Some(trace) = recurrence::iterate(vs, &p, 1_000_000) else {
            bad += 1;
            c.fail(format!("draw {k}: recurrence stalled for {p:?}"));
            continue;
        };
        let mut mismatch = Vec::new();
        match num_iterations(vs, &p) {
            Ok(n) if n == trace.n_iterations => {}
            Ok(n) => mismatch.push(format!("N {n} vs {}", trace.n_iterations)),
            Err(e) => mismatch.push(format!("num_iterations: {e}")),
        }
        for (i, &want) in trace.radii.iter().enumerate() {
            match radius_at(i, vs, &p) {
                Ok(got) if approx_eq_rel(got, want, REL) => {}
                Ok(got) => {
                    mismatch.push(format!("R_{i} {got} vs {want}"));
                    break;
                }
                Err(e) => {
                    mismatch.push(format!("radius_at({i}): {e}"));
                    break;
                }
            }
        }
        match aggregate_times(vs, &p) {
            Ok((t_in, t_circ)) => {
                if !approx_eq_rel(t_in, trace.t_in_total, REL) {
                    mismatch.push(format!("t_in {t_in} vs {}", trace.t_in_total));
                }
                if !approx_eq_rel(t_circ, trace.t_circular_total, REL) {
                    mismatch.push(format!("t_circ {t_circ} vs {}", trace.t_circular_total));
                }
            }
            Err(e) => mismatch.push(format!("aggregate_times: {e}")),
        }
        if !mismatch.is_empty() {
            bad += 1;
            if bad <= 5 {
                c.fail(format!("draw {k} {p:?}: {}", mismatch.join("; ")));
            }
        }
    }
    c.that(bad == 0, format!("{} of {DRAWS} draws agree (seed {seed})", DRAWS - bad));
    c.finish(4, "closed form vs recursion")
}

pub fn check_bisection_certificate() -> CheckResult {
    let p = reference();
    let mut c = Checker::new();
    match bisect_critical(v_one_cycle(&p), v_critical_arc(&p), 1e-9, &p) {
        Ok(b) => {
            c.that(
                b.gap.abs() <= 1e-9,
                format!("|f(t*(v), v)| = {:e} at v = {:.12} after {} halvings", b.gap.abs(), b.v, b.iterations),
            );
            let n = 100_000;
            let w = t_window(b.v, &p);
            let min = (0..=n)
                .map(|i| envelope_gap(w * i as f64 / n as f64, b.v, &p))
                .fold(f64::INFINITY, f64::min);
            c.that(min >= -1e-9, format!("dense minimum over {n} samples = {min:e}"));
        }
        Err(e) => c.fail(format!("bisect_critical: {e}")),
    }
    c.finish(5, "bisection certificate")
}

pub fn check_oracle_confinement() -> CheckResult {
    let p = reference();
    let n = 100_000;
    let mut c = Checker::new();
    for (name, v, positive) in [
        ("v_c_arc", v_critical_arc(&p), true),
        ("v_s2", v_s2(&p), true),
        ("v_one_cycle", v_one_cycle(&p), false),
        ("v_lb", v_lower_bound(&p), false),
    ] {
        let m = check_confinement(v, &p, n);
        let pass = if positive { m >= 0.0 } else { m < 0.0 };
        let want = if positive { ">= 0" } else { "< 0" };
        c.that(pass, format!("confinement at {name} = {m:e} (want {want})"));
    }
    c.finish(6, "oracle confinement")
}

pub fn check_simulation() -> CheckResult {
    let p = reference();
    let mut c = Checker::new();
    let plan = match build_plan(&p) {
        Ok(plan) => plan,
        Err(e) => {
            c.fail(format!("build_plan: {e}"));
            return c.finish(7, "full simulation");
        }
    };
    let cfg = GridConfig::for_plan(&plan);
    match simulate(&plan, &cfg) {
        Ok(res) => {
            c.that(!res.escaped, format!("escaped = {} ({:?})", res.escaped, res.escape_time));
            let upper = res.h + p.vt * res.dt;
            let mut worst_hi = f64::NEG_INFINITY;
            let mut worst_lo = f64::INFINITY;
            for (got, cycle) in res.per_cycle_radii.iter().zip(&plan.cycles) {
                worst_hi = worst_hi.max(got - cycle.radius);
                worst_lo = worst_lo.min(got - cycle.radius);
            }
            c.that(
                res.per_cycle_radii.len() == plan.cycles.len(),
                format!("{} per-cycle radii for {} cycles", res.per_cycle_radii.len(), plan.cycles.len()),
            );
            c.that(
                worst_hi <= upper,
                format!("max radius excess {worst_hi:.4} (limit h + VT dt = {upper:.4})"),
            );
            c.that(
                worst_lo >= -res.h,
                format!("min radius excess {worst_lo:.4} (limit -h = {:.4})", -res.h),
            );
            match res.clean_time {
                Some(t) => {
                    let rel = (t - REFERENCE_T_TOTAL).abs() / REFERENCE_T_TOTAL;
                    c.that(rel <= 0.02, format!("clean_time {t:.4} ({:.3}% off)", rel * 100.0));
                }
                None => c.fail("region never cleaned".to_string()),
            }
            c.detail.push(format!("h = {}, dt = {:e}, {} steps", res.h, res.dt, res.steps));
        }
        Err(e) => c.fail(format!("simulate: {e}")),
    }
    c.finish(7, "full simulation")
}

pub fn check_study_monotonicity(exec: Execution) -> CheckResult {
    let mut c = Checker::new();
    let base = reference();
    let mut run = || -> Result<()> {
        let dv = study_delta_v(&base, &Range::new(0.1, 10.0, 0.1)?, exec)?;
        let mut n_ok = true;
        let mut t_ok = true;
        for w in dv.windows(2) {
            n_ok &= w[1].n_iterations <= w[0].n_iterations;
            t_ok &= w[1].t_total <= w[0].t_total;
        }
        c.that(n_ok, format!("N nonincreasing in deltaV over {} points", dv.len()));
        c.that(t_ok, "t_total nonincreasing in deltaV".to_string());

        let al = study_alpha(&base, &Range::new(1.0, 100.0, 1.0)?, exec)?;
        let mut n_ok = true;
        let mut t_ok = true;
        for w in al.windows(2) {
            n_ok &= w[1].n_iterations >= w[0].n_iterations;
            t_ok &= w[1].t_total >= w[0].t_total;
        }
        c.that(n_ok, format!("N nondecreasing in alpha over {} points", al.len()));
        c.that(t_ok, "t_total nondecreasing in alpha".to_string());

        let plan = plan_at_speed(&base, v_critical_taylor(&base) + base.vt)?;
        let ratio = plan.circular_to_inward_ratio();
        c.that(ratio > 10.0, format!("circular/inward at deltaV = VT: {ratio:.2}"));
        Ok(())
    };
    if let Err(e) = run() {
        c.fail(format!("study: {e}"));
    }
    c.finish(8, "study monotonicity")
}

/// Every grid point whose feasibility flag disagrees with the closed-form
/// threshold sign, as `(alpha, deltaV, flag, threshold)`.
pub fn threshold_mismatches(alphas: &[f64], deltas: &[f64], vt: f64) -> Vec<(f64, f64, bool, f64)> {
    let mut out = Vec::new();
    for &a in alphas {
        let threshold = delta_v_threshold(a, vt);
        for &dv in deltas {
            let Ok(p) = SearchParams::new(a * 10.0, 10.0, vt, dv) else {
                continue;
            };
            let Ok(plan) = plan_at_speed(&p, v_critical_taylor(&p) + dv) else {
                continue;
            };
            if plan.end_game.feasible != (dv > threshold) {
                out.push((a, dv, plan.end_game.feasible, threshold));
            }
        }
    }
    out
}

pub fn check_threshold_law() -> CheckResult {
    let mut c = Checker::new();
    c.close("threshold at alpha = 10", delta_v_threshold(10.0, 1.0), -52.71, 1e-2);
    c.close("threshold at alpha = 1", delta_v_threshold(1.0, 1.0), 3.835, 1e-2);
    let alphas = [1.0, 1.1, 1.25, 1.5, 2.0, 5.0, 10.0, 50.0];
    let deltas: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
    let bad = threshold_mismatches(&alphas, &deltas, 1.0);
    let total = alphas.len() * deltas.len();
    c.that(
        bad.is_empty(),
        format!("feasibility flag matches threshold sign at {} of {total} grid points", total - bad.len()),
    );
    for &(a, dv, flag, threshold) in bad.iter().take(3) {
        c.detail.push(format!(
            "alpha {a}, dV {dv:.1}: feasible = {flag}, threshold {threshold:.4}"
        ));
    }
    if bad.len() > 3 {
        c.detail.push(format!("... and {} more", bad.len() - 3));
    }
    c.finish(9, "threshold law")
}

/// Runs all checks in order.
pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let mut checks = vec![
        check_critical_velocities(),
        check_minimizer(),
        check_plan_totals(),
        check_recursion_equivalence(opts.seed),
        check_bisection_certificate(),
        check_oracle_confinement(),
    ];
    checks.push(if opts.quick {
        CheckResult {
            id: 7,
            name: "full simulation".to_string(),
            passed: None,
            detail: vec!["skipped (quick)".to_string()],
        }
    } else {
        check_simulation()
    });
    checks.push(check_study_monotonicity(opts.exec));
    checks.push(check_threshold_law());
    let all_passed = checks.iter().all(|c| c.passed != Some(false));
    VerifyReport {
        seed: opts.seed,
        quick: opts.quick,
        checks,
        all_passed,
    }
}
