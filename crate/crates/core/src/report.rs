//! CSV rendering with a fixed header and ten significant digits.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{SearchParams, SweepPlan};
use crate::oracle::confinement::{brute_force_t_star_with, check_confinement_with};
use crate::oracle::SimulationResult;
use crate::par::Execution;
use crate::study::StudyRow;
use crate::velocity::{t_star_exact, CriticalVelocitySet};

/// Formats `x` with ten significant digits, trimming trailing zeros.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        let s = format!("{x:.9e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exponent}");
    }
    let decimals = (9 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

fn csv_err(e: csv::Error) -> crate::error::SweepError {
    crate::error::SweepError::Config(format!("csv output: {e}"))
}

fn io_err(e: std::io::Error) -> crate::error::SweepError {
    crate::error::SweepError::Config(format!("csv output: {e}"))
}

/// One critical velocity with its gap minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub name: String,
    pub v: f64,
    pub t_star: f64,
    pub f_at_t_star: f64,
    pub clamped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<SampledGap>,
}

/// Sampled cross-check of one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledGap {
    pub n_samples: usize,
    /// Minimum of the unnormalised gap; nonnegative certifies confinement.
    pub confinement: f64,
    pub t_star_brute: f64,
}

/// Adds sampled confinement margins and brute-force minimisers to `rows`.
pub fn attach_sampled(rows: &mut [CriticalRow], p: &SearchParams, n_samples: usize, exec: Execution) {
    for row in rows {
        row.oracle = Some(SampledGap {
            n_samples,
            confinement: check_confinement_with(row.v, p, n_samples, exec),
            t_star_brute: brute_force_t_star_with(row.v, p, n_samples, exec),
        });
    }
}

/// Every named velocity with `t*` and `f(t*, v)`.
pub fn critical_rows(set: &CriticalVelocitySet, p: &SearchParams) -> Result<Vec<CriticalRow>> {
    set.named()
        .iter()
        .map(|&(name, v)| {
            let gap = t_star_exact(v, p)?;
            Ok(CriticalRow {
                name: name.to_string(),
                v,
                t_star: gap.t_star,
                f_at_t_star: gap.f_at_t_star,
                clamped: gap.clamped,
                oracle: None,
            })
        })
        .collect()
}

pub fn write_critical_csv<W: Write>(rows: &[CriticalRow], epsilon: f64, out: W) -> Result<()> {
    let sampled = rows.iter().all(|r| r.oracle.is_some()) && !rows.is_empty();
    let mut w = writer(out);
    let mut header = vec!["name", "v", "t_star", "f_at_t_star", "clamped", "epsilon"];
    if sampled {
        header.extend(["n_samples", "confinement", "t_star_brute"]);
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![
            r.name.clone(),
            sig10(r.v),
            sig10(r.t_star),
            sig10(r.f_at_t_star),
            r.clamped.to_string(),
            sig10(epsilon),
        ];
        if let (true, Some(o)) = (sampled, &r.oracle) {
            rec.extend([o.n_samples.to_string(), sig10(o.confinement), sig10(o.t_star_brute)]);
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// One summary row for a plan.
pub fn write_plan_summary_csv<W: Write>(plan: &SweepPlan, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        "vs",
        "n_iterations",
        "t_in_total",
        "t_circular_total",
        "t_one",
        "t_total",
        "feasible",
    ])
    .map_err(csv_err)?;
    w.write_record([
        sig10(plan.vs),
        plan.n_iterations.to_string(),
        sig10(plan.t_in_total),
        sig10(plan.t_circular_total),
        sig10(plan.end_game.t_one),
        sig10(plan.t_total),
        plan.end_game.feasible.to_string(),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(io_err)
}

/// One row per cycle: `i, R_i, t_sweep, delta_eff, t_in_i`.
pub fn write_cycles_csv<W: Write>(plan: &SweepPlan, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["i", "radius", "t_sweep", "delta_eff", "t_in"])
        .map_err(csv_err)?;
    for c in &plan.cycles {
        w.write_record([
            c.index.to_string(),
            sig10(c.radius),
            sig10(c.t_sweep),
            sig10(c.delta_eff),
            sig10(c.t_in),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// One summary row for a grid run.
pub fn write_simulation_csv<W: Write>(res: &SimulationResult, out: W) -> Result<()> {
    let opt = |x: Option<f64>| x.map(sig10).unwrap_or_default();
    let mut w = writer(out);
    w.write_record([
        "escaped",
        "escape_time",
        "clean_time",
        "max_overshoot",
        "h",
        "dt",
        "steps",
    ])
    .map_err(csv_err)?;
    w.write_record([
        res.escaped.to_string(),
        opt(res.escape_time),
        opt(res.clean_time),
        sig10(res.max_overshoot),
        sig10(res.h),
        sig10(res.dt),
        res.steps.to_string(),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(io_err)
}

/// Planned against simulated radius, one row per cycle the run reached.
pub fn write_simulation_cycles_csv<W: Write>(plan: &SweepPlan, res: &SimulationResult, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["i", "planned_radius", "simulated_radius", "excess"])
        .map_err(csv_err)?;
    for (c, got) in plan.cycles.iter().zip(&res.per_cycle_radii) {
        w.write_record([
            c.index.to_string(),
            sig10(c.radius),
            sig10(*got),
            sig10(got - c.radius),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_study_csv<W: Write>(label: &str, rows: &[StudyRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        label,
        "n_iterations",
        "t_in_total",
        "t_circular_total",
        "t_one",
        "t_total",
        "circular_to_inward",
        "feasible",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            sig10(r.value),
            r.n_iterations.to_string(),
            sig10(r.t_in_total),
            sig10(r.t_circular_total),
            sig10(r.t_one),
            sig10(r.t_total),
            sig10(r.circular_to_inward),
            r.feasible.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}
