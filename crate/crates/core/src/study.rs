//! Parameter studies over the region ratio or the velocity increment.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SweepError};
use crate::model::SearchParams;
use crate::par::{self, Execution};
use crate::planner::plan_at_speed;
use crate::velocity::v_critical_taylor;

/// Inclusive arithmetic grid `from, from + step, ..., <= to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Range {
    pub fn new(from: f64, to: f64, step: f64) -> Result<Self> {
        if !(from.is_finite() && to.is_finite() && step.is_finite()) {
            return Err(SweepError::Config(format!(
                "range bounds must be finite (from {from}, to {to}, step {step})"
            )));
        }
        if !(step > 0.0) {
            return Err(SweepError::Config(format!("range step must be positive, got {step}")));
        }
        if to < from {
            return Err(SweepError::Config(format!("empty range: to {to} < from {from}")));
        }
        Ok(Range { from, to, step })
    }

    /// Grid values; each is `from + i * step` so rounding does not accumulate.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.from + i as f64 * self.step).collect()
    }
}

/// One grid point of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    /// The swept value: `alpha` or `deltaV`.
    pub value: f64,
    pub n_iterations: usize,
    pub t_in_total: f64,
    pub t_circular_total: f64,
    pub t_one: f64,
    pub t_total: f64,
    pub circular_to_inward: f64,
    pub feasible: bool,
}

fn row(value: f64, p: &SearchParams) -> Result<StudyRow> {
    let plan = plan_at_speed(p, v_critical_taylor(p) + p.delta_v)?;
    Ok(StudyRow {
        value,
        n_iterations: plan.n_iterations,
        t_in_total: plan.t_in_total,
        t_circular_total: plan.t_circular_total,
        t_one: plan.end_game.t_one,
        t_total: plan.t_total,
        circular_to_inward: plan.circular_to_inward_ratio(),
        feasible: plan.end_game.feasible,
    })
}

/// Plans for `R0 = alpha * r` over the grid, other fields from `base`.
pub fn study_alpha(base: &SearchParams, alphas: &Range, exec: Execution) -> Result<Vec<StudyRow>> {
    let values = alphas.values();
    par::map(exec, &values, |&a| {
        let p = SearchParams::new(a * base.r, base.r, base.vt, base.delta_v)?;
        row(a, &p)
    })
    .into_iter()
    .collect()
}

/// Plans for every `deltaV` on the grid, other fields from `base`.
pub fn study_delta_v(base: &SearchParams, deltas: &Range, exec: Execution) -> Result<Vec<StudyRow>> {
    let values = deltas.values();
    par::map(exec, &values, |&dv| row(dv, &base.with_delta_v(dv)?))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive() {
        let r = Range::new(0.1, 10.0, 0.1).unwrap();
        let v = r.values();
        assert_eq!(v.len(), 100);
        assert!((v[99] - 10.0).abs() < 1e-12);
        assert_eq!(Range::new(2.0, 100.0, 1.0).unwrap().values().len(), 99);
        assert_eq!(Range::new(3.0, 3.0, 1.0).unwrap().values(), vec![3.0]);
    }

    #[test]
    fn bad_ranges() {
        assert!(Range::new(1.0, 2.0, 0.0).is_err());
        assert!(Range::new(1.0, 2.0, -1.0).is_err());
        assert!(Range::new(3.0, 2.0, 1.0).is_err());
        assert!(Range::new(f64::NAN, 2.0, 1.0).is_err());
    }

    #[test]
    fn modes_produce_identical_rows() {
        let base = SearchParams::new(100.0, 10.0, 1.0, 1.0).unwrap();
        let grid = Range::new(0.1, 3.0, 0.1).unwrap();
        let a = study_delta_v(&base, &grid, Execution::Sequential).unwrap();
        let b = study_delta_v(&base, &grid, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
