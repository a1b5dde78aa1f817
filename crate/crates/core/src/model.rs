//! Problem instance and the plan/result records shared by every module.
//!
//! Quantities are plain `f64` in whatever consistent length and time units the
//! caller picks; every formula in the crate is scale-free.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SweepError};

/// Default relative tolerance for internal equality checks.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// One search instance: the evader disk, the sensor and the speeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Initial radius of the evader region.
    pub r0: f64,
    /// Sensor half-length; the line sensor is `2r` long.
    pub r: f64,
    /// Maximal evader speed.
    pub vt: f64,
    /// Sweeper speed increment above the Taylor critical velocity.
    pub delta_v: f64,
}

impl SearchParams {
    /// Builds and validates an instance.
    pub fn new(r0: f64, r: f64, vt: f64, delta_v: f64) -> Result<Self> {
        validate(SearchParams { r0, r, vt, delta_v })
    }

    /// Ratio `R0 / r`.
    pub fn alpha(&self) -> f64 {
        alpha(self)
    }

    /// Same instance with a different velocity increment.
    pub fn with_delta_v(self, delta_v: f64) -> Result<Self> {
        validate(SearchParams { delta_v, ..self })
    }
}

/// Returns the instance unchanged when every invariant holds.
pub fn validate(params: SearchParams) -> Result<SearchParams> {
    let SearchParams { r0, r, vt, delta_v } = params;
    positive("R0", r0)?;
    positive("r", r)?;
    positive("VT", vt)?;
    if !delta_v.is_finite() || delta_v < 0.0 {
        return Err(SweepError::domain(
            "deltaV",
            format!("must be finite and non-negative, got {delta_v}"),
        ));
    }
    if r0 < r {
        return Err(SweepError::domain(
            "R0",
            format!("R0 < r ({r0} < {r}); the region must be at least the sensor half-length"),
        ));
    }
    Ok(params)
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(SweepError::domain(
            field,
            format!("must be finite and positive, got {value}"),
        ))
    }
}

pub fn alpha(params: &SearchParams) -> f64 {
    params.r0 / params.r
}

/// One circular shrinking cycle of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub index: usize,
    /// Bounding radius `R_i` swept by the sensor midpoint.
    pub radius: f64,
    /// Duration of the full circular traversal at `radius`.
    pub t_sweep: f64,
    /// Effective inward advance after the traversal.
    pub delta_eff: f64,
    /// Duration of the inward motion that follows the traversal. For the last
    /// cycle this is the final descent `R_N / vs`.
    pub t_in: f64,
    /// Step-by-step recursion values, present only when they drift from the
    /// closed form by more than the default tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<CycleDrift>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleDrift {
    pub radius_recursive: f64,
    pub t_in_recursive: f64,
}

/// The radius-`r` sweep, the descent and the linear right/left sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndGameRecord {
    pub r_last: f64,
    pub t_last_circle: f64,
    pub t_linear_descent: f64,
    pub t_right: f64,
    pub t_left: f64,
    pub t_one: f64,
    /// `(r - r_last) / VT > t_one`.
    pub feasible: bool,
}

/// A complete cleaning schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub params: SearchParams,
    pub vs: f64,
    pub n_iterations: usize,
    pub cycles: Vec<CycleRecord>,
    pub t_in_total: f64,
    pub t_circular_total: f64,
    pub end_game: EndGameRecord,
    pub t_total: f64,
}

impl SweepPlan {
    /// Ratio of circular traversal time to inward advancement time.
    pub fn circular_to_inward_ratio(&self) -> f64 {
        self.t_circular_total / self.t_in_total
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// `|a - b| <= rel * max(|a|, |b|, tiny)`.
pub fn approx_eq_rel(a: f64, b: f64, rel: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    (a - b).abs() <= rel * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_reference_instance() {
        let p = SearchParams::new(100.0, 10.0, 1.0, 1.0).unwrap();
        assert_eq!(p.alpha(), 10.0);
    }

    #[test]
    fn accepts_alpha_one() {
        let p = SearchParams::new(10.0, 10.0, 1.0, 0.0).unwrap();
        assert_eq!(alpha(&p), 1.0);
    }

    #[test]
    fn rejects_region_smaller_than_sensor() {
        let err = SearchParams::new(5.0, 10.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, SweepError::Domain { field: "R0", .. }), "{err}");
    }

    #[test]
    fn names_the_offending_field() {
        let cases = [
            ((-5.0, 10.0, 1.0, 0.0), "R0"),
            ((100.0, 0.0, 1.0, 0.0), "r"),
            ((100.0, 10.0, -1.0, 0.0), "VT"),
            ((100.0, 10.0, 1.0, -0.5), "deltaV"),
            ((f64::NAN, 10.0, 1.0, 0.0), "R0"),
        ];
        for ((r0, r, vt, dv), field) in cases {
            match SearchParams::new(r0, r, vt, dv) {
                Err(SweepError::Domain { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected domain error on {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn alpha_ratio() {
        let p = SearchParams::new(250.0, 10.0, 1.0, 0.0).unwrap();
        assert_eq!(p.alpha(), 25.0);
    }

    #[test]
    fn params_json_uses_snake_case_fields() {
        let p = SearchParams::new(100.0, 10.0, 1.0, 1.0).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"r0":100.0,"r":10.0,"vt":1.0,"delta_v":1.0}"#);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn alpha_times_r_recovers_r0(r in 1e-3f64..1e3, a in 1.0f64..1e3) {
                let p = SearchParams::new(a * r, r, 1.0, 0.0).unwrap();
                prop_assert!(approx_eq_rel(p.alpha() * p.r, p.r0, 4.0 * f64::EPSILON));
            }

            #[test]
            fn validate_is_idempotent(
                r0 in -10.0f64..500.0,
                r in -1.0f64..50.0,
                vt in -1.0f64..10.0,
                dv in -1.0f64..10.0,
            ) {
                let p = SearchParams { r0, r, vt, delta_v: dv };
                match validate(p) {
                    Ok(q) => {
                        prop_assert_eq!(q, p);
                        prop_assert_eq!(validate(q), Ok(q));
                    }
                    Err(e) => prop_assert_eq!(validate(p), Err(e)),
                }
            }
        }
    }
}
