//! Sensor pose timeline that follows a sweep plan.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::model::SweepPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensorMode {
    Circular,
    Descending,
    LinearRight,
    LinearLeft,
}

/// The sensor occupies `offset + s (cos angle, sin angle)` for
/// `s` in `[inner_radius, outer_radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorPose {
    pub angle: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub mode: SensorMode,
    /// Horizontal offset of the sensor line; non-zero only in the linear sweeps.
    pub offset_x: f64,
}

impl SensorPose {
    pub fn endpoints(&self) -> [(f64, f64); 2] {
        let (s, c) = self.angle.sin_cos();
        [
            (self.offset_x + self.inner_radius * c, self.inner_radius * s),
            (self.offset_x + self.outer_radius * c, self.outer_radius * s),
        ]
    }

    pub fn midpoint_radius(&self) -> f64 {
        0.5 * (self.inner_radius + self.outer_radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Motion {
    /// Midpoint on a circle, starting on the +y axis and turning counter-clockwise.
    Circle { radius: f64 },
    /// Radial motion along the +y axis.
    Radial { from: f64, to: f64 },
    /// Vertical sensor centred on the x axis.
    Linear { from_x: f64, to_x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub start: f64,
    pub duration: f64,
    motion: Motion,
    /// Index of the shrinking cycle this phase belongs to, if any.
    pub cycle: Option<usize>,
}

impl Phase {
    pub fn mode(&self) -> SensorMode {
        match self.motion {
            Motion::Circle { .. } => SensorMode::Circular,
            Motion::Radial { .. } => SensorMode::Descending,
            Motion::Linear { from_x, to_x } if to_x >= from_x => SensorMode::LinearRight,
            Motion::Linear { .. } => SensorMode::LinearLeft,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Piecewise pose schedule: shrinking circles with radial descents between
/// them, a final descent to radius `r`, the radius-`r` circle, a descent of
/// `r` that centres the sensor on the origin, then the right and left sweeps.
/// The left sweep runs on past its planned end without limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub phases: Vec<Phase>,
    pub vs: f64,
    pub half_length: f64,
}

impl Timeline {
    pub fn from_plan(plan: &SweepPlan) -> Self {
        let vs = plan.vs;
        let r = plan.params.r;
        let mut phases = Vec::new();
        let mut t = 0.0;
        let mut push = |motion: Motion, duration: f64, cycle: Option<usize>, t: &mut f64| {
            phases.push(Phase {
                start: *t,
                duration,
                motion,
                cycle,
            });
            *t += duration;
        };
        let n = plan.cycles.len();
        for (i, c) in plan.cycles.iter().enumerate() {
            push(Motion::Circle { radius: c.radius }, 2.0 * PI * c.radius / vs, Some(i), &mut t);
            let next = if i + 1 < n { plan.cycles[i + 1].radius } else { r };
            if c.radius > next {
                push(Motion::Radial { from: c.radius, to: next }, (c.radius - next) / vs, Some(i), &mut t);
            }
        }
        if n == 0 && plan.params.r0 > r {
            push(Motion::Radial { from: plan.params.r0, to: r }, (plan.params.r0 - r) / vs, None, &mut t);
        }
        push(Motion::Circle { radius: r }, 2.0 * PI * r / vs, None, &mut t);
        push(Motion::Radial { from: r, to: 0.0 }, r / vs, None, &mut t);
        let right = vs * plan.end_game.t_right;
        push(Motion::Linear { from_x: 0.0, to_x: right }, plan.end_game.t_right, None, &mut t);
        let left = vs * plan.end_game.t_left;
        push(
            Motion::Linear {
                from_x: right,
                to_x: right - left,
            },
            plan.end_game.t_left,
            None,
            &mut t,
        );
        Timeline {
            phases,
            vs,
            half_length: r,
        }
    }

    /// End of the planned schedule (the left sweep may continue past it).
    pub fn planned_end(&self) -> f64 {
        self.phases.last().map_or(0.0, Phase::end)
    }

    /// Index of the phase active at `t`, searching forward from `hint`.
    pub fn phase_index(&self, t: f64, hint: usize) -> usize {
        let mut i = hint.min(self.phases.len() - 1);
        while i > 0 && t < self.phases[i].start {
            i -= 1;
        }
        while i + 1 < self.phases.len() && t >= self.phases[i + 1].start {
            i += 1;
        }
        i
    }

    pub fn pose(&self, t: f64, hint: usize) -> SensorPose {
        let phase = &self.phases[self.phase_index(t, hint)];
        let tau = t - phase.start;
        let r = self.half_length;
        let mode = phase.mode();
        match phase.motion {
            Motion::Circle { radius } => SensorPose {
                angle: FRAC_PI_2 + self.vs * tau.min(phase.duration) / radius,
                inner_radius: radius - r,
                outer_radius: radius + r,
                mode,
                offset_x: 0.0,
            },
            Motion::Radial { from, to } => {
                let m = (from - self.vs * tau).max(to);
                SensorPose {
                    angle: FRAC_PI_2,
                    inner_radius: m - r,
                    outer_radius: m + r,
                    mode,
                    offset_x: 0.0,
                }
            }
            Motion::Linear { from_x, to_x } => {
                let dir = if to_x >= from_x { 1.0 } else { -1.0 };
                // the last sweep keeps going until the region is gone
                let last = std::ptr::eq(phase, self.phases.last().unwrap());
                let travel = if last { tau } else { tau.min(phase.duration) };
                SensorPose {
                    angle: FRAC_PI_2,
                    inner_radius: -r,
                    outer_radius: r,
                    mode,
                    offset_x: from_x + dir * self.vs * travel,
                }
            }
        }
    }

    /// Start time of shrinking cycle `i`.
    pub fn cycle_starts(&self) -> Vec<f64> {
        self.circles().map(|(ph, _)| ph.start).collect()
    }

    /// Time at which cycle `i` has turned through `asin(r / R_i)`: the sensor
    /// has then cleared what spread past it during the previous turn. Cycle 0
    /// has no previous turn and is measured at its start.
    pub fn cycle_checkpoints(&self) -> Vec<f64> {
        let r = self.half_length;
        self.circles()
            .map(|(ph, radius)| match ph.cycle {
                Some(0) => ph.start,
                _ => ph.start + (r / radius).min(1.0).asin() * radius / self.vs,
            })
            .collect()
    }

    fn circles(&self) -> impl Iterator<Item = (&Phase, f64)> {
        self.phases.iter().filter_map(|ph| match ph.motion {
            Motion::Circle { radius } if ph.cycle.is_some() => Some((ph, radius)),
            _ => None,
        })
    }
}
