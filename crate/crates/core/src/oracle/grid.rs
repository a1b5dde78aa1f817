//! Occupancy-grid simulation of the evader region under a sweep plan.
//!
//! Every cell carries the earliest time an evader can be in it, propagated
//! Dijkstra-style with a source pointer so fronts stay Euclidean instead of
//! following grid directions. The sensor cleans cells whose centres fall in
//! the quadrilateral it sweeps during a step; cleaned cells are re-entered
//! only from behind the sensor, starting at the edge of the swept strip.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SweepError};
use crate::model::SweepPlan;
use crate::oracle::pose::{SensorMode, SensorPose, Timeline};

type Point = (f64, f64);

const NEVER: u32 = u32::MAX;
/// Cleaned cells are offered to their contaminated neighbours for this many steps.
const RECHECK_STEPS: usize = 4;

/// Resolution settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Cell side length.
    pub h: f64,
    /// Time step.
    pub dt: f64,
    /// Record a snapshot every this many steps (0 disables).
    pub snapshot_every: usize,
}

impl GridConfig {
    /// `h = r / 40`, `dt = h / (2 vs)`.
    pub fn for_plan(plan: &SweepPlan) -> Self {
        let h = plan.params.r / 40.0;
        GridConfig {
            h,
            dt: h / (2.0 * plan.vs),
            snapshot_every: 0,
        }
    }

    pub fn with_h(plan: &SweepPlan, h: f64) -> Self {
        GridConfig {
            h,
            dt: h / (2.0 * plan.vs),
            snapshot_every: 0,
        }
    }

    pub fn validate(&self, plan: &SweepPlan) -> Result<()> {
        let SweepPlan { vs, params, .. } = plan;
        if !(self.h > 0.0 && self.h.is_finite()) || !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SweepError::Config(format!(
                "h and dt must be positive (h = {}, dt = {})",
                self.h, self.dt
            )));
        }
        if self.h > params.r / 20.0 {
            return Err(SweepError::Config(format!(
                "h = {} exceeds r / 20 = {}",
                self.h,
                params.r / 20.0
            )));
        }
        if self.dt * vs > self.h {
            return Err(SweepError::Config(format!(
                "dt * vs = {} exceeds h = {}",
                self.dt * vs,
                self.h
            )));
        }
        if self.dt * params.vt > self.h / 2.0 {
            return Err(SweepError::Config(format!(
                "dt * VT = {} exceeds h / 2 = {}",
                self.dt * params.vt,
                self.h / 2.0
            )));
        }
        Ok(())
    }
}

/// Per-step record for offline plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub occupied_cells: usize,
    pub bounding_radius: f64,
    pub pose: SensorPose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub escaped: bool,
    pub escape_time: Option<f64>,
    /// Largest occupied cell-centre radius in each shrinking cycle, taken once
    /// the sensor has turned `asin(r / R_i)` past the cycle start (at the
    /// start itself for cycle 0).
    pub per_cycle_radii: Vec<f64>,
    pub clean_time: Option<f64>,
    /// Largest `per_cycle_radii[i] - R_i`.
    pub max_overshoot: f64,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
}

impl SimulationResult {
    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn write_snapshots_csv<W: Write>(&self, out: W) -> Result<()> {
        use crate::report::sig10;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let err = |e: csv::Error| SweepError::Config(format!("snapshot output: {e}"));
        w.write_record([
            "step",
            "t",
            "occupied_cells",
            "bounding_radius",
            "mode",
            "angle",
            "inner_radius",
            "outer_radius",
            "offset_x",
        ])
        .map_err(err)?;
        for s in &self.snapshots {
            let mode = match s.pose.mode {
                SensorMode::Circular => "circular",
                SensorMode::Descending => "descending",
                SensorMode::LinearRight => "linear-right",
                SensorMode::LinearLeft => "linear-left",
            };
            w.write_record([
                s.step.to_string(),
                sig10(s.t),
                s.occupied_cells.to_string(),
                sig10(s.bounding_radius),
                mode.to_string(),
                sig10(s.pose.angle),
                sig10(s.pose.inner_radius),
                sig10(s.pose.outer_radius),
                sig10(s.pose.offset_x),
            ])
            .map_err(err)?;
        }
        w.flush()
            .map_err(|e| SweepError::Config(format!("snapshot output: {e}")))
    }
}

/// Square occupancy grid centred on the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub resolution: f64,
    /// Half-width of the square domain.
    pub extent: f64,
    /// Cells per side.
    pub n: usize,
    pub cells: Vec<bool>,
}

impl OccupancyGrid {
    /// Cells touched by the disk of radius `radius` (outward rounding).
    pub fn disk(radius: f64, resolution: f64, min_extent: f64) -> Self {
        let half = (min_extent / resolution).ceil() as usize;
        let n = 2 * half;
        let extent = half as f64 * resolution;
        let mut cells = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                let (x, y) = center(i, j, resolution, extent);
                let dx = (x.abs() - 0.5 * resolution).max(0.0);
                let dy = (y.abs() - 0.5 * resolution).max(0.0);
                cells[j * n + i] = dx * dx + dy * dy <= radius * radius;
            }
        }
        OccupancyGrid {
            resolution,
            extent,
            n,
            cells,
        }
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        center(i, j, self.resolution, self.extent)
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

fn center(i: usize, j: usize, h: f64, extent: f64) -> Point {
    (-extent + (i as f64 + 0.5) * h, -extent + (j as f64 + 0.5) * h)
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    t: f64,
    cell: u32,
    version: u32,
    /// Neighbour that offered the time and its version at that moment.
    from: u32,
    from_version: u32,
    source: [f64; 3],
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // min-heap on time, then cell index for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .t
            .total_cmp(&self.t)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Proper crossing of segments `ab` and `cd`; touching does not count.
fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Counter-clockwise convex hull of up to four points.
#[derive(Debug, Clone, Copy)]
struct Hull {
    v: [Point; 8],
    len: usize,
}

impl Hull {
    fn of(points: [Point; 4]) -> Hull {
        let mut p = points;
        p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut v = [(0.0, 0.0); 8];
        let mut k = 0;
        for &q in &p {
            while k >= 2 && cross(v[k - 2], v[k - 1], q) <= 0.0 {
                k -= 1;
            }
            v[k] = q;
            k += 1;
        }
        let lower = k + 1;
        for &q in p.iter().rev().skip(1) {
            while k >= lower && cross(v[k - 2], v[k - 1], q) <= 0.0 {
                k -= 1;
            }
            v[k] = q;
            k += 1;
        }
        Hull { v, len: k.saturating_sub(1).max(1) }
    }

    fn vertices(&self) -> &[Point] {
        &self.v[..self.len]
    }

    /// `[xmin, xmax]` of the hull on the horizontal line at `y`.
    fn span_at(&self, y: f64) -> Option<(f64, f64)> {
        let vs = self.vertices();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..vs.len() {
            let a = vs[k];
            let b = vs[(k + 1) % vs.len()];
            if (a.1 <= y && y <= b.1) || (b.1 <= y && y <= a.1) {
                if a.1 == b.1 {
                    lo = lo.min(a.0.min(b.0));
                    hi = hi.max(a.0.max(b.0));
                } else {
                    let x = a.0 + (y - a.1) * (b.0 - a.0) / (b.1 - a.1);
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    fn y_range(&self) -> (f64, f64) {
        self.vertices()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)))
    }

    /// First point of segment `p0 -> p1` inside the hull.
    fn entry(&self, p0: Point, p1: Point) -> Option<Point> {
        let vs = self.vertices();
        if vs.len() < 3 {
            return None;
        }
        let d = (p1.0 - p0.0, p1.1 - p0.1);
        let (mut t_in, mut t_out) = (0.0f64, 1.0f64);
        for k in 0..vs.len() {
            let a = vs[k];
            let b = vs[(k + 1) % vs.len()];
            let normal = (b.1 - a.1, a.0 - b.0);
            let num = normal.0 * (a.0 - p0.0) + normal.1 * (a.1 - p0.1);
            let den = normal.0 * d.0 + normal.1 * d.1;
            if den == 0.0 {
                if num < 0.0 {
                    return None;
                }
            } else if den < 0.0 {
                t_in = t_in.max(num / den);
            } else {
                t_out = t_out.min(num / den);
            }
            if t_in > t_out {
                return None;
            }
        }
        Some((p0.0 + t_in * d.0, p0.1 + t_in * d.1))
    }
}

struct Sim<'a> {
    timeline: &'a Timeline,
    h: f64,
    dt: f64,
    vt: f64,
    escape_radius: f64,
    grid: OccupancyGrid,
    best: Vec<f64>,
    version: Vec<u32>,
    source: Vec<[f64; 3]>,
    clean_step: Vec<u32>,
    heap: BinaryHeap<Entry>,
    contaminated: usize,
    recent: Vec<Vec<u32>>,
    blocked: Vec<(u32, u32)>,
    /// Cells whose pending time was dropped and need fresh offers.
    retry: Vec<u32>,
    hint: usize,
}

impl Sim<'_> {
    fn center_of(&self, cell: u32) -> Point {
        let n = self.grid.n;
        let c = cell as usize;
        self.grid.center(c % n, c / n)
    }

    fn neighbours(&self, cell: u32) -> impl Iterator<Item = u32> + '_ {
        let n = self.grid.n as i64;
        let (i, j) = (cell as i64 % n, cell as i64 / n);
        (-1..=1)
            .flat_map(move |dj| (-1..=1).map(move |di| (i + di, j + dj)))
            .filter(move |&(x, y)| (x, y) != (i, j) && x >= 0 && y >= 0 && x < n && y < n)
            .map(move |(x, y)| (y * n + x) as u32)
    }

    fn pose(&mut self, t: f64) -> SensorPose {
        self.hint = self.timeline.phase_index(t, self.hint);
        self.timeline.pose(t, self.hint)
    }

    fn pose_at(&self, t: f64) -> SensorPose {
        let idx = self.timeline.phases.partition_point(|p| p.start <= t).max(1) - 1;
        self.timeline.pose(t, idx)
    }

    fn step_hull(&self, step: u32) -> Hull {
        let t0 = step as f64 * self.dt;
        let [a0, b0] = self.pose_at(t0).endpoints();
        let [a1, b1] = self.pose_at(t0 + self.dt).endpoints();
        Hull::of([a0, b0, b1, a1])
    }

    /// Offers `to` a contamination time from contaminated neighbour `from`.
    fn offer(&mut self, from: u32, to: u32, sensor: [Point; 2]) {
        let pf = self.center_of(from);
        let pt = self.center_of(to);
        if segments_cross(pf, pt, sensor[0], sensor[1]) {
            self.blocked.push((from, to));
            return;
        }
        let [sx, sy, st] = self.source[from as usize];
        let s = (sx, sy);
        let cs = self.clean_step[to as usize];
        let (cand, src) = if cs != NEVER && st < (cs as f64 + 1.0) * self.dt {
            // the target was cleaned after this front left its source: re-enter
            // behind the sensor from the edge of the strip it swept
            let b = self.step_hull(cs).entry(pf, pt).unwrap_or(pt);
            let tb = (cs as f64 * self.dt).max(st + dist(b, s) / self.vt);
            (tb + dist(pt, b) / self.vt, [b.0, b.1, tb])
        } else {
            (st + dist(pt, s) / self.vt, [sx, sy, st])
        };
        let idx = to as usize;
        if cand < self.best[idx] {
            self.best[idx] = cand;
            self.heap.push(Entry {
                t: cand,
                cell: to,
                version: self.version[idx],
                from,
                from_version: self.version[from as usize],
                source: src,
            });
        }
    }

    fn occupied(&self, cell: u32) -> bool {
        self.grid.cells[cell as usize]
    }

    /// Pops every arrival up to `until`; returns the first escape time.
    fn propagate(&mut self, until: f64, sensor: [Point; 2]) -> Option<f64> {
        while let Some(top) = self.heap.peek() {
            if top.t > until {
                break;
            }
            let e = self.heap.pop().unwrap();
            let idx = e.cell as usize;
            if e.version != self.version[idx] || self.grid.cells[idx] || e.t > self.best[idx] {
                continue;
            }
            if e.from_version != self.version[e.from as usize] {
                // the sensor swept the origin while the evader was in transit
                self.best[idx] = f64::INFINITY;
                self.retry.push(e.cell);
                continue;
            }
            self.grid.cells[idx] = true;
            self.source[idx] = e.source;
            self.contaminated += 1;
            let c = self.center_of(e.cell);
            if c.0.hypot(c.1) > self.escape_radius {
                return Some(e.t);
            }
            let nbrs: Vec<u32> = self.neighbours(e.cell).collect();
            for nb in nbrs {
                if !self.occupied(nb) {
                    self.offer(e.cell, nb, sensor);
                }
            }
        }
        None
    }

    fn clean(&mut self, step: usize, hull: &Hull) {
        let h = self.h;
        let ext = self.grid.extent;
        let n = self.grid.n as i64;
        let (ylo, yhi) = hull.y_range();
        let j0 = (((ylo + ext) / h - 0.5).ceil() as i64).max(0);
        let j1 = (((yhi + ext) / h - 0.5).floor() as i64).min(n - 1);
        let slot = step % RECHECK_STEPS;
        self.recent[slot].clear();
        for j in j0..=j1 {
            let y = -ext + (j as f64 + 0.5) * h;
            let Some((xlo, xhi)) = hull.span_at(y) else { continue };
            let i0 = (((xlo + ext) / h - 0.5).ceil() as i64).max(0);
            let i1 = (((xhi + ext) / h - 0.5).floor() as i64).min(n - 1);
            for i in i0..=i1 {
                let idx = (j * n + i) as usize;
                if self.grid.cells[idx] {
                    self.grid.cells[idx] = false;
                    self.contaminated -= 1;
                }
                self.version[idx] = self.version[idx].wrapping_add(1);
                self.best[idx] = f64::INFINITY;
                self.clean_step[idx] = step as u32;
                self.recent[slot].push(idx as u32);
            }
        }
    }

    fn recheck(&mut self, sensor: [Point; 2]) {
        let mut targets: Vec<(u32, u32)> = std::mem::take(&mut self.blocked);
        for c in std::mem::take(&mut self.retry) {
            if !self.occupied(c) {
                targets.extend(self.neighbours(c).filter(|&nb| self.occupied(nb)).map(|nb| (nb, c)));
            }
        }
        for slot in 0..RECHECK_STEPS {
            for k in 0..self.recent[slot].len() {
                let c = self.recent[slot][k];
                if self.occupied(c) {
                    continue;
                }
                for nb in self.neighbours(c) {
                    if self.occupied(nb) {
                        targets.push((nb, c));
                    }
                }
            }
        }
        for (from, to) in targets {
            if self.occupied(from) && !self.occupied(to) {
                self.offer(from, to, sensor);
            }
        }
    }

    fn max_radius(&self) -> f64 {
        let n = self.grid.n;
        let mut best = 0.0f64;
        for (idx, &occ) in self.grid.cells.iter().enumerate() {
            if occ {
                let (x, y) = self.grid.center(idx % n, idx / n);
                best = best.max(x.hypot(y));
            }
        }
        best
    }

    fn has_pending(&self) -> bool {
        !self.blocked.is_empty()
            || !self.retry.is_empty()
            || self.heap.iter().any(|e| {
                let i = e.cell as usize;
                e.version == self.version[i] && !self.grid.cells[i] && e.t <= self.best[i]
            })
    }
}

/// Runs the plan's pose timeline against the occupancy grid.
pub fn simulate(plan: &SweepPlan, config: &GridConfig) -> Result<SimulationResult> {
    config.validate(plan)?;
    let p = plan.params;
    let timeline = Timeline::from_plan(plan);
    let grid = OccupancyGrid::disk(p.r0, config.h, p.r0 + 2.0 * p.r + 2.0 * config.h);
    let cells = grid.n * grid.n;
    let mut sim = Sim {
        timeline: &timeline,
        h: config.h,
        dt: config.dt,
        vt: p.vt,
        escape_radius: p.r0 + p.r,
        best: vec![f64::INFINITY; cells],
        version: vec![0; cells],
        source: vec![[0.0; 3]; cells],
        clean_step: vec![NEVER; cells],
        heap: BinaryHeap::new(),
        contaminated: 0,
        recent: vec![Vec::new(); RECHECK_STEPS],
        blocked: Vec::new(),
        retry: Vec::new(),
        hint: 0,
        grid,
    };

    for idx in 0..cells {
        if sim.grid.cells[idx] {
            let c = sim.center_of(idx as u32);
            let d = c.0.hypot(c.1);
            let s = if d <= p.r0 { c } else { (c.0 * p.r0 / d, c.1 * p.r0 / d) };
            sim.source[idx] = [s.0, s.1, 0.0];
            sim.best[idx] = 0.0;
            sim.contaminated += 1;
        }
    }
    let start_pose = sim.pose(0.0).endpoints();
    for idx in 0..cells as u32 {
        if sim.occupied(idx) {
            let nbrs: Vec<u32> = sim.neighbours(idx).filter(|&nb| !sim.occupied(nb)).collect();
            for nb in nbrs {
                sim.offer(idx, nb, start_pose);
            }
        }
    }

    let checkpoints = timeline.cycle_checkpoints();
    let planned_end = timeline.planned_end();
    // the left sweep may run on; give up well past the plan
    let horizon = planned_end + 0.05 * planned_end + 4.0 * p.r / plan.vs;
    let max_steps = (horizon / config.dt).ceil() as usize;

    let mut per_cycle_radii = Vec::with_capacity(checkpoints.len());
    let mut snapshots = Vec::new();
    let mut escape_time = None;
    let mut clean_time = None;
    let mut prev = start_pose;
    let mut steps = 0;
    for k in 0..max_steps {
        let t0 = k as f64 * config.dt;
        let t1 = t0 + config.dt;
        while per_cycle_radii.len() < checkpoints.len() && checkpoints[per_cycle_radii.len()] <= t0 {
            per_cycle_radii.push(sim.max_radius());
        }
        let pose = sim.pose(t1);
        let now = pose.endpoints();
        // clean before propagating so nothing popped inside this step's strip
        // can reach behind the sensor
        let hull = Hull::of([prev[0], prev[1], now[1], now[0]]);
        sim.clean(k, &hull);
        sim.recheck(now);
        prev = now;
        steps = k + 1;
        if let Some(t) = sim.propagate(t1, now) {
            escape_time = Some(t);
            break;
        }

        if config.snapshot_every > 0 && k % config.snapshot_every == 0 {
            snapshots.push(Snapshot {
                step: k,
                t: t1,
                occupied_cells: sim.contaminated,
                bounding_radius: sim.max_radius(),
                pose,
            });
        }
        if sim.contaminated == 0 && !sim.has_pending() {
            clean_time = Some(t1);
            break;
        }
    }

    let max_overshoot = per_cycle_radii
        .iter()
        .zip(&plan.cycles)
        .map(|(sim_r, c)| sim_r - c.radius)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SimulationResult {
        escaped: escape_time.is_some(),
        escape_time,
        per_cycle_radii,
        clean_time,
        max_overshoot,
        h: config.h,
        dt: config.dt,
        steps,
        snapshots,
    })
}
