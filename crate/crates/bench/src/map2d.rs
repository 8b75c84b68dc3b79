//! Large 2D map benchmark: a point agent crosses a random obstacle field,
//! replanning every step with a global planner, a single-resolution local
//! planner, and the stitched dual-resolution local planner.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use dualplan_core::mapping::{Cell, GridMap2D, LocalMapParams, LocalMaps};
use dualplan_core::planner::stitch::reachable;
use dualplan_core::planner::{cast_local_goal, single_resolution_plan, supercover, stitched_plan, Plan2D};
use dualplan_core::{PlanError, Vec2, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Map2dParams {
    /// Cells per side of the square world.
    pub size: usize,
    /// Meters per cell.
    pub resolution: f64,
    /// Target fraction of occupied cells.
    pub density: f64,
    /// Obstacle side lengths in cells, inclusive range.
    pub min_feature: usize,
    pub max_feature: usize,
    /// Start and goal are resampled until they are at least this far apart, in cells.
    pub min_distance: f64,
    /// Side of the local map (`Map_1`), cells.
    pub local: usize,
    /// Side of the fine center window (`Map_c`), cells.
    pub center: usize,
    /// Inflation kernel width.
    pub k: usize,
    /// Distance moved per step, meters.
    pub step: f64,
    /// The global planner replans every this many steps; its step time is
    /// the mean over those plans.
    pub global_replan_every: usize,
    /// A still-valid previous plan is kept unless the new one is shorter by
    /// more than this, meters. Stops flip-flopping between equal-cost routes.
    pub hysteresis: f64,
}

impl Default for Map2dParams {
    fn default() -> Self {
        Self {
            size: 800,
            resolution: 1.0,
            density: 0.15,
            min_feature: 1,
            max_feature: 6,
            min_distance: 500.0,
            local: 200,
            center: 100,
            k: 3,
            step: 1.0,
            global_replan_every: 50,
            hysteresis: 1.0,
        }
    }
}

impl Map2dParams {
    pub fn validate(&self) -> Result<LocalMapParams, String> {
        if !(self.resolution > 0.0 && self.step > 0.0 && (0.0..0.6).contains(&self.density)) {
            return Err("resolution and step must be positive, density in [0, 0.6)".into());
        }
        if self.min_feature == 0 || self.min_feature > self.max_feature {
            return Err("feature sizes must satisfy 0 < min <= max".into());
        }
        if self.min_distance >= self.size as f64 * std::f64::consts::SQRT_2 * 0.95 {
            return Err("min_distance does not fit in the map".into());
        }
        if self.hysteresis.is_nan() || self.hysteresis < 0.0 {
            return Err("hysteresis must be non-negative".into());
        }
        if self.global_replan_every == 0 {
            return Err("global_replan_every must be positive".into());
        }
        LocalMapParams::derive(self.local as f64 * self.resolution, 1.0, self.local, self.center, self.k)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Planner2d {
    Global,
    Local,
    Stitched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub planner: Planner2d,
    pub reached: bool,
    pub length: f64,
    pub steps: usize,
    pub plans: usize,
    /// Mean wall time of one planning call, seconds.
    pub mean_plan_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub straight_line: f64,
    pub density: f64,
    pub runs: Vec<RunStats>,
}

impl TrialReport {
    pub fn run(&self, planner: Planner2d) -> &RunStats {
        self.runs.iter().find(|r| r.planner == planner).expect("every planner runs")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Map2dReport {
    pub schema: u32,
    pub params: Map2dParams,
    pub trials: Vec<TrialReport>,
    /// Σ local length / Σ global length.
    pub local_vs_global_length: f64,
    /// Mean local step time / mean global step time.
    pub local_vs_global_time: f64,
    pub stitched_vs_local_length: f64,
    pub stitched_vs_local_time: f64,
    pub all_reached: bool,
}

/// A generated world: occupancy at `resolution`, cell (0, 0) centered on
/// the origin.
#[derive(Debug, Clone)]
pub struct Map2dWorld {
    pub grid: GridMap2D,
    pub start: Cell,
    pub goal: Cell,
}

fn place_obstacles(p: &Map2dParams, rng: &mut ChaCha8Rng) -> GridMap2D {
    let mut g = GridMap2D::new(Vec2::zeros(), p.resolution, p.size, p.size);
    let target = (p.density * (p.size * p.size) as f64) as usize;
    let mut occupied = 0usize;
    while occupied < target {
        let w = rng.random_range(p.min_feature..=p.max_feature) as i32;
        let h = rng.random_range(p.min_feature..=p.max_feature) as i32;
        let x0 = rng.random_range(0..p.size as i32);
        let y0 = rng.random_range(0..p.size as i32);
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                if g.is_free((x, y)) {
                    g.set((x, y), true);
                    occupied += 1;
                }
            }
        }
    }
    g
}

/// Random rectangle field with a start and goal that are far apart and
/// connected on the inflated map.
pub fn generate_world(p: &Map2dParams, seed: u64) -> Result<Map2dWorld, String> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let grid = place_obstacles(p, &mut rng);
        let inflated = grid.inflate(p.k).map_err(|e| e.to_string())?;
        let n = p.size as i32;
        for _ in 0..200 {
            let s = (rng.random_range(0..n), rng.random_range(0..n));
            let g = (rng.random_range(0..n), rng.random_range(0..n));
            let d = (((s.0 - g.0).pow(2) + (s.1 - g.1).pow(2)) as f64).sqrt();
            if d <= p.min_distance || inflated.is_occupied(s) || inflated.is_occupied(g) {
                continue;
            }
            if reachable(&inflated, s)[(g.1 * n + g.0) as usize] {
                return Ok(Map2dWorld { grid, start: s, goal: g });
            }
        }
    }
    Err(format!("no connected start/goal pair for seed {seed}"))
}

/// Moves `dist` along the polyline `path` (starting at `path[0]`) and drops
/// the waypoints passed on the way; `path[0]` becomes the new position.
fn advance(path: &mut Vec<Vec2>, dist: f64) {
    let mut left = dist;
    while path.len() > 1 {
        let seg = (path[1] - path[0]).norm();
        if seg > left {
            let d = path[1] - path[0];
            path[0] += d * (left / seg);
            return;
        }
        left -= seg;
        path.remove(0);
    }
}

fn local_plan(world: &GridMap2D, p: Vec2, goal: Vec2, lp: &LocalMapParams, stitched: bool) -> Result<Plan2D, PlanError> {
    let cell = world.cell_of(&p);
    let half = (lp.i / 2) as i32;
    let map_1 = world.window((cell.0 - half, cell.1 - half), lp.i, lp.j);
    let p3 = Vec3::new(p.x, p.y, 0.0);
    let lg = cast_local_goal(&p3, &Vec3::new(goal.x, goal.y, 0.0), lp, &map_1)?;
    if stitched {
        let maps = LocalMaps::from_map_1(map_1, p3, lp)?;
        stitched_plan(&maps, lg.cell)
    } else {
        let inflated = map_1.inflate(lp.k)?;
        single_resolution_plan(&inflated, lp.center_cell(), lg.cell)
    }
}

fn polyline_2d(path: &[Vec2]) -> f64 {
    path.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Whether the chords of `path` avoid occupied cells of `inflated` within
/// Chebyshev distance `radius` of the first point, its own cell excepted.
/// Farther cells are left to later replans, as a local planner would.
fn path_is_free(inflated: &GridMap2D, path: &[Vec2], radius: i32) -> bool {
    let origin = inflated.cell_of(&path[0]);
    let near = |c: Cell| c != origin && (c.0 - origin.0).abs().max((c.1 - origin.1).abs()) <= radius;
    path.windows(2).all(|w| {
        supercover(inflated.cell_of(&w[0]), inflated.cell_of(&w[1]))
            .into_iter()
            .all(|c| !near(c) || inflated.is_free(c))
    })
}

fn global_plan(world: &GridMap2D, p: Vec2, goal: Cell, k: usize) -> Result<Plan2D, PlanError> {
    let inflated = world.inflate(k)?;
    single_resolution_plan(&inflated, world.cell_of(&p), goal)
}

/// Flies one planner across the world.
pub fn simulate(world: &Map2dWorld, p: &Map2dParams, planner: Planner2d) -> RunStats {
    simulate_traced(world, p, planner).0
}

/// [`simulate`], also returning every visited position.
pub fn simulate_traced(world: &Map2dWorld, p: &Map2dParams, planner: Planner2d) -> (RunStats, Vec<Vec2>) {
    let lp = p.validate().expect("validated params");
    // Only used to judge whether an old plan is still valid.
    let truth = world.grid.inflate(p.k).expect("odd kernel");
    let goal = world.grid.center_of(world.goal);
    let mut pos = world.grid.center_of(world.start);
    let straight = (goal - pos).norm();
    let max_steps = (3.0 * straight / p.step).ceil() as usize + 10;
    let (mut length, mut steps, mut plans, mut time) = (0.0, 0usize, 0usize, 0.0);
    let mut path: Vec<Vec2> = Vec::new();
    let mut reached = false;
    let mut trace = vec![pos];
    while steps < max_steps {
        if (goal - pos).norm() <= p.step {
            length += (goal - pos).norm();
            reached = true;
            break;
        }
        let replan = match planner {
            Planner2d::Global => steps % p.global_replan_every == 0,
            _ => true,
        };
        if replan {
            let t0 = Instant::now();
            let plan = match planner {
                Planner2d::Global => global_plan(&world.grid, pos, world.goal, p.k),
                Planner2d::Local => local_plan(&world.grid, pos, goal, &lp, false),
                Planner2d::Stitched => local_plan(&world.grid, pos, goal, &lp, true),
            };
            time += t0.elapsed().as_secs_f64();
            plans += 1;
            let Ok(plan) = plan else { break };
            let mut fresh = plan.waypoints;
            fresh[0] = pos;
            let keep = path.len() >= 2 && path_is_free(&truth, &path, (p.center / 2) as i32) && {
                let old_end = *path.last().expect("non-empty");
                let new_end = *fresh.last().expect("non-empty");
                polyline_2d(&fresh) + p.hysteresis >= polyline_2d(&path) + (old_end - new_end).norm()
            };
            if !keep {
                path = fresh;
            }
        }
        advance(&mut path, p.step);
        let moved = (path[0] - pos).norm();
        if moved < 1e-9 {
            break;
        }
        length += moved;
        pos = path[0];
        trace.push(pos);
        steps += 1;
    }
    if reached {
        trace.push(goal);
    }
    let stats = RunStats {
        planner,
        reached,
        length,
        steps,
        plans,
        mean_plan_time: if plans == 0 { 0.0 } else { time / plans as f64 },
    };
    (stats, trace)
}

pub fn run_trial(p: &Map2dParams, seed: u64) -> Result<TrialReport, String> {
    let w = generate_world(p, seed)?;
    let (s, g) = (w.grid.center_of(w.start), w.grid.center_of(w.goal));
    let runs = [Planner2d::Global, Planner2d::Local, Planner2d::Stitched]
        .into_iter()
        .map(|pl| simulate(&w, p, pl))
        .collect();
    Ok(TrialReport {
        seed,
        start: [s.x, s.y],
        goal: [g.x, g.y],
        straight_line: (g - s).norm(),
        density: w.grid.occupied_count() as f64 / (p.size * p.size) as f64,
        runs,
    })
}

fn ratio(trials: &[TrialReport], num: Planner2d, den: Planner2d, f: impl Fn(&RunStats) -> f64) -> f64 {
    let n: f64 = trials.iter().map(|t| f(t.run(num))).sum();
    let d: f64 = trials.iter().map(|t| f(t.run(den))).sum();
    n / d
}

/// Runs `trials` worlds seeded `seed, seed + 1, …`.
pub fn bench_map2d(p: &Map2dParams, trials: usize, seed: u64) -> Result<Map2dReport, String> {
    let trials: Vec<TrialReport> = (0..trials as u64)
        .map(|i| run_trial(p, seed.wrapping_add(i)))
        .collect::<Result<_, _>>()?;
    let len = |r: &RunStats| r.length;
    let time = |r: &RunStats| r.mean_plan_time;
    Ok(Map2dReport {
        schema: 1,
        params: p.clone(),
        local_vs_global_length: ratio(&trials, Planner2d::Local, Planner2d::Global, len),
        local_vs_global_time: ratio(&trials, Planner2d::Local, Planner2d::Global, time),
        stitched_vs_local_length: ratio(&trials, Planner2d::Stitched, Planner2d::Local, len),
        stitched_vs_local_time: ratio(&trials, Planner2d::Stitched, Planner2d::Local, time),
        all_reached: trials.iter().all(|t| t.runs.iter().all(|r| r.reached)),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Map2dParams {
        Map2dParams {
            size: 240,
            min_distance: 150.0,
            local: 100,
            center: 50,
            ..Map2dParams::default()
        }
    }

    #[test]
    fn advance_walks_the_polyline() {
        let path = vec![Vec2::zeros(), Vec2::new(1.0, 0.0), Vec2::new(1.0, 2.0)];
        let mut a = path.clone();
        advance(&mut a, 1.5);
        assert_eq!(a.len(), 2);
        assert!((a[0] - Vec2::new(1.0, 0.5)).norm() < 1e-12);
        let mut b = path.clone();
        advance(&mut b, 10.0);
        assert_eq!(b, vec![path[2]]);
    }

    #[test]
    fn generator_respects_constraints() {
        let p = small();
        let w = generate_world(&p, 3).unwrap();
        let d = w.grid.occupied_count() as f64 / (240.0 * 240.0);
        assert!(d >= p.density && d < p.density + 0.01);
        let sep = (w.grid.center_of(w.start) - w.grid.center_of(w.goal)).norm();
        assert!(sep > p.min_distance);
        assert_eq!(generate_world(&p, 3).unwrap().grid, w.grid);
    }

    #[test]
    fn empty_map_lengths_are_straight() {
        let p = Map2dParams { density: 0.0, ..small() };
        let t = run_trial(&p, 1).unwrap();
        for r in &t.runs {
            assert!(r.reached, "{r:?}");
            // Local goals snap to cell centers, which adds a tiny zigzag.
            assert!((r.length - t.straight_line).abs() < 1e-4 * t.straight_line, "{r:?} vs {}", t.straight_line);
        }
    }

    #[test]
    fn cluttered_runs_reach_and_stay_close() {
        let t = run_trial(&small(), 5).unwrap();
        let g = t.run(Planner2d::Global);
        for r in &t.runs {
            assert!(r.reached, "{r:?}");
            assert!(r.length >= t.straight_line - 1e-6);
            assert!(r.length <= g.length * 1.15, "{r:?} vs {g:?}");
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Map2dParams { center: 150, ..small() }.validate().is_err());
        assert!(Map2dParams { density: 0.9, ..small() }.validate().is_err());
        assert!(Map2dParams { k: 2, ..small() }.validate().is_err());
    }
}
