//! Runs one scenario to completion and packages the trajectory, event log
//! and metrics.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use dualplan_core::mapping::VoxelMap;
use dualplan_core::pcp::CommandMode;
use dualplan_core::types::polyline_length;
use dualplan_core::{DroneState, PointCloud, Vec3};
use dualplan_sim::gen::surface_points;
use dualplan_sim::{EpisodeEvent, EventKind};

use crate::blackboard::Blackboard;
use crate::scenario::Scenario;
use crate::scheduler::{LoopId, VirtualScheduler};
use crate::stages::{FilterStage, MapStage, MpStage, Outcome, PcpStage, SimStage, SolverStats, TrajectoryRow};

#[derive(Debug, thiserror::Error)]
pub enum RuntimeError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Deterministic: loops interleave on a simulated clock.
    Virtual,
    /// Each loop on its own thread, paced by the real clock.
    Wallclock,
}

/// Measured loop timings; only present for wall-clock runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallTimings {
    pub pcp_mean_ms: f64,
    pub pcp_max_ms: f64,
    pub mp_mean_ms: f64,
    pub mp_max_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub schema: u32,
    pub scenario: String,
    pub seed: u64,
    pub mode: RunMode,
    pub outcome: Outcome,
    pub flight_time: f64,
    pub path_length: f64,
    pub straight_line: f64,
    /// Smallest ground-truth distance from the drone center to an obstacle.
    pub min_obstacle_distance: f64,
    pub replans: usize,
    pub plans_3d: usize,
    pub plan_failures: usize,
    pub backup_steer: usize,
    pub backup_brake: usize,
    pub avoidance_onsets: usize,
    pub pcp_steps: usize,
    pub solver_converged_fraction: f64,
    pub solver_mean_iterations: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<WallTimings>,
}

/// Measured wall time of every planner step, seconds. Informational only:
/// never part of the deterministic outputs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepTimes {
    pub pcp: Vec<f64>,
    pub mp: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub trajectory: Vec<TrajectoryRow>,
    pub events: Vec<EpisodeEvent>,
    pub metrics: Metrics,
    pub step_times: StepTimes,
}

fn mode_name(m: CommandMode) -> &'static str {
    match m {
        CommandMode::Normal => "normal",
        CommandMode::BackupSteer => "steer",
        CommandMode::BackupBrake => "brake",
    }
}

impl EpisodeResult {
    pub fn outcome(&self) -> Outcome {
        self.metrics.outcome
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.trajectory.iter().map(|r| r.position).collect()
    }

    pub fn events_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a EpisodeEvent> + 'a {
        self.events.iter().filter(move |e| e.kind.name() == name)
    }

    pub fn trajectory_csv(&self) -> String {
        let mut s = String::from("t,x,y,z,vx,vy,vz,mode\n");
        for r in &self.trajectory {
            let (p, v) = (r.position, r.velocity);
            writeln!(
                s,
                "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                r.time,
                p.x,
                p.y,
                p.z,
                v.x,
                v.y,
                v.z,
                mode_name(r.mode)
            )
            .expect("write to string");
        }
        s
    }

    pub fn metrics_json(&self) -> String {
        serde_json::to_string_pretty(&self.metrics).expect("metrics serialize")
    }

    pub fn events_json(&self) -> String {
        serde_json::to_string_pretty(&self.events).expect("events serialize")
    }

    /// Writes `trajectory.csv`, `metrics.json` and `events.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), RuntimeError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trajectory.csv"), self.trajectory_csv())?;
        std::fs::write(dir.join("metrics.json"), self.metrics_json())?;
        std::fs::write(dir.join("events.json"), self.events_json())?;
        Ok(())
    }
}

struct Stages {
    filter: FilterStage,
    map: MapStage,
    mp: MpStage,
    pcp: PcpStage,
    sim: SimStage,
}

fn setup(s: &Scenario, mode: RunMode) -> (Blackboard, Stages) {
    let mut voxels = VoxelMap::new(s.config.map.voxel_size);
    voxels.decay_after = s.config.map.decay_after;
    if s.prior_map {
        let spacing = s.config.map.voxel_size / 2.0;
        voxels.integrate(&PointCloud::earth(surface_points(&s.world, spacing)), 0.0);
    }
    let mut state = DroneState::at_rest(s.start);
    state.velocity = s.initial_velocity;
    let d = s.goal - s.start;
    state.attitude.yaw = d.y.atan2(d.x);
    let bb = Blackboard::new(state, s.world.clone(), voxels.clone());
    let step_time = (mode == RunMode::Virtual).then_some(s.pcp_step_time);
    let stages = Stages {
        filter: FilterStage::new(s.sensor, s.config.filter, s.seed),
        map: MapStage::new(voxels),
        mp: MpStage::new(s.config.mp.clone(), s.goal, s.goal_tolerance, s.config.pcp.waypoint_reach),
        pcp: PcpStage::new(s.config.pcp.clone(), s.seed, step_time),
        sim: SimStage::new(
            s.world.clone(),
            state,
            s.config.pcp.v_max,
            s.drone_radius,
            s.goal,
            s.goal_tolerance,
            s.timeout,
        ),
    };
    (bb, stages)
}

fn run_virtual(s: &Scenario, bb: &Blackboard, st: &mut Stages) {
    let dt = 1.0 / s.rates.sim as f64;
    for tick in VirtualScheduler::new(s.rates) {
        if bb.is_done() {
            break;
        }
        let t = tick.time();
        match tick.id {
            LoopId::Filter => st.filter.tick(bb, t),
            LoopId::Map => st.map.tick(bb, t),
            LoopId::Mp => st.mp.tick(bb, t),
            LoopId::Pcp => st.pcp.tick(bb, t),
            LoopId::Sim => st.sim.tick(bb, t, dt),
        }
    }
}

fn paced(bb: &Blackboard, start: Instant, rate: u32, mut body: impl FnMut(f64)) {
    let mut k: u64 = 0;
    while !bb.is_done() {
        let due = start + Duration::from_secs_f64(k as f64 / rate as f64);
        let now = Instant::now();
        if due > now {
            std::thread::sleep(due - now);
        }
        body(start.elapsed().as_secs_f64());
        k += 1;
    }
}

fn run_wallclock(s: &Scenario, bb: &Blackboard, st: &mut Stages) {
    let start = Instant::now();
    let r = s.rates;
    let dt = 1.0 / r.sim as f64;
    let Stages { filter, map, mp, pcp, sim } = st;
    std::thread::scope(|scope| {
        scope.spawn(|| paced(bb, start, r.filter, |t| filter.tick(bb, t)));
        scope.spawn(|| paced(bb, start, r.map, |t| map.tick(bb, t)));
        scope.spawn(|| paced(bb, start, r.mp, |t| mp.tick(bb, t)));
        scope.spawn(|| paced(bb, start, r.pcp, |t| pcp.tick(bb, t)));
        scope.spawn(|| {
            // The simulated clock advances one fixed step per real tick.
            let mut k: u64 = 0;
            paced(bb, start, r.sim, |_| {
                sim.tick(bb, k as f64 * dt, dt);
                k += 1;
            });
        });
    });
}

fn mean_max_ms(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let max = xs.iter().cloned().fold(0.0, f64::max);
    (mean * 1e3, max * 1e3)
}

fn metrics(s: &Scenario, mode: RunMode, st: &Stages, events: &[EpisodeEvent]) -> Metrics {
    let count = |name: &str| events.iter().filter(|e| e.kind.name() == name).count();
    let backups = |m: CommandMode| {
        events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::BackupTriggered { mode, .. } if mode == m))
            .count()
    };
    let plans_3d = events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::MpReplan { path_kind: dualplan_core::PathKind::Spatial3D, .. }))
        .count();
    let traj: Vec<Vec3> = st.sim.trajectory.iter().map(|r| r.position).collect();
    let SolverStats {
        steps,
        solves,
        converged,
        iterations,
    } = st.pcp.stats;
    let timings = (mode == RunMode::Wallclock).then(|| {
        let (pcp_mean_ms, pcp_max_ms) = mean_max_ms(&st.pcp.durations);
        let (mp_mean_ms, mp_max_ms) = mean_max_ms(&st.mp.durations);
        WallTimings {
            pcp_mean_ms,
            pcp_max_ms,
            mp_mean_ms,
            mp_max_ms,
        }
    });
    Metrics {
        schema: 1,
        scenario: s.name.clone(),
        seed: s.seed,
        mode,
        outcome: st.sim.outcome.unwrap_or(Outcome::Timeout),
        flight_time: st.sim.state().time,
        path_length: polyline_length(&traj),
        straight_line: (s.goal - s.start).norm(),
        min_obstacle_distance: st.sim.min_distance,
        replans: count("mp_replan"),
        plans_3d,
        plan_failures: count("plan_failed"),
        backup_steer: backups(CommandMode::BackupSteer),
        backup_brake: backups(CommandMode::BackupBrake),
        avoidance_onsets: count("avoidance"),
        pcp_steps: steps,
        solver_converged_fraction: if solves == 0 { 1.0 } else { converged as f64 / solves as f64 },
        solver_mean_iterations: if solves == 0 { 0.0 } else { iterations as f64 / solves as f64 },
        timings,
    }
}

pub fn run_episode(scenario: &Scenario, mode: RunMode) -> Result<EpisodeResult, RuntimeError> {
    scenario.validate().map_err(RuntimeError::InvalidScenario)?;
    let (bb, mut stages) = setup(scenario, mode);
    match mode {
        RunMode::Virtual => run_virtual(scenario, &bb, &mut stages),
        RunMode::Wallclock => run_wallclock(scenario, &bb, &mut stages),
    }
    let mut events = bb.events();
    // Threads push in arrival order; the sort is stable, so virtual runs keep
    // their scheduling order among equal times.
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    let metrics = metrics(scenario, mode, &stages, &events);
    Ok(EpisodeResult {
        trajectory: stages.sim.trajectory,
        events,
        metrics,
        step_times: StepTimes {
            pcp: stages.pcp.durations,
            mp: stages.mp.durations,
        },
    })
}
