//! Loop bodies. Each stage owns its private state, reads inputs from the
//! blackboard and publishes its outputs there; the same bodies run under the
//! virtual scheduler and on threads.

use std::time::Instant;

use dualplan_core::mapping::{local_map, VoxelMap};
use dualplan_core::pcl::{filter_cloud, FilterParams, Pose};
use dualplan_core::pcp::{remaining_waypoints, CommandMode, Pcp, PcpInput, PcpParams};
use dualplan_core::planner::{first_collision, plan_cycle, suspension_radius, MpParams};
use dualplan_core::types::point_segment_distance;
use dualplan_core::{DroneState, PathKind, PlanPath, PointCloud, Vec3};
use dualplan_sim::{check_collision, sense, step_dynamics, step_obstacles, EpisodeEvent, EventKind, SensorParams, World};

use crate::blackboard::{Blackboard, PlanInfo};

/// Maximum dynamic-box distance for a filtered point to count as seeing it.
const SENSED_RADIUS: f64 = 0.3;

fn event(time: f64, kind: EventKind) -> EpisodeEvent {
    EpisodeEvent { time, kind }
}

/// splitmix64 finalizer, used to derive per-step seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub struct FilterStage {
    pub sensor: SensorParams,
    pub filter: FilterParams,
    pub seed: u64,
    sensed: Vec<bool>,
}

impl FilterStage {
    pub fn new(sensor: SensorParams, filter: FilterParams, seed: u64) -> Self {
        Self {
            sensor,
            filter,
            seed,
            sensed: Vec::new(),
        }
    }

    pub fn tick(&mut self, bb: &Blackboard, time: f64) {
        let state = bb.state.read().value;
        let world = bb.world.read();
        let snapshot = step_obstacles(&world.value, time);
        let pose = Pose::with_yaw(state.position, state.attitude.yaw);
        let raw = sense(&snapshot, &pose, &self.sensor, self.seed);
        let pcl_4 = filter_cloud(&raw, &pose, &self.filter).pcl_4;

        self.sensed.resize(world.value.dynamic_boxes.len(), false);
        for (i, b) in world.value.dynamic_boxes.iter().enumerate() {
            if self.sensed[i] {
                continue;
            }
            if let Some(aabb) = b.box_at(time) {
                if pcl_4.iter().any(|p| aabb.distance(p) <= SENSED_RADIUS) {
                    self.sensed[i] = true;
                    bb.push_event(event(time, EventKind::IntruderSensed { index: i }));
                }
            }
        }
        bb.pcl_4.publish(time, pcl_4);
    }
}

pub struct MapStage {
    voxels: VoxelMap,
    seen: u64,
}

impl MapStage {
    pub fn new(voxels: VoxelMap) -> Self {
        Self { voxels, seen: 0 }
    }

    pub fn tick(&mut self, bb: &Blackboard, time: f64) {
        let cloud = bb.pcl_4.read();
        if cloud.version == self.seen {
            return;
        }
        self.seen = cloud.version;
        self.voxels.integrate(&cloud.value, time);
        self.voxels.decay(time);
        bb.voxels.publish(time, self.voxels.clone());
    }
}

/// Smallest distance from any map point to the polyline.
pub fn path_clearance(path: &[Vec3], points: &[Vec3]) -> f64 {
    points
        .iter()
        .flat_map(|p| path.windows(2).map(move |w| point_segment_distance(p, &w[0], &w[1])))
        .fold(f64::INFINITY, f64::min)
}

pub struct MpStage {
    pub params: MpParams,
    pub goal: Vec3,
    pub goal_tolerance: f64,
    pub waypoint_reach: f64,
    current: Option<PlanPath>,
    failing: bool,
    pub durations: Vec<f64>,
}

impl MpStage {
    pub fn new(params: MpParams, goal: Vec3, goal_tolerance: f64, waypoint_reach: f64) -> Self {
        Self {
            params,
            goal,
            goal_tolerance,
            waypoint_reach,
            current: None,
            failing: false,
            durations: Vec::new(),
        }
    }

    /// Why the current path has to be replaced, if it does.
    fn replan_reason(&self, p: &Vec3, pcl_lm: &PointCloud) -> Option<&'static str> {
        let Some(path) = &self.current else {
            return Some("absent");
        };
        if path.kind() == PathKind::Lifted2D {
            return Some("no_3d_path");
        }
        let end = path.last();
        if (end - p).norm() <= self.waypoint_reach && (end - self.goal).norm() > self.goal_tolerance {
            return Some("consumed");
        }
        let mut ahead = vec![*p];
        ahead.extend_from_slice(remaining_waypoints(path, p, self.waypoint_reach));
        let radius = suspension_radius(path.kind(), &self.params);
        first_collision(&ahead, &pcl_lm.points, radius).map(|_| "collision")
    }

    pub fn tick(&mut self, bb: &Blackboard, time: f64) {
        let started = Instant::now();
        let p = bb.state.read().value.position;
        let voxels = bb.voxels.read();
        let pcl_lm = local_map(&voxels.value, &p, &self.params.local);
        let Some(reason) = self.replan_reason(&p, &pcl_lm) else {
            return;
        };
        match plan_cycle(&pcl_lm, &p, &self.goal, &self.params) {
            Ok(out) => {
                let path = out.path_fnl;
                bb.push_event(event(
                    time,
                    EventKind::MpReplan {
                        reason: reason.to_string(),
                        path_kind: path.kind(),
                        waypoints: path.len(),
                        length: path.length(),
                        clearance: path_clearance(path.waypoints(), &pcl_lm.points),
                    },
                ));
                bb.plan.publish(
                    time,
                    Some(PlanInfo {
                        path: path.clone(),
                        local_goal: out.local_goal.g_l,
                    }),
                );
                self.current = Some(path);
                self.failing = false;
            }
            Err(e) => {
                if !self.failing {
                    bb.push_event(event(time, EventKind::PlanFailed { reason: e.to_string() }));
                }
                self.failing = true;
            }
        }
        self.durations.push(started.elapsed().as_secs_f64());
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverStats {
    pub steps: usize,
    pub solves: usize,
    pub converged: usize,
    pub iterations: usize,
}

pub struct PcpStage {
    pub pcp: Pcp,
    pub seed: u64,
    /// Fixed step duration for virtual runs; `None` measures wall time.
    pub step_time: Option<f64>,
    step_index: u64,
    prev_position: Option<Vec3>,
    avoiding: bool,
    pub stats: SolverStats,
    pub durations: Vec<f64>,
}

impl PcpStage {
    pub fn new(params: PcpParams, seed: u64, step_time: Option<f64>) -> Self {
        Self {
            pcp: Pcp::new(params),
            seed,
            step_time,
            step_index: 0,
            prev_position: None,
            avoiding: false,
            stats: SolverStats::default(),
            durations: Vec::new(),
        }
    }

    pub fn tick(&mut self, bb: &Blackboard, time: f64) {
        let started = Instant::now();
        let state = bb.state.read().value;
        let plan = bb.plan.read();
        let pcl_4 = bb.pcl_4.read();
        let voxels = bb.voxels.read();
        let p = state.position;
        let pcl_m = voxels.value.centers_within(&p, self.pcp.params.r_det);
        let step = self.pcp.step(&PcpInput {
            time,
            state: &state,
            path: plan.value.as_ref().map(|pi| &pi.path),
            pcl_4: &pcl_4.value.points,
            pcl_m: &pcl_m,
            seed: mix_seed(self.seed, self.step_index),
        });
        self.step_index += 1;
        bb.command.publish(time, step.command);

        self.stats.steps += 1;
        if step.solver_iterations > 0 {
            self.stats.solves += 1;
            self.stats.iterations += step.solver_iterations;
            self.stats.converged += usize::from(step.solver_converged);
        }
        if let Some(b) = step.backup {
            bb.push_event(event(
                time,
                EventKind::BackupTriggered {
                    mode: b.mode,
                    position: p,
                    previous: self.prev_position.unwrap_or(p),
                    d_bkd: b.d_bkd,
                    min_clearance: b.min_clearance,
                    ray: b.ray,
                    target: b.target,
                },
            ));
        }
        let avoiding = step.is_avoidance();
        if avoiding && !self.avoiding {
            bb.push_event(event(
                time,
                EventKind::Avoidance {
                    round: step.ray.map_or(0, |r| r.round),
                    mode: step.command.mode,
                },
            ));
        }
        self.avoiding = avoiding;
        self.prev_position = Some(p);

        let elapsed = started.elapsed().as_secs_f64();
        self.durations.push(elapsed);
        self.pcp.record_duration(self.step_time.unwrap_or(elapsed));
    }
}

/// One row of the flown trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub time: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub mode: CommandMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GoalReached,
    Collision,
    Timeout,
}

pub struct SimStage {
    world: World,
    state: DroneState,
    pub v_max: f64,
    pub drone_radius: f64,
    pub goal: Vec3,
    pub goal_tolerance: f64,
    pub timeout: f64,
    pub trajectory: Vec<TrajectoryRow>,
    /// Smallest ground-truth distance from the drone center to any box.
    pub min_distance: f64,
    pub outcome: Option<Outcome>,
}

impl SimStage {
    pub fn new(world: World, state: DroneState, v_max: f64, drone_radius: f64, goal: Vec3, goal_tolerance: f64, timeout: f64) -> Self {
        Self {
            world,
            state,
            v_max,
            drone_radius,
            goal,
            goal_tolerance,
            timeout,
            trajectory: Vec::new(),
            min_distance: f64::INFINITY,
            outcome: None,
        }
    }

    pub fn state(&self) -> &DroneState {
        &self.state
    }

    fn record(&mut self, mode: CommandMode) {
        self.trajectory.push(TrajectoryRow {
            time: self.state.time,
            position: self.state.position,
            velocity: self.state.velocity,
            mode,
        });
    }

    /// Advances the drone from `time` to `time + dt`.
    pub fn tick(&mut self, bb: &Blackboard, time: f64, dt: f64) {
        if self.outcome.is_some() {
            return;
        }
        self.state.time = time;
        let fired = self.world.update_triggers(time, &self.state.position);
        for index in &fired {
            bb.push_event(event(time, EventKind::IntruderSpawn { index: *index }));
        }
        if !fired.is_empty() {
            bb.world.publish(time, self.world.clone());
        }

        let command = bb.command.read().value;
        self.record(command.mode);
        if let Some(plan) = bb.plan.read().value.as_ref() {
            let d = plan.local_goal - self.state.position;
            if d.xy().norm() > 0.05 {
                self.state.attitude.yaw = d.y.atan2(d.x);
            }
        }
        let yaw = self.state.attitude.yaw;
        self.state = step_dynamics(&self.state, &command.a, dt, self.v_max);
        self.state.attitude.yaw = yaw;
        let t1 = self.state.time;
        let p = self.state.position;

        let snapshot = step_obstacles(&self.world, t1);
        let nearest = snapshot.boxes.iter().map(|b| b.distance(&p)).fold(f64::INFINITY, f64::min);
        self.min_distance = self.min_distance.min(nearest);
        let outcome = if check_collision(&self.world, t1, &p, self.drone_radius) {
            bb.push_event(event(t1, EventKind::Collision { position: p }));
            Some(Outcome::Collision)
        } else if (p - self.goal).norm() <= self.goal_tolerance {
            bb.push_event(event(t1, EventKind::GoalReached { position: p }));
            Some(Outcome::GoalReached)
        } else if t1 >= self.timeout {
            bb.push_event(event(t1, EventKind::Timeout));
            Some(Outcome::Timeout)
        } else {
            None
        };
        if outcome.is_some() {
            self.record(command.mode);
            self.outcome = outcome;
            bb.finish();
        }
        bb.state.publish(t1, self.state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_spread() {
        let a: Vec<u64> = (0..100).map(|i| mix_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_eq!(mix_seed(7, 3), mix_seed(7, 3));
    }

    #[test]
    fn clearance_of_polyline() {
        let path = [Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0)];
        let pts = [Vec3::new(1.0, 0.5, 0.0), Vec3::new(3.0, 0.0, 0.0)];
        assert!((path_clearance(&path, &pts) - 0.5).abs() < 1e-12);
        assert_eq!(path_clearance(&path, &[]), f64::INFINITY);
    }
}
