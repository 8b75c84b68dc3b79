//! Point-cloud planner: per-step goal, streamlined collision checks, angular
//! ray search, the one-step motion problem and the safety backup.

pub mod backup;
pub mod cloud;
pub mod das;
pub mod fermat;
pub mod motion;

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use backup::{braking_distance, safety_backup, BackupDecision, BackupPlan};
pub use cloud::{collision_check_segment, merge_sorted, min_distance, sorted_within, streamline};
pub use das::{candidate_rays, das_search, ray_clearance, DasHit, DasQuery, Ray, RayKind};
pub use fermat::{compute_goal, FermatCase, FermatTriangle};
pub use motion::{CommandMode, MotionCommand, MotionProblem, MotionSolution};

use crate::types::{point_segment_distance, DroneState, PlanPath, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcpParams {
    /// Search radius: cloud range and ray length.
    pub r_det: f64,
    pub r_safe: f64,
    /// Within this distance of the path end, speed and step shrink.
    pub r_dec: f64,
    /// `‖p_n → w_pn‖`.
    pub waypoint_dist: f64,
    pub n_use: usize,
    pub kappa1: f64,
    pub kappa2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub v_max: f64,
    pub a_max: f64,
    pub das_angle_step: f64,
    pub max_opt_iters: usize,
    pub opt_tol: f64,
    pub t_avs_floor: f64,
    pub t_avs_ceiling: f64,
    /// Path waypoints closer than this are considered reached.
    pub waypoint_reach: f64,
    pub z_min: f64,
    pub z_max: f64,
    /// How long a ray abandoned by a brake stays excluded, seconds.
    pub exclusion_time: f64,
}

impl Default for PcpParams {
    fn default() -> Self {
        Self {
            r_det: 3.0,
            r_safe: 0.5,
            r_dec: 3.0,
            waypoint_dist: 0.3,
            n_use: 70,
            kappa1: 4.2,
            kappa2: 1.5,
            eta1: 40.0,
            eta2: 10.0,
            v_max: 1.0,
            a_max: 2.0,
            das_angle_step: 10f64.to_radians(),
            max_opt_iters: 20,
            opt_tol: 1e-3,
            t_avs_floor: 0.005,
            t_avs_ceiling: 0.1,
            waypoint_reach: 0.3,
            z_min: 0.3,
            z_max: 5.0,
            exclusion_time: 2.0,
        }
    }
}

impl PcpParams {
    pub fn validate(&self) -> Result<(), String> {
        let checks = [
            (self.kappa1 > self.kappa2 && self.kappa2 > 0.0, "need κ1 > κ2 > 0"),
            (self.waypoint_dist > 0.0 && self.waypoint_dist < self.r_det, "need 0 < waypoint_dist < r_det"),
            (self.v_max > 0.0 && self.a_max > 0.0, "limits must be positive"),
            (
                self.v_max * self.v_max / (2.0 * self.a_max) < self.r_safe,
                "braking distance at v_max must stay below r_safe",
            ),
            (self.das_angle_step > 0.0 && self.das_angle_step <= std::f64::consts::FRAC_PI_2, "bad angle step"),
            (self.n_use > 0 && self.max_opt_iters > 0 && self.opt_tol > 0.0, "counts and tolerance must be positive"),
            (self.t_avs_floor > 0.0 && self.t_avs_floor <= self.t_avs_ceiling, "bad t_avs bounds"),
            (self.z_min < self.z_max && self.r_dec > 0.0, "bad altitude band or r_dec"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(msg.to_string()),
            None => Ok(()),
        }
    }
}

/// Prediction time from recent step durations: mean of the last ten. With
/// fewer samples the mean is clamped to `[floor, ceiling]`; none gives `floor`.
pub fn update_t_avs(history: &[f64], floor: f64, ceiling: f64) -> f64 {
    if history.is_empty() {
        return floor;
    }
    let tail = &history[history.len().saturating_sub(10)..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    if history.len() < 10 {
        mean.clamp(floor, ceiling)
    } else {
        mean
    }
}

/// Waypoints still ahead of `p`: everything after the path segment closest
/// to `p`, minus leading ones within `reach`. The last waypoint is kept.
pub fn remaining_waypoints<'a>(path: &'a PlanPath, p: &Vec3, reach: f64) -> &'a [Vec3] {
    let w = path.waypoints();
    if w.len() == 1 {
        return w;
    }
    let mut best = (f64::INFINITY, 0);
    for i in 0..w.len() - 1 {
        let d = point_segment_distance(p, &w[i], &w[i + 1]);
        if d <= best.0 {
            best = (d, i);
        }
    }
    let mut rest = &w[best.1 + 1..];
    while rest.len() > 1 && (rest[0] - p).norm() < reach {
        rest = &rest[1..];
    }
    rest
}

/// Snapshot handed to one planner step. Clouds are in the Earth frame.
#[derive(Debug, Clone, Copy)]
pub struct PcpInput<'a> {
    pub time: f64,
    pub state: &'a DroneState,
    pub path: Option<&'a PlanPath>,
    pub pcl_4: &'a [Vec3],
    pub pcl_m: &'a [Vec3],
    /// Seeds the streamline top-up sampling of this step.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackupInfo {
    pub mode: CommandMode,
    pub d_bkd: f64,
    pub min_clearance: f64,
    /// Steering ray, or the brake target.
    pub ray: Option<Vec3>,
    pub target: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcpStep {
    pub command: MotionCommand,
    pub g_n: Option<Vec3>,
    pub w_pn: Option<Vec3>,
    pub ray: Option<Ray>,
    pub n_use: usize,
    pub t_avs: f64,
    pub solver_iterations: usize,
    pub solver_converged: bool,
    /// Set when the step went through the safety backup.
    pub backup: Option<BackupInfo>,
}

impl PcpStep {
    /// Any deviation from the straight goal ray.
    pub fn is_avoidance(&self) -> bool {
        self.backup.is_some() || self.ray.is_some_and(|r| r.round > 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Returning {
    target: Vec3,
    ray: Option<Vec3>,
    since: f64,
}

/// Stateful point-cloud planner: keeps the step-time history, the previous
/// step's position and ray, and the brake-and-return bookkeeping.
#[derive(Debug, Clone)]
pub struct Pcp {
    pub params: PcpParams,
    durations: VecDeque<f64>,
    prev_position: Option<Vec3>,
    prev_ray: Option<Vec3>,
    returning: Option<Returning>,
    excluded: Vec<(Vec3, f64)>,
}

const SETTLED_SPEED: f64 = 0.05;
const SETTLED_DIST: f64 = 0.05;
const RETURN_TIMEOUT: f64 = 3.0;

impl Pcp {
    pub fn new(params: PcpParams) -> Self {
        Self {
            params,
            durations: VecDeque::new(),
            prev_position: None,
            prev_ray: None,
            returning: None,
            excluded: Vec::new(),
        }
    }

    pub fn record_duration(&mut self, seconds: f64) {
        self.durations.push_back(seconds);
        if self.durations.len() > 10 {
            self.durations.pop_front();
        }
    }

    pub fn t_avs(&self) -> f64 {
        let h: Vec<f64> = self.durations.iter().copied().collect();
        update_t_avs(&h, self.params.t_avs_floor, self.params.t_avs_ceiling)
    }

    pub fn excluded_rays(&self) -> Vec<Vec3> {
        self.excluded.iter().map(|(d, _)| *d).collect()
    }

    pub fn step(&mut self, input: &PcpInput) -> PcpStep {
        let out = self.plan(input);
        self.prev_position = Some(input.state.position);
        out
    }

    fn base(&self, command: MotionCommand, t_avs: f64) -> PcpStep {
        PcpStep {
            command,
            g_n: None,
            w_pn: None,
            ray: None,
            n_use: 0,
            t_avs,
            solver_iterations: 0,
            solver_converged: true,
            backup: None,
        }
    }

    fn problem(&self, p: &Vec3, v: &Vec3, w: &Vec3, t: f64, v_max: f64) -> MotionProblem {
        MotionProblem {
            p: *p,
            v: *v,
            w: *w,
            t,
            a_max: self.params.a_max,
            v_max,
            eta1: self.params.eta1,
            eta2: self.params.eta2,
        }
    }

    fn solve(&self, prob: &MotionProblem, mode: CommandMode) -> (MotionCommand, MotionSolution) {
        let sol = prob.solve(self.params.max_opt_iters, self.params.opt_tol * self.params.a_max);
        (prob.command(sol.a, mode), sol)
    }

    fn plan(&mut self, input: &PcpInput) -> PcpStep {
        let prm = self.params.clone();
        let t_avs = self.t_avs();
        let now = input.time;
        let p = input.state.position;
        let v = input.state.velocity;
        self.excluded.retain(|(_, until)| *until > now);

        if let Some(ret) = self.returning {
            let settled = v.norm() <= SETTLED_SPEED;
            if settled && ((p - ret.target).norm() <= SETTLED_DIST || now - ret.since > RETURN_TIMEOUT) {
                if let Some(ray) = ret.ray {
                    self.excluded.push((ray, now + prm.exclusion_time));
                }
                self.returning = None;
            } else {
                let prob = self.problem(&p, &v, &ret.target, t_avs, prm.v_max);
                let (command, sol) = if settled {
                    let d = (ret.target - p).norm();
                    let slow = self.problem(&p, &v, &ret.target, t_avs, prm.v_max * (d / prm.r_dec).clamp(0.2, 1.0));
                    self.solve(&slow, CommandMode::BackupBrake)
                } else {
                    let a = prob.brake();
                    (prob.command(a, CommandMode::BackupBrake), MotionSolution { a, iterations: 0, converged: true })
                };
                let mut out = self.base(command, t_avs);
                out.w_pn = Some(ret.target);
                out.solver_iterations = sol.iterations;
                out.solver_converged = sol.converged;
                return out;
            }
        }

        let Some(path) = input.path else {
            // No path yet: stop and hover.
            let prob = self.problem(&p, &v, &p, t_avs, prm.v_max);
            return self.base(prob.command(prob.brake(), CommandMode::Normal), t_avs);
        };
        let end = path.last();
        let d_goal = (end - p).norm();
        let remaining = remaining_waypoints(path, &p, prm.waypoint_reach);
        let mut g_n = compute_goal(&p, &v, remaining, prm.kappa1, prm.kappa2).unwrap_or(end);
        if (g_n - p).norm() < 1e-6 {
            g_n = remaining[0];
        }
        if (g_n - p).norm() < 1e-6 || d_goal < 1e-3 {
            let prob = self.problem(&p, &v, &p, t_avs, prm.v_max);
            let mut out = self.base(prob.command(prob.brake(), CommandMode::Normal), t_avs);
            out.g_n = Some(g_n);
            return out;
        }

        let pcl_4r = sorted_within(input.pcl_4, &p, prm.r_det);
        let pcl_mr = sorted_within(input.pcl_m, &p, prm.r_det);
        let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
        let pcl_use = streamline(&pcl_4r, &p, &g_n, prm.n_use, &mut rng);
        let cloud = merge_sorted(&pcl_use, &pcl_mr, &p);

        let ray_length = prm.r_det.min(d_goal.max(prm.waypoint_dist));
        let step_length = prm.waypoint_dist.min(d_goal);
        let v_lim = prm.v_max * (d_goal / prm.r_dec).clamp(0.2, 1.0);
        let excluded = self.excluded_rays();
        let query = DasQuery {
            ray_length,
            step_length,
            r_safe: prm.r_safe,
            angle_step: prm.das_angle_step,
            z_min: prm.z_min,
            z_max: prm.z_max,
            excluded: &excluded,
        };

        if let Some(hit) = das_search(&p, &g_n, &cloud, &query) {
            let prob = self.problem(&p, &v, &hit.w_pn, t_avs, v_lim);
            let (command, sol) = self.solve(&prob, CommandMode::Normal);
            self.prev_ray = Some(hit.ray.dir);
            return PcpStep {
                command,
                g_n: Some(g_n),
                w_pn: Some(hit.w_pn),
                ray: Some(hit.ray),
                n_use: pcl_use.len(),
                t_avs,
                solver_iterations: sol.iterations,
                solver_converged: sol.converged,
                backup: None,
            };
        }

        // Backup: clearance is judged on the full cloud, not the streamlined one.
        let full = merge_sorted(&pcl_4r, &pcl_mr, &p);
        let mut rays: Vec<Ray> = candidate_rays(&p, &g_n, prm.das_angle_step)
            .into_iter()
            .filter(|r| query.admissible(&p, r))
            .collect();
        if rays.is_empty() {
            let open = DasQuery { excluded: &[], ..query.clone() };
            rays = candidate_rays(&p, &g_n, prm.das_angle_step)
                .into_iter()
                .filter(|r| open.admissible(&p, r))
                .collect();
        }
        let p_prev = self.prev_position.unwrap_or(p);
        let decision = safety_backup(&p, &v, &p_prev, &full, &rays, ray_length, prm.a_max);
        let mut out = self.base(MotionCommand::hold(&p), t_avs);
        out.g_n = Some(g_n);
        out.n_use = pcl_use.len();
        match decision.plan {
            BackupPlan::Steer { ray, .. } => {
                let w = p + ray.dir * step_length;
                let prob = self.problem(&p, &v, &w, t_avs, v_lim);
                let (command, sol) = self.solve(&prob, CommandMode::BackupSteer);
                self.prev_ray = Some(ray.dir);
                out.command = command;
                out.w_pn = Some(w);
                out.ray = Some(ray);
                out.solver_iterations = sol.iterations;
                out.solver_converged = sol.converged;
                out.backup = Some(BackupInfo {
                    mode: CommandMode::BackupSteer,
                    d_bkd: decision.d_bkd,
                    min_clearance: decision.min_clearance,
                    ray: Some(ray.dir),
                    target: None,
                });
            }
            BackupPlan::Brake { target } => {
                let prob = self.problem(&p, &v, &target, t_avs, prm.v_max);
                out.command = prob.command(prob.brake(), CommandMode::BackupBrake);
                out.w_pn = Some(target);
                out.backup = Some(BackupInfo {
                    mode: CommandMode::BackupBrake,
                    d_bkd: decision.d_bkd,
                    min_clearance: decision.min_clearance,
                    ray: None,
                    target: Some(target),
                });
                self.returning = Some(Returning {
                    target,
                    ray: self.prev_ray,
                    since: now,
                });
            }
        }
        out
    }
}
