//! Episode description: world, endpoints, stack configuration and the
//! knobs of the virtual run.

use serde::{Deserialize, Serialize};

use dualplan_core::{FrameworkConfig, Vec3};
use dualplan_sim::gen::{intruder_world, random_world, trap_world, wall_world, GeneratedWorld, IntruderParams, RandomWorldParams};
use dualplan_sim::{SensorParams, World};

use crate::scheduler::LoopRates;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub world: World,
    pub start: Vec3,
    pub goal: Vec3,
    pub config: FrameworkConfig,
    pub sensor: SensorParams,
    pub rates: LoopRates,
    /// Ground-truth collision radius of the airframe.
    pub drone_radius: f64,
    pub goal_tolerance: f64,
    /// Episode length limit, seconds.
    pub timeout: f64,
    pub initial_velocity: Vec3,
    /// Seed the voxel map with every static box before the flight.
    pub prior_map: bool,
    /// Step duration fed to the planner's prediction-time window in virtual
    /// runs, seconds.
    pub pcp_step_time: f64,
    pub seed: u64,
}

impl Scenario {
    /// Defaults around a generated world; the timeout allows ten times the
    /// straight-line flight time.
    pub fn new(name: impl Into<String>, g: GeneratedWorld, seed: u64) -> Self {
        let config = FrameworkConfig::default();
        let timeout = 10.0 * (g.goal - g.start).norm() / config.pcp.v_max;
        Self {
            name: name.into(),
            world: g.world,
            start: g.start,
            goal: g.goal,
            config,
            sensor: SensorParams::default(),
            rates: LoopRates::default(),
            drone_radius: 0.15,
            goal_tolerance: 0.3,
            timeout,
            initial_velocity: Vec3::zeros(),
            prior_map: false,
            pcp_step_time: 0.016,
            seed,
        }
    }

    pub fn wall(use_dags: bool) -> Self {
        let mut s = Self::new(if use_dags { "wall-3d" } else { "wall-2d" }, wall_world(), 0);
        s.config.mp.use_dags = use_dags;
        s
    }

    pub fn random(seed: u64, params: &RandomWorldParams) -> Self {
        Self::new(format!("random-{seed}"), random_world(seed, params), seed)
    }

    /// Open space with a box that appears ahead and crosses. Voxels expire
    /// after half a second so the box does not leave a wall behind it.
    pub fn intruder(seed: u64) -> Self {
        let mut s = Self::new(format!("intruder-{seed}"), intruder_world(seed, &IntruderParams::default()), seed);
        s.config.map.decay_after = Some(0.5);
        s
    }

    /// The corridor trap. At rest the drone can still steer out; `moving`
    /// starts it at 0.95 m/s along the corridor with a 1 m/s² limit, too
    /// fast to stop short of the walls.
    pub fn trap(moving: bool) -> Self {
        let g = trap_world();
        let mut s = Self::new(if moving { "trap-moving" } else { "trap-rest" }, g, 0);
        s.prior_map = true;
        s.timeout = 8.0;
        if moving {
            s.config.pcp.a_max = 1.0;
            s.config.pcp.v_max = 0.98;
            s.initial_velocity = Vec3::new(0.0, 0.95, 0.0);
        }
        s
    }

    pub fn validate(&self) -> Result<(), String> {
        self.config.validate()?;
        if !self.sensor.is_valid() {
            return Err("invalid sensor parameters".into());
        }
        if !self.rates.is_valid() {
            return Err("loop rates must be positive".into());
        }
        if !self.world.is_valid() {
            return Err("invalid dynamic box".into());
        }
        let positive = [self.drone_radius, self.goal_tolerance, self.timeout, self.pcp_step_time];
        if positive.iter().any(|x| x.is_nan() || *x <= 0.0) {
            return Err("radius, tolerance, timeout and step time must be positive".into());
        }
        if self.initial_velocity.norm() > self.config.pcp.v_max {
            return Err("initial speed exceeds v_max".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        let all = [
            Scenario::wall(true),
            Scenario::wall(false),
            Scenario::random(1, &RandomWorldParams::default()),
            Scenario::intruder(2),
            Scenario::trap(false),
            Scenario::trap(true),
        ];
        for s in all {
            s.validate().unwrap_or_else(|e| panic!("{}: {e}", s.name));
            assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        }
    }

    #[test]
    fn rejects_bad_values() {
        let mut s = Scenario::wall(true);
        s.drone_radius = 0.0;
        assert!(s.validate().is_err());
        let mut s = Scenario::wall(true);
        s.initial_velocity = Vec3::new(5.0, 0.0, 0.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn timeout_scales_with_distance() {
        let s = Scenario::wall(true);
        assert!((s.timeout - 52.0).abs() < 1e-9);
    }
}
