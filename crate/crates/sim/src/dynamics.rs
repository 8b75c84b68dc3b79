//! Point-mass drone: constant acceleration over each tick, speed clamped.

use dualplan_core::{Attitude, DroneState, Vec3};

const GRAVITY: f64 = 9.81;

/// Advances `state` by `dt` under acceleration `a`. Position and velocity
/// follow the exact double-integrator update; if the new speed exceeds
/// `v_max` the velocity is scaled back. Yaw is kept; pitch and roll are the
/// tilt a multirotor would need for `a` and carry no dynamics.
pub fn step_dynamics(state: &DroneState, a: &Vec3, dt: f64, v_max: f64) -> DroneState {
    let mut v = state.velocity + a * dt;
    let speed = v.norm();
    if speed > v_max {
        v *= v_max / speed;
    }
    let position = state.position + state.velocity * dt + a * (dt * dt / 2.0);
    let (sy, cy) = state.attitude.yaw.sin_cos();
    let forward = a.x * cy + a.y * sy;
    let left = -a.x * sy + a.y * cy;
    let attitude = Attitude {
        yaw: state.attitude.yaw,
        pitch: forward.atan2(GRAVITY + a.z),
        roll: (-left).atan2(GRAVITY + a.z),
    };
    DroneState {
        position,
        velocity: v,
        acceleration: *a,
        attitude,
        time: state.time + dt,
    }
}
