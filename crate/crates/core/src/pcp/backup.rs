//! Fallback when no candidate ray is clear: steer along the ray with the most
//! room if the drone can still stop short of the nearest point, otherwise
//! brake and head back to where the previous step started.

use serde::{Deserialize, Serialize};

use super::cloud::min_distance;
use super::das::{ray_clearance, Ray};
use crate::types::Vec3;

/// Minimum braking distance at speed `‖v‖`.
pub fn braking_distance(v: &Vec3, a_max: f64) -> f64 {
    v.norm_squared() / (2.0 * a_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BackupPlan {
    Steer { ray: Ray, clearance: f64 },
    Brake { target: Vec3 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackupDecision {
    pub plan: BackupPlan,
    pub d_bkd: f64,
    pub min_clearance: f64,
}

/// Chooses between steering and braking. `rays` are the admissible
/// candidates in search order; ties in clearance go to the earlier ray.
pub fn safety_backup(
    p_n: &Vec3,
    v_n: &Vec3,
    p_prev: &Vec3,
    cloud: &[Vec3],
    rays: &[Ray],
    ray_length: f64,
    a_max: f64,
) -> BackupDecision {
    let d_bkd = braking_distance(v_n, a_max);
    let min_clearance = min_distance(p_n, cloud);
    let steer = (min_clearance > d_bkd)
        .then(|| {
            rays.iter()
                .map(|r| (*r, ray_clearance(p_n, r, ray_length, cloud)))
                .fold(None, |best: Option<(Ray, f64)>, (r, c)| match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((r, c)),
                })
        })
        .flatten();
    let plan = match steer {
        Some((ray, clearance)) => BackupPlan::Steer { ray, clearance },
        None => BackupPlan::Brake { target: *p_prev },
    };
    BackupDecision {
        plan,
        d_bkd,
        min_clearance,
    }
}
