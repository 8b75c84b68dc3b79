//! Discrete angular search: a fan of rays about the goal direction, tried in
//! order of increasing angular offset.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::cloud::collision_check_segment;
use crate::planner::dags::{direction, spherical_angles};
use crate::types::{point_segment_distance, Vec3};

/// Which rotation produced a candidate ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RayKind {
    Goal,
    AzimuthPos,
    AzimuthNeg,
    ElevationPos,
    ElevationNeg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub dir: Vec3,
    /// Round number; the angular offset is `round · step`.
    pub round: usize,
    pub kind: RayKind,
}

/// Candidate rays from `p_n` about `g_n - p_n`: the goal ray, then for each
/// round `+az, -az, +el, -el`, up to an offset of 90°. Elevations past the
/// poles are skipped.
pub fn candidate_rays(p_n: &Vec3, g_n: &Vec3, step: f64) -> Vec<Ray> {
    let (az, el) = spherical_angles(&(g_n - p_n));
    let mut rays = vec![Ray {
        dir: direction(az, el),
        round: 0,
        kind: RayKind::Goal,
    }];
    let mut round = 1;
    while round as f64 * step <= FRAC_PI_2 + 1e-12 {
        let d = round as f64 * step;
        let options = [
            (az + d, el, RayKind::AzimuthPos),
            (az - d, el, RayKind::AzimuthNeg),
            (az, el + d, RayKind::ElevationPos),
            (az, el - d, RayKind::ElevationNeg),
        ];
        for (a, e, kind) in options {
            if e.abs() <= FRAC_PI_2 + 1e-12 {
                rays.push(Ray {
                    dir: direction(a, e.clamp(-FRAC_PI_2, FRAC_PI_2)),
                    round,
                    kind,
                });
            }
        }
        round += 1;
    }
    rays
}

/// Settings for one search.
#[derive(Debug, Clone, PartialEq)]
pub struct DasQuery<'a> {
    pub ray_length: f64,
    /// Distance of `w_pn` from `p_n` along the accepted ray.
    pub step_length: f64,
    pub r_safe: f64,
    pub angle_step: f64,
    pub z_min: f64,
    pub z_max: f64,
    /// Directions that may not be used; rays within half a step of one are
    /// skipped.
    pub excluded: &'a [Vec3],
}

impl DasQuery<'_> {
    /// Whether a ray is admissible before any collision check.
    pub fn admissible(&self, p_n: &Vec3, ray: &Ray) -> bool {
        let end = p_n + ray.dir * self.ray_length;
        if end.z < self.z_min || end.z > self.z_max {
            return false;
        }
        let cos_limit = (self.angle_step / 2.0).cos();
        !self.excluded.iter().any(|e| e.dot(&ray.dir) > cos_limit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DasHit {
    pub w_pn: Vec3,
    pub ray: Ray,
}

/// First admissible ray whose segment of length `ray_length` keeps `r_safe`
/// from every point in `cloud`.
pub fn das_search(p_n: &Vec3, g_n: &Vec3, cloud: &[Vec3], q: &DasQuery) -> Option<DasHit> {
    if (g_n - p_n).norm() == 0.0 {
        return None;
    }
    candidate_rays(p_n, g_n, q.angle_step)
        .into_iter()
        .filter(|ray| q.admissible(p_n, ray))
        .find(|ray| collision_check_segment(p_n, &(p_n + ray.dir * q.ray_length), cloud, q.r_safe).is_none())
        .map(|ray| DasHit {
            w_pn: p_n + ray.dir * q.step_length,
            ray,
        })
}

/// Clearance of a ray segment: distance to the nearest cloud point.
pub fn ray_clearance(p_n: &Vec3, ray: &Ray, length: f64, cloud: &[Vec3]) -> f64 {
    let end = p_n + ray.dir * length;
    cloud
        .iter()
        .map(|c| point_segment_distance(c, p_n, &end))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(excluded: &[Vec3]) -> DasQuery<'_> {
        DasQuery {
            ray_length: 3.0,
            step_length: 0.3,
            r_safe: 0.5,
            angle_step: 10f64.to_radians(),
            z_min: -100.0,
            z_max: 100.0,
            excluded,
        }
    }

    #[test]
    fn ray_schedule() {
        let p = Vec3::zeros();
        let rays = candidate_rays(&p, &Vec3::new(1.0, 0.0, 0.0), 10f64.to_radians());
        // 1 + 9 rounds of 4.
        assert_eq!(rays.len(), 37);
        assert_eq!(rays[0].kind, RayKind::Goal);
        assert!((rays[1].dir - direction(10f64.to_radians(), 0.0)).norm() < 1e-12);
        assert!((rays[3].dir - direction(0.0, 10f64.to_radians())).norm() < 1e-12);
        assert!((rays[36].dir - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        // Tilted goal direction: high elevations run out before 90°.
        let up = candidate_rays(&p, &Vec3::new(1.0, 0.0, 1.0), 10f64.to_radians());
        assert!(up.iter().all(|r| r.dir.z <= 1.0 + 1e-12));
        assert!(up.len() < 37);
    }

    #[test]
    fn empty_cloud_goes_straight() {
        let p = Vec3::new(1.0, 2.0, 1.0);
        let g = Vec3::new(4.0, 6.0, 1.0);
        let hit = das_search(&p, &g, &[], &query(&[])).unwrap();
        assert_eq!(hit.ray.round, 0);
        assert!((hit.w_pn - (p + (g - p).normalize() * 0.3)).norm() < 1e-12);
    }

    #[test]
    fn blocked_front_turns_left_at_twenty_degrees() {
        let p = Vec3::zeros();
        let g = Vec3::new(5.0, 0.0, 0.0);
        // Distance from (1.5, 0, 0) to a ray at angle θ is 1.5·sin θ.
        let cloud = [Vec3::new(1.5, 0.0, 0.0)];
        let hit = das_search(&p, &g, &cloud, &query(&[])).unwrap();
        // Oracle: first ray in schedule order whose full scan is clear.
        let oracle = candidate_rays(&p, &g, 10f64.to_radians())
            .into_iter()
            .find(|r| ray_clearance(&p, r, 3.0, &cloud) >= 0.5)
            .unwrap();
        assert_eq!(hit.ray, oracle);
        assert_eq!((hit.ray.round, hit.ray.kind), (2, RayKind::AzimuthPos));
    }

    #[test]
    fn excluded_direction_is_skipped() {
        let p = Vec3::zeros();
        let g = Vec3::new(5.0, 0.0, 0.0);
        let ex = [Vec3::new(1.0, 0.0, 0.0)];
        let hit = das_search(&p, &g, &[], &query(&ex)).unwrap();
        assert_eq!((hit.ray.round, hit.ray.kind), (1, RayKind::AzimuthPos));
    }

    #[test]
    fn ringed_drone_has_no_ray() {
        let p = Vec3::zeros();
        let mut ring = Vec::new();
        for i in 0..24 {
            for j in -6..=6 {
                let (az, el) = (i as f64 * 15f64.to_radians(), j as f64 * 15f64.to_radians());
                ring.push(direction(az, el) * 0.4);
            }
        }
        assert!(das_search(&p, &Vec3::new(1.0, 0.0, 0.0), &ring, &query(&[])).is_none());
    }

    #[test]
    fn accepted_segment_is_clear_and_earliest() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let cloud: Vec<Vec3> = (0..30)
                .map(|_| Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
                .collect();
            let g = Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
            let p = Vec3::zeros();
            let rays = candidate_rays(&p, &g, 10f64.to_radians());
            let first_clear = rays.iter().position(|r| ray_clearance(&p, r, 3.0, &cloud) >= 0.5);
            match das_search(&p, &g, &cloud, &query(&[])) {
                Some(hit) => {
                    let i = rays.iter().position(|r| *r == hit.ray).unwrap();
                    assert_eq!(Some(i), first_clear);
                    assert!(ray_clearance(&p, &hit.ray, 0.3, &cloud) >= 0.5);
                }
                None => assert!(first_clear.is_none()),
            }
        }
    }
}
