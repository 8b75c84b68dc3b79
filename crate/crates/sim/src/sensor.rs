//! Pinhole depth sensor: one ray per pixel on a regular grid, first box hit
//! within range, radial Gaussian noise growing with distance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use dualplan_core::pcl::Pose;
use dualplan_core::{PointCloud, Vec3};

use crate::world::WorldSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    pub width: usize,
    pub height: usize,
    /// Full horizontal field of view, radians.
    pub h_fov: f64,
    pub v_fov: f64,
    pub max_range: f64,
    /// Noise standard deviation per meter of range.
    pub noise_per_meter: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            width: 64,
            height: 36,
            h_fov: 87f64.to_radians(),
            v_fov: 58f64.to_radians(),
            max_range: 8.0,
            noise_per_meter: 0.005,
        }
    }
}

impl SensorParams {
    pub fn is_valid(&self) -> bool {
        self.width >= 1
            && self.height >= 1
            && self.h_fov > 0.0
            && self.h_fov < std::f64::consts::PI
            && self.v_fov > 0.0
            && self.v_fov < std::f64::consts::PI
            && self.max_range > 0.0
            && self.noise_per_meter >= 0.0
    }

    /// Body-frame unit ray directions (x forward, y left, z up), row-major
    /// from the top-left pixel.
    pub fn ray_directions(&self) -> Vec<Vec3> {
        let tx = (self.h_fov / 2.0).tan();
        let tz = (self.v_fov / 2.0).tan();
        let frac = |i: usize, n: usize| if n == 1 { 0.0 } else { 1.0 - 2.0 * i as f64 / (n - 1) as f64 };
        let mut dirs = Vec::with_capacity(self.width * self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                dirs.push(Vec3::new(1.0, frac(c, self.width) * tx, frac(r, self.height) * tz).normalize());
            }
        }
        dirs
    }
}

fn noise_rng(seed: u64, time: f64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&time.to_bits().to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Renders a body-frame cloud from `pose`. The noise stream depends only on
/// `(seed, time)`.
pub fn sense(snapshot: &WorldSnapshot, pose: &Pose, params: &SensorParams, seed: u64) -> PointCloud {
    let to_earth = pose.body_to_earth_rotation();
    let mut rng = noise_rng(seed, snapshot.time);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut points = Vec::new();
    for d_body in params.ray_directions() {
        let d = to_earth * d_body;
        let hit = snapshot
            .boxes
            .iter()
            .filter_map(|b| b.ray_hit(&pose.position, &d, params.max_range))
            .fold(f64::INFINITY, f64::min);
        // Draw for every pixel so the stream is independent of what is hit.
        let n: f64 = unit.sample(&mut rng);
        if hit.is_finite() && hit > 0.0 {
            let range = (hit + n * params.noise_per_meter * hit).max(0.0);
            points.push(d_body * range);
        }
    }
    PointCloud::body(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Aabb;

    fn wall_ahead(x: f64) -> WorldSnapshot {
        WorldSnapshot {
            time: 0.0,
            boxes: vec![Aabb::new(Vec3::new(x, -20.0, -20.0), Vec3::new(x + 0.2, 20.0, 20.0)).unwrap()],
            dynamic: vec![],
        }
    }

    fn noiseless() -> SensorParams {
        SensorParams {
            noise_per_meter: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn default_is_valid_and_grid_is_symmetric() {
        let p = SensorParams::default();
        assert!(p.is_valid());
        let d = p.ray_directions();
        assert_eq!(d.len(), 64 * 36);
        let corner = d[0];
        assert!((corner.y / corner.x - (p.h_fov / 2.0).tan()).abs() < 1e-12);
        assert!((corner.z / corner.x - (p.v_fov / 2.0).tan()).abs() < 1e-12);
        let last = d[d.len() - 1];
        assert!((corner.y + last.y).abs() < 1e-12 && (corner.z + last.z).abs() < 1e-12);
    }

    #[test]
    fn flat_wall_depths_are_exact() {
        let pose = Pose::with_yaw(Vec3::new(0.0, 0.0, 1.0), 0.0);
        let cloud = sense(&wall_ahead(3.0), &pose, &noiseless(), 1);
        assert_eq!(cloud.len(), 64 * 36);
        for p in cloud.iter() {
            assert!((p.x - 3.0).abs() < 1e-9, "{p:?}");
        }
    }

    #[test]
    fn yaw_rotates_the_view() {
        // Facing +y with a post on the +x axis: outside the field of view.
        let post = WorldSnapshot {
            time: 0.0,
            boxes: vec![Aabb::new(Vec3::new(3.0, -0.5, -1.0), Vec3::new(3.5, 0.5, 1.0)).unwrap()],
            dynamic: vec![],
        };
        let pose = Pose::with_yaw(Vec3::zeros(), std::f64::consts::FRAC_PI_2);
        assert!(sense(&post, &pose, &noiseless(), 1).is_empty());
        assert!(!sense(&post, &Pose::with_yaw(Vec3::zeros(), 0.0), &noiseless(), 1).is_empty());
        let back = Pose::with_yaw(Vec3::zeros(), std::f64::consts::PI);
        assert!(sense(&wall_ahead(-3.2), &back, &noiseless(), 1).len() == 64 * 36);
    }

    #[test]
    fn range_limit() {
        let pose = Pose::with_yaw(Vec3::zeros(), 0.0);
        assert!(sense(&wall_ahead(8.5), &pose, &noiseless(), 1).is_empty());
    }

    #[test]
    fn noise_is_seeded_and_scaled() {
        let pose = Pose::with_yaw(Vec3::zeros(), 0.0);
        let snap = wall_ahead(4.0);
        let p = SensorParams::default();
        let a = sense(&snap, &pose, &p, 9);
        assert_eq!(a, sense(&snap, &pose, &p, 9));
        assert_ne!(a, sense(&snap, &pose, &p, 10));
        // Radial error relative to the true range has std ≈ 0.005.
        let dirs = p.ray_directions();
        let errs: Vec<f64> = a
            .iter()
            .zip(&dirs)
            .map(|(pt, d)| {
                let truth = 4.0 / d.x;
                (pt.norm() - truth) / truth
            })
            .collect();
        let n = errs.len() as f64;
        let mean = errs.iter().sum::<f64>() / n;
        let std = (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 5e-4, "{mean}");
        assert!((std - 0.005).abs() < 5e-4, "{std}");
    }
}
