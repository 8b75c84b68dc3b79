//! Point cloud pre-processing: distance pass, voxel downsampling, radius
//! outlier removal and the body→Earth transform.
//!
//! The chain mirrors the depth-camera pipeline `raw → Pcl_1 → Pcl_2 → Pcl_3 → Pcl_4`:
//! every stage can only drop points (the voxel stage replaces groups by their
//! centroid), so the cardinalities are non-increasing.

use std::collections::HashMap;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::types::{Attitude, Frame, PointCloud, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Distance cutoff from the camera, meters.
    pub d_pass: f64,
    pub voxel_size: f64,
    pub outlier_radius: f64,
    pub outlier_min_neighbors: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        let voxel_size = 0.2;
        Self {
            d_pass: 6.0,
            voxel_size,
            outlier_radius: 2.0 * voxel_size,
            outlier_min_neighbors: 3,
        }
    }
}

impl FilterParams {
    pub fn is_valid(&self) -> bool {
        self.d_pass > 0.0
            && self.voxel_size > 0.0
            && self.outlier_radius > 0.0
            && self.outlier_min_neighbors >= 1
    }
}

/// Camera pose: Earth-frame position plus ZYX Euler attitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub attitude: Attitude,
}

impl Pose {
    pub fn new(position: Vec3, attitude: Attitude) -> Self {
        Self { position, attitude }
    }

    /// Level pose looking along `yaw`.
    pub fn with_yaw(position: Vec3, yaw: f64) -> Self {
        Self::new(
            position,
            Attitude {
                yaw,
                pitch: 0.0,
                roll: 0.0,
            },
        )
    }

    pub fn is_valid(&self) -> bool {
        let a = self.attitude;
        a.yaw.is_finite()
            && a.pitch.is_finite()
            && a.roll.is_finite()
            && a.pitch.abs() < std::f64::consts::FRAC_PI_2
            && self.position.iter().all(|c| c.is_finite())
    }

    /// Earth→body rotation `B_E`.
    pub fn earth_to_body_rotation(&self) -> Matrix3<f64> {
        let (sy, cy) = self.attitude.yaw.sin_cos();
        let (sp, cp) = self.attitude.pitch.sin_cos();
        let (sr, cr) = self.attitude.roll.sin_cos();
        Matrix3::new(
            cy * cp,
            sy * cp,
            -sp,
            cy * sp * sr - sy * cr,
            sy * sp * sr + cy * cr,
            cp * sr,
            cy * sp * cr + sy * sr,
            sy * sp * cr - cy * sr,
            cp * cr,
        )
    }

    /// Body→Earth rotation, the transpose of `B_E`.
    pub fn body_to_earth_rotation(&self) -> Matrix3<f64> {
        self.earth_to_body_rotation().transpose()
    }
}

/// Keeps the points whose norm is at most `d_pass`, in input order.
pub fn distance_filter(cloud: &PointCloud, d_pass: f64) -> PointCloud {
    let d2 = d_pass * d_pass;
    PointCloud::new(
        cloud.frame,
        cloud
            .points
            .iter()
            .filter(|p| p.norm_squared() <= d2)
            .copied()
            .collect(),
    )
}

pub(crate) fn voxel_key(p: &Vec3, voxel_size: f64) -> [i64; 3] {
    [
        (p.x / voxel_size).floor() as i64,
        (p.y / voxel_size).floor() as i64,
        (p.z / voxel_size).floor() as i64,
    ]
}

/// Replaces all points falling into one voxel by their centroid. Output order
/// follows the first appearance of each voxel in the input.
pub fn voxel_downsample(cloud: &PointCloud, voxel_size: f64) -> PointCloud {
    assert!(voxel_size > 0.0, "voxel_size must be positive");
    let mut slot: HashMap<[i64; 3], usize> = HashMap::with_capacity(cloud.len());
    let mut acc: Vec<(Vec3, usize)> = Vec::new();
    for p in &cloud.points {
        let key = voxel_key(p, voxel_size);
        let idx = *slot.entry(key).or_insert_with(|| {
            acc.push((Vec3::zeros(), 0));
            acc.len() - 1
        });
        acc[idx].0 += p;
        acc[idx].1 += 1;
    }
    PointCloud::new(
        cloud.frame,
        acc.into_iter().map(|(sum, n)| sum / n as f64).collect(),
    )
}

/// Keeps exactly the points with at least `min_neighbors` other points within
/// `radius` (inclusive). Neighbor lookup goes through a spatial hash with cell
/// size `radius`, so only the 27 surrounding cells are scanned.
pub fn outlier_filter(cloud: &PointCloud, radius: f64, min_neighbors: usize) -> PointCloud {
    assert!(radius > 0.0, "radius must be positive");
    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        buckets.entry(voxel_key(p, radius)).or_default().push(i);
    }
    let r2 = radius * radius;
    let kept = cloud
        .points
        .iter()
        .enumerate()
        .filter(|(i, p)| {
            let k = voxel_key(p, radius);
            let mut count = 0usize;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(bucket) = buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else {
                            continue;
                        };
                        for &j in bucket {
                            if j != *i && (cloud.points[j] - *p).norm_squared() <= r2 {
                                count += 1;
                                if count >= min_neighbors {
                                    return true;
                                }
                            }
                        }
                    }
                }
            }
            false
        })
        .map(|(_, p)| *p)
        .collect();
    PointCloud::new(cloud.frame, kept)
}

/// Maps a body-frame cloud to the Earth frame: `p_e = position + B_Eᵀ p_b`.
pub fn body_to_earth(cloud: &PointCloud, pose: &Pose) -> PointCloud {
    debug_assert_eq!(cloud.frame, Frame::Body);
    let r = pose.body_to_earth_rotation();
    PointCloud::earth(cloud.points.iter().map(|p| pose.position + r * p).collect())
}

/// Inverse of [`body_to_earth`]: `p_b = B_E (p_e − position)`.
pub fn earth_to_body(cloud: &PointCloud, pose: &Pose) -> PointCloud {
    debug_assert_eq!(cloud.frame, Frame::Earth);
    let r = pose.earth_to_body_rotation();
    PointCloud::body(cloud.points.iter().map(|p| r * (p - pose.position)).collect())
}

/// Intermediate products of one filter pass.
#[derive(Debug, Clone)]
pub struct FilteredCloud {
    pub pcl_1: PointCloud,
    pub pcl_2: PointCloud,
    pub pcl_3: PointCloud,
    /// Earth-frame result handed to mapping and the point-cloud planner.
    pub pcl_4: PointCloud,
}

/// Runs the full filter chain on a raw body-frame cloud.
pub fn filter_cloud(raw: &PointCloud, pose: &Pose, params: &FilterParams) -> FilteredCloud {
    let pcl_1 = distance_filter(raw, params.d_pass);
    let pcl_2 = voxel_downsample(&pcl_1, params.voxel_size);
    let pcl_3 = outlier_filter(&pcl_2, params.outlier_radius, params.outlier_min_neighbors);
    let pcl_4 = body_to_earth(&pcl_3, pose);
    FilteredCloud {
        pcl_1,
        pcl_2,
        pcl_3,
        pcl_4,
    }
}
