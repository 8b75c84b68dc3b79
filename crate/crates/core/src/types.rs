//! Shared data carriers: point clouds, plan paths and the drone state.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Coordinate frame a point cloud is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// Camera/body frame: x forward, y left, z up.
    Body,
    /// Earth frame: x east, y north, z up.
    Earth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub frame: Frame,
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(frame: Frame, points: Vec<Vec3>) -> Self {
        Self { frame, points }
    }

    pub fn body(points: Vec<Vec3>) -> Self {
        Self::new(Frame::Body, points)
    }

    pub fn earth(points: Vec<Vec3>) -> Self {
        Self::new(Frame::Earth, points)
    }

    pub fn empty(frame: Frame) -> Self {
        Self::new(frame, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec3> {
        self.points.iter()
    }
}

/// How a [`PlanPath`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    /// Planned on the 2D projection and lifted to 3D by altitude interpolation.
    Lifted2D,
    /// Found directly in 3D by the angular graph search.
    Spatial3D,
}

/// Ordered Earth-frame waypoint list. Consecutive duplicates are dropped on
/// construction, so the path always has distinct consecutive waypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanPath {
    waypoints: Vec<Vec3>,
    kind: PathKind,
}

impl PlanPath {
    /// Returns `None` when `waypoints` is empty.
    pub fn new(waypoints: Vec<Vec3>, kind: PathKind) -> Option<Self> {
        let mut dedup: Vec<Vec3> = Vec::with_capacity(waypoints.len());
        for w in waypoints {
            if dedup.last().is_none_or(|last| *last != w) {
                dedup.push(w);
            }
        }
        if dedup.is_empty() {
            None
        } else {
            Some(Self {
                waypoints: dedup,
                kind,
            })
        }
    }

    pub fn waypoints(&self) -> &[Vec3] {
        &self.waypoints
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn first(&self) -> Vec3 {
        self.waypoints[0]
    }

    pub fn last(&self) -> Vec3 {
        self.waypoints[self.waypoints.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sum of segment lengths.
    pub fn length(&self) -> f64 {
        polyline_length(&self.waypoints)
    }
}

pub fn polyline_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Attitude {
    /// ψ, radians.
    pub yaw: f64,
    /// θ, radians.
    pub pitch: f64,
    /// φ, radians.
    pub roll: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub attitude: Attitude,
    pub time: f64,
}

impl DroneState {
    pub fn at_rest(position: Vec3) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            acceleration: Vec3::zeros(),
            attitude: Attitude::default(),
            time: 0.0,
        }
    }
}

/// Distance from `p` to the segment `a`–`b`.
pub fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}
