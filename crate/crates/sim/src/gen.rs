//! World generators for the benchmark and scenario suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use dualplan_core::Vec3;

use crate::world::{Aabb, DynamicBox, Spawn, World};

/// A world plus the flight it was built for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedWorld {
    pub world: World,
    pub start: Vec3,
    pub goal: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomWorldParams {
    /// Extent along x, start to goal.
    pub length: f64,
    /// Extent along y of the obstacle field.
    pub width: f64,
    pub n_boxes: usize,
    /// Minimum horizontal gap between any two boxes.
    pub min_gap: f64,
    /// No box closer than this (horizontally) to the start or goal.
    pub clear_radius: f64,
    /// Fraction of boxes low enough to fly over.
    pub low_fraction: f64,
    pub flight_height: f64,
}

impl Default for RandomWorldParams {
    fn default() -> Self {
        Self {
            length: 24.0,
            width: 12.0,
            n_boxes: 14,
            min_gap: 1.4,
            clear_radius: 2.0,
            low_fraction: 0.35,
            flight_height: 1.0,
        }
    }
}

const TALL: f64 = 6.0;

fn horizontal_gap(a: &Aabb, b: &Aabb) -> f64 {
    let dx = (a.min.x - b.max.x).max(b.min.x - a.max.x).max(0.0);
    let dy = (a.min.y - b.max.y).max(b.min.y - a.max.y).max(0.0);
    dx.hypot(dy)
}

fn horizontal_distance(b: &Aabb, p: &Vec3) -> f64 {
    let dx = (b.min.x - p.x).max(p.x - b.max.x).max(0.0);
    let dy = (b.min.y - p.y).max(p.y - b.max.y).max(0.0);
    dx.hypot(dy)
}

/// Mixed pillars and wall segments with footprints from 0.5 m to 6 m, some
/// taller than the flight ceiling and some low enough to overfly. Boxes keep
/// `min_gap` between each other, so the free space stays connected.
pub fn random_world(seed: u64, p: &RandomWorldParams) -> GeneratedWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Vec3::new(0.0, 0.0, p.flight_height);
    let goal = Vec3::new(p.length, 0.0, p.flight_height);
    let half_w = p.width / 2.0;
    let mut boxes: Vec<Aabb> = Vec::new();
    let mut attempts = 0;
    while boxes.len() < p.n_boxes && attempts < 10_000 {
        attempts += 1;
        let (sx, sy) = if rng.random_bool(0.5) {
            let s = rng.random_range(0.5..1.5);
            (s, s * rng.random_range(0.7..1.3))
        } else {
            let long = rng.random_range(2.0..6.0);
            let thin = rng.random_range(0.3..0.6);
            if rng.random_bool(0.5) {
                (long, thin)
            } else {
                (thin, long)
            }
        };
        let height = if rng.random_bool(p.low_fraction) {
            rng.random_range(0.6..1.8)
        } else {
            TALL
        };
        let cx = rng.random_range(0.0..p.length);
        let cy = rng.random_range(-half_w..half_w);
        let Some(b) = Aabb::new(
            Vec3::new(cx - sx / 2.0, cy - sy / 2.0, 0.0),
            Vec3::new(cx + sx / 2.0, cy + sy / 2.0, height),
        ) else {
            continue;
        };
        if horizontal_distance(&b, &start) < p.clear_radius || horizontal_distance(&b, &goal) < p.clear_radius {
            continue;
        }
        if boxes.iter().any(|o| horizontal_gap(o, &b) < p.min_gap) {
            continue;
        }
        boxes.push(b);
    }
    let margin = 4.0;
    let bounds = Aabb::new(
        Vec3::new(-margin, -half_w - margin, 0.0),
        Vec3::new(p.length + margin, half_w + margin, TALL),
    )
    .expect("positive bounds");
    GeneratedWorld {
        world: World {
            static_boxes: boxes,
            dynamic_boxes: Vec::new(),
            bounds,
            seed: Some(seed),
        },
        start,
        goal,
    }
}

/// A 6 m wide, 2 m tall, 0.2 m thick wall halfway between start and goal.
pub fn wall_world() -> GeneratedWorld {
    let wall = Aabb::new(Vec3::new(2.5, -3.0, 0.0), Vec3::new(2.7, 3.0, 2.0)).expect("wall");
    let bounds = Aabb::new(Vec3::new(-4.0, -8.0, 0.0), Vec3::new(9.0, 8.0, 6.0)).expect("bounds");
    GeneratedWorld {
        world: World {
            static_boxes: vec![wall],
            ..World::empty(bounds)
        },
        start: Vec3::new(0.0, 0.0, 1.0),
        goal: Vec3::new(5.2, 0.0, 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntruderParams {
    /// Drone x at which the box appears.
    pub trigger_x: f64,
    /// Gap from the drone to the near face of the box at spawn.
    pub ahead: f64,
    pub half_extents: Vec3,
    /// Crossing velocity.
    pub velocity: Vec3,
    /// Nominal lateral center offset; the seed adds up to ±`jitter`.
    pub lateral: f64,
    pub jitter: f64,
}

impl Default for IntruderParams {
    fn default() -> Self {
        Self {
            trigger_x: 3.0,
            ahead: 1.5,
            half_extents: Vec3::new(0.3, 0.3, 1.0),
            velocity: Vec3::new(0.0, 1.0, 0.0),
            lateral: -0.3,
            jitter: 0.2,
        }
    }
}

/// Open space with one box that appears `ahead` of the drone once it passes
/// `trigger_x` and crosses the flight line.
pub fn intruder_world(seed: u64, p: &IntruderParams) -> GeneratedWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lateral = p.lateral + rng.random_range(-p.jitter..=p.jitter);
    let center = Vec3::new(p.trigger_x + p.ahead + p.half_extents.x, lateral, p.half_extents.z);
    let horizon = 20.0;
    let bounds = Aabb::new(Vec3::new(-4.0, -10.0, 0.0), Vec3::new(14.0, 10.0, 6.0)).expect("bounds");
    GeneratedWorld {
        world: World {
            dynamic_boxes: vec![DynamicBox {
                half_extents: p.half_extents,
                schedule: vec![(0.0, center), (horizon, center + p.velocity * horizon)],
                spawn: Spawn::WhenDroneX(p.trigger_x),
                spawned_at: None,
            }],
            seed: Some(seed),
            ..World::empty(bounds)
        },
        start: Vec3::new(0.0, 0.0, 1.0),
        goal: Vec3::new(10.0, 0.0, 1.0),
    }
}

/// A corridor along +y whose side walls sit 0.4 m from the start, closer
/// than the default safety radius. Coordinates line up with a 0.2 m voxel
/// grid so that voxel centers also land 0.4 m away.
pub fn trap_world() -> GeneratedWorld {
    let x0 = 0.1;
    let left = Aabb::new(Vec3::new(-0.5, -2.0, 0.0), Vec3::new(-0.3, 2.0, 2.4)).expect("left wall");
    let right = Aabb::new(Vec3::new(0.5, -2.0, 0.0), Vec3::new(0.7, 2.0, 2.4)).expect("right wall");
    let bounds = Aabb::new(Vec3::new(-5.0, -5.0, 0.0), Vec3::new(5.0, 9.0, 6.0)).expect("bounds");
    GeneratedWorld {
        world: World {
            static_boxes: vec![left, right],
            ..World::empty(bounds)
        },
        start: Vec3::new(x0, -1.0, 1.1),
        goal: Vec3::new(x0, 6.0, 1.1),
    }
}

/// Points on every static box face at roughly `spacing`, for seeding a
/// voxel map with prior knowledge.
pub fn surface_points(world: &World, spacing: f64) -> Vec<Vec3> {
    let mut pts = Vec::new();
    for b in &world.static_boxes {
        let n: Vec<usize> = (0..3).map(|i| ((b.max[i] - b.min[i]) / spacing).ceil().max(1.0) as usize).collect();
        let at = |i: usize, k: usize| b.min[i] + (b.max[i] - b.min[i]) * k as f64 / n[i] as f64;
        for axis in 0..3 {
            let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
            for side in [b.min[axis], b.max[axis]] {
                for ku in 0..=n[u] {
                    for kw in 0..=n[w] {
                        let mut p = Vec3::zeros();
                        p[axis] = side;
                        p[u] = at(u, ku);
                        p[w] = at(w, kw);
                        pts.push(p);
                    }
                }
            }
        }
    }
    pts
}
