//! Box worlds: static boxes, boxes that appear and move on a schedule, and
//! the sphere-versus-box ground truth.

use serde::{Deserialize, Serialize};

use dualplan_core::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// `None` unless every extent is positive.
    pub fn new(min: Vec3, max: Vec3) -> Option<Self> {
        (min.x < max.x && min.y < max.y && min.z < max.z).then_some(Self { min, max })
    }

    pub fn centered(center: Vec3, half: Vec3) -> Option<Self> {
        Self::new(center - half, center + half)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) / 2.0
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Euclidean distance from `p` to the box, zero inside.
    pub fn distance(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let e = (self.min[i] - p[i]).max(0.0).max(p[i] - self.max[i]);
            d2 += e * e;
        }
        d2.sqrt()
    }

    /// Grows the box by `r` on every side.
    pub fn inflated(&self, r: f64) -> Self {
        let d = Vec3::repeat(r);
        Self {
            min: self.min - d,
            max: self.max + d,
        }
    }

    /// Entry parameter of the ray `o + t·d` for `t ∈ [0, t_max]`.
    pub fn ray_hit(&self, o: &Vec3, d: &Vec3, t_max: f64) -> Option<f64> {
        let mut lo = 0.0f64;
        let mut hi = t_max;
        for i in 0..3 {
            if d[i].abs() < 1e-15 {
                if o[i] < self.min[i] || o[i] > self.max[i] {
                    return None;
                }
            } else {
                let inv = 1.0 / d[i];
                let (mut t0, mut t1) = ((self.min[i] - o[i]) * inv, (self.max[i] - o[i]) * inv);
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                lo = lo.max(t0);
                hi = hi.min(t1);
                if lo > hi {
                    return None;
                }
            }
        }
        Some(lo)
    }

    /// Distance from the box to the segment `a → b`, zero if they touch.
    pub fn segment_distance(&self, a: &Vec3, b: &Vec3) -> f64 {
        if self.ray_hit(a, &(b - a), 1.0).is_some() {
            return 0.0;
        }
        // Convex in t: ternary search is exact enough for the oracle's use.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if self.distance(&(a + (b - a) * m1)) <= self.distance(&(a + (b - a) * m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        self.distance(&(a + (b - a) * ((lo + hi) / 2.0)))
    }
}

/// When a scripted box enters the world.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Spawn {
    At(f64),
    /// The first time the drone's x coordinate reaches this value.
    WhenDroneX(f64),
}

/// A box moving along a piecewise-linear schedule of `(time since spawn,
/// center)` keys; it holds the first and last keys outside their range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicBox {
    pub half_extents: Vec3,
    pub schedule: Vec<(f64, Vec3)>,
    pub spawn: Spawn,
    /// Resolved spawn time.
    #[serde(default)]
    pub spawned_at: Option<f64>,
}

impl DynamicBox {
    pub fn is_valid(&self) -> bool {
        self.half_extents.iter().all(|h| *h > 0.0)
            && !self.schedule.is_empty()
            && self.schedule.windows(2).all(|w| w[0].0 < w[1].0)
    }

    fn spawn_time(&self) -> Option<f64> {
        match self.spawn {
            Spawn::At(t) => Some(t),
            Spawn::WhenDroneX(_) => self.spawned_at,
        }
    }

    pub fn center_at(&self, time: f64) -> Option<Vec3> {
        let t0 = self.spawn_time()?;
        if time < t0 {
            return None;
        }
        let tau = time - t0;
        let s = &self.schedule;
        if tau <= s[0].0 {
            return Some(s[0].1);
        }
        for w in s.windows(2) {
            let ((ta, pa), (tb, pb)) = (w[0], w[1]);
            if tau <= tb {
                let f = (tau - ta) / (tb - ta);
                return Some(pa + (pb - pa) * f);
            }
        }
        Some(s[s.len() - 1].1)
    }

    pub fn box_at(&self, time: f64) -> Option<Aabb> {
        self.center_at(time).and_then(|c| Aabb::centered(c, self.half_extents))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub static_boxes: Vec<Aabb>,
    #[serde(default)]
    pub dynamic_boxes: Vec<DynamicBox>,
    pub bounds: Aabb,
    /// Seed the world was generated from, if any.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Boxes present at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub time: f64,
    pub boxes: Vec<Aabb>,
    /// Indices into `boxes` of the scripted ones.
    pub dynamic: Vec<usize>,
}

impl World {
    pub fn empty(bounds: Aabb) -> Self {
        Self {
            static_boxes: Vec::new(),
            dynamic_boxes: Vec::new(),
            bounds,
            seed: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.dynamic_boxes.iter().all(DynamicBox::is_valid)
    }

    /// Resolves drone-triggered spawns; returns indices of boxes that spawned
    /// now.
    pub fn update_triggers(&mut self, time: f64, drone: &Vec3) -> Vec<usize> {
        let mut fired = Vec::new();
        for (i, b) in self.dynamic_boxes.iter_mut().enumerate() {
            if let Spawn::WhenDroneX(x) = b.spawn {
                if b.spawned_at.is_none() && drone.x >= x {
                    b.spawned_at = Some(time);
                    fired.push(i);
                }
            }
        }
        fired
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Places the scripted boxes for `time`.
pub fn step_obstacles(world: &World, time: f64) -> WorldSnapshot {
    let mut boxes = world.static_boxes.clone();
    let mut dynamic = Vec::new();
    for b in &world.dynamic_boxes {
        if let Some(bx) = b.box_at(time) {
            dynamic.push(boxes.len());
            boxes.push(bx);
        }
    }
    WorldSnapshot { time, boxes, dynamic }
}

/// Whether a sphere at `position` touches any box present at `time`.
pub fn check_collision(world: &World, time: f64, position: &Vec3, radius: f64) -> bool {
    step_obstacles(world, time).boxes.iter().any(|b| b.distance(position) <= radius)
}
