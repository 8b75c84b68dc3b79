//! Shortest-path reference for fully known box worlds: 26-connected A* over a
//! clearance-inflated voxelization, then greedy line-of-sight shortcutting.
//! The result is an upper bound on the true optimum up to the grid error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use dualplan_core::types::polyline_length;
use dualplan_core::Vec3;
use dualplan_sim::{Aabb, World};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub resolution: f64,
    /// Required distance from every box.
    pub clearance: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            resolution: 0.1,
            clearance: 0.5,
            z_min: 0.3,
            z_max: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePath {
    pub points: Vec<Vec3>,
    pub length: f64,
    /// Length of the raw grid path before shortcutting.
    pub grid_length: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("start is closer than the clearance to an obstacle")]
    StartBlocked,
    #[error("goal is closer than the clearance to an obstacle")]
    GoalBlocked,
    #[error("goal unreachable")]
    Unreachable,
    #[error("invalid oracle parameters")]
    InvalidParams,
}

struct Voxels {
    origin: Vec3,
    res: f64,
    n: [usize; 3],
    blocked: Vec<bool>,
}

impl Voxels {
    fn build(world: &World, p: &OracleParams) -> Self {
        let lo = Vec3::new(world.bounds.min.x, world.bounds.min.y, p.z_min);
        let hi = Vec3::new(world.bounds.max.x, world.bounds.max.y, p.z_max);
        let n = [0, 1, 2].map(|i| (((hi[i] - lo[i]) / p.resolution).floor() as usize).max(1));
        let mut v = Self {
            origin: lo + Vec3::repeat(p.resolution / 2.0),
            res: p.resolution,
            n,
            blocked: vec![false; n[0] * n[1] * n[2]],
        };
        for b in &world.static_boxes {
            let grown = b.inflated(p.clearance);
            let range = |i: usize| {
                let a = ((grown.min[i] - v.origin[i]) / v.res).floor().max(0.0) as usize;
                let z = (((grown.max[i] - v.origin[i]) / v.res).ceil().max(0.0) as usize).min(n[i] - 1);
                a..=z
            };
            for z in range(2) {
                for y in range(1) {
                    for x in range(0) {
                        let idx = v.index([x, y, z]);
                        if !v.blocked[idx] && b.distance(&v.center([x, y, z])) < p.clearance {
                            v.blocked[idx] = true;
                        }
                    }
                }
            }
        }
        v
    }

    fn index(&self, c: [usize; 3]) -> usize {
        (c[2] * self.n[1] + c[1]) * self.n[0] + c[0]
    }

    fn coords(&self, idx: usize) -> [usize; 3] {
        let x = idx % self.n[0];
        let y = (idx / self.n[0]) % self.n[1];
        [x, y, idx / (self.n[0] * self.n[1])]
    }

    fn center(&self, c: [usize; 3]) -> Vec3 {
        self.origin + Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) * self.res
    }

    fn nearest(&self, p: &Vec3) -> [usize; 3] {
        [0, 1, 2].map(|i| (((p[i] - self.origin[i]) / self.res).round().max(0.0) as usize).min(self.n[i] - 1))
    }
}

#[derive(PartialEq)]
struct Open(f64, usize);

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Whether the segment keeps `clearance` from every box.
pub fn segment_clear(boxes: &[Aabb], a: &Vec3, b: &Vec3, clearance: f64) -> bool {
    let seg_lo = a.inf(b);
    let seg_hi = a.sup(b);
    boxes.iter().all(|bx| {
        let g = bx.inflated(clearance);
        let overlaps = (0..3).all(|i| seg_lo[i] <= g.max[i] && seg_hi[i] >= g.min[i]);
        !overlaps || bx.segment_distance(a, b) >= clearance
    })
}

fn astar(v: &Voxels, start: usize, goal: usize) -> Option<Vec<usize>> {
    let total = v.blocked.len();
    let mut g = vec![f64::INFINITY; total];
    let mut parent = vec![usize::MAX; total];
    let mut closed = vec![false; total];
    let goal_p = v.center(v.coords(goal));
    let h = |idx: usize| (v.center(v.coords(idx)) - goal_p).norm();
    let mut steps = Vec::with_capacity(26);
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if (dx, dy, dz) != (0, 0, 0) {
                    let cost = ((dx * dx + dy * dy + dz * dz) as f64).sqrt() * v.res;
                    steps.push(([dx, dy, dz], cost));
                }
            }
        }
    }
    let mut open = BinaryHeap::new();
    g[start] = 0.0;
    open.push(Open(h(start), start));
    while let Some(Open(_, cur)) = open.pop() {
        if closed[cur] {
            continue;
        }
        if cur == goal {
            let mut path = vec![cur];
            while let Some(&last) = path.last() {
                if parent[last] == usize::MAX {
                    break;
                }
                path.push(parent[last]);
            }
            path.reverse();
            return Some(path);
        }
        closed[cur] = true;
        let c = v.coords(cur);
        for (d, cost) in &steps {
            let nc = [0, 1, 2].map(|i| c[i] as i64 + d[i]);
            if (0..3).any(|i| nc[i] < 0 || nc[i] >= v.n[i] as i64) {
                continue;
            }
            let nidx = v.index(nc.map(|x| x as usize));
            if v.blocked[nidx] || closed[nidx] {
                continue;
            }
            let ng = g[cur] + cost;
            if ng < g[nidx] {
                g[nidx] = ng;
                parent[nidx] = cur;
                open.push(Open(ng + h(nidx), nidx));
            }
        }
    }
    None
}

/// Greedy line-of-sight pass: from each kept point jump to the farthest
/// later point that is visible.
pub fn los_shortcut(points: &[Vec3], boxes: &[Aabb], clearance: f64) -> Vec<Vec3> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut out = vec![points[0]];
    let mut i = 0;
    while i + 1 < points.len() {
        let next = (i + 2..points.len())
            .rev()
            .find(|&j| segment_clear(boxes, &points[i], &points[j], clearance))
            .unwrap_or(i + 1);
        out.push(points[next]);
        i = next;
    }
    out
}

pub fn oracle_shortest_path(world: &World, start: &Vec3, goal: &Vec3, params: &OracleParams) -> Result<OraclePath, OracleError> {
    if !(params.resolution > 0.0 && params.clearance >= 0.0 && params.z_min < params.z_max) {
        return Err(OracleError::InvalidParams);
    }
    let boxes = &world.static_boxes;
    let clear_at = |p: &Vec3| boxes.iter().all(|b| b.distance(p) >= params.clearance);
    if !clear_at(start) {
        return Err(OracleError::StartBlocked);
    }
    if !clear_at(goal) {
        return Err(OracleError::GoalBlocked);
    }
    let v = Voxels::build(world, params);
    let s = v.index(v.nearest(start));
    let t = v.index(v.nearest(goal));
    if v.blocked[s] || v.blocked[t] {
        return Err(if v.blocked[s] { OracleError::StartBlocked } else { OracleError::GoalBlocked });
    }
    let cells = astar(&v, s, t).ok_or(OracleError::Unreachable)?;
    let mut raw = vec![*start];
    raw.extend(cells.iter().map(|&i| v.center(v.coords(i))));
    raw.push(*goal);
    let points = los_shortcut(&raw, boxes, params.clearance);
    Ok(OraclePath {
        length: polyline_length(&points),
        grid_length: polyline_length(&raw),
        points,
    })
}
