//! Discrete angular graph search for a shorter 3D path over or around the
//! obstacles between the drone and the local goal.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::types::{point_segment_distance, PathKind, PlanPath, PointCloud, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagsParams {
    /// Angular resolution of the graph, radians.
    pub alpha_res: f64,
    pub r_safe: f64,
    /// Measure `l_tp` from the round origin instead of from `p_n`.
    pub l_tp_from_origin: bool,
    /// Turning points must stay within this altitude band.
    pub z_min: f64,
    pub z_max: f64,
    /// Edge cells tried per round, nearest to the goal direction first.
    pub max_edge_cells: usize,
    /// Multipliers on `α_safe` tried for each edge cell.
    pub alpha_scales: Vec<f64>,
}

impl Default for DagsParams {
    fn default() -> Self {
        Self {
            alpha_res: 10f64.to_radians(),
            r_safe: 0.5,
            l_tp_from_origin: false,
            z_min: 0.3,
            z_max: 5.0,
            max_edge_cells: 6,
            alpha_scales: vec![1.0, 1.5, 2.0, 3.0],
        }
    }
}

impl DagsParams {
    pub fn is_valid(&self) -> bool {
        self.alpha_res > 0.0
            && self.alpha_res <= std::f64::consts::FRAC_PI_4
            && self.r_safe > 0.0
            && self.z_min < self.z_max
    }
}

/// Azimuth and elevation of `v`.
pub fn spherical_angles(v: &Vec3) -> (f64, f64) {
    (v.y.atan2(v.x), v.z.atan2(v.xy().norm()))
}

/// Unit vector for azimuth `az` and elevation `el`.
pub fn direction(az: f64, el: f64) -> Vec3 {
    Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
}

fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Goal-relative discretized directions of a point set seen from `origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularGraph {
    pub origin: Vec3,
    pub alpha_res: f64,
    /// `A_g`: azimuth and elevation of the goal from `origin`.
    pub goal_angles: (f64, f64),
    /// Occupied cells and the indices of their member points.
    pub cells: BTreeMap<(i32, i32), Vec<usize>>,
    /// Continuous goal-relative angle of every input point.
    pub relative: Vec<(f64, f64)>,
}

impl AngularGraph {
    pub fn build(origin: &Vec3, goal: &Vec3, points: &[Vec3], alpha_res: f64) -> Self {
        let goal_angles = spherical_angles(&(goal - origin));
        let mut cells: BTreeMap<(i32, i32), Vec<usize>> = BTreeMap::new();
        let mut relative = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let (az, el) = spherical_angles(&(p - origin));
            let rel = (wrap_pi(az - goal_angles.0), el - goal_angles.1);
            relative.push(rel);
            let key = (
                (rel.0 / alpha_res).floor() as i32,
                (rel.1 / alpha_res).floor() as i32,
            );
            cells.entry(key).or_default().push(i);
        }
        Self {
            origin: *origin,
            alpha_res,
            goal_angles,
            cells,
            relative,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn az_cells(&self) -> i32 {
        (2.0 * PI / self.alpha_res).ceil() as i32
    }

    fn el_range(&self) -> (i32, i32) {
        (
            ((-FRAC_PI_2 - self.goal_angles.1) / self.alpha_res).floor() as i32,
            ((FRAC_PI_2 - self.goal_angles.1) / self.alpha_res).floor() as i32,
        )
    }

    fn wrap_az(&self, i: i32) -> i32 {
        let n = self.az_cells();
        let lo = (-PI / self.alpha_res).floor() as i32;
        (i - lo).rem_euclid(n) + lo
    }

    /// Occupied cells with at least one free 4-neighbour. Azimuth neighbours
    /// wrap around; elevation neighbours outside the sphere are not free.
    /// Sorted by the angular norm of the cell center, then by index.
    pub fn edge_cells(&self) -> Vec<((i32, i32), f64)> {
        let (el_lo, el_hi) = self.el_range();
        let free = |c: (i32, i32)| c.1 >= el_lo && c.1 <= el_hi && !self.cells.contains_key(&c);
        let mut out: Vec<((i32, i32), f64)> = self
            .cells
            .keys()
            .filter(|&&(i, j)| {
                free((self.wrap_az(i - 1), j))
                    || free((self.wrap_az(i + 1), j))
                    || free((i, j - 1))
                    || free((i, j + 1))
            })
            .map(|&(i, j)| {
                let n = ((i as f64 + 0.5).powi(2) + (j as f64 + 0.5).powi(2)).sqrt() * self.alpha_res;
                ((i, j), n)
            })
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }
}

/// `true` when every point keeps at least `r` from the segment `a`–`b`.
pub fn segment_clear(a: &Vec3, b: &Vec3, points: &[Vec3], r: f64) -> bool {
    let lo = a.inf(b) - Vec3::repeat(r);
    let hi = a.sup(b) + Vec3::repeat(r);
    points.iter().all(|p| {
        p.x < lo.x
            || p.y < lo.y
            || p.z < lo.z
            || p.x > hi.x
            || p.y > hi.y
            || p.z > hi.z
            || point_segment_distance(p, a, b) >= r
    })
}

pub fn path_clear(path: &[Vec3], points: &[Vec3], r: f64) -> bool {
    path.windows(2).all(|w| segment_clear(&w[0], &w[1], points, r))
}

/// `α_safe = arcsin(r_safe / l_tp)`; `None` when `r_safe > l_tp`.
pub fn alpha_safe(r_safe: f64, l_tp: f64) -> Option<f64> {
    (l_tp > 0.0 && r_safe <= l_tp).then(|| (r_safe / l_tp).asin())
}

/// Turning point candidates of one round, in trial order.
fn turning_points(
    graph: &AngularGraph,
    subset: &[Vec3],
    p_n: &Vec3,
    g_l: &Vec3,
    params: &DagsParams,
) -> Vec<Vec3> {
    let origin = graph.origin;
    let mut out = Vec::new();
    for (cell, _) in graph.edge_cells().into_iter().take(params.max_edge_cells) {
        let members = &graph.cells[&cell];
        // p_eg: member farthest from the segment origin → goal.
        let Some(&eg) = members.iter().max_by(|&&a, &&b| {
            point_segment_distance(&subset[a], &origin, g_l)
                .total_cmp(&point_segment_distance(&subset[b], &origin, g_l))
                .then(b.cmp(&a))
        }) else {
            continue;
        };
        let p_eg = subset[eg];
        let l_tp = if params.l_tp_from_origin {
            (p_eg - origin).norm()
        } else {
            (p_eg - p_n).norm()
        };
        let Some(a_safe) = alpha_safe(params.r_safe, l_tp) else {
            continue;
        };
        let a_eg = graph.relative[eg];
        let norm = (a_eg.0 * a_eg.0 + a_eg.1 * a_eg.1).sqrt();
        let unit = if norm > 1e-12 {
            (a_eg.0 / norm, a_eg.1 / norm)
        } else {
            (0.0, 1.0)
        };
        for &scale in &params.alpha_scales {
            let mag = norm + a_safe * scale;
            let az = graph.goal_angles.0 + mag * unit.0;
            let el = graph.goal_angles.1 + mag * unit.1;
            if el.abs() >= FRAC_PI_2 {
                continue;
            }
            let tp = origin + direction(az, el) * l_tp;
            if tp.z >= params.z_min && tp.z <= params.z_max {
                out.push(tp);
            }
        }
    }
    out
}

/// Two-round angular search. Returns the shortest of `[p_n, g_l]`,
/// `[p_n, tp_1, g_l]` and `[p_n, tp_1, tp_2, g_l]` that keeps `r_safe` from
/// every point of `pcl_lm`, or `None`.
pub fn dags_search(
    pcl_lm: &PointCloud,
    p_n: &Vec3,
    g_l: &Vec3,
    improved_2d: &[Vec3],
    params: &DagsParams,
) -> Option<PlanPath> {
    let pts = &pcl_lm.points;
    let r = params.r_safe;
    let make = |w: Vec<Vec3>| PlanPath::new(w, PathKind::Spatial3D);
    if segment_clear(p_n, g_l, pts, r) {
        return make(vec![*p_n, *g_l]);
    }
    if pts.is_empty() {
        return None;
    }
    let jp1 = improved_2d.get(1).copied().unwrap_or(*g_l);
    let jp1 = Vec3::new(jp1.x, jp1.y, p_n.z);
    let split = (jp1 - p_n).norm();
    let (near, far): (Vec<Vec3>, Vec<Vec3>) = pts.iter().partition(|p| (*p - p_n).norm() < split);
    let round_1: &[Vec3] = if near.is_empty() { pts } else { &near };
    let round_2: &[Vec3] = if far.is_empty() { pts } else { &far };

    let g1 = AngularGraph::build(p_n, g_l, round_1, params.alpha_res);
    let mut best: Option<(f64, Vec<Vec3>)> = None;
    let mut offer = |w: Vec<Vec3>| {
        let len: f64 = w.windows(2).map(|s| (s[1] - s[0]).norm()).sum();
        if best.as_ref().is_none_or(|(bl, _)| len < *bl) {
            best = Some((len, w));
        }
    };
    for tp1 in turning_points(&g1, round_1, p_n, g_l, params) {
        if !segment_clear(p_n, &tp1, pts, r) {
            continue;
        }
        if segment_clear(&tp1, g_l, pts, r) {
            offer(vec![*p_n, tp1, *g_l]);
            continue;
        }
        let g2 = AngularGraph::build(&tp1, g_l, round_2, params.alpha_res);
        for tp2 in turning_points(&g2, round_2, p_n, g_l, params) {
            if segment_clear(&tp1, &tp2, pts, r) && segment_clear(&tp2, g_l, pts, r) {
                offer(vec![*p_n, tp1, tp2, *g_l]);
            }
        }
    }
    best.and_then(|(_, w)| make(w))
}
