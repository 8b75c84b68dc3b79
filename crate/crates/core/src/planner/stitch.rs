//! Dual-resolution planning: a fine path inside `Map_c` joined to a coarse
//! path on `Map_1b`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::jps::jps_search;
use super::local_goal::nearest_free_cell;
use super::line::supercover;
use super::shortcut::{shortcut_path, shortcut_with};
use crate::error::PlanError;
use crate::mapping::{Cell, GridMap2D, LocalMaps};
use crate::types::Vec2;

/// Result of one planning pass, in Earth XY.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan2D {
    /// Shortcut path, starting at the drone cell center.
    pub waypoints: Vec<Vec2>,
    /// Jump points before shortcutting.
    pub raw: Vec<Vec2>,
    /// Where the fine path hands over to the coarse one, if it does.
    pub g_ist: Option<Vec2>,
}

/// Cells reachable from `start` with the same movement model as JPS.
/// `start` itself is treated as free.
pub fn reachable(grid: &GridMap2D, start: Cell) -> Vec<bool> {
    let w = grid.width() as i32;
    let mut seen = vec![false; grid.width() * grid.height()];
    if !grid.in_bounds(start) {
        return seen;
    }
    let id = |c: Cell| (c.1 * w + c.0) as usize;
    let free = |c: Cell| c == start || grid.is_free(c);
    let mut queue = VecDeque::from([start]);
    seen[id(start)] = true;
    while let Some(c) = queue.pop_front() {
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nb = (c.0 + dx, c.1 + dy);
                if !free(nb) || seen[id(nb)] {
                    continue;
                }
                if dx != 0 && dy != 0 && !(free((c.0 + dx, c.1)) && free((c.0, c.1 + dy))) {
                    continue;
                }
                seen[id(nb)] = true;
                queue.push_back(nb);
            }
        }
    }
    seen
}

fn with_free_start(grid: &GridMap2D, start: Cell) -> GridMap2D {
    let mut g = grid.clone();
    if g.in_bounds(start) {
        g.set(start, false);
    }
    g
}

fn to_xy(grid: &GridMap2D, cells: &[Cell]) -> Vec<Vec2> {
    cells.iter().map(|&c| grid.center_of(c)).collect()
}

/// Plans on one grid from `start` (exempt from occupancy) to `goal`. A blocked
/// or unreachable goal falls back to the nearest reachable free cell.
fn plan_on(grid: &GridMap2D, start: Cell, goal: Cell) -> Result<(Vec<Cell>, Vec<Cell>), PlanError> {
    let g = with_free_start(grid, start);
    let goal = g.clamp_cell(goal);
    let reach = reachable(&g, start);
    let w = g.width() as i32;
    let goal = if reach[(goal.1 * w + goal.0) as usize] {
        goal
    } else {
        nearest_free_cell(&g, goal, false, |c| reach[(c.1 * w + c.0) as usize]).ok_or(PlanError::NoFreeGoal)?
    };
    let raw = jps_search(&g, start, goal)?;
    let short = shortcut_path(&raw, &g);
    Ok((raw, short))
}

/// JPS on the whole `Map_1` inflated by `k`, then shortcut.
pub fn single_resolution_plan(
    map_1_inflated: &GridMap2D,
    start: Cell,
    goal: Cell,
) -> Result<Plan2D, PlanError> {
    let (raw, short) = plan_on(map_1_inflated, start, goal)?;
    Ok(Plan2D {
        waypoints: to_xy(map_1_inflated, &short),
        raw: to_xy(map_1_inflated, &raw),
        g_ist: None,
    })
}

/// Point where the segment `a → b` leaves the closed square `[lo, hi]²`
/// (`a` inside).
fn exit_point(a: &Vec2, b: &Vec2, lo: &Vec2, hi: &Vec2) -> Vec2 {
    let d = b - a;
    let mut t = 1.0f64;
    for ax in 0..2 {
        if d[ax] > 0.0 {
            t = t.min((hi[ax] - a[ax]) / d[ax]);
        } else if d[ax] < 0.0 {
            t = t.min((lo[ax] - a[ax]) / d[ax]);
        }
    }
    a + d * t.clamp(0.0, 1.0)
}

/// Plans `Path_1` on the stitched map towards `goal_1`, a cell of `Map_1`.
pub fn stitched_plan(maps: &LocalMaps, goal_1: Cell) -> Result<Plan2D, PlanError> {
    let corner = maps.params.map_c_corner();
    let start_c = maps.center_cell_c();
    let goal_c = (goal_1.0 - corner.0, goal_1.1 - corner.1);
    let fine = &maps.map_c_inflated;
    if fine.in_bounds(goal_c) {
        let (raw, short) = plan_on(fine, start_c, goal_c)?;
        return Ok(Plan2D {
            waypoints: to_xy(fine, &short),
            raw: to_xy(fine, &raw),
            g_ist: None,
        });
    }

    let coarse = &maps.map_1b;
    let h = maps.params.h as i32;
    let start_b = maps.center_cell_b();
    let goal_b = (goal_1.0 / h, goal_1.1 / h);
    let (raw_b, _) = plan_on(coarse, start_b, goal_b)?;
    let mut path_b = to_xy(coarse, &raw_b);
    if raw_b.last() == Some(&goal_b) {
        if let Some(last) = path_b.last_mut() {
            *last = maps.map_1.center_of(goal_1);
        }
    }

    let half = fine.resolution / 2.0;
    let lo = fine.center_of((0, 0)) - Vec2::new(half, half);
    let hi = fine.center_of((fine.width() as i32 - 1, fine.height() as i32 - 1)) + Vec2::new(half, half);
    let inside = |p: &Vec2| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    let first_out = path_b.iter().position(|p| !inside(p));
    let (crossing, rest_from) = match first_out {
        Some(i) if i > 0 => (exit_point(&path_b[i - 1], &path_b[i], &lo, &hi), i),
        Some(_) => (path_b[0], 0),
        None => (*path_b.last().expect("non-empty path"), path_b.len()),
    };

    // g_ist: the boundary cell of Map_c nearest to the crossing that the drone
    // can actually reach.
    let gf = with_free_start(fine, start_c);
    let reach = reachable(&gf, start_c);
    let w = gf.width() as i32;
    let target = fine.clamp_cell(fine.cell_of(&crossing));
    let g_ist = nearest_free_cell(&gf, target, true, |c| reach[(c.1 * w + c.0) as usize])
        .ok_or(PlanError::Unreachable { start: start_c, goal: target })?;
    let raw_a = jps_search(&gf, start_c, g_ist)?;

    let mut raw = to_xy(fine, &raw_a);
    raw.extend_from_slice(&path_b[rest_from..]);
    // One shortcut pass over the joined path; each chord cell is judged on
    // the grid that covers it.
    let map_1 = &maps.map_1;
    let start_1 = maps.params.center_cell();
    let cell_free = |c: Cell| {
        if c == start_1 {
            return true;
        }
        let in_c = (c.0 - corner.0, c.1 - corner.1);
        if fine.in_bounds(in_c) {
            fine.is_free(in_c)
        } else {
            map_1.in_bounds(c) && coarse.is_free((c.0.div_euclid(h), c.1.div_euclid(h)))
        }
    };
    let idx: Vec<usize> = (0..raw.len()).collect();
    let cells: Vec<Cell> = raw.iter().map(|p| map_1.cell_of(p)).collect();
    let kept = shortcut_with(&idx, |a, b| supercover(cells[a], cells[b]).into_iter().all(cell_free));
    Ok(Plan2D {
        waypoints: kept.into_iter().map(|i| raw[i]).collect(),
        raw,
        g_ist: Some(fine.center_of(g_ist)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::LocalMapParams;
    use crate::planner::jps::path_moves;
    use crate::types::Vec3;

    fn polyline(p: &[Vec2]) -> f64 {
        p.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    fn maps_from(map_1: GridMap2D, params: &LocalMapParams) -> LocalMaps {
        let center = map_1.center_of(params.center_cell());
        LocalMaps::from_map_1(map_1, Vec3::new(center.x, center.y, 1.0), params).unwrap()
    }

    fn empty_map_1(params: &LocalMapParams) -> GridMap2D {
        GridMap2D::new(Vec2::zeros(), params.resolution(), params.i, params.j)
    }

    #[test]
    fn goal_inside_map_c_plans_fine_only() {
        let params = LocalMapParams::default();
        let maps = maps_from(empty_map_1(&params), &params);
        let plan = stitched_plan(&maps, (60, 58)).unwrap();
        assert!(plan.g_ist.is_none());
        assert_eq!(plan.waypoints.len(), 2);
        assert!((plan.waypoints[1] - maps.map_1.center_of((60, 58))).norm() < 1e-9);
    }

    #[test]
    fn free_maps_give_straight_chord() {
        let params = LocalMapParams::default();
        let maps = maps_from(empty_map_1(&params), &params);
        let goal = (99, 70);
        let plan = stitched_plan(&maps, goal).unwrap();
        let start = maps.map_1.center_of(params.center_cell());
        let end = maps.map_1.center_of(goal);
        assert!((plan.waypoints[0] - start).norm() < 1e-9);
        assert!((plan.waypoints.last().unwrap() - end).norm() < 1e-9);
        let straight = (end - start).norm();
        // The fine part ends on a boundary cell next to the chord.
        assert!(polyline(&plan.waypoints) <= straight * 1.01, "{} vs {straight}", polyline(&plan.waypoints));
    }

    #[test]
    fn l_shaped_obstacle_close_to_full_resolution() {
        let params = LocalMapParams::default();
        let mut map_1 = empty_map_1(&params);
        // L-shaped wall: vertical bar x = 65, y ∈ [30, 80]; foot y = 30, x ∈ [40, 65].
        for y in 30..=80 {
            map_1.set((65, y), true);
            map_1.set((66, y), true);
        }
        for x in 40..=66 {
            map_1.set((x, 30), true);
            map_1.set((x, 31), true);
        }
        let maps = maps_from(map_1.clone(), &params);
        let goal = (95, 40);
        let plan = stitched_plan(&maps, goal).unwrap();
        // Oracle: full-resolution JPS on the whole inflated Map_1.
        let inflated = map_1.inflate(params.k).unwrap();
        let full = jps_search(&inflated, params.center_cell(), goal).unwrap();
        let full_len = path_moves(&full).cost() * params.resolution();
        let full_short = polyline(&to_xy(&inflated, &shortcut_path(&full, &inflated)));
        let stitched_raw = polyline(&plan.raw);
        assert!(stitched_raw <= full_len * 1.05, "{stitched_raw} vs {full_len}");
        assert!(polyline(&plan.waypoints) <= full_short * 1.05);
        assert!((plan.waypoints.last().unwrap() - map_1.center_of(goal)).norm() < 1e-9);
    }

    #[test]
    fn blocked_drone_surroundings_fail() {
        let params = LocalMapParams::default();
        let mut map_1 = empty_map_1(&params);
        let c = params.center_cell();
        for d in -3..=3 {
            for (x, y) in [(c.0 + d, c.1 - 3), (c.0 + d, c.1 + 3), (c.0 - 3, c.1 + d), (c.0 + 3, c.1 + d)] {
                map_1.set((x, y), true);
            }
        }
        let maps = maps_from(map_1, &params);
        assert!(stitched_plan(&maps, (99, 50)).is_err());
    }

    #[test]
    fn reachable_respects_corners() {
        let g = GridMap2D::from_ascii(Vec2::zeros(), 1.0, ".#\n#.\n");
        let r = reachable(&g, (0, 0));
        assert_eq!(r, vec![true, false, false, false]);
    }
}
