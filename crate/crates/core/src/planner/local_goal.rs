use crate::error::PlanError;
use crate::mapping::{Cell, GridMap2D, LocalMapParams};
use crate::types::{Vec2, Vec3};

/// Global goal cast onto the local map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGoal {
    /// `g_l`, Earth frame. Its XY is moved to the replacement cell when the
    /// projected cell was blocked.
    pub g_l: Vec3,
    /// `g'_l`, a free cell of `Map_1`.
    pub cell: Cell,
    /// The projected cell was blocked and has been replaced.
    pub relocated: bool,
}

/// Point where the segment `from → to` leaves the closed box `[lo, hi]`;
/// `to` itself when it lies inside. `from` must be inside the box.
pub fn segment_box_exit(from: &Vec3, to: &Vec3, lo: &Vec3, hi: &Vec3) -> Vec3 {
    let d = to - from;
    let mut t_exit = 1.0f64;
    for a in 0..3 {
        if d[a] > 0.0 {
            t_exit = t_exit.min((hi[a] - from[a]) / d[a]);
        } else if d[a] < 0.0 {
            t_exit = t_exit.min((lo[a] - from[a]) / d[a]);
        }
    }
    let t = t_exit.clamp(0.0, 1.0);
    if t >= 1.0 {
        *to
    } else {
        let mut p = from + d * t;
        for a in 0..3 {
            p[a] = p[a].clamp(lo[a], hi[a]);
        }
        p
    }
}

/// Nearest cell to `c` accepted by `free` (Euclidean in cells, ties by scan
/// order). With `edge_only`, only cells on the grid border are considered.
pub fn nearest_free_cell(
    grid: &GridMap2D,
    c: Cell,
    edge_only: bool,
    free: impl Fn(Cell) -> bool,
) -> Option<Cell> {
    let mut best: Option<(i64, Cell)> = None;
    let mut consider = |cand: Cell| {
        if free(cand) {
            let d = ((cand.0 - c.0) as i64).pow(2) + ((cand.1 - c.1) as i64).pow(2);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, cand));
            }
        }
    };
    let (w, h) = (grid.width() as i32, grid.height() as i32);
    if edge_only {
        for x in 0..w {
            consider((x, 0));
            if h > 1 {
                consider((x, h - 1));
            }
        }
        for y in 1..h - 1 {
            consider((0, y));
            if w > 1 {
                consider((w - 1, y));
            }
        }
    } else {
        for y in 0..h {
            for x in 0..w {
                consider((x, y));
            }
        }
    }
    best.map(|(_, cell)| cell)
}

/// Casts `global_goal` onto the local cuboid around `p_n` and picks its cell
/// on `Map_1`. Blocking is judged on `Map_1` inflated by `params.k`; a
/// blocked goal on the map edge moves to the nearest free edge cell, an
/// interior one to the nearest free cell.
pub fn cast_local_goal(
    p_n: &Vec3,
    global_goal: &Vec3,
    params: &LocalMapParams,
    map_1: &GridMap2D,
) -> Result<LocalGoal, PlanError> {
    let (lo, hi) = params.cuboid(p_n);
    let mut g_l = segment_box_exit(p_n, global_goal, &lo, &hi);
    let cell = map_1.clamp_cell(map_1.cell_of(&g_l.xy()));
    let free = |c: Cell| !map_1.is_occupied_inflated(c, params.k);
    if free(cell) {
        return Ok(LocalGoal {
            g_l,
            cell,
            relocated: false,
        });
    }
    let edge = map_1.is_edge_cell(cell);
    let free = nearest_free_cell(map_1, cell, edge, free)
        .or_else(|| if edge { nearest_free_cell(map_1, cell, false, free) } else { None })
        .ok_or(PlanError::NoFreeGoal)?;
    let xy: Vec2 = map_1.center_of(free);
    g_l.x = xy.x.clamp(lo.x, hi.x);
    g_l.y = xy.y.clamp(lo.y, hi.y);
    Ok(LocalGoal {
        g_l,
        cell: free,
        relocated: true,
    })
}
