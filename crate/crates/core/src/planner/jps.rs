//! Jump point search on an 8-connected grid without corner cutting: a
//! diagonal step is allowed only when both orthogonal neighbours are free.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use crate::error::PlanError;
use crate::mapping::{Cell, GridMap2D};

/// Move counts of a grid path; the cost is `straight + diagonal·√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, PartialOrd, Ord, Hash)]
pub struct MoveCount {
    pub straight: u32,
    pub diagonal: u32,
}

impl MoveCount {
    pub fn cost(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }
}

/// Move counts of a path whose segments are each straight or 45° diagonal.
pub fn path_moves(cells: &[Cell]) -> MoveCount {
    let mut mc = MoveCount::default();
    for w in cells.windows(2) {
        let dx = (w[1].0 - w[0].0).unsigned_abs();
        let dy = (w[1].1 - w[0].1).unsigned_abs();
        let diag = dx.min(dy);
        mc.diagonal += diag;
        mc.straight += dx.max(dy) - diag;
    }
    mc
}

fn octile(a: Cell, b: Cell) -> f64 {
    let dx = (a.0 - b.0).unsigned_abs() as f64;
    let dy = (a.1 - b.1).unsigned_abs() as f64;
    dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy)
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    h: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Search<'a> {
    grid: &'a GridMap2D,
    goal: Cell,
}

impl Search<'_> {
    fn free(&self, x: i32, y: i32) -> bool {
        self.grid.is_free((x, y))
    }

    /// Follows direction `(dx, dy)` from `(x, y)` until a jump point, the goal
    /// or a dead end.
    fn jump(&self, mut x: i32, mut y: i32, dx: i32, dy: i32) -> Option<Cell> {
        loop {
            if !self.free(x, y) {
                return None;
            }
            if (x, y) == self.goal {
                return Some((x, y));
            }
            if dx != 0 && dy != 0 {
                if self.jump(x + dx, y, dx, 0).is_some() || self.jump(x, y + dy, 0, dy).is_some() {
                    return Some((x, y));
                }
            } else if dx != 0 {
                if (self.free(x, y - 1) && !self.free(x - dx, y - 1))
                    || (self.free(x, y + 1) && !self.free(x - dx, y + 1))
                {
                    return Some((x, y));
                }
            } else if (self.free(x - 1, y) && !self.free(x - 1, y - dy))
                || (self.free(x + 1, y) && !self.free(x + 1, y - dy))
            {
                return Some((x, y));
            }
            if !(self.free(x + dx, y) && self.free(x, y + dy)) {
                return None;
            }
            x += dx;
            y += dy;
        }
    }

    fn neighbours(&self, c: Cell, parent: Option<Cell>, out: &mut Vec<Cell>) {
        out.clear();
        let (x, y) = c;
        let Some(p) = parent else {
            for (dx, dy) in [(0, -1), (1, 0), (0, 1), (-1, 0)] {
                if self.free(x + dx, y + dy) {
                    out.push((x + dx, y + dy));
                }
            }
            for (dx, dy) in [(-1, -1), (1, -1), (1, 1), (-1, 1)] {
                if self.free(x + dx, y) && self.free(x, y + dy) && self.free(x + dx, y + dy) {
                    out.push((x + dx, y + dy));
                }
            }
            return;
        };
        let dx = (x - p.0).signum();
        let dy = (y - p.1).signum();
        if dx != 0 && dy != 0 {
            let v = self.free(x, y + dy);
            let h = self.free(x + dx, y);
            if v {
                out.push((x, y + dy));
            }
            if h {
                out.push((x + dx, y));
            }
            if v && h {
                out.push((x + dx, y + dy));
            }
        } else if dx != 0 {
            let next = self.free(x + dx, y);
            let top = self.free(x, y + 1);
            let bottom = self.free(x, y - 1);
            if next {
                out.push((x + dx, y));
                if top {
                    out.push((x + dx, y + 1));
                }
                if bottom {
                    out.push((x + dx, y - 1));
                }
            }
            if top {
                out.push((x, y + 1));
            }
            if bottom {
                out.push((x, y - 1));
            }
        } else {
            let next = self.free(x, y + dy);
            let right = self.free(x + 1, y);
            let left = self.free(x - 1, y);
            if next {
                out.push((x, y + dy));
                if right {
                    out.push((x + 1, y + dy));
                }
                if left {
                    out.push((x - 1, y + dy));
                }
            }
            if right {
                out.push((x + 1, y));
            }
            if left {
                out.push((x - 1, y));
            }
        }
    }
}

/// Grid-optimal path from `start` to `goal` as the list of jump points
/// (including both ends). Consecutive jump points are joined by a straight or
/// a pure diagonal run.
pub fn jps_search(grid: &GridMap2D, start: Cell, goal: Cell) -> Result<Vec<Cell>, PlanError> {
    for c in [start, goal] {
        if !grid.in_bounds(c) {
            return Err(PlanError::OutOfBounds(c));
        }
    }
    if grid.is_occupied(start) || grid.is_occupied(goal) {
        return Err(PlanError::Unreachable { start, goal });
    }
    if start == goal {
        return Ok(vec![start]);
    }
    let w = grid.width();
    let idx = |c: Cell| c.1 as usize * w + c.0 as usize;
    let n = w * grid.height();
    let mut g = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<Cell>> = vec![None; n];
    let mut closed = vec![false; n];
    let search = Search { grid, goal };
    let mut heap = BinaryHeap::new();
    g[idx(start)] = 0.0;
    heap.push(Open {
        f: octile(start, goal),
        h: octile(start, goal),
        idx: idx(start),
    });
    let mut nbrs = Vec::with_capacity(8);
    while let Some(Open { idx: ci, .. }) = heap.pop() {
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        let c = ((ci % w) as i32, (ci / w) as i32);
        if c == goal {
            let mut path = vec![c];
            let mut cur = c;
            while let Some(p) = parent[idx(cur)] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Ok(path);
        }
        search.neighbours(c, parent[ci], &mut nbrs);
        for &nb in &nbrs {
            let Some(jp) = search.jump(nb.0, nb.1, nb.0 - c.0, nb.1 - c.1) else {
                continue;
            };
            let ji = idx(jp);
            if closed[ji] {
                continue;
            }
            let ng = g[ci] + octile(c, jp);
            if ng < g[ji] {
                g[ji] = ng;
                parent[ji] = Some(c);
                let h = octile(jp, goal);
                heap.push(Open { f: ng + h, h, idx: ji });
            }
        }
    }
    Err(PlanError::Unreachable { start, goal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Vec2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Plain Dijkstra over the same movement model, tracking move counts.
    fn dijkstra(grid: &GridMap2D, start: Cell, goal: Cell) -> Option<MoveCount> {
        let w = grid.width() as i32;
        let h = grid.height() as i32;
        let mut best: Vec<Option<(f64, MoveCount)>> = vec![None; (w * h) as usize];
        let mut done = vec![false; (w * h) as usize];
        let id = |c: Cell| (c.1 * w + c.0) as usize;
        best[id(start)] = Some((0.0, MoveCount::default()));
        loop {
            let mut cur: Option<(usize, f64)> = None;
            for (i, b) in best.iter().enumerate() {
                if let (Some((d, _)), false) = (b, done[i]) {
                    if cur.is_none_or(|(_, cd)| *d < cd) {
                        cur = Some((i, *d));
                    }
                }
            }
            let (ci, _) = cur?;
            done[ci] = true;
            let c = ((ci as i32) % w, (ci as i32) / w);
            let (cd, cm) = best[ci].unwrap();
            if c == goal {
                return Some(cm);
            }
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nb = (c.0 + dx, c.1 + dy);
                    if grid.is_occupied(nb) {
                        continue;
                    }
                    let diag = dx != 0 && dy != 0;
                    if diag && (grid.is_occupied((c.0 + dx, c.1)) || grid.is_occupied((c.0, c.1 + dy))) {
                        continue;
                    }
                    let mut m = cm;
                    if diag {
                        m.diagonal += 1;
                    } else {
                        m.straight += 1;
                    }
                    let nd = cd + if diag { SQRT_2 } else { 1.0 };
                    let ni = id(nb);
                    if !done[ni] && best[ni].is_none_or(|(d, _)| nd < d - 1e-9) {
                        best[ni] = Some((nd, m));
                    }
                }
            }
        }
    }

    fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> GridMap2D {
        let mut g = GridMap2D::new(Vec2::zeros(), 1.0, w, h);
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                if rng.random_bool(density) {
                    g.set((x, y), true);
                }
            }
        }
        g
    }

    fn assert_valid_run(grid: &GridMap2D, path: &[Cell]) {
        for s in path.windows(2) {
            let dx = s[1].0 - s[0].0;
            let dy = s[1].1 - s[0].1;
            assert!(dx == 0 || dy == 0 || dx.abs() == dy.abs(), "segment {s:?} is not a run");
            let steps = dx.abs().max(dy.abs());
            let (sx, sy) = (dx.signum(), dy.signum());
            for i in 1..=steps {
                let c = (s[0].0 + sx * i, s[0].1 + sy * i);
                assert!(grid.is_free(c));
                if sx != 0 && sy != 0 {
                    assert!(grid.is_free((c.0 - sx, c.1)) && grid.is_free((c.0, c.1 - sy)));
                }
            }
        }
    }

    #[test]
    fn trivial_cases() {
        let g = GridMap2D::new(Vec2::zeros(), 1.0, 50, 50);
        assert_eq!(jps_search(&g, (3, 3), (3, 3)).unwrap(), vec![(3, 3)]);
        let p = jps_search(&g, (0, 0), (49, 49)).unwrap();
        assert_eq!(p, vec![(0, 0), (49, 49)]);
        assert_eq!(path_moves(&p), MoveCount { straight: 0, diagonal: 49 });
    }

    #[test]
    fn walled_off_goal_is_unreachable() {
        let mut g = GridMap2D::new(Vec2::zeros(), 1.0, 10, 10);
        for y in 0..10 {
            g.set((5, y), true);
        }
        assert!(matches!(jps_search(&g, (1, 1), (8, 8)), Err(PlanError::Unreachable { .. })));
    }

    #[test]
    fn no_corner_cutting() {
        let g = GridMap2D::from_ascii(Vec2::zeros(), 1.0, "..\n#.\n");
        // (0,0) → (1,1) diagonal would clip the blocked (0,1) corner.
        let p = jps_search(&g, (0, 0), (1, 1)).unwrap();
        assert_eq!(path_moves(&p), MoveCount { straight: 2, diagonal: 0 });
    }

    #[test]
    fn matches_dijkstra_on_random_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut solved = 0;
        for _ in 0..300 {
            let (w, h) = (rng.random_range(2..30), rng.random_range(2..30));
            let density = rng.random_range(0.0..0.45);
            let g = random_grid(&mut rng, w, h, density);
            let s = (rng.random_range(0..w as i32), rng.random_range(0..h as i32));
            let t = (rng.random_range(0..w as i32), rng.random_range(0..h as i32));
            if g.is_occupied(s) || g.is_occupied(t) {
                continue;
            }
            let oracle = dijkstra(&g, s, t);
            match jps_search(&g, s, t) {
                Ok(p) => {
                    assert_eq!(p.first(), Some(&s));
                    assert_eq!(p.last(), Some(&t));
                    assert_valid_run(&g, &p);
                    assert_eq!(Some(path_moves(&p)), oracle, "grid\n{}", g.to_pgm());
                    solved += 1;
                }
                Err(_) => assert_eq!(oracle, None),
            }
        }
        assert!(solved > 100);
    }
}
