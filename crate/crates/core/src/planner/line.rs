use crate::mapping::{Cell, GridMap2D};

/// Every cell the segment between the centers of `a` and `b` touches. When
/// the segment passes exactly through a cell corner both side cells are
/// included, so a free line never squeezes between two diagonal obstacles.
pub fn supercover(a: Cell, b: Cell) -> Vec<Cell> {
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    let (nx, ny) = (dx.unsigned_abs() as i64, dy.unsigned_abs() as i64);
    let (sx, sy) = (dx.signum(), dy.signum());
    let mut p = a;
    let mut out = vec![p];
    let (mut ix, mut iy) = (0i64, 0i64);
    while ix < nx || iy < ny {
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            out.push((p.0 + sx, p.1));
            out.push((p.0, p.1 + sy));
            p = (p.0 + sx, p.1 + sy);
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            p.0 += sx;
            ix += 1;
        } else {
            p.1 += sy;
            iy += 1;
        }
        out.push(p);
    }
    out
}

/// `true` when no cell under the segment `a`–`b` is occupied or outside the grid.
pub fn line_is_free(grid: &GridMap2D, a: Cell, b: Cell) -> bool {
    supercover(a, b).into_iter().all(|c| grid.is_free(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Geometric oracle: a cell is touched iff the closed segment meets the
    /// closed unit square around its center.
    fn touched(a: Cell, b: Cell, c: Cell) -> bool {
        let (ax, ay) = (a.0 as f64, a.1 as f64);
        let (bx, by) = (b.0 as f64, b.1 as f64);
        let (lo_x, hi_x) = (c.0 as f64 - 0.5, c.0 as f64 + 0.5);
        let (lo_y, hi_y) = (c.1 as f64 - 0.5, c.1 as f64 + 0.5);
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for (p, d, lo, hi) in [(ax, bx - ax, lo_x, hi_x), (ay, by - ay, lo_y, hi_y)] {
            if d == 0.0 {
                if p < lo || p > hi {
                    return false;
                }
            } else {
                let (mut e0, mut e1) = ((lo - p) / d, (hi - p) / d);
                if e0 > e1 {
                    std::mem::swap(&mut e0, &mut e1);
                }
                t0 = t0.max(e0);
                t1 = t1.min(e1);
            }
        }
        t0 <= t1
    }

    #[test]
    fn straight_and_diagonal() {
        assert_eq!(supercover((0, 0), (3, 0)), vec![(0, 0), (1, 0), (2, 0), (3, 0)]);
        assert_eq!(
            supercover((0, 0), (1, 1)),
            vec![(0, 0), (1, 0), (0, 1), (1, 1)]
        );
    }

    proptest! {
        #[test]
        fn supercover_matches_geometry(ax in -8i32..8, ay in -8i32..8, bx in -8i32..8, by in -8i32..8) {
            let cells = supercover((ax, ay), (bx, by));
            let set: std::collections::BTreeSet<Cell> = cells.iter().copied().collect();
            for x in -10..=10 {
                for y in -10..=10 {
                    prop_assert_eq!(set.contains(&(x, y)), touched((ax, ay), (bx, by), (x, y)), "cell {:?}", (x, y));
                }
            }
        }
    }
}
