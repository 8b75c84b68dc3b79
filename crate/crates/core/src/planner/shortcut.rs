use super::line::line_is_free;
use crate::mapping::{Cell, GridMap2D};

/// Removes redundant waypoints: for each kept waypoint `jp_ck`, walk
/// `ti = ck + 2, ck + 3, …` and whenever the chord `jp_ck → jp_ti` is free,
/// drop the waypoints strictly between them and retest from `ck + 2`.
///
/// Dropping the whole run (not only `jp_{ti-1}`) keeps every emitted segment
/// a tested chord; deleting a single point could leave `jp_{ti-2} → jp_ti`
/// unchecked.
pub fn shortcut_path(path: &[Cell], grid: &GridMap2D) -> Vec<Cell> {
    shortcut_with(path, |a, b| line_is_free(grid, a, b))
}

/// [`shortcut_path`] with a caller-supplied line test.
pub fn shortcut_with<T: Copy>(path: &[T], free: impl Fn(T, T) -> bool) -> Vec<T> {
    let mut p = path.to_vec();
    let mut ck = 0;
    while ck < p.len() {
        let mut ti = ck + 2;
        while ti < p.len() && p.len() > 2 {
            if free(p[ck], p[ti]) {
                p.drain(ck + 1..ti);
                ti = ck + 2;
            } else {
                ti += 1;
            }
        }
        ck += 1;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::jps::jps_search;
    use crate::planner::line::supercover;
    use crate::types::Vec2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cells_len(p: &[Cell]) -> f64 {
        p.windows(2)
            .map(|w| (((w[1].0 - w[0].0).pow(2) + (w[1].1 - w[0].1).pow(2)) as f64).sqrt())
            .sum()
    }

    #[test]
    fn collinear_middle_removed() {
        let g = GridMap2D::new(Vec2::zeros(), 1.0, 10, 10);
        assert_eq!(shortcut_path(&[(0, 0), (3, 3), (6, 6)], &g), vec![(0, 0), (6, 6)]);
    }

    #[test]
    fn zigzag_drops_second_and_fourth() {
        // jp1 → jp2 → jp3 → jp4 → jp5 around a block; jp2 and jp4 are redundant.
        let mut g = GridMap2D::new(Vec2::zeros(), 1.0, 8, 9);
        for x in 1..=2 {
            for y in 3..=5 {
                g.set((x, y), true);
            }
        }
        let path = [(0, 0), (2, 0), (4, 2), (4, 6), (6, 8)];
        assert!(!line_is_free(&g, path[0], path[3]));
        assert!(!line_is_free(&g, path[0], path[4]));
        assert_eq!(shortcut_path(&path, &g), vec![(0, 0), (4, 2), (6, 8)]);
    }

    #[test]
    fn hugging_path_unchanged() {
        let g = GridMap2D::from_ascii(
            Vec2::zeros(),
            1.0,
            "
            .###.
            .###.
            .....
            ",
        );
        let path = [(0, 0), (0, 2), (4, 2), (4, 0)];
        for i in 0..path.len() {
            for j in i + 2..path.len() {
                assert!(supercover(path[i], path[j]).iter().any(|&c| g.is_occupied(c)));
            }
        }
        assert_eq!(shortcut_path(&path, &g), path.to_vec());
    }

    #[test]
    fn random_jps_paths_stay_free_and_shrink() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tested = 0;
        while tested < 200 {
            let mut g = GridMap2D::new(Vec2::zeros(), 1.0, 40, 40);
            for y in 0..40 {
                for x in 0..40 {
                    if rng.random_bool(0.25) {
                        g.set((x, y), true);
                    }
                }
            }
            let s = (rng.random_range(0..40), rng.random_range(0..40));
            let t = (rng.random_range(0..40), rng.random_range(0..40));
            if g.is_occupied(s) || g.is_occupied(t) {
                continue;
            }
            let Ok(p) = jps_search(&g, s, t) else { continue };
            let out = shortcut_path(&p, &g);
            assert_eq!(out.first(), p.first());
            assert_eq!(out.last(), p.last());
            assert!(cells_len(&out) <= cells_len(&p) + 1e-9);
            for w in out.windows(2) {
                assert!(line_is_free(&g, w[0], w[1]), "{w:?} in {p:?} -> {out:?}\n{}", g.to_pgm());
            }
            tested += 1;
        }
    }
}
