//! Per-step goal extraction: the Fermat point of a weighted triangle built
//! from the next two path waypoints and the current velocity.

use nalgebra::Vector2;

use crate::types::Vec3;

/// How the Fermat point of a triangle was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FermatCase {
    /// Interior point from the closed-form planar expression.
    Interior,
    /// One vertex angle is at least 120°, so that vertex is the answer.
    ObtuseVertex(usize),
    /// Collinear vertices: the middle one.
    Collinear(usize),
    /// Two or three vertices coincide.
    Coincident(usize),
}

/// Triangle `(κ1·a1 + p, κ2·a2 + p, v0 + p)` together with its plane frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermatTriangle {
    pub vertices: [Vec3; 3],
    /// Plane frame: origin and two orthonormal in-plane axes.
    pub origin: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub degenerate: bool,
}

const REL_EPS: f64 = 1e-12;

impl FermatTriangle {
    pub fn new(vertices: [Vec3; 3]) -> Self {
        let [a, b, c] = vertices;
        let ab = b - a;
        let ac = c - a;
        let scale = ab.norm().max(ac.norm()).max((c - b).norm());
        let n = ab.cross(&ac);
        let degenerate = scale == 0.0 || n.norm() <= REL_EPS * scale * scale;
        let (e1, e2) = if degenerate {
            (Vec3::zeros(), Vec3::zeros())
        } else {
            let e1 = ab.normalize();
            (e1, n.cross(&e1).normalize())
        };
        Self {
            vertices,
            origin: a,
            e1,
            e2,
            degenerate,
        }
    }

    /// Coordinates of a point in the triangle plane.
    pub fn to_plane(&self, p: &Vec3) -> Vector2<f64> {
        let d = p - self.origin;
        Vector2::new(d.dot(&self.e1), d.dot(&self.e2))
    }

    pub fn from_plane(&self, q: &Vector2<f64>) -> Vec3 {
        self.origin + self.e1 * q.x + self.e2 * q.y
    }

    /// Point minimising the summed distance to the three vertices.
    pub fn fermat_point(&self) -> (Vec3, FermatCase) {
        let v = &self.vertices;
        let scale = (v[1] - v[0]).norm().max((v[2] - v[0]).norm()).max((v[2] - v[1]).norm());
        for i in 0..3 {
            for j in i + 1..3 {
                if (v[i] - v[j]).norm() <= REL_EPS * scale {
                    return (v[i], FermatCase::Coincident(i));
                }
            }
        }
        // cos of each vertex angle; ≤ -1/2 means at least 120°.
        for i in 0..3 {
            let p = v[(i + 1) % 3] - v[i];
            let q = v[(i + 2) % 3] - v[i];
            let cos = p.dot(&q) / (p.norm() * q.norm());
            if cos <= -0.5 {
                let case = if self.degenerate {
                    FermatCase::Collinear(i)
                } else {
                    FermatCase::ObtuseVertex(i)
                };
                return (v[i], case);
            }
        }
        if self.degenerate {
            // Cannot happen for genuinely collinear points (the middle one
            // has a 180° angle); kept for points that are merely nearly so.
            let i = middle_index(v);
            return (v[i], FermatCase::Collinear(i));
        }
        let q = [self.to_plane(&v[0]), self.to_plane(&v[1]), self.to_plane(&v[2])];
        (self.from_plane(&planar_fermat(&q)), FermatCase::Interior)
    }
}

fn middle_index(v: &[Vec3; 3]) -> usize {
    let d = |i: usize, j: usize| (v[i] - v[j]).norm();
    let total = [d(0, 1) + d(0, 2), d(1, 0) + d(1, 2), d(2, 0) + d(2, 1)];
    (0..3).min_by(|&a, &b| total[a].total_cmp(&total[b])).unwrap_or(0)
}

/// Closed-form Fermat point of a planar triangle with all angles below 120°.
/// `l_i` is the side opposite vertex `i`; the rotation term flips sign with
/// the vertex orientation.
pub fn planar_fermat(q: &[Vector2<f64>; 3]) -> Vector2<f64> {
    let l2 = [
        (q[2] - q[1]).norm_squared(),
        (q[0] - q[2]).norm_squared(),
        (q[1] - q[0]).norm_squared(),
    ];
    let signed = 0.5 * ((q[1] - q[0]).perp(&(q[2] - q[0])));
    let s = signed.abs();
    let o = signed.signum();
    let sqrt3 = 3f64.sqrt();
    let w: Vec<f64> = l2.iter().map(|l| 4.0 * s + sqrt3 * l).collect();
    let c = [l2[2] - l2[1], l2[0] - l2[2], l2[1] - l2[0]];
    let f = 12.0 * s + sqrt3 * (l2[0] + l2[1] + l2[2]);
    let mut x = 0.0;
    let mut y = 0.0;
    let mut gx = 0.0;
    let mut gy = 0.0;
    for i in 0..3 {
        x += q[i].x * w[i];
        y += q[i].y * w[i];
        gx += q[i].x * c[i];
        gy += q[i].y * c[i];
    }
    Vector2::new((x + o * gy) / f, (y - o * gx) / f)
}

/// Next goal `g_n` from the remaining path waypoints. With a single waypoint
/// left it is used for both `pt_1` and `pt_2`.
pub fn compute_goal(p_n: &Vec3, v_0: &Vec3, remaining: &[Vec3], kappa1: f64, kappa2: f64) -> Option<Vec3> {
    let pt1 = *remaining.first()?;
    let pt2 = remaining.get(1).copied().unwrap_or(pt1);
    let tri = FermatTriangle::new([(pt1 - p_n) * kappa1 + p_n, (pt2 - p_n) * kappa2 + p_n, v_0 + p_n]);
    Some(tri.fermat_point().0)
}

pub fn distance_sum(x: &Vec3, vertices: &[Vec3; 3]) -> f64 {
    vertices.iter().map(|v| (x - v).norm()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force geometric median: a 13³ grid around the best point so far,
    /// shrinking the window each pass.
    fn median_oracle(v: &[Vec3; 3]) -> f64 {
        let lo = v[0].inf(&v[1]).inf(&v[2]);
        let hi = v[0].sup(&v[1]).sup(&v[2]);
        let mut center = (lo + hi) / 2.0;
        let mut half = (hi - lo).max() / 2.0 + 1e-12;
        let mut best = distance_sum(&center, v);
        for _ in 0..120 {
            let mut next = center;
            for i in -6..=6 {
                for j in -6..=6 {
                    for k in -6..=6 {
                        let p = center + Vec3::new(i as f64, j as f64, k as f64) * (half / 6.0);
                        let s = distance_sum(&p, v);
                        if s < best {
                            best = s;
                            next = p;
                        }
                    }
                }
            }
            center = next;
            half *= 0.7;
        }
        best
    }

    fn check(v: [Vec3; 3]) {
        let (x, _) = FermatTriangle::new(v).fermat_point();
        let got = distance_sum(&x, &v);
        let want = median_oracle(&v);
        assert!((got - want).abs() <= want * 1e-6 + 1e-12, "{got} vs {want} for {v:?}");
    }

    #[test]
    fn equilateral_gives_centroid() {
        let v = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0),
        ];
        let (x, case) = FermatTriangle::new(v).fermat_point();
        assert_eq!(case, FermatCase::Interior);
        assert!((x - (v[0] + v[1] + v[2]) / 3.0).norm() < 1e-12);
    }

    #[test]
    fn wide_vertex_is_the_answer() {
        let a = 150f64.to_radians();
        let v = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(a.cos(), a.sin(), 0.0) * 2.0];
        let (x, case) = FermatTriangle::new(v).fermat_point();
        assert_eq!(case, FermatCase::ObtuseVertex(0));
        assert_eq!(x, v[0]);
    }

    #[test]
    fn collinear_and_coincident() {
        let v = [Vec3::new(0.0, 0.0, 1.0), Vec3::new(4.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 1.0)];
        let (x, case) = FermatTriangle::new(v).fermat_point();
        assert_eq!(case, FermatCase::Collinear(2));
        assert_eq!(x, v[2]);
        let v = [Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 2.0, 3.0), Vec3::new(5.0, 0.0, 0.0)];
        assert_eq!(FermatTriangle::new(v).fermat_point().1, FermatCase::Coincident(0));
    }

    #[test]
    fn orientation_does_not_matter() {
        let v = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(3.0, 0.5, 0.0), Vec3::new(1.0, 2.0, 0.0)];
        let p = FermatTriangle::new(v).fermat_point().0;
        let q = FermatTriangle::new([v[0], v[2], v[1]]).fermat_point().0;
        assert!((p - q).norm() < 1e-12);
        let q = planar_fermat(&[v[0].xy(), v[2].xy(), v[1].xy()]);
        assert!((p.xy() - q).norm() < 1e-12);
    }

    #[test]
    fn tilted_triangles_match_oracle() {
        check([Vec3::new(0.3, -1.0, 2.0), Vec3::new(2.0, 1.0, -1.0), Vec3::new(-1.0, 0.5, 0.7)]);
        check([Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1e-7, 0.0), Vec3::new(2.0, 0.0, 1e-7)]);
    }

    #[test]
    fn single_waypoint_left() {
        let p = Vec3::new(0.0, 0.0, 1.0);
        let g = compute_goal(&p, &Vec3::zeros(), &[Vec3::new(2.0, 0.0, 1.0)], 4.2, 1.5).unwrap();
        // Vertices: p + 8.4x, p + 3x, p; the 3x vertex is in the middle.
        assert!((g - Vec3::new(3.0, 0.0, 1.0)).norm() < 1e-12);
        assert!(compute_goal(&p, &Vec3::zeros(), &[], 4.2, 1.5).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn never_worse_than_vertices_or_centroid(
            c in proptest::collection::vec(-5.0f64..5.0, 9)
        ) {
            let v = [
                Vec3::new(c[0], c[1], c[2]),
                Vec3::new(c[3], c[4], c[5]),
                Vec3::new(c[6], c[7], c[8]),
            ];
            let (x, _) = FermatTriangle::new(v).fermat_point();
            let s = distance_sum(&x, &v);
            let centroid = (v[0] + v[1] + v[2]) / 3.0;
            prop_assert!(s <= distance_sum(&centroid, &v) + 1e-9);
            for p in &v {
                prop_assert!(s <= distance_sum(p, &v) + 1e-9);
            }
            let want = median_oracle(&v);
            prop_assert!((s - want).abs() <= want * 1e-6 + 1e-12);
        }
    }
}
