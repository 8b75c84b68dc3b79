use crate::types::{PathKind, PlanPath, Vec2, Vec3};

/// Lifts a 2D path to 3D, interpolating altitude from `z_start` to `z_end`
/// along arclength.
pub fn lift_2d(xy: &[Vec2], z_start: f64, z_end: f64) -> Option<PlanPath> {
    let total: f64 = xy.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(xy.len());
    for (i, p) in xy.iter().enumerate() {
        if i > 0 {
            acc += (p - xy[i - 1]).norm();
        }
        let t = if total > 0.0 { acc / total } else { 1.0 };
        out.push(Vec3::new(p.x, p.y, z_start + (z_end - z_start) * t));
    }
    PlanPath::new(out, PathKind::Lifted2D)
}

/// `Path_fnl`: the 3D path when it is strictly shorter, the lifted 2D path
/// otherwise.
pub fn select_final_path(path_2d: PlanPath, path_3d: Option<PlanPath>) -> PlanPath {
    match path_3d {
        Some(p3) if p3.length() < path_2d.length() => p3,
        _ => path_2d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(len: f64, kind: PathKind) -> PlanPath {
        PlanPath::new(vec![Vec3::zeros(), Vec3::new(len, 0.0, 0.0)], kind).unwrap()
    }

    #[test]
    fn selection_rules() {
        let p2 = straight(12.0, PathKind::Lifted2D);
        assert_eq!(select_final_path(p2.clone(), None), p2);
        let p3 = straight(8.0, PathKind::Spatial3D);
        assert_eq!(select_final_path(p2.clone(), Some(p3.clone())), p3);
        let tie = straight(12.0, PathKind::Spatial3D);
        assert_eq!(select_final_path(p2.clone(), Some(tie)).kind(), PathKind::Lifted2D);
    }

    #[test]
    fn lifting_interpolates_altitude() {
        let xy = [Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), Vec2::new(3.0, 1.0)];
        let p = lift_2d(&xy, 1.0, 2.0).unwrap();
        let z: Vec<f64> = p.waypoints().iter().map(|w| w.z).collect();
        assert!((z[0] - 1.0).abs() < 1e-12);
        assert!((z[1] - 1.75).abs() < 1e-12);
        assert!((z[2] - 2.0).abs() < 1e-12);
    }
}
