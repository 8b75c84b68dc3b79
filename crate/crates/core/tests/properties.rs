use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dualplan_core::mapping::{local_map, project_2d, LocalMapParams, VoxelMap};
use dualplan_core::pcl::{body_to_earth, distance_filter, earth_to_body, outlier_filter, voxel_downsample, Pose};
use dualplan_core::pcp::{braking_distance, das_search, sorted_within, streamline, DasQuery, MotionProblem, PcpParams};
use dualplan_core::planner::{dags_search, lift_2d, select_final_path, DagsParams};
use dualplan_core::types::point_segment_distance;
use dualplan_core::{Attitude, PathKind, PlanPath, PointCloud, Vec2, Vec3};

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn cloud(n: usize, r: f64) -> impl Strategy<Value = Vec<Vec3>> {
    proptest::collection::vec(vec3(r), 0..n)
}

fn pose() -> impl Strategy<Value = Pose> {
    (vec3(10.0), -3.1f64..3.1, -1.5f64..1.5, -3.1f64..3.1)
        .prop_map(|(p, yaw, pitch, roll)| Pose::new(p, Attitude { yaw, pitch, roll }))
}

fn min_clearance(path: &[Vec3], pts: &[Vec3]) -> f64 {
    pts.iter()
        .flat_map(|q| path.windows(2).map(move |w| point_segment_distance(q, &w[0], &w[1])))
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filter_stages_never_add_points(pts in cloud(300, 9.0), d_pass in 1.0f64..8.0, voxel in 0.05f64..0.5) {
        let raw = PointCloud::body(pts);
        let p1 = distance_filter(&raw, d_pass);
        let p2 = voxel_downsample(&p1, voxel);
        let p3 = outlier_filter(&p2, 2.0 * voxel, 3);
        prop_assert!(raw.len() >= p1.len() && p1.len() >= p2.len() && p2.len() >= p3.len());
        prop_assert_eq!(voxel_downsample(&p1, voxel), p2);
    }

    #[test]
    fn frame_change_is_invertible(pts in cloud(50, 8.0), pose in pose()) {
        let body = PointCloud::body(pts);
        let back = earth_to_body(&body_to_earth(&body, &pose), &pose);
        for (a, b) in body.iter().zip(back.iter()) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn projection_is_stable(pts in cloud(400, 12.0), cx in -2.0f64..2.0, cy in -2.0f64..2.0) {
        let mut map = VoxelMap::new(0.2);
        map.integrate(&PointCloud::earth(pts.iter().map(|p| p + Vec3::new(0.0, 0.0, 12.0)).collect()), 0.0);
        let params = LocalMapParams::default();
        let center = Vec3::new(cx, cy, 12.0);
        let first = project_2d(&local_map(&map, &center, &params), &center, &params);
        let second = project_2d(&local_map(&map, &center, &params), &center, &params);
        prop_assert_eq!(first, second);
    }

    #[test]
    fn final_path_is_the_shorter_candidate(xy in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..6),
                                           p3 in proptest::collection::vec(vec3(5.0), 2..6)) {
        let xy: Vec<Vec2> = xy.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
        let path_2d = lift_2d(&xy, 1.0, 1.0).unwrap();
        let path_3d = PlanPath::new(p3, PathKind::Spatial3D).unwrap();
        let chosen = select_final_path(path_2d.clone(), Some(path_3d.clone()));
        prop_assert_eq!(chosen.length(), path_2d.length().min(path_3d.length()));
        if path_3d.length() >= path_2d.length() {
            prop_assert_eq!(chosen.kind(), PathKind::Lifted2D);
        }
    }

    #[test]
    fn angular_search_paths_keep_clearance(pts in cloud(200, 4.0), gy in -3.0f64..3.0, gz in 0.5f64..3.0) {
        let p_n = Vec3::new(0.0, 0.0, 1.5);
        let g_l = Vec3::new(6.0, gy, gz);
        // Keep the endpoints themselves clear so a path can exist at all.
        let pts: Vec<Vec3> = pts.into_iter().map(|p| p + Vec3::new(3.0, 0.0, 1.5))
            .filter(|p| (p - p_n).norm() > 0.6 && (p - g_l).norm() > 0.6).collect();
        let params = DagsParams::default();
        if let Some(path) = dags_search(&PointCloud::earth(pts.clone()), &p_n, &g_l, &[p_n, g_l], &params) {
            prop_assert_eq!(path.first(), p_n);
            prop_assert_eq!(path.last(), g_l);
            prop_assert!(min_clearance(path.waypoints(), &pts) >= params.r_safe);
        }
    }

    #[test]
    fn accepted_ray_segment_is_clear(pts in cloud(150, 3.0), g in vec3(5.0)) {
        let p_n = Vec3::new(0.0, 0.0, 2.0);
        let g_n = p_n + g;
        let q = DasQuery { ray_length: 1.0, step_length: 0.3, r_safe: 0.5, angle_step: 10f64.to_radians(),
                           z_min: 0.3, z_max: 5.0, excluded: &[] };
        let pts: Vec<Vec3> = pts.into_iter().map(|p| p + p_n).collect();
        if let Some(hit) = das_search(&p_n, &g_n, &pts, &q) {
            let end = p_n + hit.ray.dir * q.ray_length;
            prop_assert!(min_clearance(&[p_n, end], &pts) >= q.r_safe);
            prop_assert!(((hit.w_pn - p_n).norm() - q.step_length).abs() < 1e-9);
        }
    }

    #[test]
    fn streamline_is_seed_deterministic(pts in cloud(300, 3.0), seed in any::<u64>(), n_use in 5usize..80) {
        let p_n = Vec3::zeros();
        let g_n = Vec3::new(5.0, 0.0, 0.0);
        let sorted = sorted_within(&pts, &p_n, 3.0);
        let a = streamline(&sorted, &p_n, &g_n, n_use, &mut ChaCha8Rng::seed_from_u64(seed));
        let b = streamline(&sorted, &p_n, &g_n, n_use, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn solver_output_respects_limits(p in vec3(1.0), v in vec3(1.0), w in vec3(3.0), t in 0.005f64..0.1, iters in 0usize..25) {
        let d = PcpParams::default();
        let v = if v.norm() > d.v_max { v.normalize() * d.v_max } else { v };
        let q = MotionProblem { p, v, w: p + w, t, a_max: d.a_max, v_max: d.v_max, eta1: d.eta1, eta2: d.eta2 };
        let a = q.solve(iters, d.opt_tol).a;
        prop_assert!(a.norm() <= q.a_max);
        prop_assert!((v + a * t).norm() <= q.v_max);
    }

    /// Repeated braking from any admissible speed stops within the safety
    /// radius under exact double-integrator motion.
    #[test]
    fn braking_stops_inside_the_safety_radius(v in vec3(1.0), t in 0.005f64..0.1) {
        let d = PcpParams::default();
        prop_assert!(braking_distance(&Vec3::new(d.v_max, 0.0, 0.0), d.a_max) < d.r_safe);
        let mut v = if v.norm() > d.v_max { v.normalize() * d.v_max } else { v };
        let mut p = Vec3::zeros();
        for _ in 0..1000 {
            let q = MotionProblem { p, v, w: p, t, a_max: d.a_max, v_max: d.v_max, eta1: d.eta1, eta2: d.eta2 };
            let a = q.brake();
            p += v * t + a * (t * t / 2.0);
            v += a * t;
            if v.norm() < 1e-12 {
                break;
            }
        }
        prop_assert!(v.norm() < 1e-9);
        prop_assert!(p.norm() < d.r_safe);
    }
}
