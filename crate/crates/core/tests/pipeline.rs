//! A sensed wall carried through filtering, mapping, the map planner and one
//! point-cloud planner step, using only the public API.

use dualplan_core::mapping::{local_map, VoxelMap};
use dualplan_core::pcl::{earth_to_body, filter_cloud, FilterParams, Pose};
use dualplan_core::pcp::{CommandMode, Pcp, PcpInput, PcpParams};
use dualplan_core::planner::{plan_cycle, MpParams};
use dualplan_core::types::point_segment_distance;
use dualplan_core::{DroneState, PointCloud, Vec3};

/// Points on the plane x = 3 covering y ∈ [-2, 2], z ∈ [0, 3].
fn wall_points() -> Vec<Vec3> {
    let mut pts = Vec::new();
    for iy in -20..=20 {
        for iz in 0..=30 {
            pts.push(Vec3::new(3.0, iy as f64 * 0.1, iz as f64 * 0.1));
        }
    }
    pts
}

fn sensed_map(p: Vec3) -> VoxelMap {
    let pose = Pose::with_yaw(p, 0.0);
    let raw = earth_to_body(&PointCloud::earth(wall_points()), &pose);
    let filtered = filter_cloud(&raw, &pose, &FilterParams::default());
    let mut map = VoxelMap::new(FilterParams::default().voxel_size);
    map.integrate(&filtered.pcl_4, 0.0);
    map
}

#[test]
fn map_planner_routes_around_the_sensed_wall() {
    let p = Vec3::new(0.0, 0.0, 1.5);
    let goal = Vec3::new(8.0, 0.0, 1.5);
    let map = sensed_map(p);
    assert!(!map.is_empty());
    let params = MpParams::default();
    let pcl_lm = local_map(&map, &p, &params.local);
    let out = plan_cycle(&pcl_lm, &p, &goal, &params).expect("a route exists around the wall");
    let path = out.path_fnl.waypoints();
    assert_eq!(path[0], p);
    assert_eq!(out.path_fnl.last(), out.local_goal.g_l);
    assert!(out.local_goal.g_l.x > 3.0, "local goal {:?} is not past the wall", out.local_goal.g_l);
    // Straight through is blocked, so the route bends.
    assert!(out.path_fnl.length() > (out.local_goal.g_l - p).norm() + 0.1);
    let clearance = pcl_lm
        .iter()
        .flat_map(|q| path.windows(2).map(move |w| point_segment_distance(q, &w[0], &w[1])))
        .fold(f64::INFINITY, f64::min);
    assert!(clearance >= 0.2, "path passes {clearance:.3} m from the wall");
}

#[test]
fn point_cloud_planner_follows_the_plan_within_limits() {
    let p = Vec3::new(0.0, 0.0, 1.5);
    let map = sensed_map(p);
    let params = MpParams::default();
    let pcl_lm = local_map(&map, &p, &params.local);
    let out = plan_cycle(&pcl_lm, &p, &Vec3::new(8.0, 0.0, 1.5), &params).unwrap();

    let pcp_params = PcpParams::default();
    let mut pcp = Pcp::new(pcp_params.clone());
    let mut state = DroneState::at_rest(p);
    let pcl_m = map.centers_within(&p, pcp_params.r_det);
    for i in 0..30 {
        let step = pcp.step(&PcpInput {
            time: state.time,
            state: &state,
            path: Some(&out.path_fnl),
            pcl_4: &[],
            pcl_m: &pcl_m,
            seed: i,
        });
        let c = step.command;
        assert!(c.a.norm() <= pcp_params.a_max, "step {i}: |a| = {}", c.a.norm());
        assert!(c.v_next.norm() <= pcp_params.v_max, "step {i}: |v| = {}", c.v_next.norm());
        assert_eq!(c.mode, CommandMode::Normal, "step {i} fell back to the backup");
        state.position = c.p_next;
        state.velocity = c.v_next;
        state.time += 1.0 / 60.0;
    }
    // Half a second in, the drone is speeding up roughly along the first leg
    // (it aims at the per-step goal, which bends toward later waypoints).
    let leg = (out.path_fnl.waypoints()[1] - p).normalize();
    assert!(state.velocity.dot(&leg) > 0.7 * state.velocity.norm(), "velocity {:?}", state.velocity);
    assert!(state.velocity.norm() > 0.1 && (state.position - p).dot(&leg) > 0.0);
}
