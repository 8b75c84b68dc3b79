//! Map planner: local goal casting, stitched JPS, shortcutting, the angular
//! 3D search and final path selection.

pub mod dags;
pub mod jps;
pub mod line;
pub mod local_goal;
pub mod select;
pub mod shortcut;
pub mod stitch;

use serde::{Deserialize, Serialize};

pub use dags::{dags_search, path_clear, segment_clear, AngularGraph, DagsParams};
pub use jps::{jps_search, path_moves, MoveCount};
pub use line::{line_is_free, supercover};
pub use local_goal::{cast_local_goal, LocalGoal};
pub use select::{lift_2d, select_final_path};
pub use shortcut::{shortcut_path, shortcut_with};
pub use stitch::{single_resolution_plan, stitched_plan, Plan2D};

use crate::error::PlanError;
use crate::mapping::{LocalMapParams, LocalMaps};
use crate::types::{PathKind, PlanPath, PointCloud, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpParams {
    pub local: LocalMapParams,
    pub dags: DagsParams,
    /// Run the angular 3D search after the 2D plan.
    pub use_dags: bool,
    /// Plan on the stitched dual-resolution map; otherwise on the whole
    /// inflated `Map_1`.
    pub stitched: bool,
}

impl Default for MpParams {
    fn default() -> Self {
        Self {
            local: LocalMapParams::default(),
            dags: DagsParams::default(),
            use_dags: true,
            stitched: true,
        }
    }
}

/// Everything one map-planner cycle produces.
#[derive(Debug, Clone)]
pub struct MpOutput {
    pub local_goal: LocalGoal,
    pub plan_2d: Plan2D,
    pub path_2d: PlanPath,
    pub path_3d: Option<PlanPath>,
    pub path_fnl: PlanPath,
}

/// One planning cycle from the current local map.
pub fn plan_cycle(
    pcl_lm: &PointCloud,
    p_n: &Vec3,
    goal: &Vec3,
    params: &MpParams,
) -> Result<MpOutput, PlanError> {
    let maps = LocalMaps::build(pcl_lm, p_n, &params.local)?;
    let local_goal = cast_local_goal(p_n, goal, &params.local, &maps.map_1)?;
    let plan_2d = if params.stitched {
        stitched_plan(&maps, local_goal.cell)?
    } else {
        let inflated = maps.map_1.inflate(params.local.k)?;
        single_resolution_plan(&inflated, params.local.center_cell(), local_goal.cell)?
    };
    let g_l = local_goal.g_l;
    let mut xy = plan_2d.waypoints.clone();
    xy[0] = p_n.xy();
    let snap = params.local.resolution() * params.local.h as f64 * 1.5;
    if let Some(last) = xy.last_mut() {
        if (*last - g_l.xy()).norm() <= snap {
            *last = g_l.xy();
        }
    }
    let path_2d = lift_2d(&xy, p_n.z, g_l.z).ok_or(PlanError::NoFreeGoal)?;
    let path_3d = if params.use_dags {
        dags_search(pcl_lm, p_n, &g_l, path_2d.waypoints(), &params.dags)
    } else {
        None
    };
    let path_fnl = select_final_path(path_2d.clone(), path_3d.clone());
    Ok(MpOutput {
        local_goal,
        plan_2d,
        path_2d,
        path_3d,
        path_fnl,
    })
}

/// Clearance a path must keep from the map before the planner is woken up
/// again: `r_safe` for 3D paths, the inflation radius for lifted 2D paths
/// (they are built to hug inflated obstacles).
pub fn suspension_radius(kind: PathKind, params: &MpParams) -> f64 {
    match kind {
        PathKind::Spatial3D => params.dags.r_safe,
        PathKind::Lifted2D => {
            let inflation = (params.local.k / 2) as f64 * params.local.resolution();
            inflation.min(params.dags.r_safe)
        }
    }
}

/// First map point closer than `radius` to the polyline, if any.
pub fn first_collision<'a>(polyline: &[Vec3], points: &'a [Vec3], radius: f64) -> Option<&'a Vec3> {
    points.iter().find(|p| {
        polyline
            .windows(2)
            .any(|w| crate::types::point_segment_distance(p, &w[0], &w[1]) < radius)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_world_cycle_goes_straight() {
        let p = Vec3::new(0.1, 0.1, 1.0);
        let goal = Vec3::new(30.0, 5.0, 1.0);
        let out = plan_cycle(&PointCloud::earth(vec![]), &p, &goal, &MpParams::default()).unwrap();
        assert_eq!(out.path_fnl.first(), p);
        let g_l = out.local_goal.g_l;
        assert!((out.path_fnl.last() - g_l).norm() < 1e-9);
        assert!(out.path_fnl.length() <= (g_l - p).norm() * 1.02);
    }

    #[test]
    fn wall_cycle_prefers_3d() {
        let mut pts = Vec::new();
        for iy in -15..15 {
            for iz in 0..10 {
                for x in [3.1, 3.3] {
                    pts.push(Vec3::new(x, iy as f64 * 0.2 + 0.1, iz as f64 * 0.2 + 0.1));
                }
            }
        }
        let p = Vec3::new(0.1, 0.1, 1.0);
        let goal = Vec3::new(6.1, 0.1, 1.0);
        let mp = MpParams::default();
        let out = plan_cycle(&PointCloud::earth(pts.clone()), &p, &goal, &mp).unwrap();
        let p3 = out.path_3d.expect("3D path over the wall");
        assert!(p3.length() < out.path_2d.length());
        assert_eq!(out.path_fnl.kind(), PathKind::Spatial3D);
        assert!(first_collision(out.path_fnl.waypoints(), &pts, mp.dags.r_safe).is_none());
        let no_dags = MpParams { use_dags: false, ..mp.clone() };
        let flat = plan_cycle(&PointCloud::earth(pts.clone()), &p, &goal, &no_dags).unwrap();
        assert_eq!(flat.path_fnl.kind(), PathKind::Lifted2D);
        assert!(first_collision(flat.path_fnl.waypoints(), &pts, suspension_radius(PathKind::Lifted2D, &mp)).is_none());
    }
}
