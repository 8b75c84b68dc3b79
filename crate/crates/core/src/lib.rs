//! # dualplan-core
//!
//! Planning core for a UAV navigation stack that runs two planners side by side:
//!
//! - a low-frequency **map planner** that projects a sliding local voxel map to a
//!   2D grid, plans with jump point search on a stitched dual-resolution map,
//!   shortcuts the result and then tries to find a shorter 3D path with a discrete
//!   angular graph search;
//! - a high-frequency **point-cloud planner** that derives a per-step goal from the
//!   map planner's path (Fermat point of a weighted triangle), picks a collision-free
//!   waypoint with a discrete angular ray search and solves a small constrained
//!   motion problem for the acceleration command.
//!
//! Everything in this crate is synchronous and free of global state; the
//! simulator and the loop orchestration live in sibling crates.

pub mod config;
pub mod error;
pub mod mapping;
pub mod pcl;
pub mod pcp;
pub mod planner;
pub mod types;

pub use config::FrameworkConfig;
pub use error::{MapError, PlanError};
pub use types::{Attitude, DroneState, Frame, PathKind, PlanPath, PointCloud, Vec2, Vec3};
