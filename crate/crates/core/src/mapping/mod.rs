//! Occupancy voxel map, the sliding local map and its 2D projections.

mod grid;
mod local;
mod voxel;

pub use grid::{Cell, GridMap2D};
pub use local::{local_map, map_1_frame, project_2d, LocalMapParams, LocalMaps};
pub use voxel::{VoxelIndex, VoxelMap, VoxelMapDump};
