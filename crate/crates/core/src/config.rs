//! Aggregate configuration for the planning core.

use serde::{Deserialize, Serialize};

use crate::pcl::FilterParams;
use crate::pcp::PcpParams;
use crate::planner::MpParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FrameworkConfig {
    pub filter: FilterParams,
    pub map: MapConfig,
    pub mp: MpParams,
    pub pcp: PcpParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    pub voxel_size: f64,
    /// Forget voxels not seen for this long; `None` keeps them forever.
    pub decay_after: Option<f64>,
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            voxel_size: 0.2,
            decay_after: None,
        }
    }
}

impl FrameworkConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !self.filter.is_valid() {
            return Err("invalid filter parameters".into());
        }
        self.mp
            .local
            .validate(self.map.voxel_size)
            .map_err(|e| e.to_string())?;
        if !self.mp.dags.is_valid() {
            return Err("invalid angular search parameters".into());
        }
        self.pcp.validate()
    }
}
