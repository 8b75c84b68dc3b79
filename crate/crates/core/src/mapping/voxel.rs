use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::types::{PointCloud, Vec3};

pub type VoxelIndex = [i32; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct VoxelCell {
    hits: u32,
    last_seen: f64,
}

/// Sparse occupancy map keyed by voxel index. Occupied voxels stay occupied
/// unless a decay horizon is configured.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelMap {
    voxel_size: f64,
    /// Voxels not re-observed for this long are dropped by [`VoxelMap::decay`].
    pub decay_after: Option<f64>,
    cells: BTreeMap<VoxelIndex, VoxelCell>,
}

/// JSON dump format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelMapDump {
    pub voxel_size: f64,
    pub occupied: Vec<VoxelIndex>,
}

impl VoxelMap {
    pub fn new(voxel_size: f64) -> Self {
        assert!(voxel_size > 0.0, "voxel_size must be positive");
        Self {
            voxel_size,
            decay_after: None,
            cells: BTreeMap::new(),
        }
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_of(&self, p: &Vec3) -> VoxelIndex {
        [
            (p.x / self.voxel_size).floor() as i32,
            (p.y / self.voxel_size).floor() as i32,
            (p.z / self.voxel_size).floor() as i32,
        ]
    }

    pub fn center_of(&self, idx: VoxelIndex) -> Vec3 {
        Vec3::new(
            (idx[0] as f64 + 0.5) * self.voxel_size,
            (idx[1] as f64 + 0.5) * self.voxel_size,
            (idx[2] as f64 + 0.5) * self.voxel_size,
        )
    }

    pub fn is_occupied(&self, idx: VoxelIndex) -> bool {
        self.cells.contains_key(&idx)
    }

    pub fn hits(&self, idx: VoxelIndex) -> u32 {
        self.cells.get(&idx).map_or(0, |c| c.hits)
    }

    /// Marks the voxel of every point as occupied. `time` feeds the optional
    /// decay; pass `0.0` when decay is unused.
    pub fn integrate(&mut self, cloud: &PointCloud, time: f64) {
        for p in &cloud.points {
            let idx = self.index_of(p);
            let cell = self.cells.entry(idx).or_insert(VoxelCell {
                hits: 0,
                last_seen: time,
            });
            cell.hits = cell.hits.saturating_add(1);
            cell.last_seen = cell.last_seen.max(time);
        }
    }

    /// Drops voxels older than the decay horizon. No-op when decay is off.
    pub fn decay(&mut self, now: f64) {
        if let Some(horizon) = self.decay_after {
            self.cells.retain(|_, c| now - c.last_seen <= horizon);
        }
    }

    pub fn occupied_indices(&self) -> impl Iterator<Item = VoxelIndex> + '_ {
        self.cells.keys().copied()
    }

    /// `Pcl_m`: centers of all occupied voxels, in index order.
    pub fn occupied_centers(&self) -> PointCloud {
        PointCloud::earth(self.cells.keys().map(|&i| self.center_of(i)).collect())
    }

    /// Centers of occupied voxels inside the closed box `[lo, hi]`.
    pub fn centers_in_box(&self, lo: &Vec3, hi: &Vec3) -> Vec<Vec3> {
        const EPS: f64 = 1e-9;
        let ilo = self.index_of(&(lo - Vec3::repeat(self.voxel_size)));
        let ihi = self.index_of(&(hi + Vec3::repeat(self.voxel_size)));
        self.cells
            .range([ilo[0], i32::MIN, i32::MIN]..=[ihi[0], i32::MAX, i32::MAX])
            .filter(|(idx, _)| idx[1] >= ilo[1] && idx[1] <= ihi[1] && idx[2] >= ilo[2] && idx[2] <= ihi[2])
            .map(|(&idx, _)| self.center_of(idx))
            .filter(|c| {
                (0..3).all(|a| c[a] >= lo[a] - EPS && c[a] <= hi[a] + EPS)
            })
            .collect()
    }

    /// `Pcl_mr`: occupied voxel centers within `radius` of `p`.
    pub fn centers_within(&self, p: &Vec3, radius: f64) -> Vec<Vec3> {
        let r = Vec3::repeat(radius);
        let r2 = radius * radius;
        self.centers_in_box(&(p - r), &(p + r))
            .into_iter()
            .filter(|c| (c - p).norm_squared() <= r2)
            .collect()
    }

    pub fn dump(&self) -> VoxelMapDump {
        VoxelMapDump {
            voxel_size: self.voxel_size,
            occupied: self.cells.keys().copied().collect(),
        }
    }

    pub fn from_dump(dump: &VoxelMapDump) -> Self {
        let mut m = Self::new(dump.voxel_size);
        for &idx in &dump.occupied {
            m.cells.insert(idx, VoxelCell { hits: 1, last_seen: 0.0 });
        }
        m
    }
}
