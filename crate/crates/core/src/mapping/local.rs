use serde::{Deserialize, Serialize};

use super::grid::{Cell, GridMap2D};
use super::voxel::VoxelMap;
use crate::error::MapError;
use crate::types::{PointCloud, Vec2, Vec3};

/// Local map geometry: an `l_ms × l_ms × h_ms` cuboid projected to an `i × j`
/// grid (`Map_1`), a centered `m × n` full-resolution window (`Map_c`) and the
/// `h`-downsampled surround (`Map_1b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalMapParams {
    pub l_ms: f64,
    pub h_ms: f64,
    pub i: usize,
    pub j: usize,
    pub m: usize,
    pub n: usize,
    /// Inflation kernel width in cells (odd).
    pub k: usize,
    /// Zero padding added before downsampling.
    pub s: usize,
    /// Downsample kernel width in cells.
    pub h: usize,
}

impl Default for LocalMapParams {
    fn default() -> Self {
        Self {
            l_ms: 20.0,
            h_ms: 6.0,
            i: 100,
            j: 100,
            m: 50,
            n: 50,
            k: 3,
            s: 0,
            h: 2,
        }
    }
}

impl LocalMapParams {
    /// Builds square parameters, deriving `h = round(ij / 2mn)` and the
    /// smallest padding `s` that makes `i + s` divisible by `h`.
    pub fn derive(l_ms: f64, h_ms: f64, i: usize, m: usize, k: usize) -> Result<Self, MapError> {
        if m == 0 {
            return Err(MapError::InvalidParams("m must be positive".into()));
        }
        let h = ((i * i) as f64 / (2 * m * m) as f64).round() as usize;
        if h == 0 {
            return Err(MapError::InvalidParams(format!("i={i}, m={m} give h=0")));
        }
        let s = (h - i % h) % h;
        let p = Self {
            l_ms,
            h_ms,
            i,
            j: i,
            m,
            n: m,
            k,
            s,
            h,
        };
        p.validate(l_ms / i as f64)?;
        Ok(p)
    }

    pub fn resolution(&self) -> f64 {
        self.l_ms / self.i as f64
    }

    pub fn validate(&self, voxel_size: f64) -> Result<(), MapError> {
        let bad = |msg: String| Err(MapError::InvalidParams(msg));
        if !(self.l_ms > 0.0 && self.h_ms > 0.0) {
            return bad("l_ms and h_ms must be positive".into());
        }
        if self.i != self.j || self.m != self.n {
            return bad(format!("maps must be square: i={} j={} m={} n={}", self.i, self.j, self.m, self.n));
        }
        if self.m == 0 || self.m > self.i {
            return bad(format!("need 0 < m <= i, got m={} i={}", self.m, self.i));
        }
        if self.i * self.j <= 3 * self.m * self.n {
            return bad(format!("need ij > 3mn, got {} <= {}", self.i * self.j, 3 * self.m * self.n));
        }
        if self.k == 0 || self.k.is_multiple_of(2) {
            return Err(MapError::EvenKernel(self.k));
        }
        let h = ((self.i * self.j) as f64 / (2 * self.m * self.n) as f64).round() as usize;
        if self.h != h {
            return bad(format!("h must be round(ij/2mn) = {h}, got {}", self.h));
        }
        if !(self.i + self.s).is_multiple_of(self.h) {
            return Err(MapError::NotDivisible {
                padded: self.i + self.s,
                kernel: self.h,
            });
        }
        if (self.resolution() - voxel_size).abs() > 1e-9 {
            return bad(format!(
                "l_ms/i = {} must equal the voxel size {voxel_size}",
                self.resolution()
            ));
        }
        Ok(())
    }

    /// Closed cuboid bounds around `center`.
    pub fn cuboid(&self, center: &Vec3) -> (Vec3, Vec3) {
        let half = Vec3::new(self.l_ms / 2.0, self.l_ms / 2.0, self.h_ms / 2.0);
        (center - half, center + half)
    }

    pub fn contains(&self, center: &Vec3, p: &Vec3) -> bool {
        let (lo, hi) = self.cuboid(center);
        (0..3).all(|a| p[a] >= lo[a] - 1e-9 && p[a] <= hi[a] + 1e-9)
    }

    /// Cell of the drone in `Map_1`.
    pub fn center_cell(&self) -> Cell {
        ((self.i / 2) as i32, (self.j / 2) as i32)
    }

    /// Corner of the `Map_c` window inside `Map_1`.
    pub fn map_c_corner(&self) -> Cell {
        ((self.i / 2 - self.m / 2) as i32, (self.j / 2 - self.n / 2) as i32)
    }
}

/// `Pcl_lm`: occupied voxel centers inside the local cuboid around `center`.
pub fn local_map(map: &VoxelMap, center: &Vec3, params: &LocalMapParams) -> PointCloud {
    let (lo, hi) = params.cuboid(center);
    PointCloud::earth(map.centers_in_box(&lo, &hi))
}

/// Empty `Map_1` aligned to the voxel column that contains `center`, so that
/// voxel centers land exactly on cell centers.
pub fn map_1_frame(center: &Vec3, params: &LocalMapParams) -> GridMap2D {
    let res = params.resolution();
    let col = Vec2::new(
        ((center.x / res).floor() + 0.5) * res,
        ((center.y / res).floor() + 0.5) * res,
    );
    let c = params.center_cell();
    let origin = col - Vec2::new(c.0 as f64 * res, c.1 as f64 * res);
    GridMap2D::new(origin, res, params.i, params.j)
}

/// Projects `Pcl_lm` onto the ground plane: a cell is occupied iff at least
/// one point falls into it, whatever its height.
pub fn project_2d(pcl_lm: &PointCloud, center: &Vec3, params: &LocalMapParams) -> GridMap2D {
    let mut g = map_1_frame(center, params);
    for p in &pcl_lm.points {
        let c = g.cell_of(&p.xy());
        if g.in_bounds(c) {
            g.set(c, true);
        }
    }
    g
}

/// The grids one map-planner cycle works on.
#[derive(Debug, Clone)]
pub struct LocalMaps {
    pub params: LocalMapParams,
    pub center: Vec3,
    pub map_1: GridMap2D,
    pub map_1b: GridMap2D,
    pub map_c: GridMap2D,
    pub map_c_inflated: GridMap2D,
}

impl LocalMaps {
    pub fn build(pcl_lm: &PointCloud, center: &Vec3, params: &LocalMapParams) -> Result<Self, MapError> {
        let map_1 = project_2d(pcl_lm, center, params);
        Self::from_map_1(map_1, *center, params)
    }

    pub fn from_map_1(map_1: GridMap2D, center: Vec3, params: &LocalMapParams) -> Result<Self, MapError> {
        let map_1b = map_1.downsample(params.h, params.s)?;
        let map_c = map_1.window(params.map_c_corner(), params.m, params.n);
        let map_c_inflated = map_c.inflate(params.k)?;
        Ok(Self {
            params: *params,
            center,
            map_1,
            map_1b,
            map_c,
            map_c_inflated,
        })
    }

    /// Drone cell in `Map_c`.
    pub fn center_cell_c(&self) -> Cell {
        let c = self.params.center_cell();
        let o = self.params.map_c_corner();
        (c.0 - o.0, c.1 - o.1)
    }

    /// Drone cell in `Map_1b`.
    pub fn center_cell_b(&self) -> Cell {
        let c = self.params.center_cell();
        (c.0 / self.params.h as i32, c.1 / self.params.h as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_defaults_are_consistent() {
        let p = LocalMapParams::default();
        p.validate(0.2).unwrap();
        let d = LocalMapParams::derive(20.0, 6.0, 100, 50, 3).unwrap();
        assert_eq!((d.h, d.s), (2, 0));
        assert_eq!(d, p);
    }

    #[test]
    fn derive_padding() {
        // 10000/(2·30²) ≈ 5.56 → h = 6, and 102 is the first multiple of 6 above 100.
        let p = LocalMapParams::derive(20.0, 6.0, 100, 30, 3).unwrap();
        assert_eq!(p.h, 6);
        assert_eq!(p.s, 2);
        assert!(LocalMapParams::derive(20.0, 6.0, 100, 60, 3).is_err());
    }

    #[test]
    fn local_map_boundary() {
        let params = LocalMapParams::default();
        let mut m = VoxelMap::new(0.2);
        let center = Vec3::new(0.1, 0.1, 1.1);
        assert!(local_map(&m, &center, &params).is_empty());
        // Voxel center at x = 10.1 sits exactly on the +X face.
        m.integrate(&PointCloud::earth(vec![Vec3::new(10.15, 0.15, 1.15)]), 0.0);
        // Voxel center at x = 10.3 is one voxel beyond.
        m.integrate(&PointCloud::earth(vec![Vec3::new(10.35, 0.15, 1.15)]), 0.0);
        let got = local_map(&m, &center, &params);
        assert_eq!(got.len(), 1);
        assert!((got.points[0].x - 10.1).abs() < 1e-9);
    }

    #[test]
    fn projection_index_arithmetic() {
        let params = LocalMapParams::default();
        let center = Vec3::new(0.1, 0.1, 1.0);
        assert!(project_2d(&PointCloud::earth(vec![]), &center, &params).occupied_count() == 0);
        let pts = PointCloud::earth(vec![
            center + Vec3::new(3.0, -2.0, 0.5),
            center + Vec3::new(3.0, -2.0, -0.7),
        ]);
        let g = project_2d(&pts, &center, &params);
        assert_eq!(g.occupied_count(), 1);
        let c = params.center_cell();
        assert_eq!(g.get((c.0 + 15, c.1 - 10)), Some(true));
        assert_eq!(g.cell_of(&center.xy()), c);
    }

    #[test]
    fn local_maps_shapes() {
        let params = LocalMapParams::default();
        let maps = LocalMaps::build(&PointCloud::earth(vec![]), &Vec3::new(3.0, 4.0, 1.0), &params).unwrap();
        assert_eq!((maps.map_1.width(), maps.map_1b.width(), maps.map_c.width()), (100, 50, 50));
        assert_eq!(maps.center_cell_c(), (25, 25));
        assert_eq!(maps.center_cell_b(), (25, 25));
        let drone = maps.map_1.center_of(params.center_cell());
        assert!((maps.map_c.center_of(maps.center_cell_c()) - drone).norm() < 1e-9);
        assert!((maps.map_1b.center_of(maps.center_cell_b()) - drone).norm() <= 0.2);
    }
}
