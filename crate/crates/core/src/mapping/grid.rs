use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::MapError;
use crate::types::Vec2;

/// Integer cell coordinate `(x, y)`.
pub type Cell = (i32, i32);

/// Binary occupancy grid. `origin` is the Earth-frame XY center of cell
/// `(0, 0)`; cell `(x, y)` is stored at `y * width + x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMap2D {
    pub origin: Vec2,
    pub resolution: f64,
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl GridMap2D {
    pub fn new(origin: Vec2, resolution: f64, width: usize, height: usize) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        Self {
            origin,
            resolution,
            width,
            height,
            cells: vec![0; width * height],
        }
    }

    /// Builds a grid from rows of `0`/`1`, first row is `y = 0`.
    pub fn from_rows(origin: Vec2, resolution: f64, rows: &[Vec<u8>]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        let mut g = Self::new(origin, resolution, width, height);
        for (y, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), width, "ragged rows");
            for (x, &v) in row.iter().enumerate() {
                g.cells[y * width + x] = u8::from(v != 0);
            }
        }
        g
    }

    /// Parses an ASCII picture: `#` marks an occupied cell, anything else is free.
    /// The first text line is `y = 0`.
    pub fn from_ascii(origin: Vec2, resolution: f64, art: &str) -> Self {
        let rows: Vec<Vec<u8>> = art
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.chars().map(|c| u8::from(c == '#')).collect())
            .collect();
        Self::from_rows(origin, resolution, &rows)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.0 >= 0 && c.1 >= 0 && (c.0 as usize) < self.width && (c.1 as usize) < self.height
    }

    /// Occupancy of an in-bounds cell; `None` outside the grid.
    pub fn get(&self, c: Cell) -> Option<bool> {
        self.in_bounds(c)
            .then(|| self.cells[c.1 as usize * self.width + c.0 as usize] != 0)
    }

    /// Out-of-bounds cells count as occupied.
    pub fn is_occupied(&self, c: Cell) -> bool {
        self.get(c).unwrap_or(true)
    }

    pub fn is_free(&self, c: Cell) -> bool {
        !self.is_occupied(c)
    }

    pub fn set(&mut self, c: Cell, occupied: bool) {
        assert!(self.in_bounds(c), "cell {c:?} out of bounds");
        self.cells[c.1 as usize * self.width + c.0 as usize] = u8::from(occupied);
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v != 0).count()
    }

    /// Nearest cell to an Earth XY point (may be out of bounds).
    pub fn cell_of(&self, xy: &Vec2) -> Cell {
        (
            ((xy.x - self.origin.x) / self.resolution).round() as i32,
            ((xy.y - self.origin.y) / self.resolution).round() as i32,
        )
    }

    /// Earth XY center of a cell.
    pub fn center_of(&self, c: Cell) -> Vec2 {
        Vec2::new(
            self.origin.x + c.0 as f64 * self.resolution,
            self.origin.y + c.1 as f64 * self.resolution,
        )
    }

    /// Cell nearest to `c` that lies inside the grid.
    pub fn clamp_cell(&self, c: Cell) -> Cell {
        (
            c.0.clamp(0, self.width as i32 - 1),
            c.1.clamp(0, self.height as i32 - 1),
        )
    }

    pub fn is_edge_cell(&self, c: Cell) -> bool {
        self.in_bounds(c)
            && (c.0 == 0
                || c.1 == 0
                || c.0 == self.width as i32 - 1
                || c.1 == self.height as i32 - 1)
    }

    /// Occupancy of `c` after inflation by `k`, without building the inflated
    /// grid: any occupied cell within Chebyshev radius `k / 2`. Out-of-bounds
    /// `c` counts as occupied; out-of-bounds neighbours do not.
    pub fn is_occupied_inflated(&self, c: Cell, k: usize) -> bool {
        if !self.in_bounds(c) {
            return true;
        }
        let r = (k / 2) as i32;
        (-r..=r).any(|dy| (-r..=r).any(|dx| self.get((c.0 + dx, c.1 + dy)) == Some(true)))
    }

    /// The `w × h` sub-grid whose cell `(0, 0)` is `corner` in this grid.
    /// Cells outside this grid are copied as occupied.
    pub fn window(&self, corner: Cell, w: usize, h: usize) -> GridMap2D {
        let mut out = GridMap2D::new(self.center_of(corner), self.resolution, w, h);
        for y in 0..h {
            for x in 0..w {
                let src = (corner.0 + x as i32, corner.1 + y as i32);
                out.cells[y * w + x] = u8::from(self.is_occupied(src));
            }
        }
        out
    }

    /// Marks every cell within Chebyshev radius `k / 2` of an occupied cell.
    /// Same size as the input; the border is zero padded.
    pub fn inflate(&self, k: usize) -> Result<GridMap2D, MapError> {
        if k == 0 || k.is_multiple_of(2) {
            return Err(MapError::EvenKernel(k));
        }
        let r = (k / 2) as isize;
        if r == 0 {
            return Ok(self.clone());
        }
        let (w, h) = (self.width as isize, self.height as isize);
        // Separable max filter: rows, then columns.
        let mut rows = vec![0u8; self.cells.len()];
        for y in 0..h {
            for x in 0..w {
                let lo = (x - r).max(0);
                let hi = (x + r).min(w - 1);
                let any = (lo..=hi).any(|xx| self.cells[(y * w + xx) as usize] != 0);
                rows[(y * w + x) as usize] = u8::from(any);
            }
        }
        let mut out = self.clone();
        for y in 0..h {
            for x in 0..w {
                let lo = (y - r).max(0);
                let hi = (y + r).min(h - 1);
                let any = (lo..=hi).any(|yy| rows[(yy * w + x) as usize] != 0);
                out.cells[(y * w + x) as usize] = u8::from(any);
            }
        }
        Ok(out)
    }

    /// Zero-pads `s` columns on the right and `s` rows at the bottom (high
    /// indices), then mean-pools `h × h` blocks with rounding: a block is
    /// occupied iff at least half of its cells are occupied.
    pub fn downsample(&self, h: usize, s: usize) -> Result<GridMap2D, MapError> {
        if h == 0 {
            return Err(MapError::InvalidParams("downsample kernel must be ≥ 1".into()));
        }
        let (pw, ph) = (self.width + s, self.height + s);
        if pw % h != 0 {
            return Err(MapError::NotDivisible { padded: pw, kernel: h });
        }
        if ph % h != 0 {
            return Err(MapError::NotDivisible { padded: ph, kernel: h });
        }
        let (ow, oh) = (pw / h, ph / h);
        let offset = (h as f64 - 1.0) / 2.0 * self.resolution;
        let mut out = GridMap2D::new(
            self.origin + Vec2::new(offset, offset),
            self.resolution * h as f64,
            ow,
            oh,
        );
        for by in 0..oh {
            for bx in 0..ow {
                let mut count = 0usize;
                for y in by * h..(by + 1) * h {
                    for x in bx * h..(bx + 1) * h {
                        if x < self.width && y < self.height && self.cells[y * self.width + x] != 0 {
                            count += 1;
                        }
                    }
                }
                out.cells[by * ow + bx] = u8::from(2 * count >= h * h);
            }
        }
        Ok(out)
    }

    /// ASCII PGM (P2) dump, occupied cells black. Row 0 of the image is the
    /// highest `y` so the picture has north up.
    pub fn to_pgm(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "P2\n{} {}\n1", self.width, self.height);
        for y in (0..self.height).rev() {
            let row: Vec<&str> = (0..self.width)
                .map(|x| if self.cells[y * self.width + x] != 0 { "0" } else { "1" })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}
