//! Pixel grids, physical coordinates, and rectangular region tilings.
//!
//! All fields and images in this crate live on a [`GridSpec`]: a rectangular
//! pixel raster with a physical pixel pitch and a beam-center reference point.
//! Coordinates follow image conventions — `x` grows with column index, `y`
//! grows with row index — and physical positions are measured from the grid
//! center in pitch units:
//!
//! ```text
//! x(ix) = (ix - cx) * pitch      y(iy) = (iy - cy) * pitch
//! ```
//!
//! [`RegionGrid`] tiles a grid into square super-pixels for spatially resolved
//! analysis; partial tiles at the right/bottom edges are dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum supported grid side, in pixels.
pub const MIN_GRID_SIDE: usize = 16;

/// Rectangular pixel raster with physical scale and center reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Width in pixels (columns).
    pub width_px: usize,
    /// Height in pixels (rows).
    pub height_px: usize,
    /// Physical pixel pitch (same unit as waists and extents).
    pub pixel_pitch: f64,
    /// Beam-center position in pixel coordinates `(cx, cy)`.
    pub center: (f64, f64),
}

impl GridSpec {
    /// Create a grid with the default center convention
    /// `((w - 1) / 2, (h - 1) / 2)` — the geometric center of the pixel
    /// lattice (half-integral for even sides).
    pub fn new(width_px: usize, height_px: usize, pixel_pitch: f64) -> Result<Self> {
        let center = (
            (width_px as f64 - 1.0) / 2.0,
            (height_px as f64 - 1.0) / 2.0,
        );
        Self::with_center(width_px, height_px, pixel_pitch, center)
    }

    /// Create a grid with an explicit beam-center position.
    pub fn with_center(
        width_px: usize,
        height_px: usize,
        pixel_pitch: f64,
        center: (f64, f64),
    ) -> Result<Self> {
        if width_px < MIN_GRID_SIDE || height_px < MIN_GRID_SIDE {
            return Err(Error::GridTooSmall {
                width: width_px,
                height: height_px,
            });
        }
        if !(pixel_pitch > 0.0) || !pixel_pitch.is_finite() {
            return Err(Error::NonPositivePitch(pixel_pitch));
        }
        if !center.0.is_finite() || !center.1.is_finite() {
            return Err(Error::Config(format!(
                "grid center must be finite, got ({}, {})",
                center.0, center.1
            )));
        }
        Ok(GridSpec {
            width_px,
            height_px,
            pixel_pitch,
            center,
        })
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.width_px * self.height_px
    }

    /// Always false; grids have at least `MIN_GRID_SIDE^2` pixels.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical extents `(width, height)`.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.width_px as f64 * self.pixel_pitch,
            self.height_px as f64 * self.pixel_pitch,
        )
    }

    /// Smaller of the two physical extents.
    pub fn min_extent(&self) -> f64 {
        let (w, h) = self.extent();
        w.min(h)
    }

    /// Physical position of pixel `(ix, iy)` relative to the beam center.
    pub fn position(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            (ix as f64 - self.center.0) * self.pixel_pitch,
            (iy as f64 - self.center.1) * self.pixel_pitch,
        )
    }

    /// Radius and azimuth of pixel `(ix, iy)` relative to the beam center.
    ///
    /// The azimuth is `atan2(y, x)` in the image frame (y grows downward on
    /// screen renderings).
    pub fn polar(&self, ix: usize, iy: usize) -> (f64, f64) {
        let (x, y) = self.position(ix, iy);
        ((x * x + y * y).sqrt(), y.atan2(x))
    }

    /// True when `(ix, iy)` addresses a pixel of this grid.
    pub fn contains(&self, ix: usize, iy: usize) -> bool {
        ix < self.width_px && iy < self.height_px
    }

    /// Error unless the two grids have identical pixel dimensions.
    pub fn ensure_same_shape(&self, other: &GridSpec) -> Result<()> {
        if self.width_px != other.width_px || self.height_px != other.height_px {
            return Err(Error::GridMismatch(
                self.width_px,
                self.height_px,
                other.width_px,
                other.height_px,
            ));
        }
        Ok(())
    }
}

/// Axis-aligned pixel rectangle `[x0, x0+width) x [y0, y0+height)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    /// Leftmost column.
    pub x0: usize,
    /// Topmost row.
    pub y0: usize,
    /// Width in pixels.
    pub width: usize,
    /// Height in pixels.
    pub height: usize,
}

impl PixelRect {
    /// Construct a rectangle; width and height must be nonzero.
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!(
                "pixel rectangle must be non-empty, got {width}x{height}"
            )));
        }
        Ok(PixelRect {
            x0,
            y0,
            width,
            height,
        })
    }

    /// Rectangle covering the single pixel `(ix, iy)`.
    pub fn single(ix: usize, iy: usize) -> Self {
        PixelRect {
            x0: ix,
            y0: iy,
            width: 1,
            height: 1,
        }
    }

    /// Number of pixels covered.
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    /// Center of the rectangle in pixel coordinates.
    pub fn center(&self) -> (f64, f64) {
        (
            self.x0 as f64 + (self.width as f64 - 1.0) / 2.0,
            self.y0 as f64 + (self.height as f64 - 1.0) / 2.0,
        )
    }

    /// Iterate over `(ix, iy)` pairs in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (x0, y0, w, h) = (self.x0, self.y0, self.width, self.height);
        (y0..y0 + h).flat_map(move |iy| (x0..x0 + w).map(move |ix| (ix, iy)))
    }

    /// Error unless the rectangle lies fully inside `grid`.
    pub fn ensure_inside(&self, grid: &GridSpec) -> Result<()> {
        if self.x0 + self.width > grid.width_px || self.y0 + self.height > grid.height_px {
            return Err(Error::PixelOutsideGrid(
                self.x0 + self.width - 1,
                self.y0 + self.height - 1,
            ));
        }
        Ok(())
    }
}

/// Square tiling of a grid into analysis regions.
///
/// Tiles are `region_px` on a side, laid out from `origin`; partial tiles at
/// the right/bottom edges are dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionGrid {
    /// Tile side length in pixels (>= 1).
    pub region_px: usize,
    /// Pixel position of the first tile's top-left corner.
    pub origin: (usize, usize),
}

/// One tile of a [`RegionGrid`]: its tile indices and pixel extent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    /// Tile column index.
    pub col: usize,
    /// Tile row index.
    pub row: usize,
    /// Pixels covered by this tile.
    pub rect: PixelRect,
}

impl RegionGrid {
    /// Tiling with the given side length, anchored at the grid origin.
    pub fn new(region_px: usize) -> Result<Self> {
        Self::with_origin(region_px, (0, 0))
    }

    /// Tiling with an explicit anchor.
    pub fn with_origin(region_px: usize, origin: (usize, usize)) -> Result<Self> {
        if region_px == 0 {
            return Err(Error::Config("region size must be at least 1 px".into()));
        }
        Ok(RegionGrid { region_px, origin })
    }

    /// Number of whole tiles `(cols, rows)` that fit on `grid`.
    pub fn dims(&self, grid: &GridSpec) -> (usize, usize) {
        let avail_x = grid.width_px.saturating_sub(self.origin.0);
        let avail_y = grid.height_px.saturating_sub(self.origin.1);
        (avail_x / self.region_px, avail_y / self.region_px)
    }

    /// All whole tiles on `grid`, row-major.
    pub fn regions(&self, grid: &GridSpec) -> Vec<Region> {
        let (cols, rows) = self.dims(grid);
        let mut out = Vec::with_capacity(cols * rows);
        for row in 0..rows {
            for col in 0..cols {
                out.push(Region {
                    col,
                    row,
                    rect: PixelRect {
                        x0: self.origin.0 + col * self.region_px,
                        y0: self.origin.1 + row * self.region_px,
                        width: self.region_px,
                        height: self.region_px,
                    },
                });
            }
        }
        out
    }

    /// The tile at `(col, row)` on `grid`, if it exists.
    pub fn region(&self, grid: &GridSpec, col: usize, row: usize) -> Option<Region> {
        let (cols, rows) = self.dims(grid);
        if col >= cols || row >= rows {
            return None;
        }
        Some(Region {
            col,
            row,
            rect: PixelRect {
                x0: self.origin.0 + col * self.region_px,
                y0: self.origin.1 + row * self.region_px,
                width: self.region_px,
                height: self.region_px,
            },
        })
    }
}
