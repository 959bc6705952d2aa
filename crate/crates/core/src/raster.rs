//! Grayscale sketches, thresholding, and tiling onto the generation grid.
//!
//! Image data is row-major with the top image row first. Grid data is
//! row-major with grid row 1 (the row touching the ground) first, so the
//! vertical axis flips between the two.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default binarization threshold. Pixels strictly darker than this are ink.
pub const DEFAULT_THRESHOLD: u8 = 128;
/// Default number of grid columns.
pub const DEFAULT_COLS: usize = 16;
/// Default number of grid rows.
pub const DEFAULT_ROWS: usize = 10;
/// Default minimum ink coverage for a tile to become an occupied cell.
pub const DEFAULT_FILL_RATIO: f64 = 0.20;

/// Errors from building or tiling rasters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RasterError {
    /// Width or height was zero.
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage {
        /// Requested width.
        width: usize,
        /// Requested height.
        height: usize,
    },
    /// Pixel buffer does not match the declared dimensions.
    #[error("expected {expected} pixels for the declared dimensions, got {actual}")]
    PixelCount {
        /// width * height.
        expected: usize,
        /// Buffer length.
        actual: usize,
    },
    /// Requested grid is larger than the bitmap, or empty.
    #[error("grid {cols}x{rows} does not fit a {width}x{height} bitmap")]
    Dimension {
        /// Requested columns.
        cols: usize,
        /// Requested rows.
        rows: usize,
        /// Bitmap width.
        width: usize,
        /// Bitmap height.
        height: usize,
    },
    /// fill_ratio outside (0, 1].
    #[error("fill ratio must be in (0, 1], got {0}")]
    FillRatio(f64),
}

/// A grayscale drawing. 0 is black ink, 255 is white paper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl SketchImage {
    /// Wraps a row-major pixel buffer, top row first.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(RasterError::EmptyImage { width, height })?;
        if pixels.len() != expected {
            return Err(RasterError::PixelCount {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// A blank page of the given size.
    pub fn blank(width: usize, height: usize) -> Result<Self, RasterError> {
        Self::new(width, height, vec![255; width.saturating_mul(height)])
    }

    /// Width in pixels.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Height in pixels.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major intensities, top row first.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Intensity at `(x, y)` with `y = 0` the top row.
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Per-pixel ink mask in image orientation (top row first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Bitmap {
    /// Wraps a row-major bit buffer, top row first.
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage { width, height });
        }
        if bits.len() != width * height {
            return Err(RasterError::PixelCount {
                expected: width * height,
                actual: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Width in pixels.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Height in pixels.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Ink bit at `(x, y)` with `y = 0` the top row.
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Row-major bits, top row first.
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of ink pixels.
    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Re-embeds the mask as an image: ink as 0, paper as 255.
    pub fn to_image(&self) -> SketchImage {
        let pixels = self.bits.iter().map(|&b| if b { 0 } else { 255 }).collect();
        SketchImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// Occupancy grid the generator scans. Rows count upward from the ground.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryGrid {
    cols: usize,
    rows: usize,
    /// Row-major, grid row 1 first.
    cells: Vec<bool>,
}

impl BinaryGrid {
    /// An all-empty grid.
    pub fn empty(cols: usize, rows: usize) -> Self {
        Self {
            cols,
            rows,
            cells: vec![false; cols * rows],
        }
    }

    /// Builds a grid from row-major cells, bottom row first.
    pub fn from_cells(cols: usize, rows: usize, cells: Vec<bool>) -> Result<Self, RasterError> {
        if cells.len() != cols * rows {
            return Err(RasterError::PixelCount {
                expected: cols * rows,
                actual: cells.len(),
            });
        }
        Ok(Self { cols, rows, cells })
    }

    /// Builds a grid from text rows listed top row first, `#` for ink.
    /// Any other character is empty. Every line must have the same length.
    pub fn from_art<'a, I>(lines: I) -> Result<Self, RasterError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let lines: Vec<&str> = lines.into_iter().collect();
        let rows = lines.len();
        let cols = lines.first().map_or(0, |l| l.chars().count());
        let mut grid = Self::empty(cols, rows);
        for (i, line) in lines.iter().enumerate() {
            if line.chars().count() != cols {
                return Err(RasterError::PixelCount {
                    expected: cols,
                    actual: line.chars().count(),
                });
            }
            let row = rows - i;
            for (c, ch) in line.chars().enumerate() {
                grid.set(c + 1, row, ch == '#');
            }
        }
        Ok(grid)
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    fn index(&self, col: usize, row: usize) -> usize {
        assert!(
            (1..=self.cols).contains(&col) && (1..=self.rows).contains(&row),
            "cell ({col}, {row}) outside {}x{} grid",
            self.cols,
            self.rows
        );
        (row - 1) * self.cols + (col - 1)
    }

    /// Occupancy of the 1-based `(col, row)` cell.
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.cells[self.index(col, row)]
    }

    /// Sets the 1-based `(col, row)` cell.
    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        let i = self.index(col, row);
        self.cells[i] = value;
    }

    /// Row-major cells, grid row 1 first.
    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// Number of occupied cells.
    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }
}

/// Thresholds a drawing: a pixel is ink iff its intensity is strictly below
/// `threshold`.
pub fn binarize(img: &SketchImage, threshold: u8) -> Bitmap {
    Bitmap {
        width: img.width,
        height: img.height,
        bits: img.pixels.iter().map(|&p| p < threshold).collect(),
    }
}

/// Half-open pixel span of tile `index` when `len` pixels are cut into
/// `count` tiles. The last tile absorbs the remainder.
fn tile_span(len: usize, count: usize, index: usize) -> (usize, usize) {
    let size = len / count;
    let start = index * size;
    let end = if index + 1 == count { len } else { start + size };
    (start, end)
}

/// Cuts the bitmap into `cols x rows` tiles and marks a cell occupied when
/// the ink fraction of its tile reaches `fill_ratio`.
///
/// Tiles are `width / cols` by `height / rows` pixels, with leftover pixels
/// going to the rightmost column and the bottom row of tiles. The top image
/// tile row becomes grid row `rows`.
pub fn grid_map(
    bitmap: &Bitmap,
    cols: usize,
    rows: usize,
    fill_ratio: f64,
) -> Result<BinaryGrid, RasterError> {
    if !(fill_ratio > 0.0 && fill_ratio <= 1.0) {
        return Err(RasterError::FillRatio(fill_ratio));
    }
    if cols == 0 || rows == 0 || cols > bitmap.width || rows > bitmap.height {
        return Err(RasterError::Dimension {
            cols,
            rows,
            width: bitmap.width,
            height: bitmap.height,
        });
    }
    let mut grid = BinaryGrid::empty(cols, rows);
    for tile_row in 0..rows {
        let (y0, y1) = tile_span(bitmap.height, rows, tile_row);
        for tile_col in 0..cols {
            let (x0, x1) = tile_span(bitmap.width, cols, tile_col);
            let inked = (y0..y1)
                .flat_map(|y| (x0..x1).map(move |x| (x, y)))
                .filter(|&(x, y)| bitmap.get(x, y))
                .count();
            let area = (y1 - y0) * (x1 - x0);
            if inked as f64 / area as f64 >= fill_ratio {
                grid.set(tile_col + 1, rows - tile_row, true);
            }
        }
    }
    Ok(grid)
}
