//! Column-scan level generator.
//!
//! Each grid column is scanned from the ground up. Every inked cell becomes a
//! block, and whenever an inked cell sits two or more rows above the last
//! placed block (or above the ground, row 0) the gap underneath is filled
//! with support blocks first. Afterwards some blocks are turned into TNT.
//!
//! Blocks are kept in canonical order: ascending column, then ascending row.
//! Serialization and TNT draws both follow that order.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prng::SplitMix64;
use crate::raster::{BinaryGrid, DEFAULT_COLS, DEFAULT_FILL_RATIO, DEFAULT_ROWS, DEFAULT_THRESHOLD};

/// Default chance that a block becomes TNT.
pub const DEFAULT_TNT_PROB: f64 = 0.10;
/// Default block budget per level.
pub const DEFAULT_MAX_BLOCKS: usize = 200;

/// Science Birds block material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Material {
    /// Wood.
    Wood,
    /// Stone.
    Stone,
    /// Ice.
    Ice,
}

impl Material {
    /// Name as written in level files.
    pub fn as_str(self) -> &'static str {
        match self {
            Material::Wood => "wood",
            Material::Stone => "stone",
            Material::Ice => "ice",
        }
    }

    /// Parses the level-file name.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "wood" => Some(Material::Wood),
            "stone" => Some(Material::Stone),
            "ice" => Some(Material::Ice),
            _ => None,
        }
    }
}

/// What a placed block is made of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant", content = "material")]
pub enum BlockKind {
    /// Ordinary block.
    Solid(Material),
    /// Explosive block.
    Tnt,
}

/// Why a block was placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Covers an inked grid cell.
    Drawn,
    /// Support under a drawn block.
    Fill,
}

/// One unit block on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    /// Column, 1-based.
    pub col: usize,
    /// Row, 1-based, row 1 on the ground.
    pub row: usize,
    /// Material or TNT.
    pub kind: BlockKind,
    /// Drawn or fill.
    pub origin: Origin,
}

/// A pig target resting on top of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pig {
    /// Column, 1-based.
    pub col: usize,
    /// Row the pig occupies, one above the column's top block.
    pub row: usize,
}

/// Grid to world coordinate transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldMapping {
    /// World units per column.
    pub block_w: f64,
    /// World units per row.
    pub block_h: f64,
    /// World x of the center of cell (1, 1).
    pub origin_x: f64,
    /// World y of the center of cell (1, 1).
    pub origin_y: f64,
}

impl Default for WorldMapping {
    fn default() -> Self {
        Self {
            block_w: 0.85,
            block_h: 0.85,
            origin_x: -2.0,
            origin_y: 0.0,
        }
    }
}

impl WorldMapping {
    /// Center of cell `(col, row)` in world units.
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 - 1.0) * self.block_w,
            self.origin_y + (row as f64 - 1.0) * self.block_h,
        )
    }

    fn is_valid(&self) -> bool {
        self.block_w.is_finite()
            && self.block_h.is_finite()
            && self.block_w > 0.0
            && self.block_h > 0.0
            && self.origin_x.is_finite()
            && self.origin_y.is_finite()
    }
}

/// Knobs for the whole image-to-level pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    /// Binarization threshold.
    pub threshold: u8,
    /// Grid columns.
    pub cols: usize,
    /// Grid rows.
    pub rows: usize,
    /// Minimum ink coverage of a tile.
    pub fill_ratio: f64,
    /// Per-block TNT chance.
    pub tnt_prob: f64,
    /// Seed for TNT conversion.
    pub seed: u64,
    /// Material for drawn and fill blocks.
    pub material: Material,
    /// Largest block count accepted.
    pub max_blocks: usize,
    /// Grid to world transform.
    pub world: WorldMapping,
    /// Birds available to the player.
    pub birds: usize,
    /// Pigs placed on the tallest columns. Zero disables placement.
    pub pigs: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            cols: DEFAULT_COLS,
            rows: DEFAULT_ROWS,
            fill_ratio: DEFAULT_FILL_RATIO,
            tnt_prob: DEFAULT_TNT_PROB,
            seed: 0,
            material: Material::Wood,
            max_blocks: DEFAULT_MAX_BLOCKS,
            world: WorldMapping::default(),
            birds: 1,
            pigs: 0,
        }
    }
}

impl GenerationConfig {
    /// Checks every numeric range.
    pub fn validate(&self) -> Result<(), GenerateError> {
        let problem = if self.cols == 0 || self.rows == 0 {
            "grid must have at least one column and one row"
        } else if !(self.fill_ratio > 0.0 && self.fill_ratio <= 1.0) {
            "fill_ratio must be in (0, 1]"
        } else if !(0.0..=1.0).contains(&self.tnt_prob) {
            "tnt_prob must be in [0, 1]"
        } else if self.birds == 0 {
            "a level needs at least one bird"
        } else if !self.world.is_valid() {
            "world mapping needs finite values and positive cell sizes"
        } else {
            return Ok(());
        };
        Err(GenerateError::InvalidConfig(problem))
    }
}

/// A generated level on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    /// Grid columns.
    pub grid_cols: usize,
    /// Grid rows.
    pub grid_rows: usize,
    /// Blocks in canonical order.
    pub blocks: Vec<Block>,
    /// Grid to world transform.
    pub world: WorldMapping,
    /// Birds available.
    pub birds: usize,
    /// Seed used for TNT conversion.
    pub seed: u64,
    /// TNT chance used.
    pub tnt_prob: f64,
    /// Pig targets, ascending column.
    #[serde(default)]
    pub pigs: Vec<Pig>,
}

/// Structural problems in a hand-built [`LevelSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    /// Block outside the grid.
    #[error("block at ({col}, {row}) is outside the {cols}x{rows} grid")]
    OutOfBounds {
        /// Column.
        col: usize,
        /// Row.
        row: usize,
        /// Grid columns.
        cols: usize,
        /// Grid rows.
        rows: usize,
    },
    /// Two blocks share a cell.
    #[error("two blocks occupy ({col}, {row})")]
    Duplicate {
        /// Column.
        col: usize,
        /// Row.
        row: usize,
    },
}

impl LevelSpec {
    /// A level with no blocks.
    pub fn empty(cols: usize, rows: usize) -> Self {
        Self {
            grid_cols: cols,
            grid_rows: rows,
            blocks: Vec::new(),
            world: WorldMapping::default(),
            birds: 1,
            seed: 0,
            tnt_prob: 0.0,
            pigs: Vec::new(),
        }
    }

    /// Sorts blocks into canonical order.
    pub fn canonicalize(&mut self) {
        self.blocks.sort_by_key(|b| (b.col, b.row));
        self.pigs.sort_by_key(|p| (p.col, p.row));
    }

    /// Checks bounds and cell uniqueness.
    pub fn validate(&self) -> Result<(), SpecError> {
        let mut seen = vec![false; self.grid_cols * self.grid_rows];
        for b in &self.blocks {
            if !(1..=self.grid_cols).contains(&b.col) || !(1..=self.grid_rows).contains(&b.row) {
                return Err(SpecError::OutOfBounds {
                    col: b.col,
                    row: b.row,
                    cols: self.grid_cols,
                    rows: self.grid_rows,
                });
            }
            let i = (b.row - 1) * self.grid_cols + (b.col - 1);
            if core::mem::replace(&mut seen[i], true) {
                return Err(SpecError::Duplicate {
                    col: b.col,
                    row: b.row,
                });
            }
        }
        Ok(())
    }

    /// Height of every column (the highest occupied row, 0 when empty).
    pub fn column_heights(&self) -> Vec<usize> {
        let mut heights = vec![0; self.grid_cols];
        for b in &self.blocks {
            if let Some(h) = heights.get_mut(b.col.wrapping_sub(1)) {
                *h = (*h).max(b.row);
            }
        }
        heights
    }
}

/// Precondition failure of [`fill_span`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("fill needs a gap of at least 2 rows, got last block {last_block} and pixel {pixel}")]
pub struct ContractError {
    /// Row of the last placed block, 0 for ground.
    pub last_block: usize,
    /// Row of the inked cell.
    pub pixel: usize,
}

/// Generation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    /// Grid and config disagree on dimensions.
    #[error("grid is {grid_cols}x{grid_rows} but config expects {cfg_cols}x{cfg_rows}")]
    DimensionMismatch {
        /// Grid columns.
        grid_cols: usize,
        /// Grid rows.
        grid_rows: usize,
        /// Config columns.
        cfg_cols: usize,
        /// Config rows.
        cfg_rows: usize,
    },
    /// Level would exceed the block budget.
    #[error("level needs {count} blocks, over the cap of {cap}")]
    OverBudget {
        /// Blocks the level needs.
        count: usize,
        /// Configured cap.
        cap: usize,
    },
    /// A config value is out of range.
    #[error("invalid generation config: {0}")]
    InvalidConfig(&'static str),
    /// Internal fill contract broken.
    #[error(transparent)]
    Contract(#[from] ContractError),
}

/// Support blocks for rows `last_block + 1 .. pixel - 1` of `col`.
pub fn fill_span(
    last_block: usize,
    pixel: usize,
    col: usize,
    material: Material,
) -> Result<Vec<Block>, ContractError> {
    if pixel < last_block + 2 {
        return Err(ContractError { last_block, pixel });
    }
    Ok((last_block + 1..pixel)
        .map(|row| Block {
            col,
            row,
            kind: BlockKind::Solid(material),
            origin: Origin::Fill,
        })
        .collect())
}

/// Runs the column scan over `grid`, then converts blocks to TNT.
pub fn generate(grid: &BinaryGrid, cfg: &GenerationConfig) -> Result<LevelSpec, GenerateError> {
    cfg.validate()?;
    if grid.cols() != cfg.cols || grid.rows() != cfg.rows {
        return Err(GenerateError::DimensionMismatch {
            grid_cols: grid.cols(),
            grid_rows: grid.rows(),
            cfg_cols: cfg.cols,
            cfg_rows: cfg.rows,
        });
    }

    let mut blocks = Vec::new();
    for col in 1..=grid.cols() {
        let mut last_block = 0;
        for pixel in 1..=grid.rows() {
            if !grid.get(col, pixel) {
                continue;
            }
            if pixel - last_block >= 2 {
                blocks.extend(fill_span(last_block, pixel, col, cfg.material)?);
            }
            blocks.push(Block {
                col,
                row: pixel,
                kind: BlockKind::Solid(cfg.material),
                origin: Origin::Drawn,
            });
            last_block = pixel;
        }
    }
    if blocks.len() > cfg.max_blocks {
        return Err(GenerateError::OverBudget {
            count: blocks.len(),
            cap: cfg.max_blocks,
        });
    }

    let mut spec = LevelSpec {
        grid_cols: cfg.cols,
        grid_rows: cfg.rows,
        blocks,
        world: cfg.world,
        birds: cfg.birds,
        seed: cfg.seed,
        tnt_prob: cfg.tnt_prob,
        pigs: Vec::new(),
    };
    spec.pigs = place_pigs(&spec, cfg.pigs);
    Ok(convert_tnt(spec, cfg.tnt_prob, cfg.seed))
}

/// Turns each block into TNT with probability `tnt_prob`.
///
/// One uniform draw is consumed per block in canonical order, whatever the
/// block's current kind, so the draw sequence only depends on the count.
pub fn convert_tnt(mut spec: LevelSpec, tnt_prob: f64, seed: u64) -> LevelSpec {
    spec.canonicalize();
    let mut rng = SplitMix64::new(seed);
    for block in &mut spec.blocks {
        if rng.next_f64() < tnt_prob {
            block.kind = BlockKind::Tnt;
        }
    }
    spec
}

/// Puts up to `count` pigs on top of the tallest columns.
///
/// Ties go to the lower column index; at most one pig per column.
pub fn place_pigs(spec: &LevelSpec, count: usize) -> Vec<Pig> {
    let heights = spec.column_heights();
    let mut order: Vec<usize> = (0..heights.len()).collect();
    order.sort_by(|&a, &b| heights[b].cmp(&heights[a]).then(a.cmp(&b)));
    let mut pigs: Vec<Pig> = order
        .into_iter()
        .take(count)
        .map(|i| Pig {
            col: i + 1,
            row: heights[i] + 1,
        })
        .collect();
    pigs.sort_by_key(|p| p.col);
    pigs
}
