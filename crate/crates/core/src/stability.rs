//! Static support check and difficulty statistics.
//!
//! Blocks are axis-aligned unit cells, so a block stands iff it is on the
//! ground (row 1) or another block sits directly beneath it.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::levelgen::{BlockKind, LevelSpec, Origin};

/// Why a block is unsupported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationReason {
    /// Nothing at all below it in its column.
    Floating,
    /// Something lower in the column, but not directly beneath.
    InternalGap,
}

/// One unsupported block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Column.
    pub col: usize,
    /// Row.
    pub row: usize,
    /// Reason.
    pub reason: ViolationReason,
}

/// Result of [`check_support`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// True iff there are no violations.
    pub stable: bool,
    /// Unsupported blocks in canonical order.
    pub violations: Vec<Violation>,
    /// Grid columns examined.
    pub columns_checked: usize,
}

/// Lists every block that is neither on the ground nor resting on a block.
pub fn check_support(spec: &LevelSpec) -> StabilityReport {
    let occupied: BTreeSet<(usize, usize)> = spec.blocks.iter().map(|b| (b.col, b.row)).collect();
    let violations: Vec<Violation> = occupied
        .iter()
        .filter(|&&(col, row)| row > 1 && !occupied.contains(&(col, row - 1)))
        .map(|&(col, row)| {
            let anything_below = occupied.range((col, 0)..(col, row)).next().is_some();
            Violation {
                col,
                row,
                reason: if anything_below {
                    ViolationReason::InternalGap
                } else {
                    ViolationReason::Floating
                },
            }
        })
        .collect();
    StabilityReport {
        stable: violations.is_empty(),
        violations,
        columns_checked: spec.grid_cols,
    }
}

/// Weights of the difficulty score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyWeights {
    /// Per block.
    pub per_block: i64,
    /// Per row of the tallest column.
    pub per_height: i64,
    /// Subtracted per TNT block.
    pub per_tnt: i64,
}

impl Default for DifficultyWeights {
    fn default() -> Self {
        Self {
            per_block: 1,
            per_height: 2,
            per_tnt: 5,
        }
    }
}

/// Block counts and a rough difficulty score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyStats {
    /// All blocks.
    pub total_blocks: usize,
    /// Blocks covering ink.
    pub drawn_blocks: usize,
    /// Support blocks.
    pub fill_blocks: usize,
    /// TNT blocks.
    pub tnt_count: usize,
    /// Highest occupied row.
    pub max_height: usize,
    /// Columns holding at least one block.
    pub occupied_columns: usize,
    /// `blocks + 2 * height - 5 * tnt` with default weights, floored at 0.
    pub difficulty_score: u64,
}

/// Statistics with the default weights.
pub fn difficulty_stats(spec: &LevelSpec) -> DifficultyStats {
    difficulty_stats_weighted(spec, &DifficultyWeights::default())
}

/// Statistics with custom score weights.
pub fn difficulty_stats_weighted(spec: &LevelSpec, weights: &DifficultyWeights) -> DifficultyStats {
    let total_blocks = spec.blocks.len();
    let drawn_blocks = spec
        .blocks
        .iter()
        .filter(|b| b.origin == Origin::Drawn)
        .count();
    let tnt_count = spec
        .blocks
        .iter()
        .filter(|b| b.kind == BlockKind::Tnt)
        .count();
    let max_height = spec.blocks.iter().map(|b| b.row).max().unwrap_or(0);
    let occupied_columns = spec
        .blocks
        .iter()
        .map(|b| b.col)
        .collect::<BTreeSet<_>>()
        .len();
    let raw = weights.per_block * total_blocks as i64 + weights.per_height * max_height as i64
        - weights.per_tnt * tnt_count as i64;
    DifficultyStats {
        total_blocks,
        drawn_blocks,
        fill_blocks: total_blocks - drawn_blocks,
        tnt_count,
        max_height,
        occupied_columns,
        difficulty_score: raw.max(0) as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelgen::{generate, Block, GenerationConfig, Material};
    use crate::raster::BinaryGrid;
    use alloc::vec;
    use proptest::prelude::*;

    fn solid(col: usize, row: usize, origin: Origin) -> Block {
        Block {
            col,
            row,
            kind: BlockKind::Solid(Material::Wood),
            origin,
        }
    }

    #[test]
    fn empty_level_is_stable() {
        let report = check_support(&LevelSpec::empty(4, 4));
        assert!(report.stable);
        assert!(report.violations.is_empty());
        assert_eq!(report.columns_checked, 4);
    }

    #[test]
    fn floating_block() {
        let mut spec = LevelSpec::empty(4, 4);
        spec.blocks = vec![solid(2, 3, Origin::Drawn)];
        let report = check_support(&spec);
        assert!(!report.stable);
        assert_eq!(
            report.violations,
            vec![Violation {
                col: 2,
                row: 3,
                reason: ViolationReason::Floating
            }]
        );
    }

    #[test]
    fn gap_above_ground_block() {
        let mut spec = LevelSpec::empty(4, 5);
        spec.blocks = vec![solid(1, 1, Origin::Drawn), solid(1, 4, Origin::Drawn)];
        let report = check_support(&spec);
        assert_eq!(report.violations[0].reason, ViolationReason::InternalGap);
    }

    #[test]
    fn single_column_stats() {
        let mut spec = LevelSpec::empty(3, 6);
        spec.blocks = vec![
            solid(2, 1, Origin::Fill),
            solid(2, 2, Origin::Fill),
            solid(2, 3, Origin::Fill),
            solid(2, 4, Origin::Drawn),
        ];
        let stats = difficulty_stats(&spec);
        assert_eq!(stats.total_blocks, 4);
        assert_eq!(stats.drawn_blocks, 1);
        assert_eq!(stats.fill_blocks, 3);
        assert_eq!(stats.max_height, 4);
        assert_eq!(stats.occupied_columns, 1);
        assert_eq!(stats.difficulty_score, 12);

        spec.blocks[0].kind = BlockKind::Tnt;
        let stats = difficulty_stats(&spec);
        assert_eq!(stats.tnt_count, 1);
        assert_eq!(stats.difficulty_score, 7);
    }

    #[test]
    fn score_floors_at_zero() {
        let mut spec = LevelSpec::empty(2, 2);
        spec.blocks = vec![Block {
            kind: BlockKind::Tnt,
            ..solid(1, 1, Origin::Drawn)
        }];
        assert_eq!(difficulty_stats(&spec).difficulty_score, 0);
        assert_eq!(difficulty_stats(&LevelSpec::empty(2, 2)).difficulty_score, 0);
    }

    fn arb_level() -> impl Strategy<Value = LevelSpec> {
        (1usize..10, 1usize..10, any::<u64>(), 0.0f64..=1.0).prop_flat_map(|(c, r, seed, p)| {
            proptest::collection::vec(any::<bool>(), c * r).prop_map(move |cells| {
                let grid = BinaryGrid::from_cells(c, r, cells).unwrap();
                let cfg = GenerationConfig {
                    cols: c,
                    rows: r,
                    seed,
                    tnt_prob: p,
                    ..GenerationConfig::default()
                };
                generate(&grid, &cfg).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn generated_levels_stand(spec in arb_level()) {
            prop_assert!(check_support(&spec).stable);
        }

        #[test]
        fn removing_fill_topples(spec in arb_level()) {
            for (i, b) in spec.blocks.iter().enumerate() {
                if b.origin != Origin::Fill {
                    continue;
                }
                let mut broken = spec.clone();
                broken.blocks.remove(i);
                prop_assert!(!check_support(&broken).stable);
            }
        }

        #[test]
        fn stats_are_consistent(spec in arb_level()) {
            let s = difficulty_stats(&spec);
            prop_assert_eq!(s.total_blocks, s.drawn_blocks + s.fill_blocks);
            prop_assert!(s.tnt_count <= s.total_blocks);
            prop_assert!(s.max_height <= spec.grid_rows);
        }

        #[test]
        fn score_is_monotone(spec in arb_level(), col_pick: usize) {
            let base = difficulty_stats(&spec).difficulty_score;
            // Stack one more solid block on some column.
            let heights = spec.column_heights();
            let col = col_pick % spec.grid_cols + 1;
            let mut taller = spec.clone();
            taller.grid_rows += 1;
            taller.blocks.push(solid(col, heights[col - 1] + 1, Origin::Drawn));
            prop_assert!(difficulty_stats(&taller).difficulty_score >= base);
            // Turn one solid block into TNT.
            if let Some(i) = spec.blocks.iter().position(|b| b.kind != BlockKind::Tnt) {
                let mut easier = spec.clone();
                easier.blocks[i].kind = BlockKind::Tnt;
                prop_assert!(difficulty_stats(&easier).difficulty_score <= base);
            }
        }
    }
}
