//! Drawing recognition with a top-five contract.
//!
//! The shipped classifier compares a grid against one mean-occupancy
//! template per label and turns distances into confidences with a softmax.
//! Anything implementing [`Classifier`] can stand in for it.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::BinaryGrid;

/// Default softmax temperature.
pub const DEFAULT_TAU: f64 = 0.05;
/// Longest result list.
pub const TOP_K: usize = 5;

/// Recognition failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecognizeError {
    /// Grid or template dimensions disagree.
    #[error("expected a {expected_cols}x{expected_rows} grid, got {cols}x{rows}")]
    Dimension {
        /// Model columns.
        expected_cols: usize,
        /// Model rows.
        expected_rows: usize,
        /// Offending columns.
        cols: usize,
        /// Offending rows.
        rows: usize,
    },
    /// Unusable template set.
    #[error("invalid model: {0}")]
    Model(String),
}

/// One ranked guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recognition {
    /// Class name.
    pub label: String,
    /// Confidence in `[0, 1]`.
    pub confidence: f64,
}

/// Up to five guesses, most confident first; ties in label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionResult {
    /// Ranked entries.
    pub entries: Vec<Recognition>,
}

impl RecognitionResult {
    /// Best guess, if any.
    pub fn top_label(&self) -> Option<&str> {
        self.entries.first().map(|e| e.label.as_str())
    }
}

fn rank(a: &Recognition, b: &Recognition) -> Ordering {
    b.confidence
        .partial_cmp(&a.confidence)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.label.cmp(&b.label))
}

/// Something that names what a grid depicts.
pub trait Classifier {
    /// Ranked guesses for `grid`.
    fn classify(&self, grid: &BinaryGrid) -> Result<RecognitionResult, RecognizeError>;
}

/// Grid dimensions of a template set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    /// Columns.
    pub cols: usize,
    /// Rows.
    pub rows: usize,
}

/// One class and its mean occupancy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateClass {
    /// Class name.
    pub label: String,
    /// Row-major mean occupancy, grid row 1 (bottom) first.
    pub centroid: Vec<f64>,
}

/// Nearest-centroid model. Serializes as
/// `{"grid": {"cols", "rows"}, "classes": [{"label", "centroid"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSet {
    /// Grid dimensions.
    pub grid: GridDims,
    /// Classes in declaration order.
    pub classes: Vec<TemplateClass>,
    /// Softmax temperature.
    #[serde(skip, default = "default_tau")]
    pub tau: f64,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

impl TemplateSet {
    /// Checks label count, uniqueness, dims and value ranges.
    pub fn validate(&self) -> Result<(), RecognizeError> {
        if self.classes.len() < 2 {
            return Err(RecognizeError::Model("need at least two classes".into()));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(RecognizeError::Model("tau must be positive".into()));
        }
        let cells = self.grid.cols * self.grid.rows;
        for (i, class) in self.classes.iter().enumerate() {
            if class.label.is_empty() {
                return Err(RecognizeError::Model("empty label".into()));
            }
            if self.classes[..i].iter().any(|c| c.label == class.label) {
                return Err(RecognizeError::Model(alloc::format!(
                    "duplicate label {:?}",
                    class.label
                )));
            }
            if class.centroid.len() != cells {
                return Err(RecognizeError::Model(alloc::format!(
                    "centroid of {:?} has {} cells, grid has {cells}",
                    class.label,
                    class.centroid.len()
                )));
            }
            if class.centroid.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(RecognizeError::Model(alloc::format!(
                    "centroid of {:?} has values outside [0, 1]",
                    class.label
                )));
            }
        }
        Ok(())
    }

    /// Same model with another temperature.
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    /// Labels in declaration order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().map(|c| c.label.as_str())
    }

    /// Mean squared difference between `grid` and every centroid.
    pub fn distances(&self, grid: &BinaryGrid) -> Result<Vec<f64>, RecognizeError> {
        if grid.cols() != self.grid.cols || grid.rows() != self.grid.rows {
            return Err(RecognizeError::Dimension {
                expected_cols: self.grid.cols,
                expected_rows: self.grid.rows,
                cols: grid.cols(),
                rows: grid.rows(),
            });
        }
        let n = grid.cells().len().max(1) as f64;
        Ok(self
            .classes
            .iter()
            .map(|class| {
                grid.cells()
                    .iter()
                    .zip(&class.centroid)
                    .map(|(&cell, &c)| {
                        let d = f64::from(u8::from(cell)) - c;
                        d * d
                    })
                    .sum::<f64>()
                    / n
            })
            .collect())
    }
}

impl Classifier for TemplateSet {
    fn classify(&self, grid: &BinaryGrid) -> Result<RecognitionResult, RecognizeError> {
        classify(grid, self)
    }
}

/// Ranks every label by `exp(-d / tau)`, normalized over all labels, and
/// keeps the best five.
pub fn classify(grid: &BinaryGrid, model: &TemplateSet) -> Result<RecognitionResult, RecognizeError> {
    model.validate()?;
    let distances = model.distances(grid)?;
    // Shift by the minimum distance so the best label weighs exactly 1.
    let best = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = distances
        .iter()
        .map(|d| libm::exp(-(d - best) / model.tau))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut entries: Vec<Recognition> = model
        .classes
        .iter()
        .zip(&weights)
        .map(|(class, w)| Recognition {
            label: class.label.clone(),
            confidence: (w / total).clamp(0.0, 1.0),
        })
        .collect();
    entries.sort_by(rank);
    entries.truncate(TOP_K);
    Ok(RecognitionResult { entries })
}

/// Averages the examples of each declared label into a centroid.
///
/// Every label needs at least one example and every example must use a
/// declared label.
pub fn build_templates(
    labels: &[String],
    examples: &[(String, BinaryGrid)],
) -> Result<TemplateSet, RecognizeError> {
    let first = examples
        .first()
        .ok_or_else(|| RecognizeError::Model("no examples".into()))?;
    let (cols, rows) = (first.1.cols(), first.1.rows());
    let mut sums: Vec<(Vec<f64>, usize)> = vec![(vec![0.0; cols * rows], 0); labels.len()];
    for (label, grid) in examples {
        if grid.cols() != cols || grid.rows() != rows {
            return Err(RecognizeError::Dimension {
                expected_cols: cols,
                expected_rows: rows,
                cols: grid.cols(),
                rows: grid.rows(),
            });
        }
        let slot = labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| RecognizeError::Model(alloc::format!("undeclared label {label:?}")))?;
        let (sum, count) = &mut sums[slot];
        for (acc, &cell) in sum.iter_mut().zip(grid.cells()) {
            *acc += f64::from(u8::from(cell));
        }
        *count += 1;
    }
    let classes = labels
        .iter()
        .zip(sums)
        .map(|(label, (sum, count))| {
            if count == 0 {
                return Err(RecognizeError::Model(alloc::format!(
                    "label {label:?} has no examples"
                )));
            }
            Ok(TemplateClass {
                label: label.clone(),
                centroid: sum.into_iter().map(|s| s / count as f64).collect(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let set = TemplateSet {
        grid: GridDims { cols, rows },
        classes,
        tau: DEFAULT_TAU,
    };
    set.validate()?;
    Ok(set)
}
