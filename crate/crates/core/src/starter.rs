//! Checked-in starter sketches and the template set built from them.
//!
//! The sketch file is plain text: `== label` opens an entry, followed by one
//! line per grid row (top row first) using `#` for ink and `.` for paper.
//! Lines starting with `;` and blank lines are skipped.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::raster::BinaryGrid;
use crate::recognizer::{build_templates, TemplateSet};

/// Raw text of the shipped sketches.
pub const STARTER_SKETCHES: &str = include_str!("../data/starter_sketches.txt");

/// Malformed sketch file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sketch file line {line}: {message}")]
pub struct SketchParseError {
    /// 1-based line number.
    pub line: usize,
    /// What went wrong.
    pub message: String,
}

/// Parses a sketch file into `(label, grid)` pairs in file order.
pub fn parse_sketches(text: &str) -> Result<Vec<(String, BinaryGrid)>, SketchParseError> {
    let mut out = Vec::new();
    let mut current: Option<(usize, String, Vec<&str>)> = None;

    let finish = |entry: Option<(usize, String, Vec<&str>)>,
                  out: &mut Vec<(String, BinaryGrid)>|
     -> Result<(), SketchParseError> {
        if let Some((line, label, rows)) = entry {
            if rows.is_empty() {
                return Err(SketchParseError {
                    line,
                    message: alloc::format!("entry {label:?} has no rows"),
                });
            }
            let grid = BinaryGrid::from_art(rows.iter().copied()).map_err(|e| SketchParseError {
                line,
                message: e.to_string(),
            })?;
            out.push((label, grid));
        }
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(label) = line.strip_prefix("==") {
            finish(current.take(), &mut out)?;
            let label = label.trim();
            if label.is_empty() {
                return Err(SketchParseError {
                    line: i + 1,
                    message: "missing label".into(),
                });
            }
            current = Some((i + 1, label.to_string(), Vec::new()));
        } else if let Some((_, _, rows)) = current.as_mut() {
            if let Some(bad) = line.chars().find(|c| *c != '#' && *c != '.') {
                return Err(SketchParseError {
                    line: i + 1,
                    message: alloc::format!("unexpected character {bad:?}"),
                });
            }
            rows.push(line);
        } else {
            return Err(SketchParseError {
                line: i + 1,
                message: "row before the first label".into(),
            });
        }
    }
    finish(current, &mut out)?;

    if let Some((label, g)) = out
        .iter()
        .find(|(_, g)| (g.cols(), g.rows()) != (out[0].1.cols(), out[0].1.rows()))
    {
        return Err(SketchParseError {
            line: 0,
            message: alloc::format!(
                "entry {label:?} is {}x{}, expected {}x{}",
                g.cols(),
                g.rows(),
                out[0].1.cols(),
                out[0].1.rows()
            ),
        });
    }
    Ok(out)
}

/// Labels in order of first appearance.
pub fn labels_of(examples: &[(String, BinaryGrid)]) -> Vec<String> {
    let mut labels: Vec<String> = Vec::new();
    for (label, _) in examples {
        if !labels.contains(label) {
            labels.push(label.clone());
        }
    }
    labels
}

/// The shipped example grids.
pub fn starter_examples() -> Vec<(String, BinaryGrid)> {
    parse_sketches(STARTER_SKETCHES).expect("shipped sketches parse")
}

/// Template set built from [`starter_examples`].
pub fn starter_templates() -> TemplateSet {
    let examples = starter_examples();
    build_templates(&labels_of(&examples), &examples).expect("shipped sketches build a model")
}
