//! JSON and text data files: template sets and therapy data.

use std::fs;
use std::io;
use std::path::Path;

use sketchlevel_core::recognizer::RecognizeError;
use sketchlevel_core::therapy::TherapyError;
use sketchlevel_core::{TemplateSet, TherapyBank};
use thiserror::Error;

/// Data file failures.
#[derive(Debug, Error)]
pub enum DataError {
    /// File could not be read or written.
    #[error("{path}: {source}")]
    Io {
        /// Path involved.
        path: String,
        /// Cause.
        source: io::Error,
    },
    /// File content is not valid JSON for its schema.
    #[error("{path}: {message}")]
    Format {
        /// Path involved.
        path: String,
        /// Details.
        message: String,
    },
    /// Template set broke an invariant.
    #[error("{path}: {source}")]
    Model {
        /// Path involved.
        path: String,
        /// Cause.
        source: RecognizeError,
    },
    /// Therapy data broke an invariant.
    #[error("{path}: {source}")]
    Therapy {
        /// Path involved.
        path: String,
        /// Cause.
        source: TherapyError,
    },
}

fn read(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a template set from `{grid: {cols, rows}, classes: [{label, centroid}]}`.
pub fn template_set_from_json(text: &str) -> Result<TemplateSet, String> {
    let set: TemplateSet = serde_json::from_str(text).map_err(|e| e.to_string())?;
    set.validate().map_err(|e| e.to_string())?;
    Ok(set)
}

/// Pretty JSON form of a template set.
pub fn template_set_to_json(set: &TemplateSet) -> String {
    let mut text = serde_json::to_string_pretty(set).expect("template sets serialize");
    text.push('\n');
    text
}

/// Loads a template set file.
pub fn load_template_set(path: &Path) -> Result<TemplateSet, DataError> {
    let text = read(path)?;
    let set: TemplateSet = serde_json::from_str(&text).map_err(|e| DataError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    set.validate().map_err(|source| DataError::Model {
        path: path.display().to_string(),
        source,
    })?;
    Ok(set)
}

/// Loads therapy data from a template JSON file and two word lists.
pub fn load_therapy(templates: &Path, praise: &Path, negative: &Path) -> Result<TherapyBank, DataError> {
    TherapyBank::from_sources(&read(templates)?, &read(praise)?, &read(negative)?).map_err(|source| {
        DataError::Therapy {
            path: templates.display().to_string(),
            source,
        }
    })
}
