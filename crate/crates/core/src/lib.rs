//! Core of the sketch-to-level pipeline.
//!
//! Everything here is pure and allocation-only: a drawing is binarized and
//! mapped onto a coarse grid ([`raster`]), the grid is turned into a stack of
//! unit blocks by a bottom-up column scan ([`levelgen`]), the result is checked
//! for static support ([`stability`]), rendered to the Science Birds level
//! model ([`levelxml`]), recognized against a template set ([`recognizer`]) and
//! finally described back to the player with praise ([`therapy`]).
//!
//! IO, image decoding, XML parsing, persistence and the HTTP service live in
//! the `sketchlevel` crate.
#![cfg_attr(not(test), no_std)]
#![deny(missing_docs)]

extern crate alloc;

pub mod levelgen;
pub mod levelxml;
pub mod prng;
pub mod raster;
pub mod recognizer;
pub mod stability;
pub mod starter;
pub mod therapy;

pub use levelgen::{
    Block, BlockKind, GenerateError, GenerationConfig, LevelSpec, Material, Origin, Pig,
    WorldMapping,
};
pub use levelxml::{LevelDocument, ObjectTag, XmlGameObject};
pub use raster::{BinaryGrid, Bitmap, RasterError, SketchImage};
pub use recognizer::{RecognitionResult, TemplateSet};
pub use stability::{DifficultyStats, StabilityReport};
pub use therapy::{FeedbackPhrase, GameplayOutcome, OutcomeStatus, TherapyBank};
