//! Image bytes to level, shared by the CLI and the HTTP service.

use serde::Serialize;
use sketchlevel_core::levelgen::{generate, GenerateError, GenerationConfig, LevelSpec};
use sketchlevel_core::levelxml::{emit, to_document, DocumentDefaults};
use sketchlevel_core::raster::{binarize, grid_map, BinaryGrid, Bitmap, RasterError};
use sketchlevel_core::recognizer::{classify, RecognitionResult, RecognizeError, TemplateSet};
use sketchlevel_core::stability::{check_support, difficulty_stats, DifficultyStats, StabilityReport};
use sketchlevel_core::starter::starter_templates;
use sketchlevel_core::{SketchImage, TherapyBank};
use thiserror::Error;

use crate::image::{load_any, ImageError};

/// Any failure between image bytes and a level.
#[derive(Debug, Error)]
pub enum PipelineError {
    /// Image could not be decoded.
    #[error(transparent)]
    Image(#[from] ImageError),
    /// Grid mapping failed.
    #[error(transparent)]
    Raster(#[from] RasterError),
    /// Generation failed or went over budget.
    #[error(transparent)]
    Generate(#[from] GenerateError),
    /// Recognition failed.
    #[error(transparent)]
    Recognize(#[from] RecognizeError),
}

/// Everything produced for one drawing.
#[derive(Debug, Clone, Serialize)]
pub struct Generated {
    /// Occupancy grid.
    pub grid: BinaryGrid,
    /// Level on the grid.
    pub spec: LevelSpec,
    /// Level file text.
    pub xml: String,
    /// What the drawing looks like.
    pub recognition: RecognitionResult,
    /// Support check.
    pub stability: StabilityReport,
    /// Counts and score.
    pub stats: DifficultyStats,
}

/// Configured pipeline.
#[derive(Debug, Clone)]
pub struct Pipeline {
    /// Defaults for generation; requests may override some fields.
    pub config: GenerationConfig,
    /// Camera, slingshot and type names.
    pub document: DocumentDefaults,
    /// Recognizer templates.
    pub model: TemplateSet,
    /// Feedback data.
    pub therapy: TherapyBank,
}

impl Default for Pipeline {
    fn default() -> Self {
        Self {
            config: GenerationConfig::default(),
            document: DocumentDefaults::default(),
            model: starter_templates(),
            therapy: TherapyBank::builtin(),
        }
    }
}

impl Pipeline {
    fn bitmap(img: &SketchImage, cfg: &GenerationConfig) -> Bitmap {
        binarize(img, cfg.threshold)
    }

    /// Drawing to occupancy grid.
    pub fn grid(&self, img: &SketchImage, cfg: &GenerationConfig) -> Result<BinaryGrid, PipelineError> {
        Ok(grid_map(&Self::bitmap(img, cfg), cfg.cols, cfg.rows, cfg.fill_ratio)?)
    }

    /// Classifies a drawing. Uses the generation grid when it matches the
    /// model; otherwise maps the drawing again at the model's size.
    pub fn recognize_grid(
        &self,
        img: &SketchImage,
        grid: &BinaryGrid,
        cfg: &GenerationConfig,
    ) -> Result<RecognitionResult, PipelineError> {
        if grid.cols() == self.model.grid.cols && grid.rows() == self.model.grid.rows {
            return Ok(classify(grid, &self.model)?);
        }
        let own = grid_map(
            &Self::bitmap(img, cfg),
            self.model.grid.cols,
            self.model.grid.rows,
            cfg.fill_ratio,
        )?;
        Ok(classify(&own, &self.model)?)
    }

    /// Decodes and classifies an image.
    pub fn recognize(&self, bytes: &[u8], cfg: &GenerationConfig) -> Result<RecognitionResult, PipelineError> {
        let img = load_any(bytes)?;
        let grid = grid_map(
            &Self::bitmap(&img, cfg),
            self.model.grid.cols,
            self.model.grid.rows,
            cfg.fill_ratio,
        )?;
        Ok(classify(&grid, &self.model)?)
    }

    /// Runs the whole chain for decoded pixels.
    pub fn generate_image(&self, img: &SketchImage, cfg: &GenerationConfig) -> Result<Generated, PipelineError> {
        let grid = self.grid(img, cfg)?;
        let recognition = self.recognize_grid(img, &grid, cfg)?;
        let spec = generate(&grid, cfg)?;
        let stability = check_support(&spec);
        let stats = difficulty_stats(&spec);
        let xml = emit(&to_document(&spec, &self.document));
        Ok(Generated {
            grid,
            spec,
            xml,
            recognition,
            stability,
            stats,
        })
    }

    /// Runs the whole chain for encoded image bytes.
    pub fn generate(&self, bytes: &[u8], cfg: &GenerationConfig) -> Result<Generated, PipelineError> {
        self.generate_image(&load_any(bytes)?, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::encode_png;

    #[test]
    fn blank_page_gives_empty_stable_level() {
        let pipeline = Pipeline::default();
        let png = encode_png(&SketchImage::blank(256, 256).unwrap());
        let out = pipeline.generate(&png, &pipeline.config).unwrap();
        assert!(out.spec.blocks.is_empty());
        assert!(out.stability.stable);
        assert!(out.xml.contains("<GameObjects/>"));
        assert_eq!(out.recognition.entries.len(), 5);
    }

    #[test]
    fn other_grid_sizes_still_classify() {
        let pipeline = Pipeline::default();
        let cfg = GenerationConfig {
            cols: 8,
            rows: 8,
            ..pipeline.config.clone()
        };
        let out = pipeline
            .generate_image(&SketchImage::blank(64, 64).unwrap(), &cfg)
            .unwrap();
        assert_eq!((out.grid.cols(), out.grid.rows()), (8, 8));
        assert_eq!(out.recognition.entries.len(), 5);
    }

    #[test]
    fn ink_everywhere_is_over_budget() {
        let pipeline = Pipeline::default();
        let cfg = GenerationConfig {
            max_blocks: 100,
            ..pipeline.config.clone()
        };
        let img = SketchImage::new(32, 20, vec![0; 640]).unwrap();
        assert!(matches!(
            pipeline.generate_image(&img, &cfg),
            Err(PipelineError::Generate(GenerateError::OverBudget { count: 160, cap: 100 }))
        ));
    }
}
