use proptest::prelude::*;
use sketchlevel_core::levelgen::{generate, GenerationConfig, Origin};
use sketchlevel_core::levelxml::{emit, from_document, to_document, DocumentDefaults};
use sketchlevel_core::raster::{binarize, grid_map};
use sketchlevel_core::recognizer::classify;
use sketchlevel_core::stability::{check_support, difficulty_stats};
use sketchlevel_core::starter::{starter_examples, starter_templates};
use sketchlevel_core::therapy::compose_feedback;
use sketchlevel_core::{BinaryGrid, GameplayOutcome, OutcomeStatus, SketchImage};

/// Paints every inked cell of `grid` as a solid `scale`×`scale` square.
fn paint(grid: &BinaryGrid, scale: usize) -> SketchImage {
    let (w, h) = (grid.cols() * scale, grid.rows() * scale);
    let mut pixels = vec![255u8; w * h];
    for y in 0..h {
        for x in 0..w {
            if grid.get(x / scale + 1, grid.rows() - y / scale) {
                pixels[y * w + x] = 0;
            }
        }
    }
    SketchImage::new(w, h, pixels).unwrap()
}

#[test]
fn drawing_to_feedback() {
    let (label, grid) = starter_examples().into_iter().next().unwrap();
    let img = paint(&grid, 8);
    let mapped = grid_map(&binarize(&img, 128), grid.cols(), grid.rows(), 0.2).unwrap();
    assert_eq!(mapped, grid);

    let recognition = classify(&mapped, &starter_templates()).unwrap();
    assert_eq!(recognition.top_label(), Some(label.as_str()));

    let cfg = GenerationConfig {
        seed: 3,
        ..GenerationConfig::default()
    };
    let spec = generate(&mapped, &cfg).unwrap();
    assert!(check_support(&spec).stable);
    let stats = difficulty_stats(&spec);
    assert!(stats.difficulty_score >= 40);

    let doc = to_document(&spec, &DocumentDefaults::default());
    assert_eq!(emit(&doc), emit(&to_document(&spec, &DocumentDefaults::default())));
    let back = from_document(&doc, &spec.world).unwrap();
    let cells = |s: &sketchlevel_core::LevelSpec| s.blocks.iter().map(|b| (b.col, b.row, b.kind)).collect::<Vec<_>>();
    assert_eq!(cells(&back), cells(&spec));

    let outcome = GameplayOutcome {
        status: OutcomeStatus::Failed,
        birds_used: Some(2),
    };
    let phrase = compose_feedback(&label, &outcome, &stats, 3);
    assert!(phrase.text.contains(&label));
}

proptest! {
    #[test]
    fn painted_grids_map_back(cells in proptest::collection::vec(any::<bool>(), 48), scale in 1usize..6) {
        let grid = BinaryGrid::from_cells(8, 6, cells).unwrap();
        let img = paint(&grid, scale);
        prop_assert_eq!(grid_map(&binarize(&img, 128), 8, 6, 0.2).unwrap(), grid);
    }

    #[test]
    fn document_round_trip_keeps_cells(cells in proptest::collection::vec(any::<bool>(), 48), seed in any::<u64>()) {
        let grid = BinaryGrid::from_cells(8, 6, cells).unwrap();
        let cfg = GenerationConfig { cols: 8, rows: 6, seed, ..GenerationConfig::default() };
        let spec = generate(&grid, &cfg).unwrap();
        let back = from_document(&to_document(&spec, &DocumentDefaults::default()), &spec.world).unwrap();
        prop_assert_eq!(back.blocks.len(), spec.blocks.len());
        for (a, b) in back.blocks.iter().zip(&spec.blocks) {
            prop_assert_eq!((a.col, a.row, a.kind), (b.col, b.row, b.kind));
            prop_assert_eq!(a.origin, Origin::Drawn);
        }
        prop_assert!(check_support(&back).stable);
    }
}
