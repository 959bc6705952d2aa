//! Renders starter sketches into the 256×256 sample drawings under
//! `samples/`. Ink is spattered over each inked tile and a few stray specks
//! land on blank paper, so the images exercise thresholding and tile
//! coverage rather than being clean upscales.
//!
//! ```text
//! cargo run -p sketchlevel --example render_samples
//! ```

use std::fs;
use std::path::Path;

use sketchlevel::image::{encode_pgm, encode_png};
use sketchlevel_core::prng::SplitMix64;
use sketchlevel_core::starter::starter_examples;
use sketchlevel_core::{BinaryGrid, SketchImage};

const SIZE: usize = 256;

fn tile(index: usize, count: usize) -> (usize, usize) {
    let step = SIZE / count;
    let start = index * step;
    let end = if index + 1 == count { SIZE } else { start + step };
    (start, end)
}

fn render(grid: &BinaryGrid, seed: u64) -> SketchImage {
    let mut rng = SplitMix64::new(seed);
    let mut pixels = vec![255u8; SIZE * SIZE];
    for row in 1..=grid.rows() {
        // Image row 0 is the top of the page, which is grid row `rows`.
        let (y0, y1) = tile(grid.rows() - row, grid.rows());
        for col in 1..=grid.cols() {
            let (x0, x1) = tile(col - 1, grid.cols());
            let inked = grid.get(col, row);
            for y in y0..y1 {
                for x in x0..x1 {
                    let p = rng.next_f64();
                    let v = if inked && p < 0.6 {
                        (rng.next_u64() % 90) as u8
                    } else if !inked && p < 0.015 {
                        (rng.next_u64() % 60) as u8
                    } else {
                        255 - (rng.next_u64() % 40) as u8
                    };
                    pixels[y * SIZE + x] = v;
                }
            }
        }
    }
    SketchImage::new(SIZE, SIZE, pixels).expect("square image")
}

fn main() {
    let out = Path::new(env!("CARGO_MANIFEST_DIR")).join("samples");
    fs::create_dir_all(&out).expect("create samples dir");
    let examples = starter_examples();
    let pick = |label: &str| {
        &examples
            .iter()
            .find(|(l, _)| l == label)
            .unwrap_or_else(|| panic!("no starter sketch for {label}"))
            .1
    };
    let jobs: [(&str, &str, bool, u64); 4] = [
        ("smiling face", "smiling_face.png", true, 11),
        ("house", "house.png", true, 12),
        ("tree", "tree.pgm", false, 13),
        ("cat", "cat.png", true, 14),
    ];
    for (label, file, png, seed) in jobs {
        let img = render(pick(label), seed);
        let bytes = if png { encode_png(&img) } else { encode_pgm(&img) };
        fs::write(out.join(file), bytes).expect("write sample");
        println!("{}", out.join(file).display());
    }
}
