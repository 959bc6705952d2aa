//! Science Birds level document model and its XML writer.
//!
//! The writer output is fixed byte for byte:
//!
//! ```text
//! <?xml version="1.0" encoding="UTF-8"?>
//! <Level>
//!   <Camera x="0" y="2" minWidth="20" maxWidth="30"/>
//!   <Birds>
//!     <Bird type="BirdRed"/>
//!   </Birds>
//!   <Slingshot x="-8" y="0"/>
//!   <GameObjects>
//!     <Block type="SquareSmall" material="wood" x="-2" y="0" rotation="0"/>
//!     <TNT type="TNT" x="-1.15" y="0" rotation="0"/>
//!   </GameObjects>
//! </Level>
//! ```
//!
//! Two-space indentation, LF line endings, a trailing newline, and
//! `<GameObjects/>` when there are no objects. Numbers use the shortest
//! decimal that reads back to the same `f64`, never an exponent.
//! The strict reader lives in the `sketchlevel` crate.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levelgen::{Block, BlockKind, LevelSpec, Material, Origin, Pig, WorldMapping};

/// Camera framing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    /// Center x.
    pub x: f64,
    /// Center y.
    pub y: f64,
    /// Narrowest view.
    pub min_width: f64,
    /// Widest view.
    pub max_width: f64,
}

/// Slingshot position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slingshot {
    /// x.
    pub x: f64,
    /// y.
    pub y: f64,
}

/// Element name of a game object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectTag {
    /// `<Block>`, carries a material.
    Block,
    /// `<TNT>`.
    #[serde(rename = "TNT")]
    Tnt,
    /// `<Pig>`.
    Pig,
    /// `<Platform>`.
    Platform,
}

impl ObjectTag {
    /// Element name.
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectTag::Block => "Block",
            ObjectTag::Tnt => "TNT",
            ObjectTag::Pig => "Pig",
            ObjectTag::Platform => "Platform",
        }
    }

    /// Parses an element name.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "Block" => Some(ObjectTag::Block),
            "TNT" => Some(ObjectTag::Tnt),
            "Pig" => Some(ObjectTag::Pig),
            "Platform" => Some(ObjectTag::Platform),
            _ => None,
        }
    }
}

/// One child of `<GameObjects>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XmlGameObject {
    /// Element name.
    pub tag: ObjectTag,
    /// `type` attribute, e.g. `SquareSmall`.
    pub type_name: String,
    /// Present iff the tag is `Block`.
    pub material: Option<Material>,
    /// World x.
    pub x: f64,
    /// World y.
    pub y: f64,
    /// Degrees.
    pub rotation: f64,
}

/// In-memory form of a level file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDocument {
    /// Camera.
    pub camera: Camera,
    /// Bird types in firing order.
    pub birds: Vec<String>,
    /// Slingshot.
    pub slingshot: Slingshot,
    /// Objects in file order.
    pub game_objects: Vec<XmlGameObject>,
}

/// Document-level settings that do not come from the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DocumentDefaults {
    /// Camera.
    pub camera: Camera,
    /// Slingshot.
    pub slingshot: Slingshot,
    /// Type of every bird.
    pub bird_type: String,
    /// Type of every block.
    pub block_type: String,
    /// Type of every pig.
    pub pig_type: String,
}

impl Default for DocumentDefaults {
    fn default() -> Self {
        Self {
            camera: Camera {
                x: 0.0,
                y: 2.0,
                min_width: 20.0,
                max_width: 30.0,
            },
            slingshot: Slingshot { x: -8.0, y: 0.0 },
            bird_type: "BirdRed".to_string(),
            block_type: "SquareSmall".to_string(),
            pig_type: "BasicSmall".to_string(),
        }
    }
}

/// Document invariant violations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    /// No birds.
    #[error("a level needs at least one bird")]
    NoBirds,
    /// Material on a non-Block or missing on a Block.
    #[error("{tag} element at index {index}: material must be present iff the tag is Block")]
    Material {
        /// Element name.
        tag: &'static str,
        /// Object index.
        index: usize,
    },
    /// NaN or infinite number.
    #[error("non-finite number in {0}")]
    NonFinite(&'static str),
    /// Character XML cannot carry.
    #[error("text {0:?} contains characters not allowed in XML")]
    BadText(String),
    /// Object not on the grid.
    #[error("object {index} at ({x}, {y}) is not on a grid cell")]
    OffGrid {
        /// Object index.
        index: usize,
        /// World x.
        x: String,
        /// World y.
        y: String,
    },
    /// Tag the grid model does not have.
    #[error("object {index}: {tag} objects have no grid equivalent")]
    Unsupported {
        /// Object index.
        index: usize,
        /// Element name.
        tag: &'static str,
    },
    /// Two blocks on one cell.
    #[error("two blocks occupy cell ({col}, {row})")]
    Overlap {
        /// Column.
        col: usize,
        /// Row.
        row: usize,
    },
}

fn xml_char_ok(c: char) -> bool {
    matches!(c, '\t' | '\n' | '\r' | '\u{20}'..='\u{D7FF}' | '\u{E000}'..='\u{FFFD}' | '\u{10000}'..)
}

fn check_text(s: &str) -> Result<(), DocumentError> {
    if s.chars().all(xml_char_ok) {
        Ok(())
    } else {
        Err(DocumentError::BadText(s.to_string()))
    }
}

fn check_finite(v: f64, what: &'static str) -> Result<(), DocumentError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(DocumentError::NonFinite(what))
    }
}

impl LevelDocument {
    /// Checks the document invariants.
    pub fn validate(&self) -> Result<(), DocumentError> {
        if self.birds.is_empty() {
            return Err(DocumentError::NoBirds);
        }
        for b in &self.birds {
            check_text(b)?;
        }
        let c = &self.camera;
        for v in [c.x, c.y, c.min_width, c.max_width] {
            check_finite(v, "Camera")?;
        }
        check_finite(self.slingshot.x, "Slingshot")?;
        check_finite(self.slingshot.y, "Slingshot")?;
        for (index, o) in self.game_objects.iter().enumerate() {
            if o.material.is_some() != (o.tag == ObjectTag::Block) {
                return Err(DocumentError::Material {
                    tag: o.tag.as_str(),
                    index,
                });
            }
            check_text(&o.type_name)?;
            for v in [o.x, o.y, o.rotation] {
                check_finite(v, o.tag.as_str())?;
            }
        }
        Ok(())
    }
}

/// Rounds to micro-units so affine grid arithmetic emits short decimals.
fn quantize(v: f64) -> f64 {
    let q = libm::round(v * 1e6) / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

/// Lays the level out in world coordinates, blocks first, then pigs.
pub fn to_document(spec: &LevelSpec, defaults: &DocumentDefaults) -> LevelDocument {
    let mut blocks: Vec<&Block> = spec.blocks.iter().collect();
    blocks.sort_by_key(|b| (b.col, b.row));
    let mut game_objects: Vec<XmlGameObject> = blocks
        .into_iter()
        .map(|b| {
            let (x, y) = spec.world.cell_center(b.col, b.row);
            let (tag, type_name, material) = match b.kind {
                BlockKind::Solid(m) => (ObjectTag::Block, defaults.block_type.clone(), Some(m)),
                BlockKind::Tnt => (ObjectTag::Tnt, "TNT".to_string(), None),
            };
            XmlGameObject {
                tag,
                type_name,
                material,
                x: quantize(x),
                y: quantize(y),
                rotation: 0.0,
            }
        })
        .collect();
    game_objects.extend(spec.pigs.iter().map(|p| {
        let (x, y) = spec.world.cell_center(p.col, p.row);
        XmlGameObject {
            tag: ObjectTag::Pig,
            type_name: defaults.pig_type.clone(),
            material: None,
            x: quantize(x),
            y: quantize(y),
            rotation: 0.0,
        }
    }));
    LevelDocument {
        camera: defaults.camera,
        birds: (0..spec.birds.max(1))
            .map(|_| defaults.bird_type.clone())
            .collect(),
        slingshot: defaults.slingshot,
        game_objects,
    }
}

/// Snaps a world coordinate back to a 1-based cell index.
fn cell_index(v: f64, origin: f64, size: f64) -> Option<usize> {
    let k = (v - origin) / size + 1.0;
    let r = libm::round(k);
    if libm::fabs(k - r) > 1e-4 || r < 1.0 || r > u32::MAX as f64 {
        None
    } else {
        Some(r as usize)
    }
}

/// Recovers the grid level from a document laid out with `world`.
///
/// The grid is sized to the highest column and row in use. Every block
/// comes back with origin `Drawn`: a file does not record which blocks were
/// support. Platforms have no grid form and are rejected.
pub fn from_document(doc: &LevelDocument, world: &WorldMapping) -> Result<LevelSpec, DocumentError> {
    doc.validate()?;
    let mut spec = LevelSpec::empty(0, 0);
    spec.world = *world;
    spec.birds = doc.birds.len();
    for (index, o) in doc.game_objects.iter().enumerate() {
        let off_grid = || DocumentError::OffGrid {
            index,
            x: o.x.to_string(),
            y: o.y.to_string(),
        };
        let col = cell_index(o.x, world.origin_x, world.block_w).ok_or_else(off_grid)?;
        let row = cell_index(o.y, world.origin_y, world.block_h).ok_or_else(off_grid)?;
        let kind = match (o.tag, o.material) {
            (ObjectTag::Block, Some(m)) => BlockKind::Solid(m),
            (ObjectTag::Tnt, _) => BlockKind::Tnt,
            (ObjectTag::Pig, _) => {
                spec.pigs.push(Pig { col, row });
                continue;
            }
            (tag, _) => {
                return Err(DocumentError::Unsupported {
                    index,
                    tag: tag.as_str(),
                })
            }
        };
        spec.grid_cols = spec.grid_cols.max(col);
        spec.grid_rows = spec.grid_rows.max(row);
        spec.blocks.push(Block {
            col,
            row,
            kind,
            origin: Origin::Drawn,
        });
    }
    spec.canonicalize();
    if let Some(w) = spec
        .blocks
        .windows(2)
        .find(|w| (w[0].col, w[0].row) == (w[1].col, w[1].row))
    {
        return Err(DocumentError::Overlap {
            col: w[0].col,
            row: w[0].row,
        });
    }
    Ok(spec)
}

/// Writes a number in the shortest round-tripping plain decimal form.
pub fn format_number(out: &mut impl Write, v: f64) -> fmt::Result {
    if v == 0.0 {
        out.write_char('0')
    } else {
        write!(out, "{v}")
    }
}

fn write_attr_value(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

fn attr_str(out: &mut String, name: &str, value: &str) {
    out.push(' ');
    out.push_str(name);
    out.push_str("=\"");
    write_attr_value(out, value);
    out.push('"');
}

fn attr_num(out: &mut String, name: &str, value: f64) {
    out.push(' ');
    out.push_str(name);
    out.push_str("=\"");
    format_number(out, value).expect("writing to a String cannot fail");
    out.push('"');
}

/// Serializes a document. Equal documents give identical bytes.
pub fn emit(doc: &LevelDocument) -> String {
    let mut out = String::with_capacity(256 + doc.game_objects.len() * 80);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Level>\n");

    out.push_str("  <Camera");
    attr_num(&mut out, "x", doc.camera.x);
    attr_num(&mut out, "y", doc.camera.y);
    attr_num(&mut out, "minWidth", doc.camera.min_width);
    attr_num(&mut out, "maxWidth", doc.camera.max_width);
    out.push_str("/>\n");

    out.push_str("  <Birds>\n");
    for bird in &doc.birds {
        out.push_str("    <Bird");
        attr_str(&mut out, "type", bird);
        out.push_str("/>\n");
    }
    out.push_str("  </Birds>\n");

    out.push_str("  <Slingshot");
    attr_num(&mut out, "x", doc.slingshot.x);
    attr_num(&mut out, "y", doc.slingshot.y);
    out.push_str("/>\n");

    if doc.game_objects.is_empty() {
        out.push_str("  <GameObjects/>\n");
    } else {
        out.push_str("  <GameObjects>\n");
        for o in &doc.game_objects {
            out.push_str("    <");
            out.push_str(o.tag.as_str());
            attr_str(&mut out, "type", &o.type_name);
            if let Some(m) = o.material {
                attr_str(&mut out, "material", m.as_str());
            }
            attr_num(&mut out, "x", o.x);
            attr_num(&mut out, "y", o.y);
            attr_num(&mut out, "rotation", o.rotation);
            out.push_str("/>\n");
        }
        out.push_str("  </GameObjects>\n");
    }
    out.push_str("</Level>\n");
    out
}
