//! Strict reader for level files written by [`sketchlevel_core::levelxml::emit`].
//!
//! Accepted layout: optional XML declaration, then a `<Level>` root with no
//! attributes holding exactly `<Camera>`, `<Birds>`, `<Slingshot>` and
//! `<GameObjects>` in that order. Unknown elements or attributes are errors.
//! Comments and whitespace are ignored anywhere.

use std::borrow::Cow;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use sketchlevel_core::levelxml::{Camera, LevelDocument, ObjectTag, Slingshot, XmlGameObject};
use sketchlevel_core::Material;
use thiserror::Error;

/// Level file parse failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XmlError {
    /// Not well-formed XML.
    #[error("XML syntax error at line {line}, column {column}: {message}")]
    Syntax {
        /// 1-based line.
        line: usize,
        /// 1-based column, in characters.
        column: usize,
        /// Details.
        message: String,
    },
    /// Well-formed XML that breaks the level schema.
    #[error("schema error in <{element}>: {message}")]
    Schema {
        /// Element at fault.
        element: String,
        /// Details.
        message: String,
    },
}

fn schema(element: &str, message: impl Into<String>) -> XmlError {
    XmlError::Schema {
        element: element.to_string(),
        message: message.into(),
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    let column = String::from_utf8_lossy(&before[line_start..]).chars().count() + 1;
    (line, column)
}

/// Plain decimal: optional minus, digits, optional fraction.
fn is_plain_decimal(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

enum Node<'a> {
    Empty(BytesStart<'a>),
    Start(BytesStart<'a>),
}

impl<'a> Node<'a> {
    fn tag(&self) -> &BytesStart<'a> {
        match self {
            Node::Empty(t) | Node::Start(t) => t,
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    reader: Reader<&'a [u8]>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let mut reader = Reader::from_str(text);
        let config = reader.config_mut();
        config.check_end_names = true;
        config.check_comments = true;
        Self { text, reader }
    }

    fn syntax(&self, offset: u64, message: impl Into<String>) -> XmlError {
        let (line, column) = line_col(self.text, offset as usize);
        XmlError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn raw_event(&mut self) -> Result<Event<'a>, XmlError> {
        self.reader.read_event().map_err(|e| {
            let pos = self.reader.error_position();
            self.syntax(pos, e.to_string())
        })
    }

    /// Next event that matters: skips comments and whitespace text.
    /// `context` names the element whose content is being read.
    fn event(&mut self, context: &str) -> Result<Event<'a>, XmlError> {
        loop {
            let pos = self.reader.buffer_position();
            match self.raw_event()? {
                Event::Comment(_) => {}
                Event::Text(t) if t.iter().all(u8::is_ascii_whitespace) => {}
                Event::Text(_) | Event::CData(_) | Event::GeneralRef(_) => {
                    return Err(schema(context, "unexpected text content"))
                }
                Event::PI(_) => return Err(schema(context, "unexpected processing instruction")),
                Event::DocType(_) => return Err(schema(context, "unexpected DOCTYPE")),
                Event::Decl(_) => return Err(self.syntax(pos, "XML declaration must come first")),
                other => return Ok(other),
            }
        }
    }

    fn name(tag: &BytesStart<'_>) -> String {
        String::from_utf8_lossy(tag.name().as_ref()).into_owned()
    }

    /// Next child element of `parent`, or `None` at `</parent>`.
    fn child(&mut self, parent: &str) -> Result<Option<Node<'a>>, XmlError> {
        match self.event(parent)? {
            Event::Start(t) => Ok(Some(Node::Start(t))),
            Event::Empty(t) => Ok(Some(Node::Empty(t))),
            Event::End(_) => Ok(None),
            Event::Eof => Err(self.syntax(self.reader.buffer_position(), format!("unclosed <{parent}>"))),
            _ => Err(schema(parent, "unexpected content")),
        }
    }

    /// Consumes the end tag of a leaf written as `<x ...></x>`.
    fn close_leaf(&mut self, node: Node<'a>) -> Result<BytesStart<'a>, XmlError> {
        match node {
            Node::Empty(t) => Ok(t),
            Node::Start(t) => {
                let name = Self::name(&t);
                match self.child(&name)? {
                    None => Ok(t),
                    Some(inner) => Err(schema(
                        &name,
                        format!("unexpected child <{}>", Self::name(inner.tag())),
                    )),
                }
            }
        }
    }

    fn expect(&mut self, parent: &str, wanted: &str) -> Result<Node<'a>, XmlError> {
        match self.child(parent)? {
            Some(node) => {
                let name = Self::name(node.tag());
                if name == wanted {
                    Ok(node)
                } else {
                    Err(schema(
                        &name,
                        format!("unexpected element, expected <{wanted}> in <{parent}>"),
                    ))
                }
            }
            None => Err(schema(wanted, format!("missing required child of <{parent}>"))),
        }
    }
}

/// Attributes of one element, checked against an allowed list.
struct Attrs {
    element: String,
    values: Vec<(String, String)>,
}

impl Attrs {
    fn read(tag: &BytesStart<'_>, allowed: &[&str], parser: &Parser<'_>) -> Result<Self, XmlError> {
        let element = Parser::name(tag);
        let mut values = Vec::new();
        for attr in tag.attributes() {
            let attr = attr.map_err(|e| parser.syntax(parser.reader.buffer_position(), e.to_string()))?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            if !allowed.contains(&key.as_str()) {
                return Err(schema(&element, format!("unknown attribute {key:?}")));
            }
            let value: Cow<'_, str> = attr
                .decode_and_unescape_value(parser.reader.decoder())
                .map_err(|e| parser.syntax(parser.reader.buffer_position(), e.to_string()))?;
            values.push((key, value.into_owned()));
        }
        Ok(Self { element, values })
    }

    fn opt(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn text(&self, key: &str) -> Result<String, XmlError> {
        self.opt(key)
            .map(str::to_string)
            .ok_or_else(|| schema(&self.element, format!("missing attribute \"{key}\"")))
    }

    fn number(&self, key: &str) -> Result<f64, XmlError> {
        let raw = self.text(key)?;
        if !is_plain_decimal(&raw) {
            return Err(schema(&self.element, format!("attribute \"{key}\" is not a decimal: {raw:?}")));
        }
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| schema(&self.element, format!("attribute \"{key}\" is out of range")))
    }
}

/// Parses a level file.
pub fn parse(text: &str) -> Result<LevelDocument, XmlError> {
    let mut p = Parser::new(text);

    // Prolog: declaration, comments, whitespace.
    let mut seen_decl = false;
    let root = loop {
        let pos = p.reader.buffer_position();
        match p.raw_event()? {
            Event::Decl(_) if !seen_decl && pos == 0 => seen_decl = true,
            Event::Decl(_) => return Err(p.syntax(pos, "XML declaration must come first")),
            Event::Comment(_) => {}
            Event::Text(t) if t.iter().all(u8::is_ascii_whitespace) => {}
            Event::Start(t) => break Node::Start(t),
            Event::Empty(t) => break Node::Empty(t),
            Event::Eof => return Err(p.syntax(pos, "document has no root element")),
            _ => return Err(schema("Level", "unexpected content before the root element")),
        }
    };
    let root_name = Parser::name(root.tag());
    if root_name != "Level" {
        return Err(schema(&root_name, "root element must be <Level>"));
    }
    Attrs::read(root.tag(), &[], &p)?;
    let Node::Start(_) = root else {
        return Err(schema("Camera", "missing required child of <Level>"));
    };

    let camera_node = p.expect("Level", "Camera")?;
    let camera_tag = p.close_leaf(camera_node)?;
    let a = Attrs::read(&camera_tag, &["x", "y", "minWidth", "maxWidth"], &p)?;
    let camera = Camera {
        x: a.number("x")?,
        y: a.number("y")?,
        min_width: a.number("minWidth")?,
        max_width: a.number("maxWidth")?,
    };

    let birds_node = p.expect("Level", "Birds")?;
    Attrs::read(birds_node.tag(), &[], &p)?;
    let mut birds = Vec::new();
    if let Node::Start(_) = birds_node {
        while let Some(node) = p.child("Birds")? {
            let name = Parser::name(node.tag());
            if name != "Bird" {
                return Err(schema(&name, "unexpected element in <Birds>"));
            }
            let tag = p.close_leaf(node)?;
            birds.push(Attrs::read(&tag, &["type"], &p)?.text("type")?);
        }
    }
    if birds.is_empty() {
        return Err(schema("Birds", "at least one <Bird> is required"));
    }

    let sling_node = p.expect("Level", "Slingshot")?;
    let sling_tag = p.close_leaf(sling_node)?;
    let a = Attrs::read(&sling_tag, &["x", "y"], &p)?;
    let slingshot = Slingshot {
        x: a.number("x")?,
        y: a.number("y")?,
    };

    let objects_node = p.expect("Level", "GameObjects")?;
    Attrs::read(objects_node.tag(), &[], &p)?;
    let mut game_objects = Vec::new();
    if let Node::Start(_) = objects_node {
        while let Some(node) = p.child("GameObjects")? {
            let name = Parser::name(node.tag());
            let tag = ObjectTag::from_name(&name)
                .ok_or_else(|| schema(&name, "unknown game object element"))?;
            let start = p.close_leaf(node)?;
            let allowed: &[&str] = if tag == ObjectTag::Block {
                &["type", "material", "x", "y", "rotation"]
            } else {
                &["type", "x", "y", "rotation"]
            };
            let a = Attrs::read(&start, allowed, &p)?;
            let material = if tag == ObjectTag::Block {
                let raw = a.text("material")?;
                Some(Material::from_name(&raw).ok_or_else(|| {
                    schema(&name, format!("attribute \"material\" has unknown value {raw:?}"))
                })?)
            } else {
                None
            };
            game_objects.push(XmlGameObject {
                tag,
                type_name: a.text("type")?,
                material,
                x: a.number("x")?,
                y: a.number("y")?,
                rotation: a.number("rotation")?,
            });
        }
    }

    if let Some(extra) = p.child("Level")? {
        return Err(schema(
            &Parser::name(extra.tag()),
            "unexpected element after <GameObjects>",
        ));
    }

    // Epilog.
    loop {
        let pos = p.reader.buffer_position();
        match p.raw_event()? {
            Event::Eof => break,
            Event::Comment(_) => {}
            Event::Text(t) if t.iter().all(u8::is_ascii_whitespace) => {}
            _ => return Err(p.syntax(pos, "content after the root element")),
        }
    }

    let doc = LevelDocument {
        camera,
        birds,
        slingshot,
        game_objects,
    };
    doc.validate().map_err(|e| schema("Level", e.to_string()))?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sketchlevel_core::levelxml::{emit, to_document, DocumentDefaults};
    use sketchlevel_core::LevelSpec;

    fn sample() -> String {
        let mut doc = to_document(&LevelSpec::empty(2, 2), &DocumentDefaults::default());
        doc.game_objects = vec![
            XmlGameObject {
                tag: ObjectTag::Block,
                type_name: "SquareSmall".into(),
                material: Some(Material::Stone),
                x: -2.0,
                y: 0.85,
                rotation: 0.0,
            },
            XmlGameObject {
                tag: ObjectTag::Pig,
                type_name: "BasicSmall".into(),
                material: None,
                x: 1.5,
                y: 3.0,
                rotation: 90.0,
            },
        ];
        emit(&doc)
    }

    #[test]
    fn reads_what_emit_writes() {
        let text = sample();
        let doc = parse(&text).unwrap();
        assert_eq!(emit(&doc), text);
        assert_eq!(doc.game_objects.len(), 2);
    }

    #[test]
    fn missing_birds() {
        let err = parse("<Level></Level>").unwrap_err();
        assert!(matches!(&err, XmlError::Schema { element, .. } if element == "Camera"), "{err}");
        let err = parse(
            r#"<Level><Camera x="0" y="0" minWidth="1" maxWidth="2"/><Slingshot x="0" y="0"/></Level>"#,
        )
        .unwrap_err();
        assert!(matches!(&err, XmlError::Schema { element, .. } if element == "Slingshot"), "{err}");
        let err = parse(
            r#"<Level><Camera x="0" y="0" minWidth="1" maxWidth="2"/><Birds/><Slingshot x="0" y="0"/><GameObjects/></Level>"#,
        )
        .unwrap_err();
        assert!(matches!(&err, XmlError::Schema { element, .. } if element == "Birds"), "{err}");
    }

    #[test]
    fn block_needs_material() {
        let text = sample().replace(r#" material="stone""#, "");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("material"), "{err}");
        assert!(matches!(err, XmlError::Schema { .. }));
    }

    #[test]
    fn rejects_unknowns() {
        let text = sample().replace("<Pig ", "<Bird ");
        assert!(matches!(parse(&text), Err(XmlError::Schema { element, .. }) if element == "Bird"));
        let text = sample().replace(r#"<Pig type="BasicSmall""#, r#"<Pig type="BasicSmall" scale="2""#);
        assert!(parse(&text).unwrap_err().to_string().contains("scale"));
        let text = sample().replace("<Level>", r#"<Level width="2">"#);
        assert!(parse(&text).is_err());
        let text = sample().replace(r#"material="stone""#, r#"material="gold""#);
        assert!(parse(&text).is_err());
        let text = sample().replace(r#"rotation="90""#, r#"rotation="9e1""#);
        assert!(parse(&text).is_err());
        let text = sample().replace("<Pig type=\"BasicSmall\"", "<Pig type=\"BasicSmall\" material=\"wood\"");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn tolerates_comments_and_long_form() {
        let text = sample()
            .replace("<GameObjects>", "<GameObjects><!-- objects -->")
            .replace(r#"<Slingshot x="-8" y="0"/>"#, r#"<Slingshot x="-8" y="0"></Slingshot>"#);
        let doc = parse(&text).unwrap();
        assert_eq!(emit(&doc), sample());
    }

    #[test]
    fn syntax_errors_have_positions() {
        let text = sample();
        let truncated = &text[..text.len() / 2];
        match parse(truncated) {
            Err(XmlError::Syntax { line, .. }) => assert!(line >= 1),
            other => panic!("{other:?}"),
        }
        match parse("<Level>\n  <Camera>\n</Level>") {
            Err(XmlError::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 1)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse(""), Err(XmlError::Syntax { .. })));
        assert!(matches!(parse(&format!("{text}<Level/>")), Err(XmlError::Syntax { .. })));
    }

    #[test]
    fn mismatched_end_tag() {
        let text = sample().replace("</GameObjects>", "</Objects>");
        assert!(matches!(parse(&text), Err(XmlError::Syntax { .. })));
    }

    #[test]
    fn decimal_grammar() {
        for ok in ["0", "-1", "12.5", "-0.000001", "100000000000000000000"] {
            assert!(is_plain_decimal(ok), "{ok}");
        }
        for bad in ["", "-", "1.", ".5", "1e5", "NaN", "inf", "+1", " 1"] {
            assert!(!is_plain_decimal(bad), "{bad}");
        }
    }

    #[test]
    fn line_col_counts_chars() {
        assert_eq!(line_col("ab\ncé\nx", 6), (2, 3));
        assert_eq!(line_col("abc", 0), (1, 1));
    }
}
