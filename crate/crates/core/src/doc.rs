//! The intermediate semantic document tree and its XML serialization.
//!
//! Vocabulary (element -> allowed children):
//!
//! | element  | children |
//! |----------|----------|
//! | document | title? then (para | section | picture)* |
//! | section  | title then (para | section | picture)*; `level` in 1..=6 |
//! | title    | inline |
//! | para     | p* |
//! | p        | inline |
//! | text     | inline; `font` in {bold, italic, typewriter} |
//! | emph     | inline |
//! | ref      | inline; `labelref` attribute |
//! | anchor   | inline; carries an `xml:id` |
//! | error    | inline; recovery marker for undefined control sequences |
//! | picture  | one SVG graphics payload |
//!
//! "inline" is text content, `text`, `emph`, math, `ref`, `anchor`, `error`.
//! This table is the single source of truth shared by the engine's bindings
//! and the postprocessor.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::math::{Display, MathTree};
use crate::xml::{self, XmlElement, XmlNode};

/// A node of the intermediate document tree.
#[derive(Debug, Clone, PartialEq)]
pub enum DocNode {
    Element {
        name: String,
        attrs: Vec<(String, String)>,
        children: Vec<DocNode>,
    },
    Text(String),
    Math {
        tex: String,
        tree: MathTree,
        display: Display,
    },
    Graphics(XmlElement),
}

impl DocNode {
    pub fn element(name: &str) -> DocNode {
        DocNode::Element {
            name: name.to_string(),
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn text(s: impl Into<String>) -> DocNode {
        DocNode::Text(s.into())
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            DocNode::Element { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        match self {
            DocNode::Element { attrs, .. } => {
                attrs.iter().find(|(n, _)| n == key).map(|(_, v)| v.as_str())
            }
            _ => None,
        }
    }

    pub fn set_attr(&mut self, key: &str, value: impl Into<String>) {
        if let DocNode::Element { attrs, .. } = self {
            if let Some(slot) = attrs.iter_mut().find(|(n, _)| n == key) {
                slot.1 = value.into();
            } else {
                attrs.push((key.to_string(), value.into()));
            }
        }
    }

    pub fn children(&self) -> &[DocNode] {
        match self {
            DocNode::Element { children, .. } => children,
            _ => &[],
        }
    }

    pub fn children_mut(&mut self) -> Option<&mut Vec<DocNode>> {
        match self {
            DocNode::Element { children, .. } => Some(children),
            _ => None,
        }
    }

    pub fn push(&mut self, node: DocNode) {
        if let DocNode::Element { children, .. } = self {
            children.push(node);
        }
    }

    /// Multiset-friendly collection of all text leaves, document order.
    pub fn text_leaves(&self, out: &mut Vec<String>) {
        match self {
            DocNode::Text(t) => out.push(t.clone()),
            DocNode::Element { children, .. } => {
                for c in children {
                    c.text_leaves(out);
                }
            }
            _ => {}
        }
    }
}

/// A complete converted document: the tree plus label and warning indexes.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub root: DocNode,
    /// label key -> xml:id of the anchor carrying it
    pub labels: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl Document {
    pub fn empty() -> Document {
        Document {
            root: DocNode::element("document"),
            labels: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: String,
    pub detail: String,
}

impl Violation {
    fn new(rule: &str, detail: String) -> Violation {
        Violation {
            rule: rule.to_string(),
            detail,
        }
    }
}

#[derive(Debug, Error)]
pub enum SerializeError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
}

const INLINE: &[&str] = &["text", "emph", "ref", "anchor", "error"];
const SECTIONING: &[&str] = &["para", "section", "picture"];

fn allowed_child(parent: &str, child: &str) -> bool {
    match parent {
        "document" | "section" => child == "title" || SECTIONING.contains(&child),
        "title" | "p" | "text" | "emph" | "ref" | "anchor" | "error" => INLINE.contains(&child),
        "para" => child == "p",
        "picture" => false,
        _ => false,
    }
}

fn known_element(name: &str) -> bool {
    matches!(
        name,
        "document" | "section" | "title" | "para" | "p" | "picture"
    ) || INLINE.contains(&name)
}

fn inline_context(parent: &str) -> bool {
    matches!(parent, "title" | "p" | "text" | "emph" | "ref" | "anchor" | "error")
}

/// Check the tree against the vocabulary; violations are data, not errors.
pub fn validate(doc: &Document) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    if doc.root.name() != Some("document") {
        out.push(Violation::new(
            "root-element",
            format!("root must be `document`, found {:?}", doc.root.name()),
        ));
        return out;
    }
    walk(&doc.root, &mut out, &mut ids);
    out
}

fn walk(node: &DocNode, out: &mut Vec<Violation>, ids: &mut HashSet<String>) {
    let DocNode::Element {
        name,
        attrs,
        children,
    } = node
    else {
        return;
    };
    if !known_element(name) {
        out.push(Violation::new("unknown-element", format!("element `{name}`")));
    }
    let mut seen_attrs = HashSet::new();
    for (an, _) in attrs {
        if !seen_attrs.insert(an.clone()) {
            out.push(Violation::new(
                "duplicate-attribute",
                format!("attribute `{an}` repeated on `{name}`"),
            ));
        }
    }
    if let Some(id) = node.attr("xml:id") {
        if !ids.insert(id.to_string()) {
            out.push(Violation::new("duplicate-id", format!("xml:id `{id}`")));
        }
    }
    if name == "section" {
        match node.attr("level").and_then(|l| l.parse::<u32>().ok()) {
            Some(1..=6) => {}
            _ => out.push(Violation::new(
                "section-level",
                "section level must be an integer in 1..=6".to_string(),
            )),
        }
    }
    if name == "text" {
        match node.attr("font") {
            Some("bold" | "italic" | "typewriter") => {}
            other => out.push(Violation::new(
                "text-font",
                format!("text font must be bold/italic/typewriter, found {other:?}"),
            )),
        }
    }
    for child in children {
        match child {
            DocNode::Element { name: cname, .. } => {
                if !allowed_child(name, cname) {
                    out.push(Violation::new(
                        "bad-parent",
                        format!("element `{cname}` not allowed under `{name}`"),
                    ));
                }
                walk(child, out, ids);
            }
            DocNode::Text(t) => {
                if t.is_empty() {
                    out.push(Violation::new("empty-text", format!("empty text under `{name}`")));
                }
                if !inline_context(name) {
                    out.push(Violation::new(
                        "bad-parent",
                        format!("text content not allowed under `{name}`"),
                    ));
                }
            }
            DocNode::Math { .. } => {
                if !inline_context(name) {
                    out.push(Violation::new(
                        "bad-parent",
                        format!("math not allowed under `{name}`"),
                    ));
                }
            }
            DocNode::Graphics(_) => {
                if name != "picture" {
                    out.push(Violation::new(
                        "bad-parent",
                        format!("graphics payload only allowed under `picture`, found `{name}`"),
                    ));
                }
            }
        }
    }
}

/// Lower a DocNode subtree to the generic XML tree.
pub fn to_xml(node: &DocNode) -> XmlNode {
    match node {
        DocNode::Text(t) => XmlNode::Text(t.clone()),
        DocNode::Math { tex, tree, display } => {
            let mut el = XmlElement::new("Math").attr("tex", tex.clone());
            el.push(XmlNode::Element(crate::math::mathml(tree, *display)));
            XmlNode::Element(el)
        }
        DocNode::Graphics(svg) => XmlNode::Element(svg.clone()),
        DocNode::Element {
            name,
            attrs,
            children,
        } => {
            let mut el = XmlElement::new(name.clone());
            el.attrs = attrs.clone();
            for c in children {
                el.push(to_xml(c));
            }
            XmlNode::Element(el)
        }
    }
}

/// Serialize the intermediate XML format; refuses non-conforming trees.
pub fn serialize_xml(doc: &Document) -> Result<Vec<u8>, SerializeError> {
    let violations = validate(doc);
    if let Some(v) = violations.first() {
        return Err(SerializeError::SchemaViolation(format!(
            "{}: {} ({} total)",
            v.rule,
            v.detail,
            violations.len()
        )));
    }
    let XmlNode::Element(root) = to_xml(&doc.root) else {
        unreachable!("document root is an element");
    };
    Ok(xml::write_document(&root).into_bytes())
}
