//! Minimal XML tree, writer and strict parser.
//!
//! One writer serves the intermediate document format, XHTML pages, MathML
//! and SVG fragments.  Output is deliberately byte-stable: attribute order
//! is preserved as authored, empty elements self-close, no pretty-printing.
//! The parser accepts exactly well-formed documents and is used to check
//! our own output and the contents of EPUB archives.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct XmlElement {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<XmlNode>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum XmlNode {
    Element(XmlElement),
    Text(String),
}

impl XmlElement {
    pub fn new(name: impl Into<String>) -> Self {
        XmlElement {
            name: name.into(),
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn attr(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.push((name.into(), value.into()));
        self
    }

    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        if let Some(slot) = self.attrs.iter_mut().find(|(n, _)| n == name) {
            slot.1 = value.into();
        } else {
            self.attrs.push((name.to_string(), value.into()));
        }
    }

    pub fn get_attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn child(mut self, el: XmlElement) -> Self {
        self.children.push(XmlNode::Element(el));
        self
    }

    pub fn text(mut self, t: impl Into<String>) -> Self {
        self.children.push(XmlNode::Text(t.into()));
        self
    }

    pub fn push(&mut self, node: XmlNode) {
        self.children.push(node);
    }

    /// Concatenated text content of the subtree.
    pub fn text_content(&self) -> String {
        let mut out = String::new();
        collect_text(self, &mut out);
        out
    }

    pub fn write_into(&self, out: &mut String) {
        out.push('<');
        out.push_str(&self.name);
        for (n, v) in &self.attrs {
            out.push(' ');
            out.push_str(n);
            out.push_str("=\"");
            out.push_str(&escape_attr(v));
            out.push('"');
        }
        if self.children.is_empty() {
            out.push_str("/>");
            return;
        }
        out.push('>');
        for c in &self.children {
            match c {
                XmlNode::Element(e) => e.write_into(out),
                XmlNode::Text(t) => out.push_str(&escape_text(t)),
            }
        }
        let _ = write!(out, "</{}>", self.name);
    }

    pub fn to_fragment_string(&self) -> String {
        let mut s = String::new();
        self.write_into(&mut s);
        s
    }
}

fn collect_text(el: &XmlElement, out: &mut String) {
    for c in &el.children {
        match c {
            XmlNode::Text(t) => out.push_str(t),
            XmlNode::Element(e) => collect_text(e, out),
        }
    }
}

pub fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Serialize a full document: declaration plus root element, UTF-8.
pub fn write_document(root: &XmlElement) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    root.write_into(&mut out);
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XmlParseError {
    #[error("unexpected end of input at offset {0}")]
    UnexpectedEof(usize),
    #[error("malformed markup at offset {0}: {1}")]
    Malformed(usize, String),
    #[error("mismatched closing tag </{found}> for <{expected}> at offset {at}")]
    MismatchedTag {
        expected: String,
        found: String,
        at: usize,
    },
    #[error("duplicate attribute {0:?}")]
    DuplicateAttribute(String),
    #[error("unknown entity &{0};")]
    UnknownEntity(String),
    #[error("content after document element at offset {0}")]
    TrailingContent(usize),
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

/// Parse a complete XML document (declaration and doctype are skipped).
pub fn parse_document(text: &str) -> Result<XmlElement, XmlParseError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
    };
    p.skip_misc()?;
    let root = p.parse_element()?;
    p.skip_misc()?;
    if p.pos < p.chars.len() {
        return Err(XmlParseError::TrailingContent(p.pos));
    }
    Ok(root)
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Result<char, XmlParseError> {
        let c = self.peek().ok_or(XmlParseError::UnexpectedEof(self.pos))?;
        self.pos += 1;
        Ok(c)
    }

    fn eat(&mut self, expected: char) -> Result<(), XmlParseError> {
        let c = self.bump()?;
        if c != expected {
            return Err(XmlParseError::Malformed(
                self.pos - 1,
                format!("expected {expected:?}, found {c:?}"),
            ));
        }
        Ok(())
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.chars.get(self.pos + i) == Some(&c))
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    /// Whitespace, XML declaration, processing instructions, comments,
    /// doctype — everything allowed around the document element.
    fn skip_misc(&mut self) -> Result<(), XmlParseError> {
        loop {
            self.skip_ws();
            if self.starts_with("<?") {
                self.skip_until("?>")?;
            } else if self.starts_with("<!--") {
                self.skip_until("-->")?;
            } else if self.starts_with("<!DOCTYPE") || self.starts_with("<!doctype") {
                // no internal-subset support
                self.skip_until(">")?;
            } else {
                return Ok(());
            }
        }
    }

    fn skip_until(&mut self, end: &str) -> Result<(), XmlParseError> {
        while self.pos < self.chars.len() {
            if self.starts_with(end) {
                self.pos += end.chars().count();
                return Ok(());
            }
            self.pos += 1;
        }
        Err(XmlParseError::UnexpectedEof(self.pos))
    }

    fn parse_name(&mut self) -> Result<String, XmlParseError> {
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '.') {
                name.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if name.is_empty() {
            return Err(XmlParseError::Malformed(self.pos, "expected a name".into()));
        }
        Ok(name)
    }

    fn parse_element(&mut self) -> Result<XmlElement, XmlParseError> {
        self.eat('<')?;
        let name = self.parse_name()?;
        let mut el = XmlElement::new(name);
        loop {
            self.skip_ws();
            match self.peek() {
                Some('/') => {
                    self.pos += 1;
                    self.eat('>')?;
                    return Ok(el);
                }
                Some('>') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => {
                    let aname = self.parse_name()?;
                    if el.attrs.iter().any(|(n, _)| *n == aname) {
                        return Err(XmlParseError::DuplicateAttribute(aname));
                    }
                    self.skip_ws();
                    self.eat('=')?;
                    self.skip_ws();
                    let quote = self.bump()?;
                    if quote != '"' && quote != '\'' {
                        return Err(XmlParseError::Malformed(
                            self.pos - 1,
                            "attribute value must be quoted".into(),
                        ));
                    }
                    let mut value = String::new();
                    loop {
                        let c = self.bump()?;
                        if c == quote {
                            break;
                        } else if c == '&' {
                            value.push_str(&self.parse_entity()?);
                        } else if c == '<' {
                            return Err(XmlParseError::Malformed(
                                self.pos - 1,
                                "'<' in attribute value".into(),
                            ));
                        } else {
                            value.push(c);
                        }
                    }
                    el.attrs.push((aname, value));
                }
                None => return Err(XmlParseError::UnexpectedEof(self.pos)),
            }
        }
        // content
        let mut text = String::new();
        loop {
            match self.peek() {
                None => return Err(XmlParseError::UnexpectedEof(self.pos)),
                Some('<') => {
                    if !text.is_empty() {
                        el.children.push(XmlNode::Text(std::mem::take(&mut text)));
                    }
                    if self.starts_with("</") {
                        self.pos += 2;
                        let at = self.pos;
                        let close = self.parse_name()?;
                        self.skip_ws();
                        self.eat('>')?;
                        if close != el.name {
                            return Err(XmlParseError::MismatchedTag {
                                expected: el.name,
                                found: close,
                                at,
                            });
                        }
                        return Ok(el);
                    } else if self.starts_with("<!--") {
                        self.skip_until("-->")?;
                    } else if self.starts_with("<![CDATA[") {
                        self.pos += 9;
                        let start = self.pos;
                        self.skip_until("]]>")?;
                        let end = self.pos - 3;
                        let cdata: String = self.chars[start..end].iter().collect();
                        el.children.push(XmlNode::Text(cdata));
                    } else if self.starts_with("<?") {
                        self.skip_until("?>")?;
                    } else {
                        let child = self.parse_element()?;
                        el.children.push(XmlNode::Element(child));
                    }
                }
                Some('&') => {
                    self.pos += 1;
                    text.push_str(&self.parse_entity()?);
                }
                Some(c) => {
                    text.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn parse_entity(&mut self) -> Result<String, XmlParseError> {
        let mut name = String::new();
        loop {
            let c = self.bump()?;
            if c == ';' {
                break;
            }
            name.push(c);
            if name.len() > 10 {
                return Err(XmlParseError::UnknownEntity(name));
            }
        }
        let s = match name.as_str() {
            "amp" => "&".to_string(),
            "lt" => "<".to_string(),
            "gt" => ">".to_string(),
            "quot" => "\"".to_string(),
            "apos" => "'".to_string(),
            _ => {
                if let Some(hex) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                    let cp = u32::from_str_radix(hex, 16)
                        .ok()
                        .and_then(char::from_u32)
                        .ok_or_else(|| XmlParseError::UnknownEntity(name.clone()))?;
                    cp.to_string()
                } else if let Some(dec) = name.strip_prefix('#') {
                    let cp = dec
                        .parse::<u32>()
                        .ok()
                        .and_then(char::from_u32)
                        .ok_or_else(|| XmlParseError::UnknownEntity(name.clone()))?;
                    cp.to_string()
                } else {
                    return Err(XmlParseError::UnknownEntity(name));
                }
            }
        };
        Ok(s)
    }
}
