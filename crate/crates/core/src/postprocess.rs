//! Postprocessing: page splitting, cross-reference resolution, and
//! lowering of the intermediate tree to XHTML-serialized HTML5.
//!
//! Pages are serialized as polyglot XHTML so the same bytes serve both the
//! standalone HTML5 output and EPUB3 content documents.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use thiserror::Error;

use crate::doc::{DocNode, Document};
use crate::graphics::XHTML_NS;
use crate::math;
use crate::xml::{XmlElement, XmlNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitLevel {
    #[default]
    None,
    Section,
}

impl SplitLevel {
    pub fn parse(s: &str) -> Option<SplitLevel> {
        match s {
            "none" => Some(SplitLevel::None),
            "section" => Some(SplitLevel::Section),
            _ => None,
        }
    }
}

/// One output page: a `document`-rooted subtree plus navigation data.
#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub id: String,
    pub title: String,
    pub path: String,
    pub root: DocNode,
    /// Page ids of children in the navigation tree.
    pub nav_children: Vec<String>,
}

#[derive(Debug, Error)]
pub enum PostprocessError {
    #[error("element `{0}` has no HTML5 mapping")]
    UnmappedElement(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

const STYLESHEET: &str = "body{max-width:42em;margin:1em auto;padding:0 1em;\
font-family:serif;line-height:1.5}nav.toc ol{list-style:none}\
.error{color:#b00;border-bottom:1px dotted #b00}svg{max-width:100%}";

fn title_text(node: &DocNode) -> String {
    let mut leaves = Vec::new();
    for c in node.children() {
        if c.name() == Some("title") {
            c.text_leaves(&mut leaves);
            break;
        }
    }
    leaves.concat()
}

/// Title of the whole document: the first section's title, if any.
fn document_title(doc: &Document) -> String {
    doc.root
        .children()
        .iter()
        .find(|c| c.name() == Some("section"))
        .map(title_text)
        .filter(|t| !t.is_empty())
        .unwrap_or_else(|| "Document".to_string())
}

/// `index.xhtml` plus `s<N>-<slug>.xhtml`; slugs are lowercased titles with
/// non-alphanumerics collapsed to `-`, at most 40 chars, numeric suffixes
/// on collision.
fn slug(title: &str) -> String {
    let mut out = String::new();
    let mut dash = true; // suppress leading dashes
    for c in title.chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
            dash = false;
        } else if !dash {
            out.push('-');
            dash = true;
        }
        if out.len() >= 40 {
            break;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        "section".to_string()
    } else {
        out
    }
}

/// Split into pages: one per top-level section plus an index page holding
/// the front matter (and, when lowered, the table of contents).
pub fn split_pages(doc: &Document, level: SplitLevel) -> Vec<Page> {
    if level == SplitLevel::None {
        return vec![Page {
            id: "index".to_string(),
            title: document_title(doc),
            path: "index.xhtml".to_string(),
            root: doc.root.clone(),
            nav_children: Vec::new(),
        }];
    }
    let mut front = DocNode::element("document");
    let mut sections: Vec<DocNode> = Vec::new();
    for child in doc.root.children() {
        if child.name() == Some("section") {
            sections.push(child.clone());
        } else {
            front.push(child.clone());
        }
    }
    if sections.is_empty() {
        return vec![Page {
            id: "index".to_string(),
            title: document_title(doc),
            path: "index.xhtml".to_string(),
            root: front,
            nav_children: Vec::new(),
        }];
    }
    let mut pages = vec![Page {
        id: "index".to_string(),
        title: document_title(doc),
        path: "index.xhtml".to_string(),
        root: front,
        nav_children: Vec::new(),
    }];
    let mut used_paths: HashMap<String, u32> = HashMap::new();
    used_paths.insert("index".to_string(), 1);
    for (i, sec) in sections.into_iter().enumerate() {
        let id = sec
            .attr("xml:id")
            .map(str::to_string)
            .unwrap_or_else(|| format!("s{}", i + 1));
        let title = title_text(&sec);
        let base = format!("{id}-{}", slug(&title));
        let n = used_paths.entry(base.clone()).or_insert(0);
        *n += 1;
        let path = if *n == 1 {
            format!("{base}.xhtml")
        } else {
            format!("{base}-{n}.xhtml")
        };
        let mut root = DocNode::element("document");
        root.push(sec);
        pages[0].nav_children.push(id.clone());
        pages.push(Page {
            id,
            title,
            path,
            root,
            nav_children: Vec::new(),
        });
    }
    pages
}

fn collect_ids(node: &DocNode, path: &str, out: &mut HashMap<String, String>) {
    if let Some(id) = node.attr("xml:id") {
        out.insert(id.to_string(), path.to_string());
    }
    for c in node.children() {
        collect_ids(c, path, out);
    }
}

/// Point every `ref` at the page and fragment of its label's anchor.
/// Unresolved refs get `class="undefined"`; returns warnings.
pub fn resolve_refs(pages: &mut [Page], labels: &BTreeMap<String, String>) -> Vec<String> {
    let mut id_to_page: HashMap<String, String> = HashMap::new();
    for p in pages.iter() {
        collect_ids(&p.root, &p.path, &mut id_to_page);
    }
    let single_page = pages.len() == 1;
    let mut warnings = Vec::new();
    for page in pages.iter_mut() {
        let own_path = page.path.clone();
        resolve_in(
            &mut page.root,
            &own_path,
            single_page,
            labels,
            &id_to_page,
            &mut warnings,
        );
    }
    warnings
}

fn resolve_in(
    node: &mut DocNode,
    own_path: &str,
    single_page: bool,
    labels: &BTreeMap<String, String>,
    id_to_page: &HashMap<String, String>,
    warnings: &mut Vec<String>,
) {
    if node.name() == Some("ref") {
        let target = node
            .attr("labelref")
            .and_then(|k| labels.get(k))
            .and_then(|id| id_to_page.get(id).map(|p| (id.clone(), p.clone())));
        match target {
            Some((id, page_path)) => {
                let href = if single_page || page_path == own_path {
                    format!("#{id}")
                } else {
                    format!("{page_path}#{id}")
                };
                node.set_attr("href", href);
            }
            None => {
                warnings.push(format!(
                    "unresolved reference `{}`",
                    node.attr("labelref").unwrap_or("")
                ));
                node.set_attr("class", "undefined");
            }
        }
    }
    if let Some(children) = node.children_mut() {
        for c in children {
            resolve_in(c, own_path, single_page, labels, id_to_page, warnings);
        }
    }
}

/// Lower one page to an XHTML tree.  `all_pages` supplies the table of
/// contents rendered on the index page of a split document.
pub fn to_html5(page: &Page, all_pages: &[Page]) -> Result<XmlElement, PostprocessError> {
    let mut head = XmlElement::new("head");
    head.push(XmlNode::Element(
        XmlElement::new("meta").attr("charset", "utf-8"),
    ));
    head.push(XmlNode::Element(
        XmlElement::new("title").text(page.title.clone()),
    ));
    head.push(XmlNode::Element(XmlElement::new("style").text(STYLESHEET)));

    let mut body = XmlElement::new("body");
    for child in page.root.children() {
        lower(child, &mut body)?;
    }
    if page.id == "index" && all_pages.len() > 1 {
        let mut ol = XmlElement::new("ol");
        for p in all_pages.iter().filter(|p| p.id != "index") {
            let a = XmlElement::new("a")
                .attr("href", p.path.clone())
                .text(p.title.clone());
            ol.push(XmlNode::Element(XmlElement::new("li").child(a)));
        }
        let nav = XmlElement::new("nav").attr("class", "toc").child(ol);
        body.push(XmlNode::Element(nav));
    }

    let mut html = XmlElement::new("html").attr("xmlns", XHTML_NS);
    html.push(XmlNode::Element(head));
    html.push(XmlNode::Element(body));
    Ok(html)
}

fn lower(node: &DocNode, out: &mut XmlElement) -> Result<(), PostprocessError> {
    match node {
        DocNode::Text(t) => out.push(XmlNode::Text(t.clone())),
        DocNode::Math { tree, display, .. } => {
            out.push(XmlNode::Element(math::mathml(tree, *display)));
        }
        DocNode::Graphics(svg) => out.push(XmlNode::Element(svg.clone())),
        DocNode::Element {
            name,
            attrs,
            children,
        } => {
            // picture is a transparent wrapper: its SVG payload goes inline
            if name == "picture" {
                for c in children {
                    lower(c, out)?;
                }
                return Ok(());
            }
            let mut el = match name.as_str() {
                "section" => XmlElement::new("section"),
                "para" => XmlElement::new("div").attr("class", "para"),
                "p" => XmlElement::new("p"),
                "emph" => XmlElement::new("em"),
                "error" => XmlElement::new("span").attr("class", "error"),
                "anchor" => XmlElement::new("span"),
                "ref" => {
                    let mut a = XmlElement::new("a");
                    if let Some(h) = attrs.iter().find(|(n, _)| n == "href") {
                        a.set_attr("href", h.1.clone());
                    }
                    if let Some(c) = attrs.iter().find(|(n, _)| n == "class") {
                        a.set_attr("class", c.1.clone());
                    }
                    a
                }
                "text" => match attrs
                    .iter()
                    .find(|(n, _)| n == "font")
                    .map(|(_, v)| v.as_str())
                {
                    Some("bold") => XmlElement::new("b"),
                    Some("italic") => XmlElement::new("i"),
                    Some("typewriter") => XmlElement::new("code"),
                    _ => XmlElement::new("span"),
                },
                "title" => {
                    // depth comes from the enclosing section, handled below
                    XmlElement::new("h1")
                }
                other => return Err(PostprocessError::UnmappedElement(other.to_string())),
            };
            if name == "section" {
                if let Some((_, id)) = attrs.iter().find(|(n, _)| n == "xml:id") {
                    el.set_attr("id", id.clone());
                }
                let level: u8 = node
                    .attr("level")
                    .and_then(|l| l.parse().ok())
                    .unwrap_or(1);
                for c in children {
                    if c.name() == Some("title") {
                        let mut h = XmlElement::new(format!("h{}", level.min(6)));
                        for t in c.children() {
                            lower(t, &mut h)?;
                        }
                        el.push(XmlNode::Element(h));
                    } else {
                        lower(c, &mut el)?;
                    }
                }
                out.push(XmlNode::Element(el));
                return Ok(());
            }
            if name == "anchor" {
                if let Some((_, id)) = attrs.iter().find(|(n, _)| n == "xml:id") {
                    el.set_attr("id", id.clone());
                }
            }
            for c in children {
                lower(c, &mut el)?;
            }
            out.push(XmlNode::Element(el));
        }
    }
    Ok(())
}

/// Polyglot serialization: XML declaration, HTML5 doctype, XHTML body.
pub fn serialize_page(html: &XmlElement) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!DOCTYPE html>\n{}",
        html.to_fragment_string()
    )
}

/// Write every page under `dest`; returns the relative paths written.
pub fn write_site(pages: &[Page], dest: &Path) -> Result<Vec<String>, PostprocessError> {
    let io_err = |path: &Path, source: std::io::Error| PostprocessError::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dest).map_err(|e| io_err(dest, e))?;
    let mut written = Vec::new();
    for page in pages {
        let html = to_html5(page, pages)?;
        let out_path = dest.join(&page.path);
        std::fs::write(&out_path, serialize_page(&html)).map_err(|e| io_err(&out_path, e))?;
        written.push(page.path.clone());
    }
    Ok(written)
}
