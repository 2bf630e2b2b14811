//! EPUB3 packaging: deterministic archive assembly (mimetype, container,
//! package document, navigation document, content pages) plus a structural
//! validator covering the container and package-document rules.

pub mod zip;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::doc::DocNode;
use crate::postprocess::{self, Page};
use crate::xml::{self, escape_text, XmlElement, XmlNode};

use zip::{read_zip, DosTime, ZipWriter, METHOD_STORED};

pub const MIMETYPE: &[u8] = b"application/epub+zip";
const CONTAINER_NS: &str = "urn:oasis:names:tc:opendocument:xmlns:container";
const OPF_NS: &str = "http://www.idpf.org/2007/opf";
const DC_NS: &str = "http://purl.org/dc/elements/1.1/";
const OPS_NS: &str = "http://www.idpf.org/2007/ops";
const XHTML_NS: &str = "http://www.w3.org/1999/xhtml";
const OPF_PATH: &str = "OEBPS/content.opf";

#[derive(Debug, Error)]
pub enum EpubError {
    #[error("invalid metadata: {0}")]
    MetadataInvalid(String),
    #[error("manifest collision on `{0}`")]
    ManifestCollision(String),
    #[error(transparent)]
    Zip(#[from] zip::ZipError),
    #[error(transparent)]
    Postprocess(#[from] postprocess::PostprocessError),
}

/// Dublin Core metadata for the package document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpubMetadata {
    pub identifier: String,
    pub title: String,
    pub language: String,
    /// UTC timestamp in the exact form `CCYY-MM-DDThh:mm:ssZ`.
    pub modified: String,
}

impl EpubMetadata {
    pub fn validate(&self) -> Result<(), EpubError> {
        for (field, value) in [
            ("identifier", &self.identifier),
            ("title", &self.title),
            ("language", &self.language),
            ("modified", &self.modified),
        ] {
            if value.trim().is_empty() {
                return Err(EpubError::MetadataInvalid(format!("{field} is empty")));
            }
        }
        if !is_valid_modified(&self.modified) {
            return Err(EpubError::MetadataInvalid(format!(
                "modified `{}` is not CCYY-MM-DDThh:mm:ssZ",
                self.modified
            )));
        }
        Ok(())
    }
}

/// Check the exact `CCYY-MM-DDThh:mm:ssZ` shape with in-range fields.
pub fn is_valid_modified(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 20 || b[4] != b'-' || b[7] != b'-' || b[10] != b'T' {
        return false;
    }
    if b[13] != b':' || b[16] != b':' || b[19] != b'Z' {
        return false;
    }
    let num = |range: std::ops::Range<usize>| -> Option<u32> { s[range].parse().ok() };
    let (Some(_y), Some(mo), Some(d), Some(h), Some(mi), Some(sec)) = (
        num(0..4),
        num(5..7),
        num(8..10),
        num(11..13),
        num(14..16),
        num(17..19),
    ) else {
        return false;
    };
    (1..=12).contains(&mo) && (1..=31).contains(&d) && h < 24 && mi < 60 && sec < 60
}

fn dos_time(modified: &str) -> DosTime {
    // validated shape: numeric fields at fixed offsets
    let num = |range: std::ops::Range<usize>| modified[range].parse::<u16>().unwrap_or(0);
    DosTime::new(
        num(0..4),
        num(5..7),
        num(8..10),
        num(11..13),
        num(14..16),
        num(17..19),
    )
}

/// An extra (non-page) file packaged under `OEBPS/`.
#[derive(Debug, Clone)]
pub struct Resource {
    pub href: String,
    pub media_type: String,
    pub data: Vec<u8>,
}

struct ManifestItem {
    id: String,
    href: String,
    media_type: String,
    properties: Vec<&'static str>,
}

fn node_has(node: &DocNode, want_math: bool) -> bool {
    match node {
        DocNode::Math { .. } => want_math,
        DocNode::Graphics(_) => !want_math,
        DocNode::Element { children, .. } => children.iter().any(|c| node_has(c, want_math)),
        DocNode::Text(_) => false,
    }
}

fn page_item(page: &Page) -> ManifestItem {
    let mut properties = Vec::new();
    if node_has(&page.root, true) {
        properties.push("mathml");
    }
    if node_has(&page.root, false) {
        properties.push("svg");
    }
    ManifestItem {
        id: format!("p-{}", page.id),
        href: page.path.clone(),
        media_type: "application/xhtml+xml".to_string(),
        properties,
    }
}

fn container_xml() -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <container version=\"1.0\" xmlns=\"{CONTAINER_NS}\">\
         <rootfiles>\
         <rootfile full-path=\"{OPF_PATH}\" \
         media-type=\"application/oebps-package+xml\"/>\
         </rootfiles></container>\n"
    )
}

fn package_opf(items: &[ManifestItem], spine: &[&str], meta: &EpubMetadata) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(&format!(
        "<package xmlns=\"{OPF_NS}\" version=\"3.0\" unique-identifier=\"pub-id\">"
    ));
    s.push_str(&format!("<metadata xmlns:dc=\"{DC_NS}\">"));
    s.push_str(&format!(
        "<dc:identifier id=\"pub-id\">{}</dc:identifier>",
        escape_text(&meta.identifier)
    ));
    s.push_str(&format!("<dc:title>{}</dc:title>", escape_text(&meta.title)));
    s.push_str(&format!(
        "<dc:language>{}</dc:language>",
        escape_text(&meta.language)
    ));
    s.push_str(&format!(
        "<meta property=\"dcterms:modified\">{}</meta>",
        escape_text(&meta.modified)
    ));
    s.push_str("</metadata><manifest>");
    for item in items {
        s.push_str(&format!(
            "<item id=\"{}\" href=\"{}\" media-type=\"{}\"",
            xml::escape_attr(&item.id),
            xml::escape_attr(&item.href),
            xml::escape_attr(&item.media_type)
        ));
        if !item.properties.is_empty() {
            s.push_str(&format!(" properties=\"{}\"", item.properties.join(" ")));
        }
        s.push_str("/>");
    }
    s.push_str("</manifest><spine>");
    for idref in spine {
        s.push_str(&format!("<itemref idref=\"{}\"/>", xml::escape_attr(idref)));
    }
    s.push_str("</spine></package>\n");
    s
}

/// Build the navigation document: a `<nav epub:type="toc">` whose ordered
/// list mirrors the page navigation tree.
pub fn make_nav(pages: &[Page]) -> String {
    fn li(page: &Page, pages: &[Page], out: &mut XmlElement) {
        let mut item = XmlElement::new("li").child(
            XmlElement::new("a")
                .attr("href", page.path.clone())
                .text(page.title.clone()),
        );
        if !page.nav_children.is_empty() {
            let mut ol = XmlElement::new("ol");
            for child_id in &page.nav_children {
                if let Some(child) = pages.iter().find(|p| &p.id == child_id) {
                    li(child, pages, &mut ol);
                }
            }
            item.children.push(XmlNode::Element(ol));
        }
        out.children.push(XmlNode::Element(item));
    }

    let mut ol = XmlElement::new("ol");
    // the index page's nav children appear nested beneath it
    if let Some(first) = pages.first() {
        li(first, pages, &mut ol);
        for page in &pages[1..] {
            if !first.nav_children.contains(&page.id) {
                li(page, pages, &mut ol);
            }
        }
    }
    let nav = XmlElement::new("nav")
        .attr("epub:type", "toc")
        .child(XmlElement::new("h1").text("Contents"))
        .child(ol);
    let html = XmlElement::new("html")
        .attr("xmlns", XHTML_NS)
        .attr("xmlns:epub", OPS_NS)
        .child(
            XmlElement::new("head")
                .child(XmlElement::new("meta").attr("charset", "utf-8"))
                .child(XmlElement::new("title").text("Contents")),
        )
        .child(XmlElement::new("body").child(nav));
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!DOCTYPE html>\n{}",
        html.to_fragment_string()
    )
}

/// Assemble pages and resources into EPUB3 archive bytes.
///
/// Entry order is fixed: `mimetype` (stored), `META-INF/container.xml`,
/// the OPF, the nav document, then pages and resources in input order,
/// all under `OEBPS/` and deflate-compressed with timestamps pinned to
/// `meta.modified`.
pub fn build_package(
    pages: &[Page],
    resources: &[Resource],
    meta: &EpubMetadata,
) -> Result<Vec<u8>, EpubError> {
    meta.validate()?;
    if pages.is_empty() {
        return Err(EpubError::MetadataInvalid("no pages to package".into()));
    }

    let mut items = vec![ManifestItem {
        id: "nav".to_string(),
        href: "nav.xhtml".to_string(),
        media_type: "application/xhtml+xml".to_string(),
        properties: vec!["nav"],
    }];
    for page in pages {
        items.push(page_item(page));
    }
    for res in resources {
        let id: String = res
            .href
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
            .collect();
        let id = format!("r-{id}");
        items.push(ManifestItem {
            id,
            href: res.href.clone(),
            media_type: res.media_type.clone(),
            properties: Vec::new(),
        });
    }
    let mut seen_ids = BTreeSet::new();
    let mut seen_hrefs = BTreeSet::new();
    for item in &items {
        if !seen_ids.insert(item.id.clone()) {
            return Err(EpubError::ManifestCollision(item.id.clone()));
        }
        if item.href.contains("..") || !seen_hrefs.insert(item.href.clone()) {
            return Err(EpubError::ManifestCollision(item.href.clone()));
        }
    }
    let spine: Vec<&str> = items
        .iter()
        .filter(|i| i.id.starts_with("p-"))
        .map(|i| i.id.as_str())
        .collect();

    let time = dos_time(&meta.modified);
    let mut w = ZipWriter::new();
    w.add_stored("mimetype", MIMETYPE, time);
    w.add_deflated("META-INF/container.xml", container_xml().as_bytes(), time);
    w.add_deflated(OPF_PATH, package_opf(&items, &spine, meta).as_bytes(), time);
    w.add_deflated("OEBPS/nav.xhtml", make_nav(pages).as_bytes(), time);
    for page in pages {
        let html = postprocess::to_html5(page, pages)?;
        let bytes = postprocess::serialize_page(&html);
        w.add_deflated(&format!("OEBPS/{}", page.path), bytes.as_bytes(), time);
    }
    for res in resources {
        w.add_deflated(&format!("OEBPS/{}", res.href), &res.data, time);
    }
    Ok(w.finish())
}

fn find_descendants<'a>(el: &'a XmlElement, name: &str, out: &mut Vec<&'a XmlElement>) {
    for child in &el.children {
        if let XmlNode::Element(e) = child {
            if e.name == name {
                out.push(e);
            }
            find_descendants(e, name, out);
        }
    }
}

fn descendants<'a>(el: &'a XmlElement, name: &str) -> Vec<&'a XmlElement> {
    let mut out = Vec::new();
    find_descendants(el, name, &mut out);
    out
}

/// Check the archive against the structural rules; each violation is
/// reported by rule name. An empty list means the archive passes.
pub fn validate_structure(bytes: &[u8]) -> Result<Vec<String>, EpubError> {
    let entries = read_zip(bytes)?;
    let mut violations = Vec::new();
    let mut fail = |rule: &str| violations.push(rule.to_string());

    // mimetype rules
    match entries.first() {
        Some(first) if first.name == "mimetype" => {
            if first.method != METHOD_STORED || first.extra_len != 0 {
                fail("mimetype-stored");
            }
            if first.data != MIMETYPE {
                fail("mimetype-content-exact");
            }
        }
        _ => {
            fail("mimetype-first");
            let mt = entries.iter().find(|e| e.name == "mimetype");
            match mt {
                Some(e) => {
                    if e.method != METHOD_STORED || e.extra_len != 0 {
                        fail("mimetype-stored");
                    }
                    if e.data != MIMETYPE {
                        fail("mimetype-content-exact");
                    }
                }
                None => {
                    fail("mimetype-stored");
                    fail("mimetype-content-exact");
                }
            }
        }
    }

    let entry = |name: &str| entries.iter().find(|e| e.name == name);

    // container
    let mut opf_path = None;
    match entry("META-INF/container.xml")
        .and_then(|e| String::from_utf8(e.data.clone()).ok())
        .and_then(|text| xml::parse_document(&text).ok())
    {
        Some(container) => {
            let path = descendants(&container, "rootfile")
                .first()
                .and_then(|r| r.get_attr("full-path"))
                .map(str::to_string);
            match path {
                Some(p) if entry(&p).is_some() => opf_path = Some(p),
                _ => fail("container-present-and-points-to-opf"),
            }
        }
        None => fail("container-present-and-points-to-opf"),
    }

    // package document
    let opf = opf_path
        .as_deref()
        .and_then(entry)
        .and_then(|e| String::from_utf8(e.data.clone()).ok())
        .and_then(|text| xml::parse_document(&text).ok())
        .filter(|root| root.name == "package");
    let Some(opf) = opf else {
        if opf_path.is_some() {
            fail("opf-parses");
        }
        return Ok(violations);
    };

    let opf_dir = opf_path
        .as_deref()
        .and_then(|p| p.rsplit_once('/'))
        .map(|(d, _)| format!("{d}/"))
        .unwrap_or_default();
    let manifest_items = descendants(&opf, "item");

    let mut ids = BTreeSet::new();
    let mut hrefs = BTreeSet::new();
    let mut unique = true;
    let mut nav_count = 0;
    for item in &manifest_items {
        if let Some(id) = item.get_attr("id") {
            unique &= ids.insert(id.to_string());
        }
        if let Some(href) = item.get_attr("href") {
            let full = format!("{opf_dir}{href}");
            if entry(&full).is_none() {
                fail("all-manifest-hrefs-exist-in-zip");
            }
            hrefs.insert(full);
        }
        if item
            .get_attr("properties")
            .is_some_and(|p| p.split_whitespace().any(|w| w == "nav"))
        {
            nav_count += 1;
        }
    }
    if !unique {
        fail("unique-ids");
    }
    if nav_count != 1 {
        fail("nav-present");
    }

    // every content file must be declared
    for e in &entries {
        let exempt = e.name == "mimetype"
            || e.name.starts_with("META-INF/")
            || Some(e.name.as_str()) == opf_path.as_deref();
        if !exempt && !hrefs.contains(&e.name) {
            fail("all-zip-content-files-in-manifest");
        }
    }

    for itemref in descendants(&opf, "itemref") {
        let resolves = itemref
            .get_attr("idref")
            .is_some_and(|id| ids.contains(id));
        if !resolves {
            fail("spine-idrefs-resolve");
        }
    }

    let modified_ok = descendants(&opf, "meta")
        .iter()
        .find(|m| m.get_attr("property") == Some("dcterms:modified"))
        .is_some_and(|m| is_valid_modified(m.text_content().trim()));
    if !modified_ok {
        fail("modified-timestamp-format");
    }

    for e in &entries {
        if e.name.ends_with(".xhtml") {
            let ok = String::from_utf8(e.data.clone())
                .ok()
                .is_some_and(|text| xml::parse_document(&text).is_ok());
            if !ok {
                fail("pages-well-formed-xml");
            }
        }
    }

    violations.sort();
    violations.dedup();
    Ok(violations)
}
