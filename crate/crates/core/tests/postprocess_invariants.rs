//! Postprocessor invariants over the corpus: text content is conserved
//! under splitting, and after reference resolution no internal href
//! dangles (ref closure).

mod common;

use std::collections::HashMap;
use std::collections::HashSet;

use texsmith_core::bindings::standard_registry;
use texsmith_core::doc::DocNode;
use texsmith_core::engine::{convert, EngineOptions};
use texsmith_core::postprocess::{resolve_refs, split_pages, Page, SplitLevel};

fn text_multiset(node: &DocNode, out: &mut HashMap<String, usize>) {
    match node {
        DocNode::Text(s) => *out.entry(s.clone()).or_default() += 1,
        DocNode::Element { children, .. } => {
            for c in children {
                text_multiset(c, out);
            }
        }
        // math and graphics carry their own content; count their source
        DocNode::Math { tex, .. } => *out.entry(format!("$ {tex} $")).or_default() += 1,
        DocNode::Graphics(_) => *out.entry("<svg>".to_string()).or_default() += 1,
    }
}

fn collect_hrefs(node: &DocNode, own_path: &str, out: &mut Vec<(String, String)>) {
    if node.name() == Some("ref") {
        if let Some(href) = node.attr("href") {
            let (page, frag) = match href.split_once('#') {
                Some(("", frag)) => (own_path.to_string(), frag.to_string()),
                Some((page, frag)) => (page.to_string(), frag.to_string()),
                None => (own_path.to_string(), href.to_string()),
            };
            out.push((page, frag));
        }
    }
    for c in node.children() {
        collect_hrefs(c, own_path, out);
    }
}

fn collect_ids(node: &DocNode, out: &mut HashSet<String>) {
    if let Some(id) = node.attr("xml:id") {
        out.insert(id.to_string());
    }
    for c in node.children() {
        collect_ids(c, out);
    }
}

fn pages_for(source: &str, level: SplitLevel) -> (DocNode, Vec<Page>) {
    let reg = standard_registry();
    let out = convert(source, &reg, &EngineOptions::default()).unwrap();
    let mut pages = split_pages(&out.document, level);
    resolve_refs(&mut pages, &out.document.labels);
    (out.document.root.clone(), pages)
}

#[test]
fn splitting_conserves_text_content() {
    for (name, source) in common::CORPUS {
        for level in [SplitLevel::None, SplitLevel::Section] {
            let (root, pages) = pages_for(source, level);
            let mut before = HashMap::new();
            text_multiset(&root, &mut before);
            let mut after = HashMap::new();
            for p in &pages {
                text_multiset(&p.root, &mut after);
            }
            assert_eq!(before, after, "{name} at {level:?}");
        }
    }
}

#[test]
fn resolved_refs_are_closed() {
    for (name, source) in common::CORPUS {
        for level in [SplitLevel::None, SplitLevel::Section] {
            let (_, pages) = pages_for(source, level);
            // ids available per page path
            let mut ids_by_page: HashMap<String, HashSet<String>> = HashMap::new();
            for p in &pages {
                let mut ids = HashSet::new();
                collect_ids(&p.root, &mut ids);
                ids_by_page.insert(p.path.clone(), ids);
            }
            for p in &pages {
                let mut hrefs = Vec::new();
                collect_hrefs(&p.root, &p.path, &mut hrefs);
                for (page, frag) in hrefs {
                    let ids = ids_by_page
                        .get(&page)
                        .unwrap_or_else(|| panic!("{name}: href to unknown page {page}"));
                    assert!(
                        ids.contains(&frag),
                        "{name} at {level:?}: dangling href {page}#{frag}"
                    );
                }
            }
        }
    }
}

#[test]
fn every_node_lands_on_exactly_one_page() {
    // section split: the number of top-level children is conserved
    for (name, source) in common::CORPUS {
        let (root, pages) = pages_for(source, SplitLevel::Section);
        let total: usize = pages.iter().map(|p| p.root.children().len()).sum();
        assert_eq!(total, root.children().len(), "{name}");
    }
}
