//! Document tree assembly during digestion.
//!
//! Keeps a stack of open elements over the document root.  Paragraphs are
//! implicit: the first horizontal material opens `para > p`, `\par` closes
//! them.  Sections auto-close deeper or equal-level sections.  Captures
//! collect inline nodes into a detached list for constructor arguments,
//! titles and picture text.

use crate::doc::DocNode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpenKind {
    Root,
    Section(u8),
    Para,
    P,
    Capture,
    Constructor,
}

#[derive(Debug)]
struct OpenEl {
    node: DocNode,
    kind: OpenKind,
}

#[derive(Debug)]
pub struct Builder {
    stack: Vec<OpenEl>,
    section_counter: u32,
}

impl Builder {
    pub fn new() -> Builder {
        Builder {
            stack: vec![OpenEl {
                node: DocNode::element("document"),
                kind: OpenKind::Root,
            }],
            section_counter: 0,
        }
    }

    fn top(&mut self) -> &mut OpenEl {
        self.stack.last_mut().expect("builder stack never empty")
    }

    pub fn top_kind(&self) -> OpenKind {
        self.stack.last().expect("builder stack never empty").kind
    }

    /// True when content may be appended inline without opening a paragraph.
    pub fn in_inline(&self) -> bool {
        matches!(
            self.top_kind(),
            OpenKind::P | OpenKind::Capture | OpenKind::Constructor
        )
    }

    pub fn ensure_inline(&mut self) {
        if self.in_inline() {
            return;
        }
        self.open(DocNode::element("para"), OpenKind::Para);
        self.open(DocNode::element("p"), OpenKind::P);
    }

    pub fn open(&mut self, node: DocNode, kind: OpenKind) {
        self.stack.push(OpenEl { node, kind });
    }

    pub fn close(&mut self) {
        let el = self.stack.pop().expect("close with nothing open");
        self.top().node.push(el.node);
    }

    /// Append a finished node at the current position.
    pub fn append(&mut self, node: DocNode) {
        self.top().node.push(node);
    }

    pub fn append_inline(&mut self, node: DocNode) {
        self.ensure_inline();
        self.append(node);
    }

    /// Append text, merging with a preceding text leaf.
    pub fn text(&mut self, s: &str) {
        if s.is_empty() {
            return;
        }
        self.ensure_inline();
        let children = self
            .top()
            .node
            .children_mut()
            .expect("open entries are elements");
        if let Some(DocNode::Text(prev)) = children.last_mut() {
            prev.push_str(s);
        } else {
            children.push(DocNode::Text(s.to_string()));
        }
    }

    /// `\par`: close the current `p` and `para` if open.
    pub fn par_break(&mut self) {
        if self.top_kind() == OpenKind::P {
            self.close();
        }
        if self.top_kind() == OpenKind::Para {
            self.close();
        }
    }

    /// Open a new section at `level`, closing paragraphs and any open
    /// sections of equal or deeper level.  Returns the section's id.
    pub fn open_section(&mut self, level: u8, title_children: Vec<DocNode>) -> String {
        self.par_break();
        while let OpenKind::Section(l) = self.top_kind() {
            if l >= level {
                self.close();
            } else {
                break;
            }
        }
        self.section_counter += 1;
        let id = format!("s{}", self.section_counter);
        let mut sec = DocNode::element("section");
        sec.set_attr("level", level.to_string());
        sec.set_attr("xml:id", id.clone());
        self.open(sec, OpenKind::Section(level));
        let mut title = DocNode::element("title");
        for c in title_children {
            title.push(c);
        }
        self.append(title);
        id
    }

    /// The `xml:id` of the innermost open section, if any.
    pub fn current_section_id(&self) -> Option<String> {
        self.stack
            .iter()
            .rev()
            .find(|el| matches!(el.kind, OpenKind::Section(_)))
            .and_then(|el| el.node.attr("xml:id"))
            .map(str::to_string)
    }

    /// Block-level insertion (pictures): closes paragraphs first.
    pub fn append_block(&mut self, node: DocNode) {
        self.par_break();
        self.append(node);
    }

    pub fn push_capture(&mut self) {
        self.open(DocNode::element("capture"), OpenKind::Capture);
    }

    pub fn pop_capture(&mut self) -> Vec<DocNode> {
        // anything opened inside the capture is force-closed into it
        while self.top_kind() != OpenKind::Capture {
            self.close();
        }
        let el = self.stack.pop().expect("capture frame present");
        match el.node {
            DocNode::Element { children, .. } => children,
            _ => unreachable!("captures are elements"),
        }
    }

    /// Close paragraphs and sections; the root must be all that remains.
    /// Returns the finished document root, or `None` if constructor or
    /// capture frames were left open.
    pub fn finish(mut self) -> Option<DocNode> {
        self.par_break();
        while matches!(self.top_kind(), OpenKind::Section(_)) {
            self.close();
        }
        if self.stack.len() != 1 {
            return None;
        }
        Some(self.stack.pop().unwrap().node)
    }
}

impl Default for Builder {
    fn default() -> Self {
        Builder::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_opens_paragraph_and_merges() {
        let mut b = Builder::new();
        b.text("a");
        b.text("b");
        let root = b.finish().unwrap();
        let para = &root.children()[0];
        assert_eq!(para.name(), Some("para"));
        let p = &para.children()[0];
        assert_eq!(p.children(), &[DocNode::Text("ab".into())]);
    }

    #[test]
    fn par_break_separates_paragraphs() {
        let mut b = Builder::new();
        b.text("a");
        b.par_break();
        b.text("b");
        let root = b.finish().unwrap();
        assert_eq!(root.children().len(), 2);
    }

    #[test]
    fn sections_autoclose_at_same_level() {
        let mut b = Builder::new();
        b.open_section(1, vec![DocNode::text("A")]);
        b.text("x");
        b.open_section(2, vec![DocNode::text("A.1")]);
        b.text("y");
        b.open_section(1, vec![DocNode::text("B")]);
        b.text("z");
        let root = b.finish().unwrap();
        assert_eq!(root.children().len(), 2);
        let a = &root.children()[0];
        assert_eq!(a.attr("level"), Some("1"));
        // A contains title, para, and the nested A.1
        assert_eq!(a.children().len(), 3);
        assert_eq!(a.children()[2].attr("level"), Some("2"));
    }

    #[test]
    fn capture_collects_detached_nodes() {
        let mut b = Builder::new();
        b.text("before");
        b.push_capture();
        b.text("inside");
        let nodes = b.pop_capture();
        assert_eq!(nodes, vec![DocNode::Text("inside".into())]);
        b.text("after");
        let root = b.finish().unwrap();
        let mut leaves = Vec::new();
        root.text_leaves(&mut leaves);
        assert_eq!(leaves, vec!["beforeafter"]);
    }
}
