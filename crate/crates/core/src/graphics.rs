//! SVG driver layer: path building under affine transforms, bounding box
//! accumulation, size estimation for embedded text, and `<svg>` assembly.
//!
//! Coordinates are quantized to scaled points at record time (after the
//! current transform is applied), so bounding boxes are exact integers and
//! the emitted viewBox is reproducible.  The SVG user unit is 1 pt.

use thiserror::Error;

use crate::dimension::{Dimension, SP_PER_PT};
use crate::doc::DocNode;
use crate::math;
use crate::xml::{XmlElement, XmlNode};

pub const SVG_NS: &str = "http://www.w3.org/2000/svg";
pub const XHTML_NS: &str = "http://www.w3.org/1999/xhtml";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphicsError {
    #[error("path operation requires a current point")]
    NoCurrentPoint,
    #[error("stroke/fill with an empty path")]
    EmptyPath,
    #[error("transform is not invertible")]
    SingularTransform,
}

/// Row-major 3x2 affine matrix: x' = a x + c y + e, y' = b x + d y + f.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Default for Transform {
    fn default() -> Self {
        Transform::identity()
    }
}

impl Transform {
    pub fn identity() -> Transform {
        Transform {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
            e: 0.0,
            f: 0.0,
        }
    }

    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Transform {
        Transform { a, b, c, d, e, f }
    }

    pub fn is_invertible(&self) -> bool {
        (self.a * self.d - self.b * self.c).abs() > 1e-9
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a * x + self.c * y + self.e,
            self.b * x + self.d * y + self.f,
        )
    }

    /// Matrix product `self * first`: apply `first`, then `self`.
    pub fn after(&self, first: &Transform) -> Transform {
        Transform {
            a: self.a * first.a + self.c * first.b,
            b: self.b * first.a + self.d * first.b,
            c: self.a * first.c + self.c * first.d,
            d: self.b * first.c + self.d * first.d,
            e: self.a * first.e + self.c * first.f + self.e,
            f: self.b * first.e + self.d * first.f + self.f,
        }
    }
}

/// A point in scaled points.
pub type SpPoint = (i64, i64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathOp {
    MoveTo(SpPoint),
    LineTo(SpPoint),
    CurveTo(SpPoint, SpPoint, SpPoint),
    ClosePath,
}

/// Axis-aligned bounds in scaled points; the empty box is explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BBox {
    Empty,
    Box {
        min_x: i64,
        min_y: i64,
        max_x: i64,
        max_y: i64,
    },
}

impl BBox {
    pub fn extend(&mut self, (x, y): SpPoint) {
        match self {
            BBox::Empty => {
                *self = BBox::Box {
                    min_x: x,
                    min_y: y,
                    max_x: x,
                    max_y: y,
                }
            }
            BBox::Box {
                min_x,
                min_y,
                max_x,
                max_y,
            } => {
                *min_x = (*min_x).min(x);
                *min_y = (*min_y).min(y);
                *max_x = (*max_x).max(x);
                *max_y = (*max_y).max(y);
            }
        }
    }

    pub fn union(&mut self, other: BBox) {
        if let BBox::Box {
            min_x,
            min_y,
            max_x,
            max_y,
        } = other
        {
            self.extend((min_x, min_y));
            self.extend((max_x, max_y));
        }
    }

    pub fn inflate(self, margin: i64) -> BBox {
        match self {
            BBox::Empty => BBox::Empty,
            BBox::Box {
                min_x,
                min_y,
                max_x,
                max_y,
            } => BBox::Box {
                min_x: min_x - margin,
                min_y: min_y - margin,
                max_x: max_x + margin,
                max_y: max_y + margin,
            },
        }
    }

    pub fn width(&self) -> i64 {
        match self {
            BBox::Empty => 0,
            BBox::Box { min_x, max_x, .. } => max_x - min_x,
        }
    }

    pub fn height(&self) -> i64 {
        match self {
            BBox::Empty => 0,
            BBox::Box { min_y, max_y, .. } => max_y - min_y,
        }
    }
}

/// Fixed abstract font model: no metrics loading, every character advances
/// half an em; ascent 0.7 em, descent 0.3 em.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FontModel {
    pub size: Dimension,
}

impl Default for FontModel {
    fn default() -> Self {
        FontModel {
            size: Dimension::from_pt(10),
        }
    }
}

impl FontModel {
    pub fn em(&self) -> Dimension {
        self.size
    }

    pub fn char_advance(&self) -> Dimension {
        Dimension(self.size.sp() / 2)
    }

    pub fn line_height(&self) -> Dimension {
        self.size
    }
}

/// Width/height of inline content under the fixed font model.  Math nodes
/// count their mi/mn/mo leaf characters.
pub fn estimate_size(nodes: &[DocNode], font: &FontModel) -> BBox {
    let chars = count_chars(nodes);
    if chars == 0 {
        return BBox::Empty;
    }
    BBox::Box {
        min_x: 0,
        min_y: 0,
        max_x: chars as i64 * font.char_advance().sp(),
        max_y: font.line_height().sp(),
    }
}

fn count_chars(nodes: &[DocNode]) -> usize {
    let mut n = 0;
    for node in nodes {
        match node {
            DocNode::Text(t) => n += t.chars().count(),
            DocNode::Math { tree, .. } => n += tree.leaf_char_count(),
            DocNode::Element { children, .. } => n += count_chars(children),
            DocNode::Graphics(_) => {}
        }
    }
    n
}

/// Text placed in a picture; `(x, y)` is the bottom-left corner in TeX
/// coordinates (y up), already transformed.
#[derive(Debug, Clone, PartialEq)]
pub struct TextItem {
    pub pos: SpPoint,
    pub nodes: Vec<DocNode>,
    pub size: BBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphicsState {
    pub transform: Transform,
    pub line_width: Dimension,
    pub stroke_color: Option<[u8; 3]>,
    pub fill_color: Option<[u8; 3]>,
    pub font: FontModel,
    path: Vec<PathOp>,
    path_bbox: BBox,
    current: Option<SpPoint>,
    bbox: BBox,
    elements: Vec<XmlElement>,
    texts: Vec<TextItem>,
}

impl Default for GraphicsState {
    fn default() -> Self {
        GraphicsState {
            transform: Transform::identity(),
            line_width: Dimension(4 * SP_PER_PT / 10),
            stroke_color: Some([0, 0, 0]),
            fill_color: Some([0, 0, 0]),
            font: FontModel::default(),
            path: Vec::new(),
            path_bbox: BBox::Empty,
            current: None,
            bbox: BBox::Empty,
            elements: Vec::new(),
            texts: Vec::new(),
        }
    }
}

impl GraphicsState {
    pub fn new() -> GraphicsState {
        GraphicsState::default()
    }

    /// Map a user-space point (dimensions) through the current transform,
    /// quantized to sp.
    pub fn project(&self, x: Dimension, y: Dimension) -> SpPoint {
        let (px, py) = self.transform.apply(x.to_pt(), y.to_pt());
        (
            (px * SP_PER_PT as f64).round() as i64,
            (py * SP_PER_PT as f64).round() as i64,
        )
    }

    /// Compose a new transform in front of the current one: points are
    /// mapped through the existing transform first, then `t`.
    pub fn push_transform(&mut self, t: Transform) -> Result<(), GraphicsError> {
        if !t.is_invertible() {
            return Err(GraphicsError::SingularTransform);
        }
        self.transform = t.after(&self.transform);
        Ok(())
    }

    pub fn move_to(&mut self, x: Dimension, y: Dimension) {
        let p = self.project(x, y);
        self.path.push(PathOp::MoveTo(p));
        self.path_bbox.extend(p);
        self.current = Some(p);
    }

    pub fn line_to(&mut self, x: Dimension, y: Dimension) -> Result<(), GraphicsError> {
        if self.current.is_none() {
            return Err(GraphicsError::NoCurrentPoint);
        }
        let p = self.project(x, y);
        self.path.push(PathOp::LineTo(p));
        self.path_bbox.extend(p);
        self.current = Some(p);
        Ok(())
    }

    /// Curve bounds use the control-point hull, a conservative overestimate.
    #[allow(clippy::too_many_arguments)]
    pub fn curve_to(
        &mut self,
        c1x: Dimension,
        c1y: Dimension,
        c2x: Dimension,
        c2y: Dimension,
        x: Dimension,
        y: Dimension,
    ) -> Result<(), GraphicsError> {
        if self.current.is_none() {
            return Err(GraphicsError::NoCurrentPoint);
        }
        let c1 = self.project(c1x, c1y);
        let c2 = self.project(c2x, c2y);
        let p = self.project(x, y);
        self.path.push(PathOp::CurveTo(c1, c2, p));
        self.path_bbox.extend(c1);
        self.path_bbox.extend(c2);
        self.path_bbox.extend(p);
        self.current = Some(p);
        Ok(())
    }

    pub fn close_path(&mut self) -> Result<(), GraphicsError> {
        if self.current.is_none() {
            return Err(GraphicsError::NoCurrentPoint);
        }
        self.path.push(PathOp::ClosePath);
        Ok(())
    }

    pub fn has_path(&self) -> bool {
        !self.path.is_empty()
    }

    pub fn path_ops(&self) -> &[PathOp] {
        &self.path
    }

    pub fn stroke(&mut self) -> Result<(), GraphicsError> {
        if self.path.is_empty() {
            return Err(GraphicsError::EmptyPath);
        }
        let el = XmlElement::new("path")
            .attr("d", path_data(&self.path))
            .attr("fill", "none")
            .attr("stroke", color_value(self.stroke_color))
            .attr("stroke-width", fmt_pt(self.line_width.sp()));
        self.elements.push(el);
        self.bbox.union(self.path_bbox.inflate(self.line_width.sp() / 2));
        self.clear_path();
        Ok(())
    }

    pub fn fill(&mut self) -> Result<(), GraphicsError> {
        if self.path.is_empty() {
            return Err(GraphicsError::EmptyPath);
        }
        let el = XmlElement::new("path")
            .attr("d", path_data(&self.path))
            .attr("fill", color_value(self.fill_color))
            .attr("stroke", "none");
        self.elements.push(el);
        self.bbox.union(self.path_bbox);
        self.clear_path();
        Ok(())
    }

    fn clear_path(&mut self) {
        self.path.clear();
        self.path_bbox = BBox::Empty;
        self.current = None;
    }

    /// Place inline content at `(x, y)` (bottom-left, user coordinates).
    pub fn place_text(&mut self, x: Dimension, y: Dimension, nodes: Vec<DocNode>) {
        let pos = self.project(x, y);
        let size = estimate_size(&nodes, &self.font);
        let (w, h) = (size.width(), size.height());
        self.bbox.extend(pos);
        self.bbox.extend((pos.0 + w, pos.1 + h));
        self.texts.push(TextItem { pos, nodes, size });
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Assemble the `<svg>` element.  Returns the element and whether the
    /// picture was empty (caller records the warning).
    pub fn emit_picture(self) -> (XmlElement, bool) {
        let BBox::Box {
            min_x,
            min_y,
            max_x,
            max_y,
        } = self.bbox
        else {
            let svg = XmlElement::new("svg")
                .attr("xmlns", SVG_NS)
                .attr("viewBox", "0 0 0 0");
            return (svg, true);
        };
        let view_box = format!(
            "{} {} {} {}",
            fmt_pt(min_x),
            fmt_pt(min_y),
            fmt_pt(max_x - min_x),
            fmt_pt(max_y - min_y)
        );
        let mut svg = XmlElement::new("svg")
            .attr("xmlns", SVG_NS)
            .attr("viewBox", view_box)
            .attr("width", format!("{}pt", fmt_pt(max_x - min_x)))
            .attr("height", format!("{}pt", fmt_pt(max_y - min_y)));
        if !self.elements.is_empty() {
            // flip TeX's y-up coordinates to SVG's y-down
            let mut group = XmlElement::new("g").attr(
                "transform",
                format!("matrix(1 0 0 -1 0 {})", fmt_pt(max_y + min_y)),
            );
            for el in self.elements {
                group.push(XmlNode::Element(el));
            }
            svg.push(XmlNode::Element(group));
        }
        for item in self.texts {
            // text sits outside the flip group so it renders upright
            let (w, h) = (item.size.width(), item.size.height());
            let top = (max_y + min_y) - (item.pos.1 + h);
            let mut fo = XmlElement::new("foreignObject")
                .attr("x", fmt_pt(item.pos.0))
                .attr("y", fmt_pt(top))
                .attr("width", fmt_pt(w))
                .attr("height", fmt_pt(h));
            let mut div = XmlElement::new("div").attr("xmlns", XHTML_NS);
            for node in &item.nodes {
                div.push(inline_to_xhtml(node));
            }
            fo.push(XmlNode::Element(div));
            svg.push(XmlNode::Element(fo));
        }
        (svg, false)
    }
}

/// Minimal inline lowering for text embedded in pictures.
fn inline_to_xhtml(node: &DocNode) -> XmlNode {
    match node {
        DocNode::Text(t) => XmlNode::Text(t.clone()),
        DocNode::Math { tree, display, .. } => {
            XmlNode::Element(math::mathml(tree, *display))
        }
        DocNode::Element {
            name,
            attrs,
            children,
        } => {
            let tag = match name.as_str() {
                "text" => match attrs.iter().find(|(n, _)| n == "font").map(|(_, v)| v.as_str()) {
                    Some("bold") => "b",
                    Some("italic") => "i",
                    Some("typewriter") => "code",
                    _ => "span",
                },
                "emph" => "em",
                _ => "span",
            };
            let mut el = XmlElement::new(tag);
            for c in children {
                el.push(inline_to_xhtml(c));
            }
            XmlNode::Element(el)
        }
        DocNode::Graphics(el) => XmlNode::Element(el.clone()),
    }
}

fn color_value(c: Option<[u8; 3]>) -> String {
    match c {
        Some([r, g, b]) => format!("rgb({r},{g},{b})"),
        None => "none".to_string(),
    }
}

fn path_data(ops: &[PathOp]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for op in ops {
        match op {
            PathOp::MoveTo((x, y)) => {
                parts.push(format!("M {} {}", fmt_pt(*x), fmt_pt(*y)));
            }
            PathOp::LineTo((x, y)) => {
                parts.push(format!("L {} {}", fmt_pt(*x), fmt_pt(*y)));
            }
            PathOp::CurveTo((c1x, c1y), (c2x, c2y), (x, y)) => {
                parts.push(format!(
                    "C {} {} {} {} {} {}",
                    fmt_pt(*c1x),
                    fmt_pt(*c1y),
                    fmt_pt(*c2x),
                    fmt_pt(*c2y),
                    fmt_pt(*x),
                    fmt_pt(*y)
                ));
            }
            PathOp::ClosePath => parts.push("Z".to_string()),
        }
    }
    parts.join(" ")
}

/// sp value as a pt numeral, at most 3 decimals, trailing zeros trimmed.
pub fn fmt_pt(sp: i64) -> String {
    let pt = sp as f64 / SP_PER_PT as f64;
    let mut s = format!("{pt:.3}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: i64) -> Dimension {
        Dimension::from_pt(v)
    }

    #[test]
    fn line_records_transformed_points_and_bbox() {
        let mut gs = GraphicsState::new();
        gs.move_to(pt(0), pt(0));
        gs.line_to(pt(10), pt(0)).unwrap();
        assert_eq!(
            gs.path_ops(),
            &[PathOp::MoveTo((0, 0)), PathOp::LineTo((10 * 65536, 0))]
        );
        assert_eq!(
            gs.path_bbox,
            BBox::Box {
                min_x: 0,
                min_y: 0,
                max_x: 10 * 65536,
                max_y: 0
            }
        );
    }

    #[test]
    fn scale_transform_applies_at_record_time() {
        let mut gs = GraphicsState::new();
        gs.push_transform(Transform::new(2.0, 0.0, 0.0, 2.0, 0.0, 0.0))
            .unwrap();
        gs.move_to(pt(0), pt(0));
        gs.line_to(pt(10), pt(0)).unwrap();
        assert_eq!(gs.path_ops()[1], PathOp::LineTo((20 * 65536, 0)));
    }

    #[test]
    fn line_to_without_current_point() {
        let mut gs = GraphicsState::new();
        assert_eq!(gs.line_to(pt(1), pt(1)), Err(GraphicsError::NoCurrentPoint));
    }

    #[test]
    fn stroke_builds_path_element() {
        let mut gs = GraphicsState::new();
        gs.line_width = pt(1);
        gs.move_to(pt(0), pt(0));
        gs.line_to(pt(10), pt(0)).unwrap();
        gs.stroke().unwrap();
        let el = &gs.elements[0];
        assert_eq!(el.get_attr("d"), Some("M 0 0 L 10 0"));
        assert_eq!(el.get_attr("stroke-width"), Some("1"));
        assert_eq!(el.get_attr("stroke"), Some("rgb(0,0,0)"));
        assert_eq!(el.get_attr("fill"), Some("none"));
    }

    #[test]
    fn fill_triangle() {
        let mut gs = GraphicsState::new();
        gs.fill_color = Some([255, 0, 0]);
        gs.move_to(pt(0), pt(0));
        gs.line_to(pt(10), pt(0)).unwrap();
        gs.line_to(pt(0), pt(10)).unwrap();
        gs.close_path().unwrap();
        gs.fill().unwrap();
        let el = &gs.elements[0];
        assert_eq!(el.get_attr("fill"), Some("rgb(255,0,0)"));
        assert_eq!(el.get_attr("stroke"), Some("none"));
        assert!(el.get_attr("d").unwrap().ends_with("Z"));
    }

    #[test]
    fn stroke_with_empty_path() {
        let mut gs = GraphicsState::new();
        assert_eq!(gs.stroke(), Err(GraphicsError::EmptyPath));
    }

    #[test]
    fn stroked_line_viewbox_inflated_by_half_width() {
        let mut gs = GraphicsState::new();
        gs.line_width = pt(1);
        gs.move_to(pt(0), pt(0));
        gs.line_to(pt(10), pt(0)).unwrap();
        gs.stroke().unwrap();
        let (svg, empty) = gs.emit_picture();
        assert!(!empty);
        assert_eq!(svg.get_attr("viewBox"), Some("-0.5 -0.5 11 1"));
    }

    #[test]
    fn empty_picture_emits_zero_viewbox() {
        let (svg, empty) = GraphicsState::new().emit_picture();
        assert!(empty);
        assert_eq!(svg.get_attr("viewBox"), Some("0 0 0 0"));
        assert!(svg.children.is_empty());
    }

    #[test]
    fn text_extends_bbox_and_emits_foreign_object() {
        let mut gs = GraphicsState::new();
        gs.place_text(pt(0), pt(0), vec![DocNode::text("x")]);
        let (svg, empty) = gs.emit_picture();
        assert!(!empty);
        let XmlNode::Element(fo) = &svg.children[0] else {
            panic!("expected element");
        };
        assert_eq!(fo.name, "foreignObject");
        assert_eq!(fo.get_attr("width"), Some("5"));
        assert_eq!(fo.get_attr("height"), Some("10"));
    }

    #[test]
    fn estimate_size_counts_math_leaves() {
        let font = FontModel::default();
        let abc = vec![DocNode::text("abc")];
        let size = estimate_size(&abc, &font);
        assert_eq!(size.width(), 15 * 65536);
        assert_eq!(size.height(), 10 * 65536);
        assert_eq!(estimate_size(&[], &font), BBox::Empty);
        let msup = crate::math::MathTree::Msup(
            Box::new(crate::math::MathTree::mi("x")),
            Box::new(crate::math::MathTree::mn("2")),
        );
        let m = vec![DocNode::Math {
            tex: "x^2".into(),
            tree: msup,
            display: crate::math::Display::Inline,
        }];
        assert_eq!(estimate_size(&m, &font).width(), 10 * 65536);
    }

    #[test]
    fn transform_composition_matches_matrix_product() {
        let t1 = Transform::new(2.0, 0.0, 0.0, 3.0, 5.0, -1.0);
        let t2 = Transform::new(0.0, 1.0, -1.0, 0.0, 2.0, 2.0);
        let combined = t2.after(&t1);
        let (x, y) = (1.5, -2.25);
        let step = {
            let (ix, iy) = t1.apply(x, y);
            t2.apply(ix, iy)
        };
        let direct = combined.apply(x, y);
        assert!((step.0 - direct.0).abs() < 1e-9);
        assert!((step.1 - direct.1).abs() < 1e-9);
    }

    #[test]
    fn singular_transform_rejected() {
        let mut gs = GraphicsState::new();
        assert_eq!(
            gs.push_transform(Transform::new(1.0, 2.0, 2.0, 4.0, 0.0, 0.0)),
            Err(GraphicsError::SingularTransform)
        );
    }
}
