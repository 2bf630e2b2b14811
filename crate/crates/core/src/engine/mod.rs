//! The interpreter: expansion, grouped state, and digestion of token
//! streams into document nodes.
//!
//! One `Engine` per conversion; the binding registry is shared and
//! read-only.  Grouping uses undo logs per frame, so ending a group
//! restores every binding, catcode and register to its pre-group value.

pub mod builder;
mod expand;
mod primitives;
pub mod profiler;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::bindings::{Binding, Registry, SpecError};
use crate::catcode::{Catcode, CatcodeTable};
use crate::dimension::{Dimension, DimensionError};
use crate::doc::{DocNode, Document};
use crate::graphics::{FontModel, GraphicsError, GraphicsState};
use crate::math::MathError;
use crate::token::{detokenize, Token};
use crate::tokenizer::{Scanner, TokenizeError};

use builder::Builder;
use profiler::{ProfileRecord, Profiler};

/// TeX's integer bound for count registers.
pub const TEX_INT_MAX: i64 = 2_147_483_647;

/// Internal digestion fence; the scanner can never produce this name.
pub(crate) const END_MARKER: &str = "\u{0}end";

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
    #[error("undefined control sequence \\{0}")]
    UndefinedControlSequence(String),
    #[error("runaway argument while matching \\{0}")]
    RunawayArgument(String),
    #[error("use of \\{0} does not match its definition")]
    ArgumentMismatch(String),
    #[error("unbalanced conditional (\\else or \\fi)")]
    UnbalancedConditional,
    #[error("unbalanced group: {0}")]
    UnbalancedGroup(String),
    #[error("expansion depth limit {0} exceeded")]
    ExpansionDepthExceeded(u32),
    #[error("missing number, treated as zero: {0}")]
    MissingNumber(String),
    #[error("number too large")]
    NumberOutOfRange,
    #[error("division by zero")]
    DivisionByZero,
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error(transparent)]
    Graphics(#[from] GraphicsError),
    #[error("math error: {0}")]
    Math(#[from] MathError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),
    #[error("\\{0} outside a gpicture environment")]
    NoActivePicture(String),
    #[error("gpicture environments do not nest")]
    NestedPicture,
    #[error("math mode not terminated")]
    UnterminatedMath,
    #[error("stray \\{0}")]
    StrayToken(String),
    #[error("missing brace group after \\{0}")]
    MissingArgument(String),
    #[error("profiling was not enabled")]
    ProfilerDisabled,
}

/// A fatal error with the source position the scanner had reached.
#[derive(Debug, Error)]
#[error("fatal conversion error at {line}:{col}: {source}")]
pub struct FatalConversionError {
    pub line: usize,
    pub col: usize,
    #[source]
    pub source: EngineError,
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    /// Upgrade recoverable warnings (undefined macros, unknown
    /// environments) to fatal errors.
    pub strict: bool,
    pub profile: bool,
    pub max_expansion_depth: u32,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            strict: false,
            profile: false,
            max_expansion_depth: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Vertical,
    Horizontal,
    Math,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum GroupKind {
    Bottom,
    Brace,
    Semantic,
    Env(String),
}

#[derive(Debug, Default)]
pub(crate) struct Frame {
    pub kind: Option<GroupKind>,
    pub catcode_undo: Vec<(char, Catcode)>,
    pub binding_undo: Vec<(String, Option<Binding>)>,
    pub count_undo: Vec<(u8, i64)>,
    pub dimen_undo: Vec<(u8, Dimension)>,
}

impl Frame {
    fn new(kind: GroupKind) -> Frame {
        Frame {
            kind: Some(kind),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CondFrame {
    TrueBranch,
    ElseBranch,
}

pub struct Engine<'r> {
    pub(crate) registry: &'r Registry,
    pub(crate) options: EngineOptions,
    pub(crate) table: CatcodeTable,
    pub(crate) locals: HashMap<String, Binding>,
    pub(crate) counts: HashMap<u8, i64>,
    pub(crate) dimens: HashMap<u8, Dimension>,
    pub(crate) frames: Vec<Frame>,
    pub(crate) scanner: Scanner,
    pub(crate) pending: Vec<Token>,
    pub(crate) cond_stack: Vec<CondFrame>,
    pub(crate) builder: Builder,
    pub(crate) profiler: Profiler,
    pub(crate) picture: Option<GraphicsState>,
    pub(crate) font: FontModel,
    pub(crate) warnings: Vec<String>,
    pub(crate) labels: BTreeMap<String, String>,
    pub(crate) expansions: u32,
    pub(crate) anchor_counter: u32,
    pub(crate) in_math: bool,
}

#[derive(Debug)]
pub struct ConvertOutput {
    pub document: Document,
    pub profile: Option<Vec<ProfileRecord>>,
}

/// Run the full conversion of one source text.
pub fn convert(
    source: &str,
    registry: &Registry,
    options: &EngineOptions,
) -> Result<ConvertOutput, FatalConversionError> {
    let mut engine = Engine::new(source, registry, options.clone());
    engine.profiler.enter("(document)");
    let run = engine.run();
    engine.profiler.exit();
    let position = engine.scanner.position();
    let fatal = |source: EngineError| FatalConversionError {
        line: position.0,
        col: position.1,
        source,
    };
    run.map_err(fatal)?;
    if !engine.cond_stack.is_empty() {
        return Err(fatal(EngineError::UnbalancedConditional));
    }
    if engine.frames.len() > 1 {
        return Err(fatal(EngineError::UnbalancedGroup(
            "group still open at end of input".into(),
        )));
    }
    if engine.picture.is_some() {
        return Err(fatal(EngineError::UnbalancedGroup(
            "gpicture still open at end of input".into(),
        )));
    }
    let root = engine
        .builder
        .finish()
        .ok_or_else(|| fatal(EngineError::UnbalancedGroup("unclosed element".into())))?;
    let document = Document {
        root,
        labels: engine.labels,
        warnings: engine.warnings,
    };
    let profile = engine.profiler.report();
    Ok(ConvertOutput { document, profile })
}

impl<'r> Engine<'r> {
    pub fn new(source: &str, registry: &'r Registry, options: EngineOptions) -> Engine<'r> {
        Engine {
            table: registry.initial_table(),
            registry,
            profiler: Profiler::new(options.profile),
            options,
            locals: HashMap::new(),
            counts: HashMap::new(),
            dimens: HashMap::new(),
            frames: vec![Frame::new(GroupKind::Bottom)],
            scanner: Scanner::new(source),
            pending: Vec::new(),
            cond_stack: Vec::new(),
            builder: Builder::new(),
            picture: None,
            font: FontModel::default(),
            warnings: Vec::new(),
            labels: BTreeMap::new(),
            expansions: 0,
            anchor_counter: 0,
            in_math: false,
        }
    }

    pub fn mode(&self) -> Mode {
        if self.in_math {
            Mode::Math
        } else if self.builder.in_inline() {
            Mode::Horizontal
        } else {
            Mode::Vertical
        }
    }

    // ----- token input -----

    pub(crate) fn next_raw(&mut self) -> Result<Option<Token>, EngineError> {
        if let Some(t) = self.pending.pop() {
            return Ok(Some(t));
        }
        Ok(self.scanner.next_token(&self.table)?)
    }

    pub(crate) fn next_raw_required(&mut self, what: &str) -> Result<Token, EngineError> {
        self.next_raw()?
            .ok_or_else(|| EngineError::RunawayArgument(what.to_string()))
    }

    pub(crate) fn push_back(&mut self, t: Token) {
        self.pending.push(t);
    }

    pub(crate) fn push_back_list(&mut self, ts: Vec<Token>) {
        for t in ts.into_iter().rev() {
            self.pending.push(t);
        }
    }

    // ----- scoped state -----

    pub(crate) fn lookup(&self, name: &str) -> Option<Binding> {
        self.locals
            .get(name)
            .or_else(|| self.registry.get(name))
            .cloned()
    }

    pub(crate) fn define(&mut self, name: &str, binding: Option<Binding>) {
        let old = self.locals.get(name).cloned();
        self.frames
            .last_mut()
            .expect("frame stack never empty")
            .binding_undo
            .push((name.to_string(), old));
        match binding {
            Some(b) => {
                self.locals.insert(name.to_string(), b);
            }
            None => {
                self.locals.remove(name);
            }
        }
    }

    pub(crate) fn set_catcode(&mut self, c: char, cc: Catcode) {
        let old = self.table.get(c);
        self.frames
            .last_mut()
            .expect("frame stack never empty")
            .catcode_undo
            .push((c, old));
        self.table.set(c, cc);
    }

    pub(crate) fn get_count(&self, idx: u8) -> i64 {
        self.counts.get(&idx).copied().unwrap_or(0)
    }

    pub(crate) fn set_count(&mut self, idx: u8, v: i64) {
        let old = self.get_count(idx);
        self.frames
            .last_mut()
            .expect("frame stack never empty")
            .count_undo
            .push((idx, old));
        self.counts.insert(idx, v);
    }

    pub(crate) fn get_dimen(&self, idx: u8) -> Dimension {
        self.dimens.get(&idx).copied().unwrap_or(Dimension::ZERO)
    }

    pub(crate) fn set_dimen(&mut self, idx: u8, v: Dimension) {
        let old = self.get_dimen(idx);
        self.frames
            .last_mut()
            .expect("frame stack never empty")
            .dimen_undo
            .push((idx, old));
        self.dimens.insert(idx, v);
    }

    pub(crate) fn push_frame(&mut self, kind: GroupKind) {
        self.frames.push(Frame::new(kind));
    }

    pub(crate) fn pop_frame(&mut self, expected: &GroupKind) -> Result<(), EngineError> {
        if self.frames.len() <= 1 {
            return Err(EngineError::UnbalancedGroup(
                "cannot end the outermost group".into(),
            ));
        }
        let top_kind = self.frames.last().and_then(|f| f.kind.clone());
        if top_kind.as_ref() != Some(expected) {
            return Err(EngineError::UnbalancedGroup(format!(
                "group opened as {top_kind:?} cannot be closed as {expected:?}"
            )));
        }
        let frame = self.frames.pop().expect("depth checked above");
        for (c, cc) in frame.catcode_undo.into_iter().rev() {
            self.table.set(c, cc);
        }
        for (name, old) in frame.binding_undo.into_iter().rev() {
            match old {
                Some(b) => {
                    self.locals.insert(name, b);
                }
                None => {
                    self.locals.remove(&name);
                }
            }
        }
        for (idx, old) in frame.count_undo.into_iter().rev() {
            self.counts.insert(idx, old);
        }
        for (idx, old) in frame.dimen_undo.into_iter().rev() {
            self.dimens.insert(idx, old);
        }
        Ok(())
    }

    pub(crate) fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// Recoverable trouble: a warning plus an inline `error` element, or a
    /// hard failure under `--strict`.
    pub(crate) fn recover(&mut self, err: EngineError, marker: &str) -> Result<(), EngineError> {
        if self.options.strict {
            return Err(err);
        }
        self.warn(err.to_string());
        let mut el = DocNode::element("error");
        el.push(DocNode::text(marker.to_string()));
        self.builder.append_inline(el);
        Ok(())
    }

    // ----- digestion -----

    pub(crate) fn run(&mut self) -> Result<(), EngineError> {
        while let Some(t) = self.next_expanded()? {
            self.expansions = 0;
            self.process_token(t)?;
        }
        Ok(())
    }

    /// Digest a detached token list in place (constructor arguments,
    /// titles, picture text).
    pub(crate) fn digest_tokens(&mut self, toks: Vec<Token>) -> Result<(), EngineError> {
        self.push_back(Token::cs(END_MARKER));
        self.push_back_list(toks);
        loop {
            let t = self
                .next_expanded()?
                .ok_or_else(|| EngineError::RunawayArgument("argument digestion".into()))?;
            if matches!(&t, Token::ControlSequence(n) if n == END_MARKER) {
                return Ok(());
            }
            self.expansions = 0;
            self.process_token(t)?;
        }
    }

    pub(crate) fn digest_to_nodes(&mut self, toks: Vec<Token>) -> Result<Vec<DocNode>, EngineError> {
        self.builder.push_capture();
        let r = self.digest_tokens(toks);
        let nodes = self.builder.pop_capture();
        r?;
        Ok(nodes)
    }

    fn process_token(&mut self, t: Token) -> Result<(), EngineError> {
        match t {
            Token::Char(c, cc) => match cc {
                Catcode::BeginGroup => {
                    self.push_frame(GroupKind::Brace);
                    Ok(())
                }
                Catcode::EndGroup => self.pop_frame(&GroupKind::Brace),
                Catcode::MathShift => self.do_math(),
                Catcode::Space => {
                    if self.builder.in_inline() {
                        self.builder.text(" ");
                    }
                    Ok(())
                }
                _ => {
                    self.builder.text(&c.to_string());
                    Ok(())
                }
            },
            Token::Param(n) => {
                self.builder.text(&format!("#{n}"));
                Ok(())
            }
            Token::ControlSequence(name) => self.dispatch(&name),
        }
    }

    fn dispatch(&mut self, name: &str) -> Result<(), EngineError> {
        match self.lookup(name) {
            None => self.recover(
                EngineError::UndefinedControlSequence(name.to_string()),
                &format!("\\{name}"),
            ),
            Some(Binding::Macro { spec, body, .. }) => {
                // non-expandable macros still substitute at digestion time
                self.profiler.enter(name);
                let r = self.expand_macro_call(name, &spec, &body);
                self.profiler.exit();
                r
            }
            Some(Binding::Primitive(p)) => {
                self.profiler.enter(name);
                let r = self.exec_primitive(p, name);
                self.profiler.exit();
                r
            }
            Some(Binding::Constructor { spec, template }) => {
                self.profiler.enter(name);
                let r = self.run_constructor(name, &spec, &template);
                self.profiler.exit();
                r
            }
        }
    }

    fn do_math(&mut self) -> Result<(), EngineError> {
        let display = match self.next_raw()? {
            Some(Token::Char(_, Catcode::MathShift)) => true,
            Some(other) => {
                self.push_back(other);
                false
            }
            None => return Err(EngineError::UnterminatedMath),
        };
        self.in_math = true;
        let mut tokens: Vec<Token> = Vec::new();
        loop {
            let t = match self.next_expanded()? {
                Some(t) => t,
                None => {
                    self.in_math = false;
                    return Err(EngineError::UnterminatedMath);
                }
            };
            if matches!(t, Token::Char(_, Catcode::MathShift)) {
                if display {
                    match self.next_raw()? {
                        Some(Token::Char(_, Catcode::MathShift)) => break,
                        _ => {
                            self.in_math = false;
                            return Err(EngineError::UnterminatedMath);
                        }
                    }
                }
                break;
            }
            tokens.push(t);
        }
        self.in_math = false;
        let tex = detokenize(&tokens).trim().to_string();
        match crate::math::parse_math(&tokens, self.options.strict) {
            Ok(tree) => {
                let display = if display {
                    crate::math::Display::Block
                } else {
                    crate::math::Display::Inline
                };
                self.builder.append_inline(DocNode::Math { tex, tree, display });
                Ok(())
            }
            Err(e) => self.recover(EngineError::Math(e), &format!("${tex}$")),
        }
    }

    pub(crate) fn next_anchor_id(&mut self) -> String {
        self.anchor_counter += 1;
        format!("a{}", self.anchor_counter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bindings::{load_binding_source, standard_registry};

    fn convert_with(src: &str, extra_bindings: &str, options: EngineOptions) -> ConvertOutput {
        let mut reg = standard_registry();
        if !extra_bindings.is_empty() {
            load_binding_source(&mut reg, "<test>", extra_bindings).unwrap();
        }
        convert(src, &reg, &options).unwrap()
    }

    fn conv(src: &str) -> Document {
        convert_with(src, "", EngineOptions::default()).document
    }

    fn text_of(doc: &Document) -> String {
        let mut leaves = Vec::new();
        doc.root.text_leaves(&mut leaves);
        leaves.concat()
    }

    #[test]
    fn empty_input_gives_empty_document() {
        let doc = conv("");
        assert_eq!(doc.root, DocNode::element("document"));
        assert!(doc.warnings.is_empty());
    }

    #[test]
    fn undelimited_parameters_match_single_tokens() {
        let doc = conv("\\def\\pair#1#2{(#1,#2)}\\pair xy");
        assert_eq!(text_of(&doc), "(x,y)");
    }

    #[test]
    fn delimited_parameter_consumes_to_delimiter() {
        let doc = conv("\\def\\get#1;{[#1]}\\get abc;");
        assert_eq!(text_of(&doc), "[abc]");
    }

    #[test]
    fn brace_group_argument_loses_outer_braces() {
        let doc = conv("\\def\\id#1{#1}\\id{hello}");
        assert_eq!(text_of(&doc), "hello");
    }

    #[test]
    fn ifnum_selects_true_branch() {
        assert_eq!(text_of(&conv("\\ifnum1<2 A\\else B\\fi")), "A");
        assert_eq!(text_of(&conv("\\ifnum3<2 A\\else B\\fi")), "B");
        assert_eq!(text_of(&conv("\\ifnum3<2 A\\fi done")), "done");
    }

    #[test]
    fn nested_conditionals_skip_correctly() {
        let doc = conv("\\ifnum1>2 \\ifnum1<2 X\\else Y\\fi \\else Z\\fi");
        assert_eq!(text_of(&doc), "Z");
    }

    #[test]
    fn csname_builds_control_sequence() {
        let doc = conv("\\def\\fo{X}\\csname fo\\endcsname o");
        assert_eq!(text_of(&doc), "Xo");
    }

    #[test]
    fn csname_of_undefined_name_is_relax() {
        let doc = conv("a\\csname nothing\\endcsname b");
        assert_eq!(text_of(&doc), "ab");
        assert!(doc.warnings.is_empty());
    }

    #[test]
    fn ifx_on_two_undefined_names_is_true() {
        let doc = conv("\\ifx\\aaa\\bbb T\\else F\\fi");
        assert_eq!(text_of(&doc), "T");
    }

    #[test]
    fn ifx_distinguishes_definitions() {
        let doc = conv("\\def\\a{1}\\def\\b{2}\\ifx\\a\\b T\\else F\\fi");
        assert_eq!(text_of(&doc), "F");
    }

    #[test]
    fn expandafter_reorders_expansion() {
        // \expandafter expands \two past the closing brace trick:
        // classic swap — \def\x{AB} \expandafter\def\expandafter\y\expandafter{\x C}
        let doc = conv(
            "\\def\\x{AB}\\expandafter\\def\\expandafter\\y\\expandafter{\\x C}\\y",
        );
        assert_eq!(text_of(&doc), "ABC");
    }

    #[test]
    fn edef_freezes_current_meaning() {
        let doc = conv("\\def\\a{1}\\edef\\b{\\a}\\def\\a{2}\\b");
        assert_eq!(text_of(&doc), "1");
    }

    #[test]
    fn noexpand_defers_in_edef() {
        let doc = conv("\\def\\a{1}\\edef\\b{\\noexpand\\a}\\def\\a{2}\\b");
        assert_eq!(text_of(&doc), "2");
    }

    #[test]
    fn the_count_yields_digits() {
        let doc = conv("\\count5=42 [\\the\\count5]");
        assert_eq!(text_of(&doc), "[42]");
    }

    #[test]
    fn the_dimen_prints_like_tex() {
        let doc = conv("\\dimen0=2.5pt [\\the\\dimen0]");
        assert_eq!(text_of(&doc), "[2.5pt]");
    }

    #[test]
    fn register_arithmetic() {
        let doc = conv(
            "\\count0=10 \\advance\\count0 by 5 \\multiply\\count0 by 3 \\divide\\count0 by 4 \\the\\count0",
        );
        assert_eq!(text_of(&doc), "11"); // (10+5)*3/4 truncated
    }

    #[test]
    fn count_overflow_is_fatal() {
        let reg = standard_registry();
        let err = convert(
            "\\count0=2147483647 \\advance\\count0 by 1",
            &reg,
            &EngineOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err.source, EngineError::NumberOutOfRange));
    }

    #[test]
    fn divide_by_zero_is_fatal() {
        let reg = standard_registry();
        let err = convert("\\count0=1 \\divide\\count0 by 0", &reg, &EngineOptions::default())
            .unwrap_err();
        assert!(matches!(err.source, EngineError::DivisionByZero));
    }

    #[test]
    fn ifdim_compares_dimensions() {
        let doc = conv("\\dimen0=1in \\ifdim\\dimen0>72pt big\\else small\\fi");
        assert_eq!(text_of(&doc), "big");
    }

    #[test]
    fn groups_restore_definitions_and_registers() {
        let doc = conv(
            "\\def\\a{out}\\count0=1 {\\def\\a{in}\\count0=2 \\a\\the\\count0}\\a\\the\\count0",
        );
        assert_eq!(text_of(&doc), "in2out1");
    }

    #[test]
    fn begingroup_endgroup_scope_like_braces() {
        let doc = conv("\\def\\a{out}\\begingroup\\def\\a{in}\\a\\endgroup\\a");
        assert_eq!(text_of(&doc), "inout");
    }

    #[test]
    fn mismatched_group_closers_are_fatal() {
        let reg = standard_registry();
        let err = convert("{\\endgroup", &reg, &EngineOptions::default()).unwrap_err();
        assert!(matches!(err.source, EngineError::UnbalancedGroup(_)));
    }

    #[test]
    fn catcode_assignment_is_scoped() {
        // make @ a letter inside a group only
        let doc = conv("{\\catcode`\\@=11 \\def\\x@y{1}\\x@y}");
        assert_eq!(text_of(&doc), "1");
    }

    #[test]
    fn paragraphs_split_at_par() {
        let doc = conv("a\\par b");
        assert_eq!(doc.root.children().len(), 2);
        assert_eq!(doc.root.children()[0].name(), Some("para"));
        assert_eq!(doc.root.children()[1].name(), Some("para"));
    }

    #[test]
    fn blank_line_acts_as_par() {
        let doc = conv("a\n\nb");
        assert_eq!(doc.root.children().len(), 2);
    }

    #[test]
    fn section_structure_golden() {
        let doc = conv("\\section{A}x");
        let sec = &doc.root.children()[0];
        assert_eq!(sec.name(), Some("section"));
        assert_eq!(sec.attr("level"), Some("1"));
        let title = &sec.children()[0];
        assert_eq!(title.name(), Some("title"));
        assert_eq!(title.children(), &[DocNode::Text("A".into())]);
        let para = &sec.children()[1];
        assert_eq!(para.name(), Some("para"));
        assert_eq!(para.children()[0].name(), Some("p"));
        assert!(crate::doc::validate(&doc).is_empty());
    }

    #[test]
    fn unbalanced_open_brace_is_fatal() {
        let reg = standard_registry();
        let err = convert("a{b", &reg, &EngineOptions::default()).unwrap_err();
        assert!(matches!(err.source, EngineError::UnbalancedGroup(_)));
    }

    #[test]
    fn constructor_emits_template_element() {
        let doc = conv("\\textbf{hi}");
        let p = &doc.root.children()[0].children()[0];
        let text = &p.children()[0];
        assert_eq!(text.name(), Some("text"));
        assert_eq!(text.attr("font"), Some("bold"));
        assert_eq!(text.children(), &[DocNode::Text("hi".into())]);
    }

    #[test]
    fn ref_constructor_keeps_key_verbatim() {
        let doc = conv("\\ref{sec:intro}");
        let p = &doc.root.children()[0].children()[0];
        let r = &p.children()[0];
        assert_eq!(r.name(), Some("ref"));
        assert_eq!(r.attr("labelref"), Some("sec:intro"));
        assert_eq!(r.children(), &[DocNode::Text("sec:intro".into())]);
    }

    #[test]
    fn label_on_section_maps_to_section_id() {
        let doc = conv("\\section{A}\\label{k}x");
        assert_eq!(doc.labels.get("k").map(String::as_str), Some("s1"));
    }

    #[test]
    fn label_in_paragraph_gets_anchor() {
        let doc = conv("text \\label{here} more");
        let id = doc.labels.get("here").unwrap();
        assert_eq!(id, "a1");
        let p = &doc.root.children()[0].children()[0];
        assert!(p
            .children()
            .iter()
            .any(|n| n.name() == Some("anchor") && n.attr("xml:id") == Some(id)));
    }

    #[test]
    fn inline_math_produces_math_node() {
        let doc = conv("$x$");
        let p = &doc.root.children()[0].children()[0];
        match &p.children()[0] {
            DocNode::Math { tex, tree, display } => {
                assert_eq!(tex, "x");
                assert_eq!(*tree, crate::math::MathTree::mi("x"));
                assert_eq!(*display, crate::math::Display::Inline);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn display_math_uses_double_dollars() {
        let doc = conv("$$x+1$$");
        let p = &doc.root.children()[0].children()[0];
        match &p.children()[0] {
            DocNode::Math { display, .. } => {
                assert_eq!(*display, crate::math::Display::Block);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undefined_control_sequence_recovers_with_error_element() {
        let doc = conv("a\\nosuch b");
        assert_eq!(doc.warnings.len(), 1);
        assert!(doc.warnings[0].contains("nosuch"));
        let p = &doc.root.children()[0].children()[0];
        assert!(p.children().iter().any(|n| n.name() == Some("error")));
    }

    #[test]
    fn strict_mode_makes_undefined_fatal() {
        let reg = standard_registry();
        let options = EngineOptions {
            strict: true,
            ..EngineOptions::default()
        };
        let err = convert("a\\nosuch b", &reg, &options).unwrap_err();
        assert!(matches!(err.source, EngineError::UndefinedControlSequence(_)));
    }

    #[test]
    fn runaway_macro_recursion_is_bounded() {
        let reg = standard_registry();
        let options = EngineOptions {
            max_expansion_depth: 100,
            ..EngineOptions::default()
        };
        let err = convert("\\def\\loop{\\loop}\\loop", &reg, &options).unwrap_err();
        assert!(matches!(err.source, EngineError::ExpansionDepthExceeded(100)));
    }

    #[test]
    fn gpicture_emits_svg_inside_picture_element() {
        let doc = conv(
            "\\begin{gpicture}\\gdv@moveto{0pt}{0pt}\\gdv@lineto{10pt}{0pt}\\gdv@stroke\\end{gpicture}",
        );
        let pic = &doc.root.children()[0];
        assert_eq!(pic.name(), Some("picture"));
        match &pic.children()[0] {
            DocNode::Graphics(svg) => {
                assert_eq!(svg.name, "svg");
                assert!(svg.get_attr("viewBox").is_some());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(crate::doc::validate(&doc).is_empty());
    }

    #[test]
    fn gpicture_args_may_use_macros() {
        let doc = conv(
            "\\def\\w{10pt}\\begin{gpicture}\\gdv@moveto{0pt}{0pt}\\gdv@lineto{\\w}{0pt}\\gdv@stroke\\end{gpicture}",
        );
        match &doc.root.children()[0].children()[0] {
            DocNode::Graphics(svg) => {
                let g = &svg.children[0];
                let crate::xml::XmlNode::Element(g) = g else { panic!() };
                let crate::xml::XmlNode::Element(path) = &g.children[0] else { panic!() };
                assert_eq!(path.get_attr("d"), Some("M 0 0 L 10 0"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn graphics_outside_picture_is_fatal() {
        let mut reg = standard_registry();
        load_binding_source(&mut reg, "<t>", "\\catcode`\\@=11").unwrap();
        let err = convert("\\gdv@stroke", &reg, &EngineOptions::default()).unwrap_err();
        assert!(matches!(err.source, EngineError::NoActivePicture(_)));
    }

    #[test]
    fn unknown_environment_recovers() {
        let doc = conv("\\begin{mystery}x\\end{mystery}y");
        assert!(doc.warnings.iter().any(|w| w.contains("mystery")));
        assert_eq!(text_of(&doc), "\\begin{mystery}xy");
    }

    #[test]
    fn profiler_disabled_changes_nothing() {
        let src = "\\def\\a{A}\\section{T}\\a $x+1$ \\textbf{b}";
        let plain = convert_with(src, "", EngineOptions::default());
        let profiled = convert_with(
            src,
            "",
            EngineOptions {
                profile: true,
                ..EngineOptions::default()
            },
        );
        assert_eq!(plain.document, profiled.document);
        assert!(plain.profile.is_none());
        let records = profiled.profile.unwrap();
        assert!(records.iter().any(|r| r.name == "a" && r.calls == 1));
        assert!(records.iter().any(|r| r.name == "(document)"));
        for r in &records {
            assert!(r.exclusive <= r.inclusive, "{}", r.name);
        }
    }

    #[test]
    fn profiler_exclusive_sums_to_total() {
        let src = "\\def\\inner{x}\\def\\outer{\\inner\\inner}\\outer\\outer\\outer";
        let out = convert_with(
            src,
            "",
            EngineOptions {
                profile: true,
                ..EngineOptions::default()
            },
        );
        let records = out.profile.unwrap();
        let total = records
            .iter()
            .find(|r| r.name == "(document)")
            .unwrap()
            .inclusive;
        let sum: std::time::Duration = records.iter().map(|r| r.exclusive).sum();
        let diff = if sum > total { sum - total } else { total - sum };
        // the root frame wraps everything, so the telescoped sum is exact up
        // to Duration rounding
        assert!(diff < std::time::Duration::from_micros(50), "{diff:?}");
    }

    #[test]
    fn unclosed_conditional_is_fatal() {
        let reg = standard_registry();
        let err = convert("\\ifnum1<2 x", &reg, &EngineOptions::default()).unwrap_err();
        assert!(matches!(err.source, EngineError::UnbalancedConditional));
    }

    #[test]
    fn fatal_errors_carry_positions() {
        let reg = standard_registry();
        let err = convert("ok\nok\n{oops", &reg, &EngineOptions::default()).unwrap_err();
        // the unbalanced brace is discovered at end of input
        assert!(err.line >= 3, "{}", err.line);
        assert!(err.to_string().contains("unbalanced group"));
    }
}
