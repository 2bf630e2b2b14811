//! Bindings: the meanings of control sequences.
//!
//! A binding is a macro (token substitution), a primitive (built-in
//! handler), or a constructor (emits XML structure from its arguments).
//! Binding files are the plugin surface: plain `\def`/`\let`/`\catcode`
//! statements plus the `\constructor{\name}{argspec}{template}` form.
//! A file parses completely before any of its statements takes effect.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::catcode::{Catcode, CatcodeTable};
use crate::token::{detokenize, Token};
use crate::tokenizer::TokenizeError;

/// Parameter text of a macro or constructor.
///
/// `prefix` tokens must match literally before the first argument;
/// `delimiters[i]` is the literal token run terminating argument `i+1`
/// (empty = undelimited).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArgSpec {
    pub prefix: Vec<Token>,
    pub delimiters: Vec<Vec<Token>>,
}

impl ArgSpec {
    pub fn arity(&self) -> u8 {
        self.delimiters.len() as u8
    }

    /// Build from a TeX parameter text (the tokens between a macro's name
    /// and its body).  Parameters must be `#1`..`#9` in order.
    pub fn from_parameter_text(tokens: &[Token]) -> Result<ArgSpec, SpecError> {
        let mut spec = ArgSpec::default();
        let mut next_index = 1u8;
        for t in tokens {
            match t {
                Token::Param(n) => {
                    if *n != next_index {
                        return Err(SpecError::ParamOutOfOrder {
                            expected: next_index,
                            found: *n,
                        });
                    }
                    if next_index > 9 {
                        return Err(SpecError::TooManyParams);
                    }
                    next_index += 1;
                    spec.delimiters.push(Vec::new());
                }
                other => {
                    if spec.delimiters.is_empty() {
                        spec.prefix.push(other.clone());
                    } else {
                        spec.delimiters.last_mut().unwrap().push(other.clone());
                    }
                }
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("parameters must be numbered in order; expected #{expected}, found #{found}")]
    ParamOutOfOrder { expected: u8, found: u8 },
    #[error("more than 9 parameters")]
    TooManyParams,
    #[error("parameter index #{index} exceeds arity {arity}")]
    BadParameterIndex { index: u8, arity: u8 },
}

/// One piece of an attribute value template.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrPiece {
    Lit(String),
    /// Verbatim text of argument n.
    Arg(u8),
}

/// Items of a constructor template, a flattened element stream.
#[derive(Debug, Clone, PartialEq)]
pub enum TemplateItem {
    Open {
        name: String,
        attrs: Vec<(String, Vec<AttrPiece>)>,
    },
    Close,
    /// `#n`: digest argument n into document nodes.
    ArgDigested(u8),
    /// `#!n`: insert argument n as verbatim text.
    ArgVerbatim(u8),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstructorTemplate {
    pub items: Vec<TemplateItem>,
}

/// Built-in handlers.  Everything else comes from bindings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    Def,
    Edef,
    Let,
    Relax,
    Par,
    Begingroup,
    Endgroup,
    Count,
    Dimen,
    Advance,
    Multiply,
    Divide,
    The,
    Ifnum,
    Ifdim,
    Ifx,
    If,
    Else,
    Fi,
    Csname,
    Endcsname,
    Expandafter,
    Noexpand,
    Catcode,
    /// Sectioning at a fixed level (1 = `\section`).
    Section(u8),
    Label,
    Begin,
    End,
    GMoveto,
    GLineto,
    GCurveto,
    GClosepath,
    GStroke,
    GFill,
    GLinewidth,
    GColor,
    GTransform,
    GText,
    /// Internal digestion fence; never reachable from source text.
    EndMarker,
}

impl Primitive {
    pub fn is_expandable(self) -> bool {
        matches!(
            self,
            Primitive::Ifnum
                | Primitive::Ifdim
                | Primitive::Ifx
                | Primitive::If
                | Primitive::Else
                | Primitive::Fi
                | Primitive::Csname
                | Primitive::Expandafter
                | Primitive::Noexpand
                | Primitive::The
        )
    }

    pub fn is_if(self) -> bool {
        matches!(
            self,
            Primitive::Ifnum | Primitive::Ifdim | Primitive::Ifx | Primitive::If
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Macro {
        spec: ArgSpec,
        body: Vec<Token>,
        expandable: bool,
    },
    Primitive(Primitive),
    Constructor {
        spec: ArgSpec,
        template: ConstructorTemplate,
    },
}

impl Binding {
    pub fn simple_macro(body: Vec<Token>) -> Binding {
        Binding::Macro {
            spec: ArgSpec::default(),
            body,
            expandable: true,
        }
    }
}

/// Immutable after load; shared by concurrent conversions.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    bindings: HashMap<String, Binding>,
    /// Catcode overrides in effect when a conversion starts.
    pub initial_catcodes: Vec<(char, Catcode)>,
}

impl Registry {
    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.bindings.get(name)
    }

    pub fn insert(&mut self, name: &str, b: Binding) {
        self.bindings.insert(name.to_string(), b);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(|s| s.as_str())
    }

    pub fn initial_table(&self) -> CatcodeTable {
        let mut t = CatcodeTable::new();
        for (c, cc) in &self.initial_catcodes {
            t.set(*c, *cc);
        }
        t
    }

    pub fn shared(self) -> Arc<Registry> {
        Arc::new(self)
    }
}

#[derive(Debug, Error)]
pub enum BindingError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("constructor template invalid in {file}: {message}")]
    TemplateInvalid { file: String, message: String },
    #[error("cannot read binding file {file}: {source}")]
    Io {
        file: String,
        source: std::io::Error,
    },
}

impl BindingError {
    fn parse(file: &str, line: usize, message: impl fmt::Display) -> BindingError {
        BindingError::Parse {
            file: file.to_string(),
            line,
            message: message.to_string(),
        }
    }
}

/// The standard binding set plus the given files, later definitions
/// shadowing earlier ones.
pub fn load_bindings<P: AsRef<Path>>(paths: &[P]) -> Result<Registry, BindingError> {
    let mut reg = standard_registry();
    for p in paths {
        let file = p.as_ref().display().to_string();
        let text = std::fs::read_to_string(p.as_ref()).map_err(|e| BindingError::Io {
            file: file.clone(),
            source: e,
        })?;
        load_binding_source(&mut reg, &file, &text)?;
    }
    Ok(reg)
}

/// Parse one binding file into the registry, all-or-nothing.
pub fn load_binding_source(
    reg: &mut Registry,
    file: &str,
    text: &str,
) -> Result<(), BindingError> {
    let staged = {
        let mut candidate = reg.clone();
        parse_binding_file(&mut candidate, file, text)?;
        candidate
    };
    *reg = staged;
    Ok(())
}

fn parse_binding_file(reg: &mut Registry, file: &str, text: &str) -> Result<(), BindingError> {
    // tokens are pulled lazily so \catcode changes take effect mid-file
    let mut cur = Cursor::new(text, reg.initial_table());
    let finish = |cur: &mut Cursor, r: Result<(), BindingError>| match cur.take_err() {
        Some(e) => Err(tokenize_err_to_binding(file, &e)),
        None => r,
    };
    while let Some(t) = cur.next() {
        let step = match &t {
            Token::Char(_, Catcode::Space) => Ok(()),
            Token::ControlSequence(name) => match name.as_str() {
                "def" | "edef" => parse_def(reg, file, &mut cur),
                "let" => parse_let(reg, file, &mut cur),
                "catcode" => parse_catcode(reg, file, &mut cur).map(|(ch, cc)| {
                    cur.table.set(ch, cc);
                }),
                "constructor" => parse_constructor(reg, file, &mut cur),
                // blank lines tokenize to \par; harmless between statements
                "par" | "relax" => Ok(()),
                other => Err(BindingError::parse(
                    file,
                    cur.line_estimate(),
                    format!("unexpected control sequence \\{other} at top level"),
                )),
            },
            Token::Char(_, _) | Token::Param(_) => Err(BindingError::parse(
                file,
                cur.line_estimate(),
                format!("unexpected token {t:?} at top level"),
            )),
        };
        finish(&mut cur, step)?;
    }
    finish(&mut cur, Ok(()))
}

fn tokenize_err_to_binding(file: &str, e: &TokenizeError) -> BindingError {
    let line = match e {
        TokenizeError::InvalidCharacter { line, .. } => *line,
        TokenizeError::UnterminatedControlSequence { line, .. } => *line,
    };
    BindingError::parse(file, line, e)
}

/// Lazy token cursor over a scanner, with balanced-group helpers.  The
/// catcode table is live: `\catcode` statements change how the rest of the
/// file tokenizes.  Scan errors are stashed and surfaced by the caller.
struct Cursor {
    scanner: crate::tokenizer::Scanner,
    table: CatcodeTable,
    lookahead: Option<Token>,
    err: Option<TokenizeError>,
}

impl Cursor {
    fn new(text: &str, table: CatcodeTable) -> Cursor {
        Cursor {
            scanner: crate::tokenizer::Scanner::new(text),
            table,
            lookahead: None,
            err: None,
        }
    }

    fn take_err(&mut self) -> Option<TokenizeError> {
        self.err.take()
    }

    fn next(&mut self) -> Option<Token> {
        if let Some(t) = self.lookahead.take() {
            return Some(t);
        }
        if self.err.is_some() {
            return None;
        }
        match self.scanner.next_token(&self.table) {
            Ok(t) => t,
            Err(e) => {
                self.err = Some(e);
                None
            }
        }
    }

    fn next_nonspace(&mut self) -> Option<Token> {
        loop {
            let t = self.next()?;
            if !t.is_space() {
                return Some(t);
            }
        }
    }

    fn peek(&mut self) -> Option<&Token> {
        if self.lookahead.is_none() {
            self.lookahead = self.next();
        }
        self.lookahead.as_ref()
    }

    /// Tokens of one balanced `{...}` group, braces stripped.
    fn group(&mut self) -> Option<Vec<Token>> {
        match self.next_nonspace()? {
            Token::Char(_, Catcode::BeginGroup) => {}
            _ => return None,
        }
        let mut depth = 0usize;
        let mut out = Vec::new();
        loop {
            let t = self.next()?;
            match t.catcode() {
                Some(Catcode::BeginGroup) => {
                    depth += 1;
                    out.push(t);
                }
                Some(Catcode::EndGroup) => {
                    if depth == 0 {
                        return Some(out);
                    }
                    depth -= 1;
                    out.push(t);
                }
                _ => out.push(t),
            }
        }
    }

    fn line_estimate(&self) -> usize {
        self.scanner.position().0
    }
}

fn expect_cs(cur: &mut Cursor, file: &str) -> Result<String, BindingError> {
    match cur.next_nonspace() {
        Some(Token::ControlSequence(n)) => Ok(n),
        other => Err(BindingError::parse(
            file,
            cur.line_estimate(),
            format!("expected a control sequence, found {other:?}"),
        )),
    }
}

// \edef in a binding file is treated as \def: registry entries are static,
// so there is no engine state to expand against at load time.
fn parse_def(reg: &mut Registry, file: &str, cur: &mut Cursor) -> Result<(), BindingError> {
    let name = expect_cs(cur, file)?;
    // parameter text runs to the body's opening brace
    let mut ptext = Vec::new();
    loop {
        match cur.peek() {
            Some(Token::Char(_, Catcode::BeginGroup)) => break,
            Some(_) => ptext.push(cur.next().unwrap()),
            None => {
                return Err(BindingError::parse(
                    file,
                    cur.line_estimate(),
                    format!("\\def\\{name} has no body"),
                ));
            }
        }
    }
    let spec = ArgSpec::from_parameter_text(&ptext)
        .map_err(|e| BindingError::parse(file, cur.line_estimate(), e))?;
    let body = cur.group().ok_or_else(|| {
        BindingError::parse(file, cur.line_estimate(), format!("\\def\\{name}: unbalanced body"))
    })?;
    check_body_params(&spec, &body)
        .map_err(|e| BindingError::parse(file, cur.line_estimate(), e))?;
    reg.insert(
        &name,
        Binding::Macro {
            spec,
            body,
            expandable: true,
        },
    );
    Ok(())
}

pub fn check_body_params(spec: &ArgSpec, body: &[Token]) -> Result<(), SpecError> {
    for t in body {
        if let Token::Param(n) = t {
            if *n > spec.arity() {
                return Err(SpecError::BadParameterIndex {
                    index: *n,
                    arity: spec.arity(),
                });
            }
        }
    }
    Ok(())
}

fn parse_let(reg: &mut Registry, file: &str, cur: &mut Cursor) -> Result<(), BindingError> {
    let name = expect_cs(cur, file)?;
    let mut target = cur.next_nonspace();
    if matches!(target, Some(Token::Char('=', _))) {
        target = cur.next_nonspace();
    }
    match target {
        Some(Token::ControlSequence(t)) => {
            match reg.get(&t).cloned() {
                Some(b) => reg.insert(&name, b),
                None => {
                    // \let to an undefined name leaves the name undefined
                    reg.bindings.remove(&name);
                }
            }
            Ok(())
        }
        Some(tok @ Token::Char(..)) => {
            reg.insert(&name, Binding::simple_macro(vec![tok]));
            Ok(())
        }
        other => Err(BindingError::parse(
            file,
            cur.line_estimate(),
            format!("\\let\\{name}: bad target {other:?}"),
        )),
    }
}

fn parse_catcode(
    reg: &mut Registry,
    file: &str,
    cur: &mut Cursor,
) -> Result<(char, Catcode), BindingError> {
    // `\catcode`\X=NN` or `\catcode`X=NN`
    let bad = |cur: &Cursor, msg: &str| BindingError::parse(file, cur.line_estimate(), msg);
    match cur.next_nonspace() {
        Some(Token::Char('`', _)) => {}
        _ => return Err(bad(cur, "\\catcode expects a `-prefixed character")),
    }
    let ch = match cur.next() {
        Some(Token::ControlSequence(n)) if n.chars().count() == 1 => n.chars().next().unwrap(),
        Some(Token::Char(c, _)) => c,
        other => return Err(bad(cur, &format!("\\catcode: bad character {other:?}"))),
    };
    match cur.next_nonspace() {
        Some(Token::Char('=', _)) => {}
        _ => return Err(bad(cur, "\\catcode expects `=`")),
    }
    let mut digits = String::new();
    while let Some(Token::Char(c, _)) = cur.peek() {
        if c.is_ascii_digit() {
            digits.push(*c);
            cur.next();
        } else {
            break;
        }
    }
    let code: u8 = digits
        .parse()
        .map_err(|_| bad(cur, "\\catcode expects a number"))?;
    let cc = Catcode::from_code(code).ok_or_else(|| bad(cur, "catcode must be 0..=15"))?;
    reg.initial_catcodes.retain(|(c, _)| *c != ch);
    reg.initial_catcodes.push((ch, cc));
    Ok((ch, cc))
}

fn parse_constructor(reg: &mut Registry, file: &str, cur: &mut Cursor) -> Result<(), BindingError> {
    let name_group = cur.group().ok_or_else(|| {
        BindingError::parse(file, cur.line_estimate(), "\\constructor expects {\\name}")
    })?;
    let name = match name_group.as_slice() {
        [Token::ControlSequence(n)] => n.clone(),
        _ => {
            return Err(BindingError::parse(
                file,
                cur.line_estimate(),
                "\\constructor's first argument must be a single control sequence",
            ));
        }
    };
    let spec_group = cur.group().ok_or_else(|| {
        BindingError::parse(file, cur.line_estimate(), "\\constructor expects {argspec}")
    })?;
    let spec = ArgSpec::from_parameter_text(&spec_group)
        .map_err(|e| BindingError::parse(file, cur.line_estimate(), e))?;
    let template_group = cur.group().ok_or_else(|| {
        BindingError::parse(file, cur.line_estimate(), "\\constructor expects {template}")
    })?;
    let template_src = detokenize(&template_group);
    let template = parse_template(&template_src, spec.arity()).map_err(|message| {
        BindingError::TemplateInvalid {
            file: file.to_string(),
            message: format!("\\{name}: {message}"),
        }
    })?;
    reg.insert(&name, Binding::Constructor { spec, template });
    Ok(())
}

/// Parse the template surface syntax: literal XML with `#n` insertion
/// points (digested in content, verbatim in attribute values) and `#!n`
/// for verbatim text in content.
pub fn parse_template(src: &str, arity: u8) -> Result<ConstructorTemplate, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut items = Vec::new();
    let mut stack: Vec<String> = Vec::new();
    let mut pos = 0usize;
    let mut text = String::new();

    let flush =
        |text: &mut String, items: &mut Vec<TemplateItem>| {
            if !text.is_empty() {
                items.push(TemplateItem::Text(std::mem::take(text)));
            }
        };

    while pos < chars.len() {
        match chars[pos] {
            '<' => {
                flush(&mut text, &mut items);
                pos += 1;
                if chars.get(pos) == Some(&'/') {
                    pos += 1;
                    let name = read_name(&chars, &mut pos)?;
                    skip_ws(&chars, &mut pos);
                    expect(&chars, &mut pos, '>')?;
                    match stack.pop() {
                        Some(open) if open == name => items.push(TemplateItem::Close),
                        Some(open) => {
                            return Err(format!("</{name}> closes <{open}>"));
                        }
                        None => return Err(format!("</{name}> with nothing open")),
                    }
                } else {
                    let name = read_name(&chars, &mut pos)?;
                    let mut attrs = Vec::new();
                    loop {
                        skip_ws(&chars, &mut pos);
                        match chars.get(pos) {
                            Some('>') => {
                                pos += 1;
                                items.push(TemplateItem::Open {
                                    name: name.clone(),
                                    attrs,
                                });
                                stack.push(name);
                                break;
                            }
                            Some('/') => {
                                pos += 1;
                                expect(&chars, &mut pos, '>')?;
                                items.push(TemplateItem::Open {
                                    name: name.clone(),
                                    attrs,
                                });
                                items.push(TemplateItem::Close);
                                break;
                            }
                            Some(_) => {
                                let aname = read_name(&chars, &mut pos)?;
                                skip_ws(&chars, &mut pos);
                                expect(&chars, &mut pos, '=')?;
                                skip_ws(&chars, &mut pos);
                                expect(&chars, &mut pos, '"')?;
                                let mut pieces = Vec::new();
                                let mut lit = String::new();
                                loop {
                                    match chars.get(pos) {
                                        Some('"') => {
                                            pos += 1;
                                            break;
                                        }
                                        Some('#') => {
                                            pos += 1;
                                            let idx = read_arg_index(&chars, &mut pos, arity)?;
                                            if !lit.is_empty() {
                                                pieces.push(AttrPiece::Lit(std::mem::take(
                                                    &mut lit,
                                                )));
                                            }
                                            pieces.push(AttrPiece::Arg(idx));
                                        }
                                        Some(&c) => {
                                            lit.push(c);
                                            pos += 1;
                                        }
                                        None => return Err("unterminated attribute".into()),
                                    }
                                }
                                if !lit.is_empty() {
                                    pieces.push(AttrPiece::Lit(lit));
                                }
                                if attrs.iter().any(|(n, _)| *n == aname) {
                                    return Err(format!("duplicate attribute {aname}"));
                                }
                                attrs.push((aname, pieces));
                            }
                            None => return Err("unterminated tag".into()),
                        }
                    }
                }
            }
            '#' => {
                flush(&mut text, &mut items);
                pos += 1;
                if chars.get(pos) == Some(&'!') {
                    pos += 1;
                    let idx = read_arg_index(&chars, &mut pos, arity)?;
                    items.push(TemplateItem::ArgVerbatim(idx));
                } else {
                    let idx = read_arg_index(&chars, &mut pos, arity)?;
                    items.push(TemplateItem::ArgDigested(idx));
                }
            }
            c => {
                text.push(c);
                pos += 1;
            }
        }
    }
    flush(&mut text, &mut items);
    if let Some(open) = stack.pop() {
        return Err(format!("<{open}> never closed"));
    }
    Ok(ConstructorTemplate { items })
}

fn read_name(chars: &[char], pos: &mut usize) -> Result<String, String> {
    let mut name = String::new();
    while let Some(&c) = chars.get(*pos) {
        if c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '.') {
            name.push(c);
            *pos += 1;
        } else {
            break;
        }
    }
    if name.is_empty() {
        Err("expected a name".into())
    } else {
        Ok(name)
    }
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while matches!(chars.get(*pos), Some(c) if c.is_whitespace()) {
        *pos += 1;
    }
}

fn expect(chars: &[char], pos: &mut usize, c: char) -> Result<(), String> {
    if chars.get(*pos) == Some(&c) {
        *pos += 1;
        Ok(())
    } else {
        Err(format!("expected {c:?} at offset {pos}", pos = *pos))
    }
}

fn read_arg_index(chars: &[char], pos: &mut usize, arity: u8) -> Result<u8, String> {
    match chars.get(*pos) {
        Some(&d @ '1'..='9') => {
            *pos += 1;
            let idx = d as u8 - b'0';
            if idx > arity {
                Err(format!("argument #{idx} exceeds arity {arity}"))
            } else {
                Ok(idx)
            }
        }
        _ => Err("`#` must be followed by an argument digit".into()),
    }
}

/// The built-in primitive names.
const PRIMITIVES: &[(&str, Primitive)] = &[
    ("def", Primitive::Def),
    ("edef", Primitive::Edef),
    ("let", Primitive::Let),
    ("relax", Primitive::Relax),
    ("par", Primitive::Par),
    ("begingroup", Primitive::Begingroup),
    ("endgroup", Primitive::Endgroup),
    ("count", Primitive::Count),
    ("dimen", Primitive::Dimen),
    ("advance", Primitive::Advance),
    ("multiply", Primitive::Multiply),
    ("divide", Primitive::Divide),
    ("the", Primitive::The),
    ("ifnum", Primitive::Ifnum),
    ("ifdim", Primitive::Ifdim),
    ("ifx", Primitive::Ifx),
    ("if", Primitive::If),
    ("else", Primitive::Else),
    ("fi", Primitive::Fi),
    ("csname", Primitive::Csname),
    ("endcsname", Primitive::Endcsname),
    ("expandafter", Primitive::Expandafter),
    ("noexpand", Primitive::Noexpand),
    ("catcode", Primitive::Catcode),
    ("section", Primitive::Section(1)),
    ("subsection", Primitive::Section(2)),
    ("subsubsection", Primitive::Section(3)),
    ("label", Primitive::Label),
    ("begin", Primitive::Begin),
    ("end", Primitive::End),
    ("gdv@moveto", Primitive::GMoveto),
    ("gdv@lineto", Primitive::GLineto),
    ("gdv@curveto", Primitive::GCurveto),
    ("gdv@closepath", Primitive::GClosepath),
    ("gdv@stroke", Primitive::GStroke),
    ("gdv@fill", Primitive::GFill),
    ("gdv@linewidth", Primitive::GLinewidth),
    ("gdv@color", Primitive::GColor),
    ("gdv@transform", Primitive::GTransform),
    ("gdv@text", Primitive::GText),
];

/// Constructors and convenience macros shipped with the compiler, written
/// in the binding-file surface syntax and loaded through the same parser
/// as user files.
const STANDARD_BINDINGS: &str = r##"
\constructor{\textbf}{#1}{<text font="bold">#1</text>}
\constructor{\textit}{#1}{<text font="italic">#1</text>}
\constructor{\texttt}{#1}{<text font="typewriter">#1</text>}
\constructor{\emph}{#1}{<emph>#1</emph>}
\constructor{\ref}{#1}{<ref labelref="#1">#!1</ref>}
"##;

/// Primitives plus the standard constructor set.
pub fn standard_registry() -> Registry {
    let mut reg = Registry::default();
    for (name, p) in PRIMITIVES {
        reg.insert(name, Binding::Primitive(*p));
    }
    load_binding_source(&mut reg, "<standard>", STANDARD_BINDINGS)
        .expect("standard bindings parse");
    reg
}
