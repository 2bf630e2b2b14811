//! Math-mode token lists to presentation-MathML trees.
//!
//! Precedence, loosest to tightest: relations (`=`, `<`, `>`), additive
//! (`+`, `-`), juxtaposition, scripts (`^`, `_`).  Letters become `mi`,
//! digit runs `mn`, operators `mo`.  Juxtaposition inserts no
//! invisible-times operator.

use thiserror::Error;

use crate::catcode::Catcode;
use crate::token::Token;
use crate::xml::XmlElement;

pub const MATHML_NS: &str = "http://www.w3.org/1998/Math/MathML";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MathTree {
    Mi(String),
    Mn(String),
    Mo(String),
    Mrow(Vec<MathTree>),
    Msup(Box<MathTree>, Box<MathTree>),
    Msub(Box<MathTree>, Box<MathTree>),
    Msubsup(Box<MathTree>, Box<MathTree>, Box<MathTree>),
    Mfrac(Box<MathTree>, Box<MathTree>),
    Msqrt(Box<MathTree>),
}

impl MathTree {
    pub fn mi(s: &str) -> MathTree {
        MathTree::Mi(s.into())
    }
    pub fn mn(s: &str) -> MathTree {
        MathTree::Mn(s.into())
    }
    pub fn mo(s: &str) -> MathTree {
        MathTree::Mo(s.into())
    }

    /// Number of `mo` leaves in the tree.
    pub fn mo_count(&self) -> usize {
        match self {
            MathTree::Mo(_) => 1,
            MathTree::Mi(_) | MathTree::Mn(_) => 0,
            MathTree::Mrow(cs) => cs.iter().map(|c| c.mo_count()).sum(),
            MathTree::Msup(a, b) | MathTree::Msub(a, b) | MathTree::Mfrac(a, b) => {
                a.mo_count() + b.mo_count()
            }
            MathTree::Msubsup(a, b, c) => a.mo_count() + b.mo_count() + c.mo_count(),
            MathTree::Msqrt(a) => a.mo_count(),
        }
    }

    /// Total characters in mi/mn/mo leaves; drives size estimation.
    pub fn leaf_char_count(&self) -> usize {
        match self {
            MathTree::Mi(s) | MathTree::Mn(s) | MathTree::Mo(s) => s.chars().count(),
            MathTree::Mrow(cs) => cs.iter().map(|c| c.leaf_char_count()).sum(),
            MathTree::Msup(a, b) | MathTree::Msub(a, b) | MathTree::Mfrac(a, b) => {
                a.leaf_char_count() + b.leaf_char_count()
            }
            MathTree::Msubsup(a, b, c) => {
                a.leaf_char_count() + b.leaf_char_count() + c.leaf_char_count()
            }
            MathTree::Msqrt(a) => a.leaf_char_count(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MathError {
    #[error("double {0} in scripts")]
    UnbalancedScripts(String),
    #[error("unknown math command \\{0}")]
    UnknownMathCommand(String),
    #[error("unexpected end of math input")]
    UnexpectedEnd,
    #[error("unbalanced group in math input")]
    UnbalancedGroup,
    #[error("\\right without \\left")]
    UnmatchedRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Display {
    Inline,
    Block,
}

impl Display {
    fn as_str(self) -> &'static str {
        match self {
            Display::Inline => "inline",
            Display::Block => "block",
        }
    }
}

pub fn greek_letter(name: &str) -> Option<&'static str> {
    Some(match name {
        "alpha" => "α",
        "beta" => "β",
        "gamma" => "γ",
        "delta" => "δ",
        "epsilon" => "ε",
        "zeta" => "ζ",
        "eta" => "η",
        "theta" => "θ",
        "iota" => "ι",
        "kappa" => "κ",
        "lambda" => "λ",
        "mu" => "μ",
        "nu" => "ν",
        "xi" => "ξ",
        "omicron" => "ο",
        "pi" => "π",
        "rho" => "ρ",
        "sigma" => "σ",
        "tau" => "τ",
        "upsilon" => "υ",
        "phi" => "φ",
        "chi" => "χ",
        "psi" => "ψ",
        "omega" => "ω",
        "Gamma" => "Γ",
        "Delta" => "Δ",
        "Theta" => "Θ",
        "Lambda" => "Λ",
        "Xi" => "Ξ",
        "Pi" => "Π",
        "Sigma" => "Σ",
        "Upsilon" => "Υ",
        "Phi" => "Φ",
        "Psi" => "Ψ",
        "Omega" => "Ω",
        _ => return None,
    })
}

/// Parse a math-mode token list.  In non-strict mode unknown commands
/// degrade to `mo` leaves carrying the raw name.
pub fn parse_math(tokens: &[Token], strict: bool) -> Result<MathTree, MathError> {
    let mut p = MathParser {
        tokens,
        pos: 0,
        strict,
    };
    let tree = p.parse_expr(&Stop::End)?;
    if p.pos < p.tokens.len() {
        // a stray closing brace or \right
        return match p.tokens[p.pos] {
            Token::Char(_, Catcode::EndGroup) => Err(MathError::UnbalancedGroup),
            _ => Err(MathError::UnmatchedRight),
        };
    }
    Ok(tree)
}

/// What terminates the current expression level.
enum Stop {
    End,
    EndGroup,
    CloseParen,
    Right,
}

struct MathParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    strict: bool,
}

impl<'a> MathParser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens[self.pos..].iter().find(|t| !t.is_space())
    }

    fn advance(&mut self) -> Option<Token> {
        while let Some(t) = self.tokens.get(self.pos) {
            self.pos += 1;
            if !t.is_space() {
                return Some(t.clone());
            }
        }
        None
    }

    fn at_stop(&self, stop: &Stop) -> bool {
        match self.peek() {
            None => true,
            Some(t) => match stop {
                Stop::End => false,
                Stop::EndGroup => matches!(t, Token::Char(_, Catcode::EndGroup)),
                Stop::CloseParen => matches!(t, Token::Char(')', _)),
                Stop::Right => matches!(t, Token::ControlSequence(n) if n == "right"),
            },
        }
    }

    fn parse_expr(&mut self, stop: &Stop) -> Result<MathTree, MathError> {
        let mut parts: Vec<MathTree> = Vec::new();
        loop {
            let operand = self.parse_additive(stop)?;
            if let Some(t) = operand {
                parts.push(t);
            }
            match self.peek() {
                Some(Token::Char(c @ ('=' | '<' | '>'), _)) => {
                    let c = *c;
                    self.advance();
                    parts.push(MathTree::Mo(c.to_string()));
                }
                _ => break,
            }
        }
        Ok(wrap(parts))
    }

    fn parse_additive(&mut self, stop: &Stop) -> Result<Option<MathTree>, MathError> {
        let mut parts: Vec<MathTree> = Vec::new();
        loop {
            if self.at_stop(stop) || matches!(self.peek(), Some(Token::Char('=' | '<' | '>', _))) {
                break;
            }
            match self.peek() {
                Some(Token::Char(c @ ('+' | '-'), _)) => {
                    let c = *c;
                    self.advance();
                    parts.push(MathTree::Mo(c.to_string()));
                }
                _ => {
                    if let Some(t) = self.parse_juxtaposition(stop)? {
                        parts.push(t);
                    } else {
                        break;
                    }
                }
            }
        }
        if parts.is_empty() {
            Ok(None)
        } else {
            Ok(Some(wrap(parts)))
        }
    }

    fn parse_juxtaposition(&mut self, stop: &Stop) -> Result<Option<MathTree>, MathError> {
        let mut parts: Vec<MathTree> = Vec::new();
        loop {
            if self.at_stop(stop)
                || matches!(
                    self.peek(),
                    Some(Token::Char('=' | '<' | '>' | '+' | '-', _))
                )
            {
                break;
            }
            parts.push(self.parse_scripted(stop)?);
        }
        if parts.is_empty() {
            Ok(None)
        } else {
            Ok(Some(wrap(parts)))
        }
    }

    fn parse_scripted(&mut self, stop: &Stop) -> Result<MathTree, MathError> {
        let base = self.parse_atom(stop)?;
        let mut sup: Option<MathTree> = None;
        let mut sub: Option<MathTree> = None;
        loop {
            match self.peek() {
                Some(Token::Char(_, Catcode::Superscript)) => {
                    if sup.is_some() {
                        return Err(MathError::UnbalancedScripts("superscript".into()));
                    }
                    self.advance();
                    sup = Some(self.parse_atom(stop)?);
                }
                Some(Token::Char(_, Catcode::Subscript)) => {
                    if sub.is_some() {
                        return Err(MathError::UnbalancedScripts("subscript".into()));
                    }
                    self.advance();
                    sub = Some(self.parse_atom(stop)?);
                }
                _ => break,
            }
        }
        Ok(match (sub, sup) {
            (None, None) => base,
            (None, Some(s)) => MathTree::Msup(Box::new(base), Box::new(s)),
            (Some(s), None) => MathTree::Msub(Box::new(base), Box::new(s)),
            (Some(lo), Some(hi)) => {
                MathTree::Msubsup(Box::new(base), Box::new(lo), Box::new(hi))
            }
        })
    }

    fn parse_atom(&mut self, _stop: &Stop) -> Result<MathTree, MathError> {
        let t = self.advance().ok_or(MathError::UnexpectedEnd)?;
        match t {
            Token::Char(c, Catcode::Letter) => Ok(MathTree::Mi(c.to_string())),
            Token::Char(c, _) if c.is_ascii_digit() => {
                let mut num = c.to_string();
                loop {
                    match self.tokens.get(self.pos) {
                        Some(Token::Char(d, _)) if d.is_ascii_digit() => {
                            num.push(*d);
                            self.pos += 1;
                        }
                        Some(Token::Char('.', _))
                            if matches!(
                                self.tokens.get(self.pos + 1),
                                Some(Token::Char(d, _)) if d.is_ascii_digit()
                            ) =>
                        {
                            num.push('.');
                            self.pos += 1;
                        }
                        _ => break,
                    }
                }
                Ok(MathTree::Mn(num))
            }
            Token::Char('(', _) => {
                let inner = self.parse_expr(&Stop::CloseParen)?;
                match self.advance() {
                    Some(Token::Char(')', _)) => {}
                    _ => return Err(MathError::UnexpectedEnd),
                }
                Ok(MathTree::Mrow(vec![
                    MathTree::mo("("),
                    inner,
                    MathTree::mo(")"),
                ]))
            }
            Token::Char(_, Catcode::BeginGroup) => {
                let inner = self.parse_expr(&Stop::EndGroup)?;
                match self.advance() {
                    Some(Token::Char(_, Catcode::EndGroup)) => {}
                    _ => return Err(MathError::UnbalancedGroup),
                }
                Ok(inner)
            }
            Token::Char(c, _) => Ok(MathTree::Mo(c.to_string())),
            Token::Param(_) => Ok(MathTree::mo("#")),
            Token::ControlSequence(name) => self.parse_command(&name),
        }
    }

    fn parse_group(&mut self) -> Result<MathTree, MathError> {
        match self.advance() {
            Some(Token::Char(_, Catcode::BeginGroup)) => {}
            Some(_) => {
                // single-token argument without braces
                self.pos -= 1;
                return self.parse_atom(&Stop::End);
            }
            None => return Err(MathError::UnexpectedEnd),
        }
        let inner = self.parse_expr(&Stop::EndGroup)?;
        match self.advance() {
            Some(Token::Char(_, Catcode::EndGroup)) => Ok(inner),
            _ => Err(MathError::UnbalancedGroup),
        }
    }

    fn parse_command(&mut self, name: &str) -> Result<MathTree, MathError> {
        match name {
            "frac" => {
                let num = self.parse_group()?;
                let den = self.parse_group()?;
                Ok(MathTree::Mfrac(Box::new(num), Box::new(den)))
            }
            "sqrt" => Ok(MathTree::Msqrt(Box::new(self.parse_group()?))),
            "left" => {
                let open = self.fence_char()?;
                let inner = self.parse_expr(&Stop::Right)?;
                match self.advance() {
                    Some(Token::ControlSequence(n)) if n == "right" => {}
                    _ => return Err(MathError::UnexpectedEnd),
                }
                let close = self.fence_char()?;
                let mut items = vec![MathTree::Mo(open)];
                match inner {
                    MathTree::Mrow(cs) => items.extend(cs),
                    other => items.push(other),
                }
                items.push(MathTree::Mo(close));
                Ok(MathTree::Mrow(items))
            }
            _ => {
                if let Some(g) = greek_letter(name) {
                    Ok(MathTree::Mi(g.to_string()))
                } else if self.strict {
                    Err(MathError::UnknownMathCommand(name.to_string()))
                } else {
                    Ok(MathTree::Mo(name.to_string()))
                }
            }
        }
    }

    /// The delimiter after `\left`/`\right`: one character token or an
    /// escaped brace like `\{`.
    fn fence_char(&mut self) -> Result<String, MathError> {
        match self.advance() {
            Some(Token::Char(c, _)) => Ok(c.to_string()),
            Some(Token::ControlSequence(n)) if n == "{" || n == "}" => Ok(n),
            Some(Token::ControlSequence(n)) if n == "vert" => Ok("|".to_string()),
            Some(Token::ControlSequence(n)) => Err(MathError::UnknownMathCommand(n)),
            _ => Err(MathError::UnexpectedEnd),
        }
    }
}

fn wrap(mut parts: Vec<MathTree>) -> MathTree {
    match parts.len() {
        1 => parts.pop().unwrap(),
        _ => MathTree::Mrow(parts),
    }
}

/// Lower a tree to a namespace-qualified `math` element.
pub fn mathml(tree: &MathTree, display: Display) -> XmlElement {
    let mut math = XmlElement::new("math")
        .attr("xmlns", MATHML_NS)
        .attr("display", display.as_str());
    math.push(crate::xml::XmlNode::Element(tree_to_xml(tree)));
    math
}

fn tree_to_xml(tree: &MathTree) -> XmlElement {
    match tree {
        MathTree::Mi(s) => XmlElement::new("mi").text(s.clone()),
        MathTree::Mn(s) => XmlElement::new("mn").text(s.clone()),
        MathTree::Mo(s) => XmlElement::new("mo").text(s.clone()),
        MathTree::Mrow(cs) => {
            let mut row = XmlElement::new("mrow");
            for c in cs {
                row.push(crate::xml::XmlNode::Element(tree_to_xml(c)));
            }
            row
        }
        MathTree::Msup(a, b) => XmlElement::new("msup").child(tree_to_xml(a)).child(tree_to_xml(b)),
        MathTree::Msub(a, b) => XmlElement::new("msub").child(tree_to_xml(a)).child(tree_to_xml(b)),
        MathTree::Msubsup(a, b, c) => XmlElement::new("msubsup")
            .child(tree_to_xml(a))
            .child(tree_to_xml(b))
            .child(tree_to_xml(c)),
        MathTree::Mfrac(a, b) => XmlElement::new("mfrac")
            .child(tree_to_xml(a))
            .child(tree_to_xml(b)),
        MathTree::Msqrt(a) => XmlElement::new("msqrt").child(tree_to_xml(a)),
    }
}
