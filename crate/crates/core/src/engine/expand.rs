//! Expansion: macro substitution, conditionals, `\csname`,
//! `\expandafter`, `\the`, and the number/dimension scanners that feed
//! them.  Everything here rewrites the token stream; digestion happens in
//! `mod.rs`.

use crate::bindings::{ArgSpec, Binding, Primitive};
use crate::catcode::Catcode;
use crate::dimension::{round_decimals, to_scaled, Dimension, Unit};
use crate::token::Token;

use super::{CondFrame, Engine, EngineError, END_MARKER, TEX_INT_MAX};

/// Where a branch skip stopped.
#[derive(Debug, PartialEq, Eq)]
enum SkipEnd {
    Else,
    Fi,
}

impl<'r> Engine<'r> {
    /// The next token after exhaustive expansion, or `None` at end of
    /// input.  Expandable macros and primitives never escape this method.
    pub(crate) fn next_expanded(&mut self) -> Result<Option<Token>, EngineError> {
        loop {
            let t = match self.next_raw()? {
                Some(t) => t,
                None => return Ok(None),
            };
            let name = match &t {
                Token::ControlSequence(n) if n != END_MARKER => n.clone(),
                _ => return Ok(Some(t)),
            };
            match self.lookup(&name) {
                Some(Binding::Macro {
                    spec,
                    body,
                    expandable: true,
                }) => {
                    self.bump_expansions()?;
                    self.profiler.enter(&name);
                    let r = self.expand_macro_call(&name, &spec, &body);
                    self.profiler.exit();
                    r?;
                }
                Some(Binding::Primitive(Primitive::Noexpand)) => {
                    self.bump_expansions()?;
                    // the following token is shielded from this expansion
                    return self.next_raw();
                }
                Some(Binding::Primitive(p)) if p.is_expandable() => {
                    self.bump_expansions()?;
                    self.exec_expandable(p, &name)?;
                }
                _ => return Ok(Some(t)),
            }
        }
    }

    pub(crate) fn next_expanded_nonspace(&mut self) -> Result<Option<Token>, EngineError> {
        loop {
            match self.next_expanded()? {
                Some(t) if t.is_space() => continue,
                other => return Ok(other),
            }
        }
    }

    fn bump_expansions(&mut self) -> Result<(), EngineError> {
        self.expansions += 1;
        if self.expansions > self.options.max_expansion_depth {
            Err(EngineError::ExpansionDepthExceeded(
                self.options.max_expansion_depth,
            ))
        } else {
            Ok(())
        }
    }

    fn exec_expandable(&mut self, p: Primitive, name: &str) -> Result<(), EngineError> {
        match p {
            Primitive::Ifnum | Primitive::Ifdim | Primitive::Ifx | Primitive::If => {
                self.do_conditional(p)
            }
            Primitive::Else => match self.cond_stack.pop() {
                Some(CondFrame::TrueBranch) => {
                    // end of the taken branch: discard up to the matching \fi
                    match self.skip_branch(true)? {
                        SkipEnd::Fi => Ok(()),
                        SkipEnd::Else => Err(EngineError::UnbalancedConditional),
                    }
                }
                _ => Err(EngineError::UnbalancedConditional),
            },
            Primitive::Fi => self
                .cond_stack
                .pop()
                .map(|_| ())
                .ok_or(EngineError::UnbalancedConditional),
            Primitive::Csname => self.do_csname(),
            Primitive::Expandafter => self.do_expandafter(),
            Primitive::The => self.do_the(),
            _ => Err(EngineError::StrayToken(name.to_string())),
        }
    }

    /// Expand one token a single step, leaving the result (or the token
    /// itself, if unexpandable) on the input.
    fn expand_once(&mut self, t: Token) -> Result<(), EngineError> {
        let name = match &t {
            Token::ControlSequence(n) if n != END_MARKER => n.clone(),
            _ => {
                self.push_back(t);
                return Ok(());
            }
        };
        match self.lookup(&name) {
            Some(Binding::Macro {
                spec,
                body,
                expandable: true,
            }) => {
                self.bump_expansions()?;
                self.profiler.enter(&name);
                let r = self.expand_macro_call(&name, &spec, &body);
                self.profiler.exit();
                r
            }
            Some(Binding::Primitive(Primitive::Noexpand)) => {
                self.bump_expansions()?;
                if let Some(next) = self.next_raw()? {
                    self.push_back(next);
                }
                Ok(())
            }
            Some(Binding::Primitive(p)) if p.is_expandable() => {
                self.bump_expansions()?;
                self.exec_expandable(p, &name)
            }
            _ => {
                self.push_back(t);
                Ok(())
            }
        }
    }

    // ----- macro calls -----

    pub(crate) fn expand_macro_call(
        &mut self,
        name: &str,
        spec: &ArgSpec,
        body: &[Token],
    ) -> Result<(), EngineError> {
        let args = self.match_args(name, spec)?;
        let mut out = Vec::with_capacity(body.len());
        for t in body {
            match t {
                Token::Param(n) => out.extend_from_slice(&args[*n as usize - 1]),
                other => out.push(other.clone()),
            }
        }
        self.push_back_list(out);
        Ok(())
    }

    pub(crate) fn match_args(
        &mut self,
        name: &str,
        spec: &ArgSpec,
    ) -> Result<Vec<Vec<Token>>, EngineError> {
        for expected in &spec.prefix {
            let got = if expected.is_space() {
                self.next_raw_required(name)?
            } else {
                self.next_raw_nonspace(name)?
            };
            if got != *expected {
                return Err(EngineError::ArgumentMismatch(name.to_string()));
            }
        }
        let mut args = Vec::with_capacity(spec.delimiters.len());
        for delim in &spec.delimiters {
            if delim.is_empty() {
                args.push(self.match_undelimited(name)?);
            } else {
                args.push(self.match_delimited(name, delim)?);
            }
        }
        Ok(args)
    }

    pub(crate) fn next_raw_nonspace(&mut self, what: &str) -> Result<Token, EngineError> {
        loop {
            let t = self.next_raw_required(what)?;
            if !t.is_space() {
                return Ok(t);
            }
        }
    }

    /// One token, or one balanced group with the braces stripped.
    fn match_undelimited(&mut self, name: &str) -> Result<Vec<Token>, EngineError> {
        let t = self.next_raw_nonspace(name)?;
        match t.catcode() {
            Some(Catcode::BeginGroup) => self.read_balanced_group(name),
            Some(Catcode::EndGroup) => Err(EngineError::ArgumentMismatch(name.to_string())),
            _ => Ok(vec![t]),
        }
    }

    fn match_delimited(&mut self, name: &str, delim: &[Token]) -> Result<Vec<Token>, EngineError> {
        let mut arg: Vec<Token> = Vec::new();
        let mut matched = 0usize;
        let mut depth = 0usize;
        loop {
            let t = self.next_raw_required(name)?;
            if depth == 0 && t == delim[matched] {
                matched += 1;
                if matched == delim.len() {
                    break;
                }
                continue;
            }
            if matched > 0 {
                // partial delimiter match failed: it was argument material
                arg.extend_from_slice(&delim[..matched]);
                matched = 0;
                if depth == 0 && t == delim[0] {
                    matched = 1;
                    if matched == delim.len() {
                        break;
                    }
                    continue;
                }
            }
            match t.catcode() {
                Some(Catcode::BeginGroup) => depth += 1,
                Some(Catcode::EndGroup) => {
                    if depth == 0 {
                        return Err(EngineError::ArgumentMismatch(name.to_string()));
                    }
                    depth -= 1;
                }
                _ => {}
            }
            arg.push(t);
        }
        Ok(strip_outer_braces(arg))
    }

    /// Tokens up to the matching end-group, outer braces not included.
    pub(crate) fn read_balanced_group(&mut self, what: &str) -> Result<Vec<Token>, EngineError> {
        let mut depth = 0usize;
        let mut out = Vec::new();
        loop {
            let t = self.next_raw_required(what)?;
            match t.catcode() {
                Some(Catcode::BeginGroup) => {
                    depth += 1;
                    out.push(t);
                }
                Some(Catcode::EndGroup) => {
                    if depth == 0 {
                        return Ok(out);
                    }
                    depth -= 1;
                    out.push(t);
                }
                _ => out.push(t),
            }
        }
    }

    /// An undelimited macro-style argument for primitives (`\section`,
    /// `\label`, graphics operators).
    pub(crate) fn read_argument(&mut self, what: &str) -> Result<Vec<Token>, EngineError> {
        self.match_undelimited(what)
    }

    // ----- conditionals -----

    fn do_conditional(&mut self, p: Primitive) -> Result<(), EngineError> {
        let truth = match p {
            Primitive::Ifnum => {
                let a = self.scan_int()?;
                let rel = self.relation()?;
                let b = self.scan_int()?;
                compare(a, b, rel)
            }
            Primitive::Ifdim => {
                let a = self.scan_dimen()?;
                let rel = self.relation()?;
                let b = self.scan_dimen()?;
                compare(a.sp(), b.sp(), rel)
            }
            Primitive::Ifx => {
                let t1 = self.next_raw_required("ifx")?;
                let t2 = self.next_raw_required("ifx")?;
                self.meanings_equal(&t1, &t2)
            }
            Primitive::If => {
                let t1 = self
                    .next_expanded()?
                    .ok_or(EngineError::UnbalancedConditional)?;
                let t2 = self
                    .next_expanded()?
                    .ok_or(EngineError::UnbalancedConditional)?;
                chars_equal(&t1, &t2)
            }
            _ => unreachable!("not a conditional"),
        };
        if truth {
            self.cond_stack.push(CondFrame::TrueBranch);
        } else {
            match self.skip_branch(false)? {
                SkipEnd::Else => self.cond_stack.push(CondFrame::ElseBranch),
                SkipEnd::Fi => {}
            }
        }
        Ok(())
    }

    fn relation(&mut self) -> Result<char, EngineError> {
        match self.next_expanded_nonspace()? {
            Some(Token::Char(c @ ('<' | '=' | '>'), _)) => Ok(c),
            other => Err(EngineError::MissingNumber(format!(
                "expected <, = or > in conditional, found {other:?}"
            ))),
        }
    }

    /// `\ifx`: token meanings, with two undefined names counting as equal.
    fn meanings_equal(&self, t1: &Token, t2: &Token) -> bool {
        match (t1, t2) {
            (Token::ControlSequence(a), Token::ControlSequence(b)) => {
                self.lookup(a) == self.lookup(b)
            }
            (a, b) => a == b,
        }
    }

    /// Skip an untaken branch.  Raw tokens only: nothing expands while
    /// skipping, but nested conditionals are tracked.
    fn skip_branch(&mut self, to_fi_only: bool) -> Result<SkipEnd, EngineError> {
        let mut depth = 0usize;
        loop {
            let t = match self.next_raw()? {
                Some(t) => t,
                None => return Err(EngineError::UnbalancedConditional),
            };
            let Token::ControlSequence(name) = &t else {
                continue;
            };
            match self.lookup(name) {
                Some(Binding::Primitive(p)) if p.is_if() => depth += 1,
                Some(Binding::Primitive(Primitive::Fi)) => {
                    if depth == 0 {
                        return Ok(SkipEnd::Fi);
                    }
                    depth -= 1;
                }
                Some(Binding::Primitive(Primitive::Else)) if !to_fi_only => {
                    if depth == 0 {
                        return Ok(SkipEnd::Else);
                    }
                }
                _ => {}
            }
        }
    }

    // ----- \csname, \expandafter, \the -----

    fn do_csname(&mut self) -> Result<(), EngineError> {
        let mut name = String::new();
        loop {
            let t = self
                .next_expanded()?
                .ok_or_else(|| EngineError::RunawayArgument("csname".into()))?;
            match &t {
                Token::Char(c, _) => name.push(*c),
                Token::ControlSequence(n) => {
                    if matches!(
                        self.lookup(n),
                        Some(Binding::Primitive(Primitive::Endcsname))
                    ) {
                        break;
                    }
                    return Err(EngineError::StrayToken(n.clone()));
                }
                Token::Param(_) => {
                    return Err(EngineError::StrayToken("csname".into()));
                }
            }
        }
        if self.lookup(&name).is_none() {
            // an undefined \csname result means \relax, per TeX
            self.define(&name, Some(Binding::Primitive(Primitive::Relax)));
        }
        self.push_back(Token::cs(&name));
        Ok(())
    }

    fn do_expandafter(&mut self) -> Result<(), EngineError> {
        let saved = self.next_raw_required("expandafter")?;
        let next = self.next_raw_required("expandafter")?;
        self.expand_once(next)?;
        self.push_back(saved);
        Ok(())
    }

    fn do_the(&mut self) -> Result<(), EngineError> {
        let t = self
            .next_expanded_nonspace()?
            .ok_or_else(|| EngineError::MissingNumber("\\the at end of input".into()))?;
        let text = match &t {
            Token::ControlSequence(n) => match self.lookup(n) {
                Some(Binding::Primitive(Primitive::Count)) => {
                    let idx = self.scan_register_index()?;
                    self.get_count(idx).to_string()
                }
                Some(Binding::Primitive(Primitive::Dimen)) => {
                    let idx = self.scan_register_index()?;
                    format!("{}pt", self.get_dimen(idx).display_pt())
                }
                Some(Binding::Primitive(Primitive::Catcode)) => {
                    let code = self.scan_int()?;
                    let c = u32::try_from(code)
                        .ok()
                        .and_then(char::from_u32)
                        .ok_or(EngineError::NumberOutOfRange)?;
                    (self.table.get(c) as u8).to_string()
                }
                _ => {
                    return Err(EngineError::MissingNumber(format!(
                        "\\the cannot be applied to \\{n}"
                    )));
                }
            },
            other => {
                return Err(EngineError::MissingNumber(format!(
                    "\\the cannot be applied to {other:?}"
                )));
            }
        };
        let toks: Vec<Token> = text
            .chars()
            .map(|c| Token::Char(c, Catcode::Other))
            .collect();
        self.push_back_list(toks);
        Ok(())
    }

    // ----- scanners -----

    fn scan_signs(&mut self) -> Result<(i64, Token), EngineError> {
        let mut sign = 1i64;
        loop {
            let t = self
                .next_expanded_nonspace()?
                .ok_or_else(|| EngineError::MissingNumber("end of input".into()))?;
            match &t {
                Token::Char('+', Catcode::Other) => {}
                Token::Char('-', Catcode::Other) => sign = -sign,
                _ => return Ok((sign, t)),
            }
        }
    }

    pub(crate) fn scan_int(&mut self) -> Result<i64, EngineError> {
        let (sign, t) = self.scan_signs()?;
        let magnitude: i64 = match &t {
            Token::Char('`', _) => {
                let ct = self.next_raw_required("character constant")?;
                let c = match &ct {
                    Token::ControlSequence(n) if n.chars().count() == 1 => {
                        n.chars().next().unwrap()
                    }
                    Token::Char(c, _) => *c,
                    _ => {
                        return Err(EngineError::MissingNumber(
                            "bad character constant".into(),
                        ));
                    }
                };
                self.skip_one_space()?;
                c as i64
            }
            Token::Char(c, _) if c.is_ascii_digit() => {
                let mut v = (*c as u8 - b'0') as i64;
                loop {
                    match self.next_expanded()? {
                        Some(Token::Char(d, _)) if d.is_ascii_digit() => {
                            v = v
                                .checked_mul(10)
                                .and_then(|v| v.checked_add((d as u8 - b'0') as i64))
                                .filter(|v| *v <= TEX_INT_MAX)
                                .ok_or(EngineError::NumberOutOfRange)?;
                        }
                        Some(t) if t.is_space() => break, // one space ends a number
                        Some(t) => {
                            self.push_back(t);
                            break;
                        }
                        None => break,
                    }
                }
                v
            }
            Token::ControlSequence(n) => match self.lookup(n) {
                Some(Binding::Primitive(Primitive::Count)) => {
                    let idx = self.scan_register_index()?;
                    self.get_count(idx)
                }
                Some(Binding::Primitive(Primitive::Dimen)) => {
                    // a dimension used as a number is its sp count
                    let idx = self.scan_register_index()?;
                    self.get_dimen(idx).sp()
                }
                _ => {
                    return Err(EngineError::MissingNumber(format!(
                        "\\{n} is not a number"
                    )));
                }
            },
            other => {
                return Err(EngineError::MissingNumber(format!(
                    "unexpected {other:?}"
                )));
            }
        };
        Ok(sign * magnitude)
    }

    pub(crate) fn scan_register_index(&mut self) -> Result<u8, EngineError> {
        let v = self.scan_int()?;
        u8::try_from(v).map_err(|_| EngineError::NumberOutOfRange)
    }

    pub(crate) fn scan_dimen(&mut self) -> Result<Dimension, EngineError> {
        let (sign, t) = self.scan_signs()?;
        if let Token::ControlSequence(n) = &t {
            return match self.lookup(n) {
                Some(Binding::Primitive(Primitive::Dimen)) => {
                    let idx = self.scan_register_index()?;
                    Ok(Dimension(sign * self.get_dimen(idx).sp()))
                }
                _ => Err(EngineError::MissingNumber(format!(
                    "\\{n} is not a dimension"
                ))),
            };
        }
        self.push_back(t);
        let mut int_part: i64 = 0;
        let mut saw_digit = false;
        let mut frac_digits: Vec<u8> = Vec::new();
        loop {
            match self.next_expanded()? {
                Some(Token::Char(d, _)) if d.is_ascii_digit() => {
                    int_part = int_part
                        .checked_mul(10)
                        .and_then(|v| v.checked_add((d as u8 - b'0') as i64))
                        .ok_or(EngineError::NumberOutOfRange)?;
                    saw_digit = true;
                }
                Some(Token::Char('.' | ',', _)) => {
                    loop {
                        match self.next_expanded()? {
                            Some(Token::Char(d, _)) if d.is_ascii_digit() => {
                                frac_digits.push(d as u8 - b'0');
                                saw_digit = true;
                            }
                            Some(t) => {
                                self.push_back(t);
                                break;
                            }
                            None => break,
                        }
                    }
                    break;
                }
                Some(t) => {
                    self.push_back(t);
                    break;
                }
                None => break,
            }
        }
        if !saw_digit {
            return Err(EngineError::MissingNumber("missing dimension".into()));
        }
        let unit = self.scan_unit()?;
        let d = if unit == Unit::Sp {
            Dimension(int_part).checked().map_err(EngineError::from)?
        } else {
            to_scaled(int_part, round_decimals(&frac_digits), unit, self.font.size)?
        };
        self.skip_one_space()?;
        Ok(Dimension(sign * d.sp()))
    }

    fn scan_unit(&mut self) -> Result<Unit, EngineError> {
        for kw in ["bp", "cm", "em", "ex", "in", "mm", "pc", "pt", "sp"] {
            if self.scan_keyword(kw)? {
                return Ok(Unit::from_str(kw).expect("keyword list is valid"));
            }
        }
        Err(EngineError::Dimension(
            crate::dimension::DimensionError::MissingUnit,
        ))
    }

    /// Case-insensitive keyword match; consumes nothing on failure
    /// (leading spaces excepted).
    pub(crate) fn scan_keyword(&mut self, kw: &str) -> Result<bool, EngineError> {
        let mut consumed: Vec<Token> = Vec::new();
        for (i, expected) in kw.chars().enumerate() {
            let t = if i == 0 {
                self.next_expanded_nonspace()?
            } else {
                self.next_expanded()?
            };
            match t {
                Some(Token::Char(c, _)) if c.eq_ignore_ascii_case(&expected) => {
                    consumed.push(Token::Char(c, Catcode::Other));
                }
                Some(t) => {
                    self.push_back(t);
                    self.push_back_list(consumed);
                    return Ok(false);
                }
                None => {
                    self.push_back_list(consumed);
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn skip_one_space(&mut self) -> Result<(), EngineError> {
        match self.next_raw()? {
            Some(t) if t.is_space() => Ok(()),
            Some(t) => {
                self.push_back(t);
                Ok(())
            }
            None => Ok(()),
        }
    }

    /// Exhaustively expand a detached token list (`\edef` bodies,
    /// graphics arguments).
    pub(crate) fn fully_expand(&mut self, toks: Vec<Token>) -> Result<Vec<Token>, EngineError> {
        self.push_back(Token::cs(END_MARKER));
        self.push_back_list(toks);
        let mut out = Vec::new();
        loop {
            let t = self
                .next_expanded()?
                .ok_or_else(|| EngineError::RunawayArgument("full expansion".into()))?;
            if matches!(&t, Token::ControlSequence(n) if n == END_MARKER) {
                return Ok(out);
            }
            out.push(t);
        }
    }
}

fn compare(a: i64, b: i64, rel: char) -> bool {
    match rel {
        '<' => a < b,
        '=' => a == b,
        '>' => a > b,
        _ => unreachable!("relation is validated"),
    }
}

/// `\if`: character codes compared after expansion; any two control
/// sequences compare equal (TeX gives them the same fictitious code).
fn chars_equal(t1: &Token, t2: &Token) -> bool {
    match (t1, t2) {
        (Token::ControlSequence(_), Token::ControlSequence(_)) => true,
        (Token::Char(a, _), Token::Char(b, _)) => a == b,
        _ => false,
    }
}

/// Strip one pair of outer braces when they enclose the whole list.
fn strip_outer_braces(arg: Vec<Token>) -> Vec<Token> {
    if arg.len() < 2 {
        return arg;
    }
    if !matches!(arg.first().and_then(Token::catcode), Some(Catcode::BeginGroup))
        || !matches!(arg.last().and_then(Token::catcode), Some(Catcode::EndGroup))
    {
        return arg;
    }
    let mut depth = 0usize;
    for (i, t) in arg.iter().enumerate() {
        match t.catcode() {
            Some(Catcode::BeginGroup) => depth += 1,
            Some(Catcode::EndGroup) => {
                depth -= 1;
                if depth == 0 && i != arg.len() - 1 {
                    return arg; // outer brace closes early
                }
            }
            _ => {}
        }
    }
    arg[1..arg.len() - 1].to_vec()
}
