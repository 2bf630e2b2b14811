//! Digestion-time primitive handlers and constructor instantiation.

use crate::bindings::{
    check_body_params, ArgSpec, AttrPiece, Binding, ConstructorTemplate, Primitive, TemplateItem,
};
use crate::catcode::Catcode;
use crate::dimension::{parse_dimension, Dimension};
use crate::doc::DocNode;
use crate::graphics::{GraphicsState, Transform};
use crate::token::{detokenize, Token};

use super::builder::OpenKind;
use super::{Engine, EngineError, GroupKind, TEX_INT_MAX};

/// Element names that may only appear in inline (paragraph) context.
fn is_inline_element(name: &str) -> bool {
    matches!(name, "text" | "emph" | "ref" | "anchor" | "error")
}

impl<'r> Engine<'r> {
    pub(crate) fn exec_primitive(&mut self, p: Primitive, name: &str) -> Result<(), EngineError> {
        match p {
            Primitive::Def => self.do_def(false),
            Primitive::Edef => self.do_def(true),
            Primitive::Let => self.do_let(),
            Primitive::Relax | Primitive::EndMarker => Ok(()),
            Primitive::Par => {
                self.builder.par_break();
                Ok(())
            }
            Primitive::Begingroup => {
                self.push_frame(GroupKind::Semantic);
                Ok(())
            }
            Primitive::Endgroup => self.pop_frame(&GroupKind::Semantic),
            Primitive::Count => {
                let idx = self.scan_register_index()?;
                self.skip_equals()?;
                let v = self.scan_int()?;
                self.set_count(idx, v);
                Ok(())
            }
            Primitive::Dimen => {
                let idx = self.scan_register_index()?;
                self.skip_equals()?;
                let v = self.scan_dimen()?;
                self.set_dimen(idx, v);
                Ok(())
            }
            Primitive::Advance | Primitive::Multiply | Primitive::Divide => self.do_arith(p),
            Primitive::Catcode => self.do_catcode(),
            Primitive::Section(level) => {
                let title = self.read_argument("section")?;
                let nodes = self.digest_to_nodes(title)?;
                self.builder.open_section(level, nodes);
                Ok(())
            }
            Primitive::Label => self.do_label(),
            Primitive::Begin => self.do_begin(),
            Primitive::End => self.do_end(),
            Primitive::GMoveto => {
                let x = self.dimen_arg(name)?;
                let y = self.dimen_arg(name)?;
                self.picture_mut(name)?.move_to(x, y);
                Ok(())
            }
            Primitive::GLineto => {
                let x = self.dimen_arg(name)?;
                let y = self.dimen_arg(name)?;
                self.picture_mut(name)?.line_to(x, y)?;
                Ok(())
            }
            Primitive::GCurveto => {
                let mut d = [Dimension::ZERO; 6];
                for slot in &mut d {
                    *slot = self.dimen_arg(name)?;
                }
                self.picture_mut(name)?
                    .curve_to(d[0], d[1], d[2], d[3], d[4], d[5])?;
                Ok(())
            }
            Primitive::GClosepath => {
                self.picture_mut(name)?.close_path()?;
                Ok(())
            }
            Primitive::GStroke => {
                self.picture_mut(name)?.stroke()?;
                Ok(())
            }
            Primitive::GFill => {
                self.picture_mut(name)?.fill()?;
                Ok(())
            }
            Primitive::GLinewidth => {
                let w = self.dimen_arg(name)?;
                if w.sp() < 0 {
                    return Err(EngineError::NumberOutOfRange);
                }
                self.picture_mut(name)?.line_width = w;
                Ok(())
            }
            Primitive::GColor => {
                let r = self.number_arg(name)?;
                let g = self.number_arg(name)?;
                let b = self.number_arg(name)?;
                let rgb = [channel(r), channel(g), channel(b)];
                let gs = self.picture_mut(name)?;
                gs.stroke_color = Some(rgb);
                gs.fill_color = Some(rgb);
                Ok(())
            }
            Primitive::GTransform => {
                let mut m = [0f64; 6];
                for slot in &mut m {
                    *slot = self.number_arg(name)?;
                }
                let t = Transform::new(m[0], m[1], m[2], m[3], m[4], m[5]);
                self.picture_mut(name)?.push_transform(t)?;
                Ok(())
            }
            Primitive::GText => {
                let x = self.dimen_arg(name)?;
                let y = self.dimen_arg(name)?;
                let toks = self.read_argument(name)?;
                let nodes = self.digest_to_nodes(toks)?;
                self.picture_mut(name)?.place_text(x, y, nodes);
                Ok(())
            }
            // expandable primitives are handled during expansion; reaching
            // digestion means they were orphaned
            _ => Err(EngineError::StrayToken(name.to_string())),
        }
    }

    fn do_def(&mut self, expand_body: bool) -> Result<(), EngineError> {
        let name = match self.next_raw_nonspace("def")? {
            Token::ControlSequence(n) => n,
            other => {
                return Err(EngineError::ArgumentMismatch(format!(
                    "\\def expects a control sequence, found {other:?}"
                )));
            }
        };
        let mut ptext = Vec::new();
        loop {
            let t = self.next_raw_required("def")?;
            if t.catcode() == Some(Catcode::BeginGroup) {
                self.push_back(t);
                break;
            }
            ptext.push(t);
        }
        let spec = ArgSpec::from_parameter_text(&ptext)?;
        let opener = self.next_raw_required("def")?;
        debug_assert_eq!(opener.catcode(), Some(Catcode::BeginGroup));
        let mut body = self.read_balanced_group("def")?;
        check_body_params(&spec, &body)?;
        if expand_body {
            body = self.fully_expand(body)?;
        }
        self.define(
            &name,
            Some(Binding::Macro {
                spec,
                body,
                expandable: true,
            }),
        );
        Ok(())
    }

    fn do_let(&mut self) -> Result<(), EngineError> {
        let name = match self.next_raw_nonspace("let")? {
            Token::ControlSequence(n) => n,
            other => {
                return Err(EngineError::ArgumentMismatch(format!(
                    "\\let expects a control sequence, found {other:?}"
                )));
            }
        };
        let mut target = self.next_raw_nonspace("let")?;
        if matches!(&target, Token::Char('=', _)) {
            target = self.next_raw_required("let")?;
            if target.is_space() {
                target = self.next_raw_required("let")?;
            }
        }
        match target {
            Token::ControlSequence(t) => {
                let meaning = self.lookup(&t);
                self.define(&name, meaning);
            }
            tok => {
                self.define(&name, Some(Binding::simple_macro(vec![tok])));
            }
        }
        Ok(())
    }

    fn skip_equals(&mut self) -> Result<(), EngineError> {
        match self.next_expanded_nonspace()? {
            Some(Token::Char('=', _)) => Ok(()),
            Some(t) => {
                self.push_back(t);
                Ok(())
            }
            None => Ok(()),
        }
    }

    fn do_arith(&mut self, p: Primitive) -> Result<(), EngineError> {
        let reg = self
            .next_expanded_nonspace()?
            .ok_or_else(|| EngineError::MissingNumber("register expected".into()))?;
        let Token::ControlSequence(rn) = &reg else {
            return Err(EngineError::MissingNumber(format!(
                "register expected, found {reg:?}"
            )));
        };
        let kind = match self.lookup(rn) {
            Some(Binding::Primitive(k @ (Primitive::Count | Primitive::Dimen))) => k,
            _ => {
                return Err(EngineError::MissingNumber(format!(
                    "\\{rn} is not a register"
                )));
            }
        };
        let idx = self.scan_register_index()?;
        self.scan_keyword("by")?;
        match (p, kind) {
            (Primitive::Advance, Primitive::Count) => {
                let delta = self.scan_int()?;
                let v = self
                    .get_count(idx)
                    .checked_add(delta)
                    .filter(|v| v.abs() <= TEX_INT_MAX)
                    .ok_or(EngineError::NumberOutOfRange)?;
                self.set_count(idx, v);
            }
            (Primitive::Advance, Primitive::Dimen) => {
                let delta = self.scan_dimen()?;
                let v = Dimension(self.get_dimen(idx).sp() + delta.sp()).checked()?;
                self.set_dimen(idx, v);
            }
            (Primitive::Multiply, Primitive::Count) => {
                let n = self.scan_int()?;
                let v = self
                    .get_count(idx)
                    .checked_mul(n)
                    .filter(|v| v.abs() <= TEX_INT_MAX)
                    .ok_or(EngineError::NumberOutOfRange)?;
                self.set_count(idx, v);
            }
            (Primitive::Multiply, Primitive::Dimen) => {
                let n = self.scan_int()?;
                let v = self
                    .get_dimen(idx)
                    .sp()
                    .checked_mul(n)
                    .ok_or(EngineError::NumberOutOfRange)?;
                self.set_dimen(idx, Dimension(v).checked()?);
            }
            (Primitive::Divide, k) => {
                let n = self.scan_int()?;
                if n == 0 {
                    return Err(EngineError::DivisionByZero);
                }
                if k == Primitive::Count {
                    self.set_count(idx, self.get_count(idx) / n);
                } else {
                    self.set_dimen(idx, Dimension(self.get_dimen(idx).sp() / n));
                }
            }
            _ => unreachable!("kind is Count or Dimen"),
        }
        Ok(())
    }

    fn do_catcode(&mut self) -> Result<(), EngineError> {
        let code_point = self.scan_int()?;
        let ch = u32::try_from(code_point)
            .ok()
            .and_then(char::from_u32)
            .ok_or(EngineError::NumberOutOfRange)?;
        self.skip_equals()?;
        let cc_num = self.scan_int()?;
        let cc = u8::try_from(cc_num)
            .ok()
            .and_then(Catcode::from_code)
            .ok_or(EngineError::NumberOutOfRange)?;
        self.set_catcode(ch, cc);
        Ok(())
    }

    fn do_label(&mut self) -> Result<(), EngineError> {
        let key_toks = self.read_argument("label")?;
        let key = detokenize(&key_toks).trim().to_string();
        if key.is_empty() {
            return Err(EngineError::ArgumentMismatch("label key is empty".into()));
        }
        // between paragraphs a label attaches to the enclosing section;
        // inside one it gets its own anchor
        let id = match self.builder.current_section_id() {
            Some(sid) if !self.builder.in_inline() => sid,
            _ => {
                let id = self.next_anchor_id();
                let mut anchor = DocNode::element("anchor");
                anchor.set_attr("xml:id", id.clone());
                self.builder.append_inline(anchor);
                id
            }
        };
        if self.labels.contains_key(&key) {
            self.warn(format!("duplicate label `{key}`"));
        }
        self.labels.insert(key, id);
        Ok(())
    }

    fn env_name(&mut self, what: &str) -> Result<String, EngineError> {
        let toks = self.read_argument(what)?;
        Ok(detokenize(&toks).trim().to_string())
    }

    fn do_begin(&mut self) -> Result<(), EngineError> {
        let env = self.env_name("begin")?;
        if env == "gpicture" {
            if self.picture.is_some() {
                return Err(EngineError::NestedPicture);
            }
            self.push_frame(GroupKind::Env(env));
            // driver commands carry `@` in their names
            self.set_catcode('@', Catcode::Letter);
            let mut gs = GraphicsState::new();
            gs.font = self.font;
            self.picture = Some(gs);
            return Ok(());
        }
        self.recover(
            EngineError::UnknownEnvironment(env.clone()),
            &format!("\\begin{{{env}}}"),
        )?;
        // keep the group balanced so the matching \end closes cleanly
        self.push_frame(GroupKind::Env(env));
        Ok(())
    }

    fn do_end(&mut self) -> Result<(), EngineError> {
        let env = self.env_name("end")?;
        if env == "gpicture" {
            let gs = self
                .picture
                .take()
                .ok_or_else(|| EngineError::NoActivePicture("end".into()))?;
            self.pop_frame(&GroupKind::Env(env))?;
            let (svg, empty) = gs.emit_picture();
            if empty {
                self.warn("empty gpicture produced a 0x0 svg");
            }
            let mut pic = DocNode::element("picture");
            pic.push(DocNode::Graphics(svg));
            self.builder.append_block(pic);
            return Ok(());
        }
        self.pop_frame(&GroupKind::Env(env))
    }

    fn picture_mut(&mut self, name: &str) -> Result<&mut GraphicsState, EngineError> {
        self.picture
            .as_mut()
            .ok_or_else(|| EngineError::NoActivePicture(name.to_string()))
    }

    /// Brace-group argument fully expanded and parsed as a dimension.
    fn dimen_arg(&mut self, what: &str) -> Result<Dimension, EngineError> {
        let toks = self.read_argument(what)?;
        let toks = self.fully_expand(toks)?;
        let text = detokenize(&toks);
        Ok(parse_dimension(text.trim(), self.font.size)?)
    }

    /// Brace-group argument fully expanded and parsed as a plain number.
    fn number_arg(&mut self, what: &str) -> Result<f64, EngineError> {
        let toks = self.read_argument(what)?;
        let toks = self.fully_expand(toks)?;
        let text = detokenize(&toks);
        text.trim()
            .parse::<f64>()
            .map_err(|_| EngineError::MissingNumber(format!("`{}` in \\{what}", text.trim())))
    }

    // ----- constructors -----

    pub(crate) fn run_constructor(
        &mut self,
        name: &str,
        spec: &ArgSpec,
        template: &ConstructorTemplate,
    ) -> Result<(), EngineError> {
        let args = self.match_args(name, spec)?;
        let mut depth = 0usize;
        for item in &template.items {
            match item {
                TemplateItem::Open { name, attrs } => {
                    if depth == 0 && is_inline_element(name) {
                        self.builder.ensure_inline();
                    }
                    let mut el = DocNode::element(name);
                    for (an, pieces) in attrs {
                        let mut value = String::new();
                        for piece in pieces {
                            match piece {
                                AttrPiece::Lit(s) => value.push_str(s),
                                AttrPiece::Arg(n) => {
                                    value.push_str(detokenize(&args[*n as usize - 1]).trim());
                                }
                            }
                        }
                        el.set_attr(an, value);
                    }
                    self.builder.open(el, OpenKind::Constructor);
                    depth += 1;
                }
                TemplateItem::Close => {
                    self.builder.close();
                    depth -= 1;
                }
                TemplateItem::ArgDigested(n) => {
                    self.digest_tokens(args[*n as usize - 1].clone())?;
                }
                TemplateItem::ArgVerbatim(n) => {
                    self.builder.text(&detokenize(&args[*n as usize - 1]));
                }
                TemplateItem::Text(s) => {
                    let trimmed = s.trim();
                    if !trimmed.is_empty() {
                        self.builder.text(trimmed);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Color channel: sRGB 0..=255, clamped.
fn channel(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
