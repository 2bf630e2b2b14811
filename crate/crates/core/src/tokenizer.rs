//! The scanner: raw source text to tokens under a mutable catcode table.
//!
//! Scanning is line based and incremental.  The engine pulls one token at a
//! time and may change category codes between pulls, which is what
//! verbatim-like bindings rely on.  State transitions follow TeX's reading
//! rules: each line starts in `LineStart`, letters and friends move to
//! `MidLine`, a space or the end of a control word moves to
//! `SkippingBlanks`.

use thiserror::Error;

use crate::catcode::{Catcode, CatcodeTable};
use crate::token::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScannerState {
    LineStart,
    MidLine,
    SkippingBlanks,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TokenizeError {
    #[error("invalid character {ch:?} (catcode 15) at line {line}, column {col}")]
    InvalidCharacter { ch: char, line: usize, col: usize },
    #[error("unterminated control sequence at line {line}, column {col}")]
    UnterminatedControlSequence { line: usize, col: usize },
}

/// Incremental scanner over normalized source lines.
///
/// Line endings are normalized to `\n` up front; the end of the final line
/// acts as end-of-input and produces no token.
#[derive(Debug, Clone)]
pub struct Scanner {
    lines: Vec<Vec<char>>,
    line: usize,
    col: usize,
    state: ScannerState,
}

impl Scanner {
    pub fn new(source: &str) -> Self {
        let normalized = source.replace("\r\n", "\n").replace('\r', "\n");
        let mut lines: Vec<Vec<char>> = normalized.split('\n').map(|l| l.chars().collect()).collect();
        // split() yields one trailing empty piece for a source ending in \n
        if lines.last().map_or(false, |l| l.is_empty()) && lines.len() > 1 {
            lines.pop();
        }
        Scanner {
            lines,
            line: 0,
            col: 0,
            state: ScannerState::LineStart,
        }
    }

    /// 1-based (line, column) of the next unread character.
    pub fn position(&self) -> (usize, usize) {
        (self.line + 1, self.col + 1)
    }

    pub fn at_end(&self) -> bool {
        self.line >= self.lines.len()
    }

    fn is_last_line(&self) -> bool {
        self.line + 1 >= self.lines.len()
    }

    fn next_line(&mut self) {
        self.line += 1;
        self.col = 0;
        self.state = ScannerState::LineStart;
    }

    /// End-of-line token per scanner state; advances to the next line.
    fn end_line(&mut self) -> Option<Token> {
        let last = self.is_last_line();
        let state = self.state;
        self.next_line();
        if last {
            return None;
        }
        match state {
            ScannerState::LineStart => Some(Token::cs("par")),
            ScannerState::MidLine => Some(Token::space()),
            ScannerState::SkippingBlanks => None,
        }
    }

    /// Pull the next token, or `None` at end of input.
    pub fn next_token(&mut self, table: &CatcodeTable) -> Result<Option<Token>, TokenizeError> {
        loop {
            if self.at_end() {
                return Ok(None);
            }
            if self.col >= self.lines[self.line].len() {
                match self.end_line() {
                    Some(t) => return Ok(Some(t)),
                    None => continue,
                }
            }
            let c = self.lines[self.line][self.col];
            let (line, col) = self.position();
            match table.get(c) {
                Catcode::Escape => {
                    self.col += 1;
                    return self.scan_control_sequence(table).map(Some);
                }
                Catcode::EndOfLine => {
                    // rest of the line is discarded
                    self.col = self.lines[self.line].len();
                    match self.end_line() {
                        Some(t) => return Ok(Some(t)),
                        None => continue,
                    }
                }
                Catcode::Parameter => {
                    self.col += 1;
                    match self.peek() {
                        Some(d @ '1'..='9') => {
                            self.col += 1;
                            self.state = ScannerState::MidLine;
                            return Ok(Some(Token::Param(d as u8 - b'0')));
                        }
                        _ => {
                            self.state = ScannerState::MidLine;
                            return Ok(Some(Token::Char(c, Catcode::Parameter)));
                        }
                    }
                }
                Catcode::Superscript => {
                    // the ^^ substitution notation is not supported
                    if self.peek_at(1) == Some(c) {
                        return Err(TokenizeError::InvalidCharacter { ch: c, line, col });
                    }
                    self.col += 1;
                    self.state = ScannerState::MidLine;
                    return Ok(Some(Token::Char(c, Catcode::Superscript)));
                }
                Catcode::Ignored => {
                    self.col += 1;
                }
                Catcode::Space => {
                    self.col += 1;
                    if self.state == ScannerState::MidLine {
                        self.state = ScannerState::SkippingBlanks;
                        return Ok(Some(Token::space()));
                    }
                }
                Catcode::Comment => {
                    self.col = self.lines[self.line].len();
                    self.next_line();
                }
                Catcode::Invalid => {
                    return Err(TokenizeError::InvalidCharacter { ch: c, line, col });
                }
                cc => {
                    self.col += 1;
                    self.state = ScannerState::MidLine;
                    return Ok(Some(Token::Char(c, cc)));
                }
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.peek_at(0)
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.lines[self.line].get(self.col + ahead).copied()
    }

    fn scan_control_sequence(&mut self, table: &CatcodeTable) -> Result<Token, TokenizeError> {
        let (line, col) = self.position();
        let first = match self.peek() {
            Some(c) => c,
            None => {
                return Err(TokenizeError::UnterminatedControlSequence { line, col: col - 1 });
            }
        };
        if table.get(first) == Catcode::Letter {
            let mut name = String::new();
            while let Some(c) = self.peek() {
                if table.get(c) == Catcode::Letter {
                    name.push(c);
                    self.col += 1;
                } else {
                    break;
                }
            }
            self.state = ScannerState::SkippingBlanks;
            Ok(Token::ControlSequence(name))
        } else {
            self.col += 1;
            self.state = if table.get(first) == Catcode::Space {
                ScannerState::SkippingBlanks
            } else {
                ScannerState::MidLine
            };
            Ok(Token::ControlSequence(first.to_string()))
        }
    }
}

/// Tokenize a complete source under a fixed table.
pub fn tokenize(source: &str, table: &CatcodeTable) -> Result<Vec<Token>, TokenizeError> {
    let mut scanner = Scanner::new(source);
    let mut out = Vec::new();
    while let Some(t) = scanner.next_token(table)? {
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::detokenize;

    fn toks(src: &str) -> Vec<Token> {
        tokenize(src, &CatcodeTable::new()).unwrap()
    }

    #[test]
    fn control_word_skips_following_space() {
        assert_eq!(toks("\\alpha x"), vec![Token::cs("alpha"), Token::letter('x')]);
    }

    #[test]
    fn group_characters() {
        assert_eq!(
            toks("{a}"),
            vec![
                Token::Char('{', Catcode::BeginGroup),
                Token::letter('a'),
                Token::Char('}', Catcode::EndGroup),
            ]
        );
    }

    #[test]
    fn spaces_collapse_and_comment_eats_line_end() {
        // the comment consumes the newline, so 'c' follows with no space
        assert_eq!(
            toks("a  b%note\nc"),
            vec![
                Token::letter('a'),
                Token::space(),
                Token::letter('b'),
                Token::letter('c'),
            ]
        );
    }

    #[test]
    fn blank_line_yields_par() {
        assert_eq!(
            toks("a\n\nb"),
            vec![
                Token::letter('a'),
                Token::space(),
                Token::cs("par"),
                Token::letter('b'),
            ]
        );
    }

    #[test]
    fn leading_spaces_ignored_at_line_start() {
        assert_eq!(toks("  a"), vec![Token::letter('a')]);
    }

    #[test]
    fn control_symbol() {
        assert_eq!(toks("\\$5"), vec![Token::cs("$"), Token::other('5')]);
    }

    #[test]
    fn param_tokens() {
        assert_eq!(
            toks("#1#2"),
            vec![Token::Param(1), Token::Param(2)]
        );
    }

    #[test]
    fn escape_at_end_of_line_is_an_error() {
        let err = tokenize("ab\\", &CatcodeTable::new()).unwrap_err();
        assert!(matches!(err, TokenizeError::UnterminatedControlSequence { .. }));
    }

    #[test]
    fn invalid_character_reports_position() {
        let mut table = CatcodeTable::new();
        table.set('~', Catcode::Invalid);
        let err = tokenize("a\n~", &table).unwrap_err();
        assert_eq!(
            err,
            TokenizeError::InvalidCharacter { ch: '~', line: 2, col: 1 }
        );
    }

    #[test]
    fn ignored_characters_are_dropped() {
        let mut table = CatcodeTable::new();
        table.set('~', Catcode::Ignored);
        assert_eq!(toks_with("a~b", &table), vec![Token::letter('a'), Token::letter('b')]);
    }

    fn toks_with(src: &str, table: &CatcodeTable) -> Vec<Token> {
        tokenize(src, table).unwrap()
    }

    #[test]
    fn double_superscript_notation_rejected() {
        let err = tokenize("a^^M", &CatcodeTable::new()).unwrap_err();
        assert!(matches!(err, TokenizeError::InvalidCharacter { ch: '^', .. }));
    }

    #[test]
    fn single_superscript_is_fine() {
        assert_eq!(
            toks("x^2"),
            vec![
                Token::letter('x'),
                Token::Char('^', Catcode::Superscript),
                Token::other('2'),
            ]
        );
    }

    #[test]
    fn detokenize_round_trip() {
        let ts = toks("\\foo {x}\\bar\\@ y");
        assert_eq!(toks(&detokenize(&ts)), ts);
    }

    #[test]
    fn no_output_token_has_comment_or_invalid_catcode() {
        for t in toks("a%c\nb{} $x$ \\cs #1") {
            if let Some(cc) = t.catcode() {
                assert!(cc != Catcode::Comment && cc != Catcode::Invalid && cc != Catcode::Escape);
            }
        }
    }
}
