//! Tokens and the textual rendering used by logs and profiler labels.

use crate::catcode::Catcode;

/// A lexical token produced by the scanner.
///
/// `Char` tokens never carry catcode 0, 5, 9, 14 or 15; the scanner either
/// consumes those characters itself or reports an error.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    ControlSequence(String),
    Char(char, Catcode),
    /// Macro parameter marker `#n`, index in 1..=9.
    Param(u8),
}

impl Token {
    pub fn cs(name: &str) -> Token {
        Token::ControlSequence(name.to_string())
    }

    pub fn letter(c: char) -> Token {
        Token::Char(c, Catcode::Letter)
    }

    pub fn other(c: char) -> Token {
        Token::Char(c, Catcode::Other)
    }

    pub fn space() -> Token {
        Token::Char(' ', Catcode::Space)
    }

    pub fn is_space(&self) -> bool {
        matches!(self, Token::Char(_, Catcode::Space))
    }

    pub fn catcode(&self) -> Option<Catcode> {
        match self {
            Token::Char(_, cc) => Some(*cc),
            _ => None,
        }
    }
}

/// Render a token sequence back to source text.
///
/// Control words come out as `\name` followed by one space, control symbols
/// as `\` plus the character.  Under default catcodes the result re-tokenizes
/// to the original sequence.
pub fn detokenize(tokens: &[Token]) -> String {
    let mut out = String::new();
    for t in tokens {
        match t {
            Token::ControlSequence(name) => {
                out.push('\\');
                out.push_str(name);
                let is_word = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphabetic());
                if is_word {
                    out.push(' ');
                }
            }
            Token::Char(c, _) => out.push(*c),
            Token::Param(n) => {
                out.push('#');
                out.push(char::from(b'0' + n));
            }
        }
    }
    out
}
