//! Category codes and the character -> catcode table.
//!
//! Every input character is classified by one of sixteen category codes
//! before any other processing happens.  The table is mutable at runtime
//! (`\catcode` assignments) and scoped by the engine's group stack.

use std::collections::HashMap;

/// The sixteen TeX category codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Catcode {
    Escape = 0,
    BeginGroup = 1,
    EndGroup = 2,
    MathShift = 3,
    Alignment = 4,
    EndOfLine = 5,
    Parameter = 6,
    Superscript = 7,
    Subscript = 8,
    Ignored = 9,
    Space = 10,
    Letter = 11,
    Other = 12,
    Active = 13,
    Comment = 14,
    Invalid = 15,
}

impl Catcode {
    /// All sixteen values, indexable by numeric code.
    pub const ALL: [Catcode; 16] = [
        Catcode::Escape,
        Catcode::BeginGroup,
        Catcode::EndGroup,
        Catcode::MathShift,
        Catcode::Alignment,
        Catcode::EndOfLine,
        Catcode::Parameter,
        Catcode::Superscript,
        Catcode::Subscript,
        Catcode::Ignored,
        Catcode::Space,
        Catcode::Letter,
        Catcode::Other,
        Catcode::Active,
        Catcode::Comment,
        Catcode::Invalid,
    ];

    pub fn from_code(code: u8) -> Option<Catcode> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

/// Total mapping from characters to category codes.
///
/// Characters without an explicit entry fall back to the standard defaults:
/// `\` escape, `{`/`}` grouping, `$` math shift, `&` alignment, newline
/// end-of-line, `#` parameter, `^`/`_` scripts, space and tab space,
/// ASCII letters letter, `%` comment, everything else other.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CatcodeTable {
    overrides: HashMap<char, Catcode>,
}

impl CatcodeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, c: char) -> Catcode {
        if let Some(&cc) = self.overrides.get(&c) {
            return cc;
        }
        default_catcode(c)
    }

    pub fn set(&mut self, c: char, cc: Catcode) {
        if default_catcode(c) == cc {
            self.overrides.remove(&c);
        } else {
            self.overrides.insert(c, cc);
        }
    }
}

fn default_catcode(c: char) -> Catcode {
    match c {
        '\\' => Catcode::Escape,
        '{' => Catcode::BeginGroup,
        '}' => Catcode::EndGroup,
        '$' => Catcode::MathShift,
        '&' => Catcode::Alignment,
        '\n' => Catcode::EndOfLine,
        '#' => Catcode::Parameter,
        '^' => Catcode::Superscript,
        '_' => Catcode::Subscript,
        ' ' | '\t' => Catcode::Space,
        '%' => Catcode::Comment,
        c if c.is_ascii_alphabetic() => Catcode::Letter,
        _ => Catcode::Other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_standard_assignment() {
        let t = CatcodeTable::new();
        assert_eq!(t.get('\\'), Catcode::Escape);
        assert_eq!(t.get('{'), Catcode::BeginGroup);
        assert_eq!(t.get('}'), Catcode::EndGroup);
        assert_eq!(t.get('$'), Catcode::MathShift);
        assert_eq!(t.get('&'), Catcode::Alignment);
        assert_eq!(t.get('\n'), Catcode::EndOfLine);
        assert_eq!(t.get('#'), Catcode::Parameter);
        assert_eq!(t.get('^'), Catcode::Superscript);
        assert_eq!(t.get('_'), Catcode::Subscript);
        assert_eq!(t.get(' '), Catcode::Space);
        assert_eq!(t.get('\t'), Catcode::Space);
        assert_eq!(t.get('q'), Catcode::Letter);
        assert_eq!(t.get('Z'), Catcode::Letter);
        assert_eq!(t.get('%'), Catcode::Comment);
        assert_eq!(t.get('7'), Catcode::Other);
        assert_eq!(t.get('@'), Catcode::Other);
        assert_eq!(t.get('é'), Catcode::Other);
    }

    #[test]
    fn overrides_are_scoped_to_the_table_value() {
        let mut t = CatcodeTable::new();
        t.set('@', Catcode::Letter);
        assert_eq!(t.get('@'), Catcode::Letter);
        let fresh = CatcodeTable::new();
        assert_eq!(fresh.get('@'), Catcode::Other);
        // resetting to the default removes the override entry
        t.set('@', Catcode::Other);
        assert_eq!(t, fresh);
    }

    #[test]
    fn sixteen_distinct_codes() {
        for (i, cc) in Catcode::ALL.iter().enumerate() {
            assert_eq!(cc.code() as usize, i);
            assert_eq!(Catcode::from_code(i as u8), Some(*cc));
        }
        assert_eq!(Catcode::from_code(16), None);
    }
}
