//! Exact integer lengths in scaled points (65536 sp = 1 pt).
//!
//! Unit conversion and decimal printing reproduce TeX's fixed-point
//! algorithms so that values like `1in` come out as exactly 4736286 sp.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use thiserror::Error;

pub const SP_PER_PT: i64 = 65536;

/// TeX's dimension magnitude bound: |d| < 2^30 sp.
pub const MAX_DIMEN: i64 = (1 << 30) - 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimensionError {
    #[error("missing or unknown unit in dimension")]
    MissingUnit,
    #[error("dimension too large")]
    NumberTooLarge,
    #[error("malformed dimension literal")]
    Malformed,
}

/// A length as an exact count of scaled points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Dimension(pub i64);

impl Dimension {
    pub const ZERO: Dimension = Dimension(0);

    pub fn from_sp(sp: i64) -> Dimension {
        Dimension(sp)
    }

    pub fn from_pt(pt: i64) -> Dimension {
        Dimension(pt * SP_PER_PT)
    }

    pub fn sp(self) -> i64 {
        self.0
    }

    pub fn to_pt(self) -> f64 {
        self.0 as f64 / SP_PER_PT as f64
    }

    pub fn checked(self) -> Result<Dimension, DimensionError> {
        if self.0.abs() > MAX_DIMEN {
            Err(DimensionError::NumberTooLarge)
        } else {
            Ok(self)
        }
    }

    /// Render like TeX's `print_scaled`: shortest decimal that scans back
    /// to the same sp value, e.g. `2.5` for 163840 sp.
    pub fn display_pt(self) -> String {
        let mut s = self.0;
        let mut out = String::new();
        if s < 0 {
            out.push('-');
            s = -s;
        }
        out.push_str(&(s / SP_PER_PT).to_string());
        out.push('.');
        s = 10 * (s % SP_PER_PT) + 5;
        let mut delta: i64 = 10;
        loop {
            if delta > SP_PER_PT {
                s += 32768 - delta / 2;
            }
            out.push(char::from(b'0' + (s / SP_PER_PT) as u8));
            s = 10 * (s % SP_PER_PT);
            delta *= 10;
            if s <= delta {
                break;
            }
        }
        out
    }
}

impl Add for Dimension {
    type Output = Dimension;
    fn add(self, rhs: Dimension) -> Dimension {
        Dimension(self.0 + rhs.0)
    }
}

impl AddAssign for Dimension {
    fn add_assign(&mut self, rhs: Dimension) {
        self.0 += rhs.0;
    }
}

impl Sub for Dimension {
    type Output = Dimension;
    fn sub(self, rhs: Dimension) -> Dimension {
        Dimension(self.0 - rhs.0)
    }
}

impl Neg for Dimension {
    type Output = Dimension;
    fn neg(self) -> Dimension {
        Dimension(-self.0)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}pt", self.display_pt())
    }
}

/// Physical units with their pt ratios as integer fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Pt,
    Sp,
    Bp,
    Mm,
    Cm,
    In,
    Pc,
    Em,
    Ex,
}

impl Unit {
    pub fn from_str(s: &str) -> Option<Unit> {
        match s {
            "pt" => Some(Unit::Pt),
            "sp" => Some(Unit::Sp),
            "bp" => Some(Unit::Bp),
            "mm" => Some(Unit::Mm),
            "cm" => Some(Unit::Cm),
            "in" => Some(Unit::In),
            "pc" => Some(Unit::Pc),
            "em" => Some(Unit::Em),
            "ex" => Some(Unit::Ex),
            _ => None,
        }
    }

    /// pt-ratio numerator/denominator for physical units.
    fn ratio(self) -> Option<(i64, i64)> {
        match self {
            Unit::Pt => None,
            Unit::Sp => None,
            Unit::Bp => Some((7227, 7200)),
            Unit::Mm => Some((7227, 2540)),
            Unit::Cm => Some((7227, 254)),
            Unit::In => Some((7227, 100)),
            Unit::Pc => Some((12, 1)),
            Unit::Em | Unit::Ex => None,
        }
    }
}

/// Decimal fraction digits to a 16-bit scaled fraction, rounding from the
/// least significant digit as TeX does.
pub fn round_decimals(digits: &[u8]) -> i64 {
    let mut f: i64 = 0;
    for &d in digits.iter().rev().take(17) {
        f = (f + (d as i64) * 131072) / 10;
    }
    (f + 1) / 2
}

/// Combine integer part, 16-bit fraction and unit into scaled points.
///
/// `em_size` supplies the current font size; 1 ex = 0.45 em.
pub fn to_scaled(int_part: i64, fraction: i64, unit: Unit, em_size: Dimension) -> Result<Dimension, DimensionError> {
    let (mut x, mut f) = (int_part, fraction);
    match unit {
        Unit::Sp => {
            // sp takes the integer part literally; fraction is discarded
            return Dimension(x).checked();
        }
        Unit::Pt => {}
        Unit::Em | Unit::Ex => {
            let base = if unit == Unit::Em {
                em_size.sp()
            } else {
                // 1 ex = 0.45 em
                em_size.sp() * 45 / 100
            };
            let v = x
                .checked_mul(base)
                .and_then(|a| a.checked_add(f * base / SP_PER_PT))
                .ok_or(DimensionError::NumberTooLarge)?;
            return Dimension(v).checked();
        }
        _ => {
            let (n, d) = unit.ratio().unwrap();
            let prod = x.checked_mul(n).ok_or(DimensionError::NumberTooLarge)?;
            let q = prod.div_euclid(d);
            let r = prod.rem_euclid(d);
            f = (n * f + SP_PER_PT * r) / d;
            x = q + f / SP_PER_PT;
            f %= SP_PER_PT;
        }
    }
    let v = x
        .checked_mul(SP_PER_PT)
        .and_then(|a| a.checked_add(f))
        .ok_or(DimensionError::NumberTooLarge)?;
    Dimension(v).checked()
}

/// Parse a standalone dimension literal like `2.5pt` or `-1in`.
pub fn parse_dimension(text: &str, em_size: Dimension) -> Result<Dimension, DimensionError> {
    let s = text.trim();
    let mut chars = s.chars().peekable();
    let mut sign = 1i64;
    while let Some(&c) = chars.peek() {
        match c {
            '-' => {
                sign = -sign;
                chars.next();
            }
            '+' => {
                chars.next();
            }
            _ => break,
        }
    }
    let mut int_part: i64 = 0;
    let mut saw_digit = false;
    while let Some(&c) = chars.peek() {
        if let Some(d) = c.to_digit(10) {
            int_part = int_part
                .checked_mul(10)
                .and_then(|v| v.checked_add(d as i64))
                .ok_or(DimensionError::NumberTooLarge)?;
            saw_digit = true;
            chars.next();
        } else {
            break;
        }
    }
    let mut fraction = 0i64;
    if chars.peek() == Some(&'.') || chars.peek() == Some(&',') {
        chars.next();
        let mut digits = Vec::new();
        while let Some(&c) = chars.peek() {
            if let Some(d) = c.to_digit(10) {
                digits.push(d as u8);
                saw_digit = true;
                chars.next();
            } else {
                break;
            }
        }
        fraction = round_decimals(&digits);
    }
    if !saw_digit {
        return Err(DimensionError::Malformed);
    }
    let unit_str: String = chars.collect();
    let unit = Unit::from_str(unit_str.trim()).ok_or(DimensionError::MissingUnit)?;
    let d = to_scaled(int_part, fraction, unit, em_size)?;
    Ok(Dimension(sign * d.sp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EM10: Dimension = Dimension(10 * 65536);

    #[test]
    fn two_and_a_half_pt() {
        assert_eq!(parse_dimension("2.5pt", EM10), Ok(Dimension(163840)));
    }

    #[test]
    fn one_inch_exact() {
        // 72.27 pt per inch under fixed-point conversion
        assert_eq!(parse_dimension("1in", EM10), Ok(Dimension(4736286)));
    }

    #[test]
    fn zero_sp() {
        assert_eq!(parse_dimension("0sp", EM10), Ok(Dimension(0)));
    }

    #[test]
    fn one_bp() {
        // 7227/7200 ratio
        assert_eq!(parse_dimension("1bp", EM10), Ok(Dimension(65781)));
    }

    #[test]
    fn ten_mm() {
        assert_eq!(parse_dimension("10mm", EM10), Ok(Dimension(1864679)));
    }

    #[test]
    fn em_and_ex_resolve_through_font_size() {
        assert_eq!(parse_dimension("1em", EM10), Ok(Dimension(655360)));
        assert_eq!(parse_dimension("2ex", EM10), Ok(Dimension(589824)));
    }

    #[test]
    fn negative_and_double_sign() {
        assert_eq!(parse_dimension("-1pt", EM10), Ok(Dimension(-65536)));
        assert_eq!(parse_dimension("--1pt", EM10), Ok(Dimension(65536)));
    }

    #[test]
    fn missing_unit() {
        assert_eq!(parse_dimension("12", EM10), Err(DimensionError::MissingUnit));
        assert_eq!(parse_dimension("12qq", EM10), Err(DimensionError::MissingUnit));
    }

    #[test]
    fn too_large() {
        assert_eq!(parse_dimension("20000pt", EM10), Err(DimensionError::NumberTooLarge));
        assert!(parse_dimension("16383pt", EM10).is_ok());
    }

    #[test]
    fn display_matches_tex_print_scaled() {
        assert_eq!(Dimension(163840).display_pt(), "2.5");
        assert_eq!(Dimension(4736286).display_pt(), "72.26999");
        assert_eq!(Dimension(0).display_pt(), "0.0");
        assert_eq!(Dimension(-65536).display_pt(), "-1.0");
        assert_eq!(Dimension(1).display_pt(), "0.00002");
    }

    #[test]
    fn display_scans_back_to_same_value() {
        for sp in [0, 1, 7, 65535, 65536, 65537, 123456789, 4736286] {
            let shown = format!("{}pt", Dimension(sp).display_pt());
            assert_eq!(parse_dimension(&shown, EM10), Ok(Dimension(sp)), "{shown}");
        }
    }
}
