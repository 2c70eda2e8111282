//! Engineering-notation values (`2.5u`, `10fF`, `3meg`).
//!
//! Scaling is done by shifting the decimal exponent of the mantissa text and
//! handing the result to the standard float parser, so `2.5u` yields exactly
//! the same `f64` as the literal `2.5e-6`. [`format_value`] relies on this to
//! emit values that parse back bit-for-bit.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Malformed numeric token. `pos` is the 0-based byte offset of the first
/// offending character.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed value `{token}` at column {pos}")]
pub struct ValueError {
    pub token: String,
    pub pos: usize,
}

/// A real number parsed from engineering notation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EngValue(pub f64);

impl EngValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl FromStr for EngValue {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_value(s).map(EngValue)
    }
}

impl fmt::Display for EngValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_value(self.0))
    }
}

// `meg` must be tried before `m`.
const SUFFIXES: [(&str, i32); 8] = [
    ("meg", 6),
    ("f", -15),
    ("p", -12),
    ("n", -9),
    ("u", -6),
    ("m", -3),
    ("k", 3),
    ("g", 9),
];

/// Parse a SPICE number with an optional scale suffix. Letters following a
/// recognized suffix (or following the mantissa when no suffix matches) are
/// treated as a unit and ignored.
pub fn parse_value(token: &str) -> Result<f64, ValueError> {
    let err = |pos: usize| ValueError {
        token: token.to_string(),
        pos,
    };
    let bytes = token.as_bytes();
    if bytes.is_empty() {
        return Err(err(0));
    }

    let mut i = 0;
    if bytes[i] == b'+' || bytes[i] == b'-' {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut n_digits = i - int_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        n_digits += i - frac_start;
    }
    if n_digits == 0 {
        return Err(err(i.min(bytes.len())));
    }
    let mantissa = &token[..i];

    // Exponent: only when `e` is followed by a digit or a signed digit.
    let mut exp: i32 = 0;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_digits = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_digits {
            exp = token[i + 1..j].parse().map_err(|_| err(i))?;
            i = j;
        }
    }

    let rest = &token[i..];
    if !rest.chars().all(|c| c.is_ascii_alphabetic()) {
        let bad = rest
            .char_indices()
            .find(|(_, c)| !c.is_ascii_alphabetic())
            .map(|(k, _)| k)
            .unwrap_or(0);
        return Err(err(i + bad));
    }
    let lower = rest.to_ascii_lowercase();
    let shift = SUFFIXES
        .iter()
        .find(|(sfx, _)| lower.starts_with(sfx))
        .map(|&(_, e)| e)
        .unwrap_or(0);

    format!("{mantissa}e{}", exp + shift)
        .parse::<f64>()
        .map_err(|_| err(0))
}

/// Format a value in engineering notation that [`parse_value`] maps back to
/// the identical `f64`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    // Shortest round-trip scientific form, e.g. "2.5e-6".
    let sci = format!("{v:e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mant) = match mant.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mant),
    };
    let digits: String = mant.chars().filter(|c| *c != '.').collect();

    let (sfx, sfx_exp) = match exp {
        e if e >= 9 => ("g", 9),
        e if e >= 6 => ("meg", 6),
        e if e >= 3 => ("k", 3),
        e if e >= 0 => ("", 0),
        e if e >= -3 => ("m", -3),
        e if e >= -6 => ("u", -6),
        e if e >= -9 => ("n", -9),
        e if e >= -12 => ("p", -12),
        _ => ("f", -15),
    };
    // value = 0.d1d2d3... * 10^(exp+1); place the point after (exp - sfx_exp + 1) digits.
    let int_len = exp - sfx_exp + 1;
    let body = if int_len <= 0 {
        format!("0.{}{}", "0".repeat((-int_len) as usize), digits)
    } else if int_len as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(int_len as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(int_len as usize);
        format!("{a}.{b}")
    };
    format!("{sign}{body}{sfx}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn suffix_table() {
        assert_eq!(parse_value("2.5u").unwrap(), 2.5e-6);
        assert_eq!(parse_value("10f").unwrap(), 1.0e-14);
        assert_eq!(parse_value("3meg").unwrap(), 3.0e6);
        assert_eq!(parse_value("3MEG").unwrap(), 3.0e6);
        assert_eq!(parse_value("3m").unwrap(), 3.0e-3);
        assert_eq!(parse_value("1k").unwrap(), 1e3);
        assert_eq!(parse_value("1G").unwrap(), 1e9);
        assert_eq!(parse_value("7p").unwrap(), 7e-12);
        assert_eq!(parse_value("7n").unwrap(), 7e-9);
        assert_eq!(parse_value("-1.5").unwrap(), -1.5);
        assert_eq!(parse_value(".5").unwrap(), 0.5);
        assert_eq!(parse_value("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_value("1.2E+2k").unwrap(), 1.2e5);
    }

    #[test]
    fn units_ignored() {
        assert_eq!(parse_value("10pF").unwrap(), parse_value("10p").unwrap());
        assert_eq!(parse_value("3.3V").unwrap(), 3.3);
        assert_eq!(parse_value("0.35um").unwrap(), 0.35e-6);
        assert_eq!(parse_value("2megohm").unwrap(), 2e6);
    }

    #[test]
    fn malformed() {
        assert_eq!(parse_value("").unwrap_err().pos, 0);
        assert_eq!(parse_value("abc").unwrap_err().pos, 0);
        assert_eq!(parse_value("1.2.3").unwrap_err().pos, 3);
        assert!(parse_value("-").is_err());
        assert!(parse_value("1u5").is_err());
    }

    #[test]
    fn format_examples() {
        assert_eq!(format_value(2.5e-6), "2.5u");
        assert_eq!(format_value(0.35e-6), "350n");
        assert_eq!(format_value(1e-14), "10f");
        assert_eq!(format_value(3.3), "3.3");
        assert_eq!(format_value(1e-7), "100n");
        assert_eq!(format_value(2.2e6), "2.2meg");
        assert_eq!(format_value(-1.6), "-1.6");
        assert_eq!(format_value(1.5e-17), "0.015f");
    }

    proptest! {
        #[test]
        fn parse_total_on_suffix_table(m in 0.0f64..1000.0, idx in 0usize..9) {
            let sfx = ["", "f", "p", "n", "u", "m", "k", "meg", "g"][idx];
            let scale = [1.0, 1e-15, 1e-12, 1e-9, 1e-6, 1e-3, 1e3, 1e6, 1e9][idx];
            let text = format!("{m}{sfx}");
            let v = parse_value(&text).unwrap();
            let expect = m * scale;
            prop_assert!((v - expect).abs() <= 1e-12 * expect.abs());
        }

        #[test]
        fn format_round_trips(v in prop::num::f64::NORMAL) {
            prop_assert_eq!(parse_value(&format_value(v)).unwrap(), v);
        }
    }
}
