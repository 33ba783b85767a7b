//! Exact rational numbers: parsing, formatting and serde helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `12`, `-3`, `1.25`, `.5`, `3/2` or `-7/4` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = parse_integer(num)?;
        let den: BigInt = parse_integer(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

fn parse_integer(text: &str) -> Option<BigInt> {
    let t = text.trim();
    let digits = t.strip_prefix('-').or_else(|| t.strip_prefix('+')).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

/// Canonical text: integers as `n`, terminating fractions as decimals,
/// everything else as `p/q`. Always re-parses to the same value.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    match decimal_expansion(value) {
        Some(text) => text,
        None => format!("{}/{}", value.numer(), value.denom()),
    }
}

fn decimal_expansion(value: &Rational) -> Option<String> {
    let mut denom = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while denom.is_even() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = value * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    debug_assert!(scaled.is_integer());
    let magnitude = scaled.numer().abs().to_string();
    let padded = format!("{:0>width$}", magnitude, width = places + 1);
    let (whole, frac) = padded.split_at(padded.len() - places);
    let sign = if value.is_negative() { "-" } else { "" };
    Some(format!("{sign}{whole}.{frac}"))
}

pub(crate) mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).ok_or_else(|| D::Error::custom(format!("not a rational: {text}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rational("3/2"), Some(rat(3, 2)));
        assert_eq!(parse_rational("-7/4"), Some(rat(-7, 4)));
        assert_eq!(parse_rational("1.25"), Some(rat(5, 4)));
        assert_eq!(parse_rational(".5"), Some(rat(1, 2)));
        assert_eq!(parse_rational("8"), Some(int(8)));
        assert_eq!(parse_rational("-0.001"), Some(rat(-1, 1000)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
        assert_eq!(parse_rational("1.2.3"), None);
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&rat(3, 2)), "1.5");
        assert_eq!(format_rational(&rat(1, 3)), "1/3");
        assert_eq!(format_rational(&rat(-1, 8)), "-0.125");
        assert_eq!(format_rational(&int(12)), "12");
        assert_eq!(format_rational(&rat(1, 20)), "0.05");
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
            let value = rat(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&value)), Some(value));
        }
    }
}
