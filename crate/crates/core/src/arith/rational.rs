use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Longest accepted textual rational, in bytes.
const MAX_RATIONAL_LEN: usize = 4096;
/// Largest accepted decimal exponent.
const MAX_DECIMAL_EXP: i64 = 4096;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p"`, `"p/q"`, or a decimal such as `"-0.25"` or `"1e-9"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if s.len() > MAX_RATIONAL_LEN {
        return Err(Error::Parse("rational literal too long".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_int(n)?;
        let d = parse_int(d)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(s)
}

fn parse_int(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("invalid integer {s:?}")));
    }
    t.parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("invalid integer {s:?}")))
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("invalid exponent in {s:?}")))?;
            if e.abs() > MAX_DECIMAL_EXP {
                return Err(Error::Parse(format!("exponent out of range in {s:?}")));
            }
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if (ip.is_empty() && fp.is_empty())
        || !ip.bytes().all(|b| b.is_ascii_digit())
        || !fp.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(Error::Parse(format!("invalid number {s:?}")));
    }
    let digits = format!("{ip}{fp}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().unwrap_or_default());
    let scale = exp - fp.len() as i64;
    let ten = BigInt::from(10);
    let p = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= Rational::from_integer(p);
    } else {
        value /= Rational::from_integer(p);
    }
    Ok(if neg { -value } else { value })
}

/// Canonical `"p/q"` form; integers print without a denominator.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest `f64`, for reporting only.
pub fn to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Keep 64 leading bits of each part; the ratio then carries the binary exponent.
    let top = |x: &BigInt| -> (f64, i64) {
        let s = x.bits().saturating_sub(64);
        ((x >> s).to_f64().unwrap_or(0.0), s as i64)
    };
    let (n, sn) = top(r.numer());
    let (d, sd) = top(r.denom());
    let e = (sn - sd).clamp(-2200, 2200) as i32;
    // Split the scaling so that no intermediate power overflows on its own.
    n / d * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
}

pub fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn ceil(r: &Rational) -> BigInt {
    -((-r.numer()).div_floor(r.denom()))
}

/// Distance from `r` to the nearest integer.
pub fn dist_to_int(r: &Rational) -> Rational {
    let f = r - Rational::from_integer(floor(r));
    let g = Rational::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Serde adapter storing a rational as its `"p/q"` string.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let v = RationalRepr::deserialize(d)?;
        v.into_rational().map_err(serde::de::Error::custom)
    }

    /// Accepts strings and JSON integers.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RationalRepr {
        Text(String),
        Int(i64),
    }

    impl RationalRepr {
        pub(crate) fn into_rational(self) -> Result<Rational> {
            match self {
                RationalRepr::Text(t) => parse_rational(&t),
                RationalRepr::Int(i) => Ok(int(i)),
            }
        }
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_rational_vec {
    use super::serde_rational::RationalRepr;
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<RationalRepr>::deserialize(d)?;
        v.into_iter()
            .map(|r| r.into_rational().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for a closed interval written as `["lo", "hi"]`.
pub mod serde_rational_pair {
    use super::serde_rational::RationalRepr;
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        v: &(Rational, Rational),
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        [format_rational(&v.0), format_rational(&v.1)].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<(Rational, Rational), D::Error> {
        let [a, b] = <[RationalRepr; 2]>::deserialize(d)?;
        let a = a.into_rational().map_err(serde::de::Error::custom)?;
        let b = b.into_rational().map_err(serde::de::Error::custom)?;
        Ok((a, b))
    }
}

/// Integer vectors as decimal strings.
pub mod serde_bigint_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|x| {
                if x.len() > 4096 {
                    return Err(serde::de::Error::custom("integer too long"));
                }
                x.parse::<BigInt>().map_err(serde::de::Error::custom)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_decimal_and_exponent() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational(" 2/-4 ").unwrap(), rat(-1, 2));
    }

    #[test]
    fn to_f64_handles_parts_beyond_double_range() {
        let big = BigInt::one() << 2000usize;
        let r = Rational::new(&big * BigInt::from(3), &big * BigInt::from(2));
        assert_eq!(to_f64(&r), 1.5);
        assert_eq!(to_f64(&Rational::new(big.clone(), BigInt::from(1) << 1990usize)), 1024.0);
        assert_eq!(to_f64(&Rational::new(BigInt::from(-1), big)), 0.0);
        assert_eq!(to_f64(&rat(-7, 8)), -0.875);
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "1/0", "a/b", "1/2/3", ".", "1e99999", "--1", "0x10"] {
            assert!(parse_rational(s).is_err(), "{s}");
        }
    }

    #[test]
    fn format_roundtrip() {
        for r in [rat(1, 3), rat(-22, 7), int(0), int(-5)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }

    #[test]
    fn distance_to_integer() {
        assert_eq!(dist_to_int(&rat(7, 3)), rat(1, 3));
        assert_eq!(dist_to_int(&rat(-7, 3)), rat(1, 3));
        assert_eq!(dist_to_int(&rat(1, 2)), rat(1, 2));
    }

    #[test]
    fn f64_of_huge_rational() {
        let big = Rational::from_integer(BigInt::from(10).pow(400)) / int(3);
        let v = to_f64(&(big / Rational::from_integer(BigInt::from(10).pow(399))));
        assert!((v - 10.0 / 3.0).abs() < 1e-12);
    }
}
