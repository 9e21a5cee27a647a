use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;
use crate::error::{Error, Result};

/// Largest binary exponent accepted when parsing.
const MAX_PARSED_EXP: i64 = 1 << 20;

/// Exact binary fraction `mant * 2^exp`, kept with an odd mantissa.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn floor_shift(m: &BigInt, s: u64) -> BigInt {
    if s == 0 {
        return m.clone();
    }
    m.div_floor(&(BigInt::one() << s))
}

fn ceil_shift(m: &BigInt, s: u64) -> BigInt {
    -floor_shift(&-m, s)
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        Dyadic {
            mant: mant >> tz,
            exp: exp + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_int(i: impl Into<BigInt>) -> Self {
        Self::new(i.into(), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.mant << self.exp as u64)
        } else {
            Rational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Largest dyadic with at least `prec` significant bits not exceeding `r`.
    pub fn floor_of(r: &Rational, prec: u32) -> Self {
        Self::round_rational(r, prec, false)
    }

    /// Smallest dyadic with at least `prec` significant bits not below `r`.
    pub fn ceil_of(r: &Rational, prec: u32) -> Self {
        Self::round_rational(r, prec, true)
    }

    fn round_rational(r: &Rational, prec: u32, up: bool) -> Self {
        let (n, d) = (r.numer(), r.denom());
        if n.is_zero() {
            return Self::zero();
        }
        if d.is_one() {
            return Self::new(n.clone(), 0).round(prec, up);
        }
        let e = n.bits() as i64 - d.bits() as i64 - prec as i64 - 1;
        let (num, den) = if e <= 0 {
            (n << (-e) as u64, d.clone())
        } else {
            (n.clone(), d << e as u64)
        };
        let m = if up {
            -((-num).div_floor(&den))
        } else {
            num.div_floor(&den)
        };
        Self::new(m, e)
    }

    fn round(&self, prec: u32, up: bool) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let s = bits - prec as u64;
        let m = if up {
            ceil_shift(&self.mant, s)
        } else {
            floor_shift(&self.mant, s)
        };
        Self::new(m, self.exp + s as i64)
    }

    pub fn round_down(&self, prec: u32) -> Self {
        self.round(prec, false)
    }

    pub fn round_up(&self, prec: u32) -> Self {
        self.round(prec, true)
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(o.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &o.mant << (o.exp - e) as u64;
        Self::new(a + b, e)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.mant * &o.mant, self.exp + o.exp)
    }

    /// Multiplication by `2^k`.
    pub fn ldexp(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    /// `floor(log2 |self|)`; `None` for zero.
    pub fn ilog2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.mant.bits() as i64 - 1)
        }
    }

    pub fn to_f64(&self) -> f64 {
        super::rational::to_f64(&self.to_rational())
    }

    /// Hexadecimal floating literal such as `-0x1.8p-3`.
    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "0x0p+0".into();
        }
        let sign = if self.mant.is_negative() { "-" } else { "" };
        let m = self.mant.abs();
        let bits = m.bits();
        let frac_bits = bits - 1;
        let e = self.exp + frac_bits as i64;
        if frac_bits == 0 {
            return format!("{sign}0x1p{e:+}");
        }
        let digits = frac_bits.div_ceil(4);
        let frac = (m - (BigInt::one() << frac_bits)) << (4 * digits - frac_bits);
        let hex = frac.to_str_radix(16);
        format!("{sign}0x1.{hex:0>width$}p{e:+}", width = digits as usize)
    }

    /// Parses hexadecimal floating literals (`0x1.8p-3`, `-0xAp2`, `0x0`).
    pub fn parse_hex(s: &str) -> Result<Self> {
        let err = || Error::Parse(format!("invalid hex float {s:?}"));
        let t = s.trim();
        let (neg, t) = match t.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let t = t
            .strip_prefix("0x")
            .or_else(|| t.strip_prefix("0X"))
            .ok_or_else(err)?;
        let (body, exp) = match t.find(['p', 'P']) {
            Some(i) => {
                let e: i64 = t[i + 1..].parse().map_err(|_| err())?;
                if e.abs() > MAX_PARSED_EXP {
                    return Err(err());
                }
                (&t[..i], e)
            }
            None => (t, 0),
        };
        let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
        if (ip.is_empty() && fp.is_empty())
            || !ip.bytes().all(|b| b.is_ascii_hexdigit())
            || !fp.bytes().all(|b| b.is_ascii_hexdigit())
            || ip.len() + fp.len() > 4096
        {
            return Err(err());
        }
        let digits = format!("{ip}{fp}");
        let mant = BigInt::parse_bytes(digits.as_bytes(), 16).ok_or_else(err)?;
        let mant = if neg { -mant } else { mant };
        Ok(Self::new(mant, exp - 4 * fp.len() as i64))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), o.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // Same sign: compare magnitudes via leading-bit position first.
        let la = self.ilog2().unwrap_or(0);
        let lb = o.ilog2().unwrap_or(0);
        let mag = if la != lb {
            la.cmp(&lb)
        } else {
            let e = self.exp.min(o.exp);
            let a = self.mant.abs() << (self.exp - e) as u64;
            let b = o.mant.abs() << (o.exp - e) as u64;
            a.cmp(&b)
        };
        if sa > 0 {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}
