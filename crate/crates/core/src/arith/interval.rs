use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;
use super::rational::Rational;
use super::MIN_PRECISION;
use crate::error::{Error, Result};

/// Closed interval with dyadic endpoints, rounded outward to `prec` bits after every operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RInterval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl RInterval {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::Parse(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(RInterval {
            lo,
            hi,
            prec: prec.max(MIN_PRECISION),
        })
    }

    fn rounded(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        RInterval {
            lo: lo.round_down(prec),
            hi: hi.round_up(prec),
            prec,
        }
    }

    pub fn point(d: Dyadic, prec: u32) -> Self {
        RInterval {
            lo: d.clone(),
            hi: d,
            prec: prec.max(MIN_PRECISION),
        }
    }

    pub fn from_int(i: i64) -> Self {
        Self::point(Dyadic::from_int(i), MIN_PRECISION)
    }

    pub fn from_bigint(i: &BigInt) -> Self {
        Self::point(Dyadic::from_int(i.clone()), MIN_PRECISION)
    }

    /// Tightest enclosure of `r` at `prec` bits; exact when `r` is dyadic.
    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        let prec = prec.max(MIN_PRECISION);
        RInterval {
            lo: Dyadic::floor_of(r, prec),
            hi: Dyadic::ceil_of(r, prec),
            prec,
        }
    }

    /// Enclosure of `[a, b]` at `prec` bits.
    pub fn from_rational_bounds(a: &Rational, b: &Rational, prec: u32) -> Result<Self> {
        let prec = prec.max(MIN_PRECISION);
        Self::new(Dyadic::floor_of(a, prec), Dyadic::ceil_of(b, prec), prec)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        Self::rounded(self.lo.clone(), self.hi.clone(), prec.max(MIN_PRECISION))
    }

    pub fn lo_rational(&self) -> Rational {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> Rational {
        self.hi.to_rational()
    }

    pub fn mid_rational(&self) -> Rational {
        (self.lo_rational() + self.hi_rational()) / Rational::from_integer(BigInt::from(2))
    }

    /// Exact midpoint as a dyadic.
    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi).ldexp(-1)
    }

    /// Exact half-width as a dyadic.
    pub fn radius(&self) -> Dyadic {
        self.hi.sub(&self.lo).ldexp(-1)
    }

    pub fn width(&self) -> Rational {
        self.hi.sub(&self.lo).to_rational()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, r: &Rational) -> bool {
        &self.lo_rational() <= r && r <= &self.hi_rational()
    }

    pub fn contains_interval(&self, o: &Self) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn is_positive(&self) -> bool {
        self.lo.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi.signum() < 0
    }

    /// `Some` when the order is decided for every pair of members.
    pub fn cmp_certain(&self, o: &Self) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if self.lo > o.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && o.is_point() && self.lo == o.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Same as [`cmp_certain`](Self::cmp_certain) against a rational.
    pub fn cmp_rational(&self, r: &Rational) -> Option<Ordering> {
        if &self.hi_rational() < r {
            Some(Ordering::Less)
        } else if &self.lo_rational() > r {
            Some(Ordering::Greater)
        } else if self.is_point() && &self.lo_rational() == r {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn hull(&self, o: &Self) -> Self {
        RInterval {
            lo: self.lo.clone().min(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
            prec: self.prec.max(o.prec),
        }
    }

    pub fn intersect(&self, o: &Self) -> Option<Self> {
        let lo = self.lo.clone().max(o.lo.clone());
        let hi = self.hi.clone().min(o.hi.clone());
        (lo <= hi).then(|| RInterval {
            lo,
            hi,
            prec: self.prec.max(o.prec),
        })
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        Self::rounded(self.lo.add(&o.lo), self.hi.add(&o.hi), p)
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        Self::rounded(self.lo.sub(&o.hi), self.hi.sub(&o.lo), p)
    }

    pub fn neg_ref(&self) -> Self {
        RInterval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            prec: self.prec,
        }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        if self.is_point() && o.is_point() {
            let v = self.lo.mul(&o.lo);
            return Self::rounded(v.clone(), v, p);
        }
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = c.iter().min().cloned().unwrap_or_else(Dyadic::zero);
        let hi = c.iter().max().cloned().unwrap_or_else(Dyadic::zero);
        Self::rounded(lo, hi, p)
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        self.mul_ref(&Self::from_bigint(k))
    }

    pub fn abs(&self) -> Self {
        if self.lo.signum() >= 0 {
            self.clone()
        } else if self.hi.signum() <= 0 {
            self.neg_ref()
        } else {
            RInterval {
                lo: Dyadic::zero(),
                hi: self.hi.clone().max(self.lo.neg()),
                prec: self.prec,
            }
        }
    }

    /// Square, tight when the interval straddles zero.
    pub fn sqr(&self) -> Self {
        let a = self.abs();
        let lo = a.lo.mul(&a.lo);
        let hi = a.hi.mul(&a.hi);
        Self::rounded(lo, hi, self.prec)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one().with_precision(self.prec);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let one = Rational::one();
        let lo = Dyadic::floor_of(&(&one / self.hi.to_rational()), self.prec);
        let hi = Dyadic::ceil_of(&(&one / self.lo.to_rational()), self.prec);
        Ok(RInterval {
            lo,
            hi,
            prec: self.prec,
        })
    }

    pub fn div_ref(&self, o: &Self) -> Result<Self> {
        if o.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.prec.max(o.prec);
        let (a, b) = (
            [self.lo.to_rational(), self.hi.to_rational()],
            [o.lo.to_rational(), o.hi.to_rational()],
        );
        let q = [&a[0] / &b[0], &a[0] / &b[1], &a[1] / &b[0], &a[1] / &b[1]];
        let lo = q.iter().min().cloned().unwrap_or_default();
        let hi = q.iter().max().cloned().unwrap_or_default();
        Ok(RInterval {
            lo: Dyadic::floor_of(&lo, p),
            hi: Dyadic::ceil_of(&hi, p),
            prec: p,
        })
    }

    /// Division by a nonzero exact integer.
    pub fn div_int(&self, k: i64) -> Self {
        let k = Rational::from_integer(BigInt::from(k));
        let (a, b) = (self.lo.to_rational() / &k, self.hi.to_rational() / &k);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        RInterval {
            lo: Dyadic::floor_of(&lo, self.prec),
            hi: Dyadic::ceil_of(&hi, self.prec),
            prec: self.prec,
        }
    }

    /// Square root of the nonnegative part.
    pub fn sqrt(&self) -> Result<Self> {
        if self.hi.signum() < 0 {
            return Err(Error::PreconditionViolated("sqrt of a negative interval".into()));
        }
        let lo = if self.lo.signum() <= 0 {
            Dyadic::zero()
        } else {
            sqrt_bound(&self.lo.to_rational(), self.prec, false)
        };
        let hi = sqrt_bound(&self.hi.to_rational(), self.prec, true);
        Ok(RInterval {
            lo,
            hi,
            prec: self.prec,
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }
}

/// Dyadic bound on `sqrt(x)` for rational `x >= 0`.
pub(crate) fn sqrt_bound(x: &Rational, prec: u32, up: bool) -> Dyadic {
    if x.is_zero() {
        return Dyadic::zero();
    }
    let lg = (x.numer().bits() as i64 - x.denom().bits() as i64) / 2;
    let k = prec as i64 + 2 - lg;
    let (num, den) = if k >= 0 {
        (x.numer() << (2 * k) as u64, x.denom().clone())
    } else {
        (x.numer().clone(), x.denom() << (-2 * k) as u64)
    };
    let m = if up {
        let c = -((-&num).div_floor(&den));
        let mut r = c.sqrt();
        if &r * &r < c {
            r += 1;
        }
        r
    } else {
        num.div_floor(&den).sqrt()
    };
    Dyadic::new(m, -k)
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&RInterval> for &RInterval {
            type Output = RInterval;
            fn $m(self, o: &RInterval) -> RInterval {
                self.$f(o)
            }
        }
        impl $tr<RInterval> for RInterval {
            type Output = RInterval;
            fn $m(self, o: RInterval) -> RInterval {
                self.$f(&o)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl Neg for RInterval {
    type Output = RInterval;
    fn neg(self) -> RInterval {
        self.neg_ref()
    }
}

impl Neg for &RInterval {
    type Output = RInterval;
    fn neg(self) -> RInterval {
        self.neg_ref()
    }
}

impl fmt::Display for RInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Serialized form: hexadecimal endpoints plus the working precision.
#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    lo: String,
    hi: String,
    bits: u32,
}

impl Serialize for RInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IntervalRepr {
            lo: self.lo.to_hex(),
            hi: self.hi.to_hex(),
            bits: self.prec,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RInterval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = IntervalRepr::deserialize(d)?;
        parse_interval_parts(&r.lo, &r.hi, r.bits).map_err(serde::de::Error::custom)
    }
}

fn parse_interval_parts(lo: &str, hi: &str, bits: u32) -> Result<RInterval> {
    if bits > super::HARD_PRECISION_LIMIT {
        return Err(Error::Parse(format!("precision {bits} exceeds limit")));
    }
    RInterval::new(Dyadic::parse_hex(lo)?, Dyadic::parse_hex(hi)?, bits)
}

/// Parses an interval from its JSON form.
pub fn parse_interval_json(s: &str) -> Result<RInterval> {
    Ok(serde_json::from_str::<RInterval>(s)?)
}

impl RInterval {
    /// Signed magnitude bound: the larger of `|lo|` and `|hi|`.
    pub fn mag(&self) -> Dyadic {
        self.lo.abs().max(self.hi.abs())
    }

    /// True when every member is strictly below `r`.
    pub fn lt_rational(&self, r: &Rational) -> bool {
        self.cmp_rational(r) == Some(Ordering::Less)
    }

    pub fn abs_hi_rational(&self) -> Rational {
        self.mag().to_rational().abs()
    }
}
