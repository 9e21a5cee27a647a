use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::interval::RInterval;
use super::rational::Rational;
use super::transcendental::pow_rational;
use crate::error::{Error, Result};

fn rpow(a: &Rational, e: i64) -> Rational {
    let k = e.unsigned_abs() as usize;
    let p = num_traits::pow(a.clone(), k);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Exact comparison of `a^p` with `b^q` for positive rationals and integer exponents.
pub fn cmp_power(a: &Rational, p: i64, b: &Rational, q: i64) -> Ordering {
    assert!(a.is_positive() && b.is_positive(), "cmp_power needs positive bases");
    let (x, y) = (rpow(a, p), rpow(b, q));
    // Cross-multiplied integer comparison; denominators are positive.
    (x.numer() * y.denom()).cmp(&(y.numer() * x.denom()))
}

/// `base^exp` with rational base and exponent, compared exactly where possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPower {
    pub base: Rational,
    pub exp: Rational,
}

impl RationalPower {
    pub fn new(base: Rational, exp: Rational) -> Result<Self> {
        if !base.is_positive() {
            return Err(Error::NonPositiveBase);
        }
        Ok(RationalPower { base, exp })
    }

    pub fn enclose(&self, prec: u32) -> RInterval {
        pow_rational(&self.base, &self.exp, prec).expect("positive base")
    }

    /// The value when it is rational.
    pub fn exact(&self) -> Option<Rational> {
        let u = self.exp.numer().to_i64()?;
        let v = self.exp.denom().to_u32()?;
        let n = rpow(&self.base, u);
        if v == 1 {
            return Some(n);
        }
        let root = |x: &BigInt| -> Option<BigInt> {
            let r = x.nth_root(v);
            (num_traits::pow(r.clone(), v as usize) == *x).then_some(r)
        };
        Some(Rational::new(root(n.numer())?, root(n.denom())?))
    }

    /// Exact order of `self` relative to a positive rational.
    pub fn cmp_rational(&self, x: &Rational) -> Ordering {
        if !x.is_positive() {
            return Ordering::Greater;
        }
        let u = self.exp.numer().to_i64().expect("exponent fits i64");
        let v = self.exp.denom().to_i64().expect("exponent fits i64");
        cmp_power(&self.base, u, x, v)
    }

    pub fn mul_same_base(&self, o: &Self) -> Option<Self> {
        (self.base == o.base).then(|| RationalPower {
            base: self.base.clone(),
            exp: &self.exp + &o.exp,
        })
    }

    pub fn is_one(&self) -> bool {
        self.exp.is_zero() || self.base.is_one()
    }
}

/// Exact comparison of products `x1^e1 * c1` against `x2^e2 * c2` with rational exponents.
pub fn cmp_rational_power(
    x1: &Rational,
    e1: &Rational,
    c1: &Rational,
    x2: &Rational,
    e2: &Rational,
    c2: &Rational,
) -> Ordering {
    // Raise both sides to the common denominator of the exponents.
    let n = num_integer::lcm(e1.denom().clone(), e2.denom().clone());
    let n = n.to_i64().expect("small denominators");
    let p1 = (e1 * Rational::from_integer(BigInt::from(n))).to_integer().to_i64().expect("fits");
    let p2 = (e2 * Rational::from_integer(BigInt::from(n))).to_integer().to_i64().expect("fits");
    let lhs = rpow(x1, p1) * rpow(c1, n);
    let rhs = rpow(x2, p2) * rpow(c2, n);
    lhs.cmp(&rhs)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn spec_like_comparison() {
        // (5/3)^7 ~ 35.7 against (9/2)^3 = 91.1
        assert_eq!(cmp_power(&rat(5, 3), 7, &rat(9, 2), 3), Ordering::Less);
        assert_eq!(cmp_power(&int(4), 3, &int(8), 2), Ordering::Equal);
        assert_eq!(cmp_power(&rat(1, 2), -2, &int(3), 1), Ordering::Greater);
    }

    #[test]
    fn exact_roots() {
        let p = RationalPower::new(int(16), rat(3, 4)).unwrap();
        assert_eq!(p.exact(), Some(int(8)));
        let p = RationalPower::new(int(10), rat(1, 2)).unwrap();
        assert_eq!(p.exact(), None);
        assert_eq!(p.cmp_rational(&rat(316, 100)), Ordering::Greater);
        assert_eq!(p.cmp_rational(&rat(317, 100)), Ordering::Less);
    }

    proptest! {
        #[test]
        fn agrees_with_interval_enclosure(b in 2i64..30, u in -30i64..30, v in 1i64..9, xn in 1i64..5000, xd in 1i64..50) {
            let p = RationalPower::new(int(b), rat(u, v)).unwrap();
            let x = rat(xn, xd);
            let e = p.enclose(200);
            if let Some(o) = e.cmp_rational(&x) {
                prop_assert_eq!(o, p.cmp_rational(&x));
            }
        }

        #[test]
        fn monomial_comparison_consistent(a in 1i64..50, b in 1i64..50, c in 1i64..20) {
            let half = rat(1, 2);
            let o = cmp_rational_power(&int(a), &half, &int(c), &int(b), &half, &int(c));
            prop_assert_eq!(o, a.cmp(&b));
        }
    }
}
