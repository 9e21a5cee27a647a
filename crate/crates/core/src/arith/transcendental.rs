use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::dyadic::Dyadic;
use super::interval::RInterval;
use super::rational::Rational;
use super::MIN_PRECISION;
use crate::error::{Error, Result};

/// Guard bits carried through series evaluation.
const GUARD: u32 = 16;

fn tiny(bits: u32) -> Dyadic {
    Dyadic::new(BigInt::one(), -(bits as i64))
}

/// Enclosure of `exp(y)` for rational `y`.
pub fn exp_rational(y: &Rational, prec: u32) -> RInterval {
    let prec = prec.max(MIN_PRECISION);
    if y.is_zero() {
        return RInterval::one().with_precision(prec);
    }
    if y.is_negative() {
        let pos = exp_rational(&-y, prec + 2);
        return pos
            .recip()
            .expect("exp is positive")
            .with_precision(prec);
    }
    // Halve until the argument is at most 1/2, then square back.
    let whole = super::rational::ceil(y);
    let s = (whole.bits() + 1) as u32;
    let wp = prec + s + GUARD;
    let z = RInterval::from_rational(&(y / Rational::from_integer(BigInt::one() << s)), wp);
    let mut sum = RInterval::one().with_precision(wp);
    let mut term = sum.clone();
    let mut k: i64 = 1;
    loop {
        term = term.mul_ref(&z).div_int(k);
        sum = sum.add_ref(&term);
        if term.mag() < tiny(wp + 4) {
            // Remaining terms sum to at most the last one because z <= 1/2.
            let t = term.mag();
            sum = RInterval::new(sum.lo().sub(&t), sum.hi().add(&t), wp).expect("ordered");
            break;
        }
        k += 1;
    }
    for _ in 0..s {
        sum = sum.sqr();
    }
    sum.with_precision(prec)
}

/// Enclosure of `exp` over an interval argument.
pub fn exp_interval(x: &RInterval) -> RInterval {
    let p = x.precision();
    let lo = exp_rational(&x.lo_rational(), p);
    if x.is_point() {
        return lo;
    }
    let hi = exp_rational(&x.hi_rational(), p);
    lo.hull(&hi)
}

/// `2 atanh(z)` for an exact `0 <= z < 1/2`.
fn two_atanh(z: &Rational, wp: u32) -> RInterval {
    let zi = RInterval::from_rational(z, wp);
    let z2 = zi.sqr();
    let mut pow = zi.clone();
    let mut sum = RInterval::zero().with_precision(wp);
    let mut k: i64 = 0;
    loop {
        sum = sum.add_ref(&pow.div_int(2 * k + 1));
        if pow.mag() < tiny(wp + 4) {
            // Tail is positive and bounded by the last power since z^2 <= 1/4.
            let t = pow.mag();
            sum = RInterval::new(sum.lo().clone(), sum.hi().add(&t), wp).expect("ordered");
            break;
        }
        pow = pow.mul_ref(&z2);
        k += 1;
        if z.is_zero() {
            break;
        }
    }
    sum.add_ref(&sum)
}

/// Enclosure of `ln 2`.
pub fn ln2(prec: u32) -> RInterval {
    two_atanh(&Rational::new(BigInt::one(), BigInt::from(3)), prec + GUARD).with_precision(prec)
}

/// Enclosure of `ln y` for rational `y > 0`.
pub fn ln_rational(y: &Rational, prec: u32) -> Result<RInterval> {
    let prec = prec.max(MIN_PRECISION);
    if !y.is_positive() {
        return Err(Error::NonPositiveBase);
    }
    if y.is_one() {
        return Ok(RInterval::zero().with_precision(prec));
    }
    let mut k = y.numer().bits() as i64 - y.denom().bits() as i64;
    let two_k = |k: i64| {
        if k >= 0 {
            Rational::from_integer(BigInt::one() << k as u64)
        } else {
            Rational::new(BigInt::one(), BigInt::one() << (-k) as u64)
        }
    };
    let mut m = y / two_k(k);
    while m >= Rational::from_integer(BigInt::from(2)) {
        k += 1;
        m = y / two_k(k);
    }
    while m < Rational::one() {
        k -= 1;
        m = y / two_k(k);
    }
    let kbits = (k.unsigned_abs().max(1) as f64).log2().ceil() as u32 + 1;
    let wp = prec + GUARD + kbits;
    let one = Rational::one();
    let z = (&m - &one) / (&m + &one);
    let mut r = two_atanh(&z, wp);
    if k != 0 {
        r = r.add_ref(&ln2(wp).mul_int(&BigInt::from(k)));
    }
    Ok(r.with_precision(prec))
}

/// Enclosure of `ln` over a positive interval.
pub fn ln_interval(x: &RInterval) -> Result<RInterval> {
    if !x.is_positive() {
        return Err(Error::NonPositiveBase);
    }
    let p = x.precision();
    let lo = ln_rational(&x.lo_rational(), p)?;
    if x.is_point() {
        return Ok(lo);
    }
    Ok(lo.hull(&ln_rational(&x.hi_rational(), p)?))
}

/// Largest `m` with `m^v <= x` and smallest `M` with `M^v >= x`, for integer `x >= 0`.
fn root_bounds(x: &BigInt, v: u32) -> (BigInt, BigInt) {
    let lo = x.nth_root(v);
    let hi = if num_traits::pow(lo.clone(), v as usize) == *x {
        lo.clone()
    } else {
        &lo + 1
    };
    (lo, hi)
}

/// Enclosure of `base^exp` for rational `base > 0` by exact integer roots.
///
/// `base^(u/v)` is bracketed by `floor((N 2^(kv))^(1/v)) / 2^k` and the matching ceiling,
/// with `N = base^u` exact; the bracket is a single point when the root is exact and dyadic.
pub fn pow_rational(base: &Rational, exp: &Rational, prec: u32) -> Result<RInterval> {
    let prec = prec.max(MIN_PRECISION);
    if !base.is_positive() {
        return Err(Error::NonPositiveBase);
    }
    if exp.is_zero() || base.is_one() {
        return Ok(RInterval::one().with_precision(prec));
    }
    let (u, v) = (exp.numer(), exp.denom());
    let b = if u.is_negative() { base.recip() } else { base.clone() };
    let u = u
        .abs()
        .to_usize()
        .ok_or_else(|| Error::Overflow("exponent numerator".into()))?;
    let v = v
        .to_u32()
        .ok_or_else(|| Error::Overflow("exponent denominator".into()))?;
    let n = num_traits::pow(b, u);
    if v == 1 {
        return Ok(RInterval::from_rational(&n, prec));
    }
    let lg = (n.numer().bits() as i64 - n.denom().bits() as i64).div_euclid(v as i64);
    let k = prec as i64 + 2 - lg;
    let kv = k * v as i64;
    let (num, den) = if kv >= 0 {
        (n.numer() << kv as u64, n.denom().clone())
    } else {
        (n.numer().clone(), n.denom() << (-kv) as u64)
    };
    let (q, r) = num.div_rem(&den);
    let (lo, _) = root_bounds(&q, v);
    let hi = if r.is_zero() {
        root_bounds(&q, v).1
    } else {
        root_bounds(&(&q + 1), v).1
    };
    RInterval::new(Dyadic::new(lo, -k), Dyadic::new(hi, -k), prec)
}

/// Enclosure of `base^exponent` for rational `base > 1`.
pub fn iv_exp_log_pow(base: &Rational, exponent: &Rational, prec: u32) -> Result<RInterval> {
    if base <= &Rational::one() {
        return Err(Error::NonPositiveBase);
    }
    pow_rational(base, exponent, prec)
}

/// Enclosure of `base^exponent` for a positive interval base and interval exponent.
pub fn pow_interval(base: &RInterval, exponent: &RInterval) -> Result<RInterval> {
    let p = base.precision().max(exponent.precision());
    let l = ln_interval(&base.with_precision(p + GUARD))?;
    Ok(exp_interval(&l.mul_ref(exponent).with_precision(p + GUARD)).with_precision(p))
}

/// Enclosure of `sqrt(r)` for rational `r >= 0`.
pub fn sqrt_rational(r: &Rational, prec: u32) -> Result<RInterval> {
    if r.is_negative() {
        return Err(Error::PreconditionViolated("sqrt of a negative number".into()));
    }
    let lo = super::interval::sqrt_bound(r, prec, false);
    let hi = super::interval::sqrt_bound(r, prec, true);
    RInterval::new(lo, hi, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{int, rat};
    use proptest::prelude::*;

    fn unit(bits: u32) -> Rational {
        Rational::new(BigInt::one(), BigInt::one() << bits)
    }

    #[test]
    fn exact_square_root() {
        let r = pow_rational(&int(4), &rat(1, 2), 64).unwrap();
        assert!(r.is_point());
        assert_eq!(r.lo_rational(), int(2));
        let r = pow_rational(&int(16), &rat(-3, 4), 64).unwrap();
        assert_eq!(r.lo_rational(), rat(1, 8));
        assert!(r.is_point());
    }

    /// Newton iteration for the cube root of 100 in exact rationals.
    fn newton_cbrt_100(bits: u32) -> Rational {
        let mut x = rat(464, 100);
        let three = int(3);
        for _ in 0..12 {
            x = (int(2) * &x + int(100) / (&x * &x)) / &three;
            x = Rational::from_integer(super::super::rational::floor(
                &(&x * Rational::from_integer(BigInt::one() << bits)),
            )) / Rational::from_integer(BigInt::one() << bits);
        }
        x
    }

    #[test]
    fn ten_to_two_thirds_matches_newton_oracle() {
        let prec = 128;
        let e = pow_rational(&int(10), &rat(2, 3), prec).unwrap();
        let oracle = newton_cbrt_100(4 * prec);
        let slack = unit(4 * prec - 8);
        assert!(e.lo_rational() <= &oracle + &slack && &oracle - &slack <= e.hi_rational());
        assert!(e.width() <= unit(prec - 6));
    }

    #[test]
    fn ln_two_digits() {
        let l = ln2(200);
        // ln 2 = 0.693147180559945309417232121458176568...
        let approx = rat(693147180559945309, 1_000_000_000_000_000_000);
        assert!((l.mid_rational() - approx).abs() < rat(1, 1_000_000_000_000_000_000) * int(2));
        assert!(l.width() < unit(190));
    }

    #[test]
    fn exp_of_ln_is_identity() {
        let x = rat(37, 5);
        let l = ln_rational(&x, 160).unwrap();
        let back = exp_interval(&l);
        assert!(back.contains(&x));
        assert!(back.width() < unit(140));
    }

    #[test]
    fn exp_of_large_and_negative_arguments() {
        let e = exp_rational(&int(25), 128);
        let f = 25f64.exp();
        assert!((e.to_f64() / f - 1.0).abs() < 1e-14);
        let e = exp_rational(&int(-3), 128);
        assert!((e.to_f64() - (-3f64).exp()).abs() < 1e-15);
        assert!(e.width() < unit(125));
    }

    #[test]
    fn pow_interval_agrees_with_roots() {
        let base = RInterval::from_int(16).with_precision(128);
        let ex = RInterval::from_rational(&rat(3, 2), 128);
        let r = pow_interval(&base, &ex).unwrap();
        assert!(r.contains(&int(64)));
        assert!(r.width() < unit(110));
    }

    #[test]
    fn rejects_nonpositive_base() {
        assert_eq!(pow_rational(&int(0), &rat(1, 2), 32), Err(Error::NonPositiveBase));
        assert_eq!(iv_exp_log_pow(&int(1), &rat(1, 2), 32), Err(Error::NonPositiveBase));
        assert!(ln_rational(&int(-1), 32).is_err());
    }

    proptest! {
        #[test]
        fn larger_exponent_larger_power(b in 2i64..50, p in -40i64..40, d in 1i64..12) {
            let base = int(b);
            let x = pow_rational(&base, &rat(p, d), 96).unwrap();
            let y = pow_rational(&base, &rat(p + 1, d), 96).unwrap();
            prop_assert!(x.mid_rational() < y.mid_rational());
        }

        #[test]
        fn power_encloses_integer_check(b in 2i64..40, p in 1i64..20, d in 1i64..8) {
            // (b^(p/d))^d = b^p
            let x = pow_rational(&int(b), &rat(p, d), 80).unwrap();
            let target = Rational::from_integer(BigInt::from(b).pow(p as u32));
            prop_assert!(x.lo_rational().pow(d as i32) <= target);
            prop_assert!(target <= x.hi_rational().pow(d as i32));
        }

        #[test]
        fn exp_ln_roundtrip(n in 1i64..10_000, d in 1i64..1000) {
            let x = rat(n, d);
            let back = exp_interval(&ln_rational(&x, 120).unwrap());
            prop_assert!(back.contains(&x));
        }
    }
}
