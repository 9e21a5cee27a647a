use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{cmp_rational_power, dist_to_int, pow_rational, serde_rational, Dyadic, RInterval, Rational};
use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::flows::{Coordinate, Weights};

/// `min_{1 <= q <= Q} max_i q^(r_i) dist(q phi_i(x), Z)` with its minimiser.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BadEstimate {
    /// Certified lower bound.
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    /// Upper bound: the value attained at `argmin`.
    #[serde(with = "serde_rational")]
    pub hi: Rational,
    pub argmin: u64,
    /// Coordinate attaining the maximum at `argmin`.
    pub coordinate: usize,
    /// Both bounds coincide and are exact.
    pub exact: bool,
}

impl BadEstimate {
    pub fn lo_f64(&self) -> f64 {
        crate::arith::to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        crate::arith::to_f64(&self.hi)
    }
}

fn q_power(q: u64, r: &Rational, prec: u32) -> RInterval {
    let qr = Rational::from_integer(q.into());
    if r.is_integer() {
        let k = r.to_integer();
        let e: usize = k.try_into().unwrap_or(0);
        return RInterval::from_rational(&num_traits::pow(qr, e), prec);
    }
    pow_rational(&qr, r, prec).expect("q >= 1")
}

fn enclose_term(q: u64, r: &Rational, d: &Rational, prec: u32) -> RInterval {
    q_power(q, r, prec).mul_ref(&RInterval::from_rational(d, prec))
}

fn dyadic_floor(x: &Dyadic) -> BigInt {
    let e = x.exponent();
    if e >= 0 {
        x.mantissa() << e as u64
    } else {
        x.mantissa().div_floor(&(BigInt::one() << (-e) as u64))
    }
}

/// Range of `t -> dist(t, Z)` over `[lo, hi]`, exact on dyadic endpoints.
fn dist_range(lo: &Dyadic, hi: &Dyadic) -> (Dyadic, Dyadic) {
    let k = Dyadic::from_int(dyadic_floor(lo));
    let (a, b) = (lo.sub(&k), hi.sub(&k));
    let half = Dyadic::new(BigInt::one(), -1);
    let one = Dyadic::from_int(1);
    if b > one {
        // Straddling k + 1 without reaching a half-integer on either side.
        let (left, right) = (one.sub(&a), b.sub(&one));
        let hi = if a >= half && right <= half { left.max(right) } else { half };
        return (Dyadic::zero(), hi);
    }
    let d = |t: &Dyadic| t.clone().min(one.sub(t));
    let lo = d(&a).min(d(&b));
    let hi = if a <= half && half <= b { half } else { d(&a).max(d(&b)) };
    (lo, hi)
}

/// Empirical badness constant of `phi(x)` up to horizon `horizon`.
///
/// Exact for a rational `x`: the powers `q^(r_i)` are compared through integer powers.
/// For a surd `x` the returned `lo` is a certified lower bound.
pub fn certify_bad(curve: &CurveModel, weights: &Weights, x: &Coordinate, horizon: u64, prec: u32) -> Result<BadEstimate> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    if curve.n() != weights.n() {
        return Err(Error::DimensionMismatch {
            expected: weights.n(),
            found: curve.n(),
        });
    }
    let r = weights.as_slice();
    match x {
        Coordinate::Exact(x) => {
            let phi = curve.eval(x)?;
            certify_exact(&phi, r, horizon, prec)
        }
        Coordinate::Surd { .. } => {
            let phi = curve.eval_interval(&x.enclose(prec + 64))?;
            Ok(certify_enclosed(&phi, r, horizon, prec))
        }
    }
}

fn certify_exact(phi: &[Rational], r: &[Rational], horizon: u64, prec: u32) -> Result<BadEstimate> {
    // Best so far: (q, coordinate, distance).
    let mut best: Option<(u64, usize, Rational)> = None;
    for q in 1..=horizon {
        let qr = Rational::from_integer(q.into());
        let mut worst: Option<(usize, Rational)> = None;
        for (i, (p, ri)) in phi.iter().zip(r).enumerate() {
            let d = dist_to_int(&(&qr * p));
            let bigger = match &worst {
                None => true,
                Some((j, dj)) => cmp_rational_power(&qr, ri, &d, &qr, &r[*j], dj) == Ordering::Greater,
            };
            if bigger {
                worst = Some((i, d));
            }
        }
        let (i, d) = worst.expect("n >= 1");
        let smaller = match &best {
            None => true,
            Some((bq, bi, bd)) => {
                let bqr = Rational::from_integer((*bq).into());
                cmp_rational_power(&qr, &r[i], &d, &bqr, &r[*bi], bd) == Ordering::Less
            }
        };
        if smaller {
            let zero = d.is_zero();
            best = Some((q, i, d));
            if zero {
                break;
            }
        }
    }
    let (q, i, d) = best.expect("horizon >= 1");
    if r[i].is_integer() {
        let v = num_traits::pow(Rational::from_integer(q.into()), r[i].to_integer().try_into().unwrap_or(0)) * &d;
        return Ok(BadEstimate {
            lo: v.clone(),
            hi: v,
            argmin: q,
            coordinate: i,
            exact: true,
        });
    }
    let e = enclose_term(q, &r[i], &d, prec);
    Ok(BadEstimate {
        lo: e.lo_rational().max(Rational::zero()),
        hi: e.hi_rational(),
        argmin: q,
        coordinate: i,
        exact: d.is_zero(),
    })
}

fn certify_enclosed(phi: &[RInterval], r: &[Rational], horizon: u64, prec: u32) -> BadEstimate {
    let int_powers: Option<Vec<usize>> = r
        .iter()
        .map(|ri| ri.is_integer().then(|| ri.to_integer().try_into().ok()).flatten())
        .collect();
    let mut lo_min: Option<Dyadic> = None;
    let mut best: Option<(u64, usize, Dyadic)> = None;
    for q in 1..=horizon {
        let qd = Dyadic::from_int(q);
        let mut term_lo = Dyadic::zero();
        let mut term_hi: Option<(usize, Dyadic)> = None;
        for (i, (p, ri)) in phi.iter().zip(r).enumerate() {
            // Exact products keep the enclosure of q phi_i as tight as that of phi_i.
            let (dlo, dhi) = dist_range(&p.lo().mul(&qd), &p.hi().mul(&qd));
            let (flo, fhi) = match &int_powers {
                Some(k) => {
                    let f = Dyadic::from_int(num_traits::pow(BigInt::from(q), k[i]));
                    (f.clone(), f)
                }
                None => {
                    let f = q_power(q, ri, prec);
                    (f.lo().clone(), f.hi().clone())
                }
            };
            let (tlo, thi) = (flo.mul(&dlo), fhi.mul(&dhi));
            term_lo = term_lo.max(tlo);
            if term_hi.as_ref().is_none_or(|(_, h)| thi > *h) {
                term_hi = Some((i, thi));
            }
        }
        if lo_min.as_ref().is_none_or(|m| term_lo < *m) {
            lo_min = Some(term_lo);
        }
        let (i, hi) = term_hi.expect("n >= 1");
        if best.as_ref().is_none_or(|(_, _, b)| hi < *b) {
            best = Some((q, i, hi));
        }
    }
    let (q, i, hi) = best.expect("horizon >= 1");
    BadEstimate {
        lo: lo_min.expect("horizon >= 1").to_rational(),
        hi: hi.to_rational(),
        argmin: q,
        coordinate: i,
        exact: false,
    }
}
