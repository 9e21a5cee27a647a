//! Ahlfors-regular measures on the line with exact interval masses.
//!
//! Digit-restricted Cantor measures give equal mass `|D|^-k` to each allowed
//! base-`b` cylinder of depth `k`. Their distribution function at a rational point
//! is a geometric series over the eventually periodic digit expansion, so every
//! interval mass is an exact rational.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{
    floor, format_rational, ln_rational, serde_rational, serde_rational_pair, PrecisionPolicy,
    RInterval, Rational,
};
use crate::error::{Error, Result};

/// Largest digit base accepted.
pub const MAX_BASE: u32 = 64;
/// Recursion limit for support searches.
const MAX_DIGITS: usize = 1 << 16;

/// Measure family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    /// Lebesgue measure restricted to `[lo, hi]`.
    Lebesgue { lo: Rational, hi: Rational },
    /// Self-similar measure on `[0, 1]` using only the listed base-`b` digits.
    DigitCantor { base: u32, digits: Vec<u32> },
}

/// Exponent `alpha = ln count / ln base` (or 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Alpha {
    pub count: u32,
    pub base: u32,
}

impl Alpha {
    pub const ONE: Alpha = Alpha { count: 2, base: 2 };

    pub fn is_one(&self) -> bool {
        self.count == self.base
    }

    pub fn to_f64(&self) -> f64 {
        (self.count as f64).ln() / (self.base as f64).ln()
    }

    pub fn enclose(&self, prec: u32) -> RInterval {
        if self.is_one() {
            return RInterval::from_int(1);
        }
        let p = prec + 16;
        let num = ln_rational(&Rational::from_integer(self.count.into()), p).expect("count >= 2");
        let den = ln_rational(&Rational::from_integer(self.base.into()), p).expect("base >= 2");
        num.div_ref(&den).expect("ln base > 0").with_precision(prec)
    }

    /// `x^alpha` when it is rational: `alpha = 1`, `x = 0` or `x` an integer power of the base.
    pub fn power_exact(&self, x: &Rational) -> Option<Rational> {
        if x.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_one() {
            return Some(x.clone());
        }
        let b = BigInt::from(self.base);
        let k = int_log(x, &b)?;
        let c = Rational::from_integer(self.count.into());
        Some(if k >= 0 {
            num_traits::pow(c, k as usize)
        } else {
            num_traits::pow(c, (-k) as usize).recip()
        })
    }

    /// Enclosure of `x^alpha` for `x > 0`.
    pub fn power_enclose(&self, x: &Rational, prec: u32) -> RInterval {
        if let Some(e) = self.power_exact(x) {
            return RInterval::from_rational(&e, prec);
        }
        let p = prec + 16;
        let lx = ln_rational(x, p).expect("x > 0");
        crate::arith::exp_interval(&lx.mul_ref(&self.enclose(p))).with_precision(prec)
    }

    /// Exact sign of `lhs - k x^alpha`, escalating precision when `x^alpha` is irrational.
    pub fn cmp_scaled(&self, lhs: &Rational, k: &Rational, x: &Rational, policy: PrecisionPolicy) -> Result<Ordering> {
        if x.is_negative() {
            return Err(Error::DomainError("negative base for a fractional power".into()));
        }
        if let Some(e) = self.power_exact(x) {
            return Ok(lhs.cmp(&(k * e)));
        }
        policy.escalate(|prec| {
            let rhs = RInterval::from_rational(k, prec).mul_ref(&self.power_enclose(x, prec));
            rhs.cmp_rational(lhs).map(Ordering::reverse)
        })
    }
}

/// `k` with `x = b^k`, if any.
fn int_log(x: &Rational, b: &BigInt) -> Option<i64> {
    let (n, d) = (x.numer(), x.denom());
    if !x.is_positive() {
        return None;
    }
    let (big, small, sign) = if d.is_one() { (n, d, 1) } else if n.is_one() { (d, n, -1) } else { return None };
    debug_assert!(small.is_one());
    let mut k = 0i64;
    let mut v = big.clone();
    while !v.is_one() {
        let (q, r) = v.div_rem(b);
        if !r.is_zero() {
            return None;
        }
        v = q;
        k += 1;
    }
    Some(sign * k)
}

/// An Ahlfors-regular measure together with its constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractalMeasure {
    kind: MeasureKind,
    c: Rational,
    rho0: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MeasureRepr {
    Lebesgue {
        #[serde(with = "serde_rational_pair")]
        support: (Rational, Rational),
        #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
        rho0: Option<Rational>,
    },
    DigitCantor {
        base: u32,
        digits: Vec<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
        rho0: Option<Rational>,
    },
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => serde_rational::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        serde_rational::deserialize(d).map(Some)
    }
}

impl Serialize for FractalMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rho0 = Some(self.rho0.clone());
        match &self.kind {
            MeasureKind::Lebesgue { lo, hi } => MeasureRepr::Lebesgue {
                support: (lo.clone(), hi.clone()),
                rho0,
            },
            MeasureKind::DigitCantor { base, digits } => MeasureRepr::DigitCantor {
                base: *base,
                digits: digits.clone(),
                rho0,
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FractalMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MeasureRepr::deserialize(d)?;
        let (m, rho0) = match r {
            MeasureRepr::Lebesgue { support, rho0 } => (FractalMeasure::lebesgue(support.0, support.1), rho0),
            MeasureRepr::DigitCantor { base, digits, rho0 } => (FractalMeasure::digit_cantor(base, digits), rho0),
        };
        let m = m.map_err(serde::de::Error::custom)?;
        match rho0 {
            Some(r) => m.with_rho0(r).map_err(serde::de::Error::custom),
            None => Ok(m),
        }
    }
}

impl FractalMeasure {
    /// Lebesgue measure on `[lo, hi]`; its ball constant is 2 for radii up to `hi - lo`.
    pub fn lebesgue(lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let rho0 = &hi - &lo;
        Ok(FractalMeasure {
            kind: MeasureKind::Lebesgue { lo, hi },
            c: Rational::from_integer(2.into()),
            rho0,
        })
    }

    /// Cantor measure with base `b >= 3` and at least two allowed digits.
    pub fn digit_cantor(base: u32, mut digits: Vec<u32>) -> Result<Self> {
        digits.sort_unstable();
        digits.dedup();
        if !(3..=MAX_BASE).contains(&base) {
            return Err(Error::InvalidMeasure(format!("base must lie in 3..={MAX_BASE}")));
        }
        if digits.len() < 2 || digits.iter().any(|&d| d >= base) {
            return Err(Error::InvalidMeasure("need at least two distinct digits below the base".into()));
        }
        if digits.len() as u32 == base {
            return Err(Error::InvalidMeasure("all digits allowed; use lebesgue".into()));
        }
        let mut m = FractalMeasure {
            kind: MeasureKind::DigitCantor { base, digits },
            c: Rational::one(),
            rho0: Rational::one(),
        };
        m.c = m.ahlfors_bound(6);
        Ok(m)
    }

    /// The middle-third Cantor measure.
    pub fn middle_third() -> Self {
        Self::digit_cantor(3, vec![0, 2]).expect("valid digits")
    }

    pub fn with_rho0(mut self, rho0: Rational) -> Result<Self> {
        if !rho0.is_positive() || rho0 > self.rho0 {
            return Err(Error::InvalidMeasure(format!(
                "rho0 must lie in (0, {}]",
                format_rational(&self.rho0)
            )));
        }
        self.rho0 = rho0;
        Ok(self)
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn rho0(&self) -> &Rational {
        &self.rho0
    }

    pub fn alpha(&self) -> Alpha {
        match &self.kind {
            MeasureKind::Lebesgue { .. } => Alpha::ONE,
            MeasureKind::DigitCantor { base, digits } => Alpha {
                count: digits.len() as u32,
                base: *base,
            },
        }
    }

    /// Convex hull of the support.
    pub fn hull(&self) -> (Rational, Rational) {
        match &self.kind {
            MeasureKind::Lebesgue { lo, hi } => (lo.clone(), hi.clone()),
            MeasureKind::DigitCantor { base, digits } => {
                let b1 = Rational::from_integer((*base as i64 - 1).into());
                (
                    Rational::from_integer(digits[0].into()) / &b1,
                    Rational::from_integer((*digits.last().expect("nonempty")).into()) / &b1,
                )
            }
        }
    }

    pub fn total_mass(&self) -> Rational {
        match &self.kind {
            MeasureKind::Lebesgue { lo, hi } => hi - lo,
            MeasureKind::DigitCantor { .. } => Rational::one(),
        }
    }

    /// `mu((-inf, x])`.
    pub fn cdf(&self, x: &Rational) -> Rational {
        match &self.kind {
            MeasureKind::Lebesgue { lo, hi } => {
                if x <= lo {
                    Rational::zero()
                } else if x >= hi {
                    hi - lo
                } else {
                    x - lo
                }
            }
            MeasureKind::DigitCantor { base, digits } => cantor_cdf(*base, digits, x),
        }
    }

    /// Exact mass of `[a, b]`; zero when `b < a`.
    pub fn measure_interval(&self, a: &Rational, b: &Rational) -> Rational {
        if b < a {
            return Rational::zero();
        }
        self.cdf(b) - self.cdf(a)
    }

    /// Mass of the closed ball `[x - r, x + r]`.
    pub fn measure_ball(&self, x: &Rational, r: &Rational) -> Rational {
        self.measure_interval(&(x - r), &(x + r))
    }

    /// True when `x` lies in the support.
    pub fn contains_point(&self, x: &Rational) -> bool {
        match &self.kind {
            MeasureKind::Lebesgue { lo, hi } => lo <= x && x <= hi,
            MeasureKind::DigitCantor { base, digits } => cantor_contains(*base, digits, x),
        }
    }

    /// True when `[a, b]` meets the support.
    pub fn supp_intersects(&self, a: &Rational, b: &Rational) -> bool {
        if b < a {
            return false;
        }
        self.measure_interval(a, b).is_positive() || self.contains_point(a) || self.contains_point(b)
    }

    /// Least support point `>= a`, if any.
    pub fn least_support_at_or_above(&self, a: &Rational) -> Result<Option<Rational>> {
        match &self.kind {
            MeasureKind::Lebesgue { lo, hi } => Ok(if a > hi {
                None
            } else {
                Some(a.max(lo).clone())
            }),
            MeasureKind::DigitCantor { base, digits } => {
                if self.contains_point(a) {
                    return Ok(Some(a.clone()));
                }
                if a.is_negative() {
                    return Ok(Some(self.hull().0));
                }
                if *a > Rational::one() {
                    return Ok(None);
                }
                cantor_least_above(*base, digits, a, 0)
            }
        }
    }

    /// Allowed cells at the given depth that meet `[a, b]` in positive mass, with that mass.
    ///
    /// Cantor cells are digit cylinders; Lebesgue cells split the support into `2^depth` parts.
    pub fn cells(&self, a: &Rational, b: &Rational, depth: u32) -> Vec<(Rational, Rational, Rational)> {
        let mut out = Vec::new();
        match &self.kind {
            MeasureKind::Lebesgue { lo, hi } => {
                let n = 1u64 << depth.min(40);
                let w = (hi - lo) / Rational::from_integer(n.into());
                let lo_idx = floor(&((a.max(lo) - lo) / &w)).to_u64().unwrap_or(0);
                for k in lo_idx..n {
                    let l = lo + &w * Rational::from_integer(k.into());
                    if &l >= b {
                        break;
                    }
                    let r = &l + &w;
                    let m = self.measure_interval(a.max(&l), b.min(&r));
                    if m.is_positive() {
                        out.push((l, r, m));
                    }
                }
            }
            MeasureKind::DigitCantor { base, digits } => {
                let bb = Rational::from_integer((*base).into());
                fn walk(
                    mu: &FractalMeasure,
                    base: &Rational,
                    digits: &[u32],
                    left: Rational,
                    width: Rational,
                    left_depth: u32,
                    a: &Rational,
                    b: &Rational,
                    out: &mut Vec<(Rational, Rational, Rational)>,
                ) {
                    let right = &left + &width;
                    if &right <= a || &left >= b {
                        return;
                    }
                    if left_depth == 0 {
                        let m = mu.measure_interval(a.max(&left), b.min(&right));
                        if m.is_positive() {
                            out.push((left, right, m));
                        }
                        return;
                    }
                    let w = &width / base;
                    for &d in digits {
                        let l = &left + &w * Rational::from_integer(d.into());
                        walk(mu, base, digits, l, w.clone(), left_depth - 1, a, b, out);
                    }
                }
                walk(self, &bb, digits, Rational::zero(), Rational::one(), depth, a, b, &mut out);
            }
        }
        out
    }

    /// Rigorous Ahlfors constant valid for radii up to `rho0`.
    ///
    /// The upper constant counts allowed depth-`j` cells under a window of `2 b^j + 1`
    /// cells; the lower constant is `|D|`, from the cylinder containing the centre.
    fn ahlfors_bound(&self, j: u32) -> Rational {
        let MeasureKind::DigitCantor { base, digits } = &self.kind else {
            return Rational::from_integer(2.into());
        };
        let (b, d) = (*base as usize, digits.len());
        let mut upper: Option<Rational> = None;
        for level in 1..=j {
            let len = b.pow(level);
            if len > 1 << 20 {
                break;
            }
            // Allowed pattern of depth-`level` cells, repeated periodically.
            let pattern: Vec<bool> = (0..len)
                .map(|idx| {
                    let mut v = idx;
                    (0..level).all(|_| {
                        let ok = digits.contains(&((v % b) as u32));
                        v /= b;
                        ok
                    })
                })
                .collect();
            let window = 2 * len + 1;
            let prefix: Vec<usize> = std::iter::once(0)
                .chain((0..len + window).scan(0, |s, i| {
                    *s += pattern[i % len] as usize;
                    Some(*s)
                }))
                .collect();
            let max_count = (0..len).map(|s| prefix[s + window] - prefix[s]).max().unwrap_or(0);
            // ratio <= count |D|^-(k + level) / |D|^-(k + 1)
            let bound = Rational::new(
                (max_count as u64).into(),
                num_traits::pow(BigInt::from(d), (level - 1) as usize),
            );
            if upper.as_ref().is_none_or(|u| &bound < u) {
                upper = Some(bound);
            }
        }
        upper.expect("at least one level").max(Rational::from_integer(d.into()))
    }

    /// Largest `mu(B(x, 3r)) / mu(B(x, r))` over the samples, and whether it stays within `C^2 3^alpha`.
    pub fn federer_ratio_bound(&self, samples: &[(Rational, Rational)], policy: PrecisionPolicy) -> Result<FedererReport> {
        let three = Rational::from_integer(3.into());
        let mut max_ratio = Rational::zero();
        for (x, r) in samples {
            if !self.contains_point(x) {
                return Err(Error::PreconditionViolated("federer centre outside the support".into()));
            }
            if !r.is_positive() || &three * r > self.rho0 {
                return Err(Error::PreconditionViolated("federer radius must lie in (0, rho0/3]".into()));
            }
            let small = self.measure_ball(x, r);
            let big = self.measure_ball(x, &(&three * r));
            let ratio = big / small;
            if ratio > max_ratio {
                max_ratio = ratio;
            }
        }
        let c2 = &self.c * &self.c;
        let within = self.alpha().cmp_scaled(&max_ratio, &c2, &three, policy)? != Ordering::Greater;
        Ok(FedererReport {
            max_ratio,
            c_squared: c2,
            within_bound: within,
        })
    }

    /// `mu(B ∩ B(y, eps)) / mu(B)` for each `eps`, each checked against `C^2 (2 eps / r_B)^alpha`.
    pub fn decay_profile(
        &self,
        center: &Rational,
        radius: &Rational,
        y: &Rational,
        eps_grid: &[Rational],
        policy: PrecisionPolicy,
    ) -> Result<Vec<DecayRow>> {
        if !self.contains_point(center) || !radius.is_positive() {
            return Err(Error::PreconditionViolated("ball must be centred in the support".into()));
        }
        let (lo, hi) = (center - radius, center + radius);
        let total = self.measure_interval(&lo, &hi);
        let c2 = &self.c * &self.c;
        eps_grid
            .iter()
            .map(|eps| {
                if !eps.is_positive() {
                    return Err(Error::PreconditionViolated("eps must be positive".into()));
                }
                let a = (y - eps).max(lo.clone());
                let b = (y + eps).min(hi.clone());
                let ratio = self.measure_interval(&a, &b) / &total;
                let x = Rational::from_integer(2.into()) * eps / radius;
                let ok = self.alpha().cmp_scaled(&ratio, &c2, &x, policy)? != Ordering::Greater;
                Ok(DecayRow {
                    eps: eps.clone(),
                    ratio,
                    within_bound: ok,
                })
            })
            .collect()
    }

    /// Checks both Ahlfors inequalities at the ball `B(x, r)`.
    pub fn ahlfors_holds_at(&self, x: &Rational, r: &Rational, policy: PrecisionPolicy) -> Result<bool> {
        let m = self.measure_ball(x, r);
        let alpha = self.alpha();
        let upper = alpha.cmp_scaled(&m, &self.c, r, policy)? != Ordering::Greater;
        let lower = alpha.cmp_scaled(&m, &self.c.recip(), r, policy)? != Ordering::Less;
        Ok(upper && lower)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            MeasureKind::Lebesgue { lo, hi } => format!("lebesgue[{},{}]", format_rational(lo), format_rational(hi)),
            MeasureKind::DigitCantor { base, digits } => format!("cantor(base {base}, digits {digits:?})"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FedererReport {
    #[serde(with = "serde_rational")]
    pub max_ratio: Rational,
    #[serde(with = "serde_rational")]
    pub c_squared: Rational,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    #[serde(with = "serde_rational")]
    pub ratio: Rational,
    pub within_bound: bool,
}

/// One digit step of a base-`b` expansion: returns `(digit, remainder)`.
fn digit_step(r: &Rational, b: &Rational, lower: bool) -> (u32, Rational) {
    let s = r * b;
    let mut d = floor(&s);
    if lower {
        // Non-terminating expansion: remainders stay in (0, 1].
        let f = Rational::from_integer(d.clone());
        if f == s {
            d -= 1;
        }
    }
    let rem = &s - Rational::from_integer(d.clone());
    (d.to_u32().expect("digit below base"), rem)
}

fn cantor_cdf(base: u32, digits: &[u32], x: &Rational) -> Rational {
    if !x.is_positive() {
        return Rational::zero();
    }
    if *x >= Rational::one() {
        return Rational::one();
    }
    let b = Rational::from_integer(base.into());
    let inv_d = Rational::new(1.into(), (digits.len() as i64).into());
    let mut seen: HashMap<Rational, (Rational, Rational)> = HashMap::new();
    let (mut r, mut sum, mut w) = (x.clone(), Rational::zero(), Rational::one());
    loop {
        if r.is_zero() {
            return sum;
        }
        if let Some((s0, w0)) = seen.get(&r) {
            // Tail from here repeats the cycle with weight ratio w / w0.
            let cycle = &sum - s0;
            let q = &w / w0;
            return s0 + cycle / (Rational::one() - q);
        }
        seen.insert(r.clone(), (sum.clone(), w.clone()));
        let (j, rem) = digit_step(&r, &b, false);
        let below = digits.iter().filter(|&&d| d < j).count() as i64;
        w *= &inv_d;
        sum += &w * Rational::from_integer(below.into());
        if !digits.contains(&j) {
            return sum;
        }
        r = rem;
    }
}

fn expansion_allowed(base: u32, digits: &[u32], x: &Rational, lower: bool) -> bool {
    let b = Rational::from_integer(base.into());
    let mut seen = std::collections::HashSet::new();
    let mut r = x.clone();
    loop {
        if !lower && r.is_zero() {
            return digits.contains(&0);
        }
        if !seen.insert(r.clone()) {
            return true;
        }
        let (j, rem) = digit_step(&r, &b, lower);
        if !digits.contains(&j) {
            return false;
        }
        r = rem;
    }
}

fn cantor_contains(base: u32, digits: &[u32], x: &Rational) -> bool {
    if x.is_negative() || *x > Rational::one() {
        return false;
    }
    if x.is_zero() {
        return digits.contains(&0);
    }
    if *x == Rational::one() {
        return digits.contains(&(base - 1));
    }
    expansion_allowed(base, digits, x, false) || expansion_allowed(base, digits, x, true)
}

/// Least support point in `[a, 1]` for `0 <= a <= 1`, `a` outside the support.
fn cantor_least_above(base: u32, digits: &[u32], a: &Rational, depth: usize) -> Result<Option<Rational>> {
    if depth > MAX_DIGITS {
        return Err(Error::Overflow("support search too deep".into()));
    }
    let b = Rational::from_integer(base.into());
    let min_k = Rational::from_integer(digits[0].into()) / Rational::from_integer((base - 1).into());
    for &j in digits {
        let lo = Rational::from_integer(j.into()) / &b;
        let hi = Rational::from_integer((j + 1).into()) / &b;
        if hi < *a {
            continue;
        }
        if lo >= *a {
            return Ok(Some(lo + &min_k / &b));
        }
        let inner = a * &b - Rational::from_integer(j.into());
        let sub = if cantor_contains(base, digits, &inner) {
            Some(inner)
        } else {
            cantor_least_above(base, digits, &inner, depth + 1)?
        };
        if let Some(s) = sub {
            return Ok(Some(lo + s / &b));
        }
    }
    Ok(None)
}
