use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, ln_rational, PrecisionPolicy, RInterval, Rational};
use crate::error::{Error, Result};

/// Removal rates `h_{p,q}` for `0 <= p <= q`.
pub trait RemovalRates {
    fn rate(&self, p: u32, q: u32) -> BigUint;
}

/// Sparse table of measured per-ancestor maxima; missing entries are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalTable {
    entries: BTreeMap<(u32, u32), u64>,
}

impl RemovalTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Raises `h_{p,q}` to at least `count`.
    pub fn record(&mut self, p: u32, q: u32, count: u64) {
        assert!(p <= q, "removal family p must not exceed q");
        let e = self.entries.entry((p, q)).or_default();
        *e = (*e).max(count);
    }

    pub fn get(&self, p: u32, q: u32) -> u64 {
        self.entries.get(&(p, q)).copied().unwrap_or(0)
    }

    /// Nonzero entries as `(p, q, h)` sorted by `(p, q)`.
    pub fn rows(&self) -> Vec<(u32, u32, u64)> {
        self.entries.iter().map(|(&(p, q), &h)| (p, q, h)).collect()
    }

    /// Reads `p,q,h` lines (a header line and `#` comments are skipped).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut t = RemovalTable::new();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.get(0) == Some("p") {
                continue;
            }
            if rec.len() != 3 {
                return Err(Error::Parse("expected p,q,h".into()));
            }
            let num = |i: usize| -> Result<u64> {
                rec[i]
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("invalid integer {:?}", &rec[i])))
            };
            let (p, q, h) = (num(0)?, num(1)?, num(2)?);
            let (p, q) = (
                u32::try_from(p).map_err(|_| Error::Parse("p too large".into()))?,
                u32::try_from(q).map_err(|_| Error::Parse("q too large".into()))?,
            );
            if p > q {
                return Err(Error::Parse(format!("p = {p} exceeds q = {q}")));
            }
            t.record(p, q, h);
        }
        Ok(t)
    }
}

impl RemovalRates for RemovalTable {
    fn rate(&self, p: u32, q: u32) -> BigUint {
        BigUint::from(self.get(p, q))
    }
}

/// The sequence `t_q` with its first non-positive index, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TqTrace {
    #[serde(with = "crate::arith::serde_rational_vec")]
    pub t: Vec<Rational>,
    /// First `q` with `t_q <= 0`; later terms are not defined.
    pub failed_at: Option<u32>,
}

impl TqTrace {
    /// Every computed `t_q` is positive.
    pub fn nonempty(&self) -> bool {
        self.failed_at.is_none()
    }
}

/// `t_0 = R - h_{0,0}` and `t_q = R - h_{q,q} - sum_{j=1..q} h_{q-j,q} / prod_{i=1..j} t_{q-i}`.
///
/// Evaluated through the integer products `P_q = t_0 ... t_q`, which satisfy
/// `P_q = (R - h_{q,q}) P_{q-1} - sum_j h_{q-j,q} P_{q-j-1}` with `P_{-1} = 1`, so the
/// rationals never need a common denominator beyond `P_{q-1}`.
pub fn tq_recursion(r: u64, h: &dyn RemovalRates, q_max: u32) -> TqTrace {
    let r = BigInt::from(r);
    // prods[k] = P_{k-1}.
    let mut prods: Vec<BigInt> = vec![BigInt::one()];
    let mut t = Vec::new();
    for q in 0..=q_max {
        let qi = q as usize;
        let mut next = (&r - BigInt::from(h.rate(q, q))) * &prods[qi];
        for j in 1..=qi {
            let rate = h.rate(q - j as u32, q);
            if !rate.is_zero() {
                next -= BigInt::from(rate) * &prods[qi - j];
            }
        }
        let tq = Rational::new(next.clone(), prods[qi].clone());
        let positive = next.is_positive();
        t.push(tq);
        if !positive {
            return TqTrace {
                t,
                failed_at: Some(q),
            };
        }
        prods.push(next);
    }
    TqTrace { t, failed_at: None }
}

/// Working precision of the smallness conditions.
const CONDITION_PRECISION: u32 = 128;

/// Rates of the large-`R` induction: `h_{q,q} = R - ceil((4C)^-2 R^alpha)` and
/// `h_{p,q} = ceil(C3 R^(alpha (1 - eta) (q + 1 - p)))` for `p < q`, with
/// `alpha = ln count / ln base`.
#[derive(Clone, Debug)]
pub struct InductionPreset {
    pub r: u64,
    pub c: Rational,
    pub alpha_count: u32,
    pub alpha_base: u32,
    pub c3: Rational,
    pub eta: Rational,
    diag: BigUint,
    /// `off[k] = h_{p,q}` for `q - p = k`.
    off: Vec<BigUint>,
    /// Enclosure of `R^alpha`.
    r_alpha: RInterval,
}

/// Smallness conditions of the induction, decided from enclosures.
#[derive(Clone, Debug, Serialize)]
pub struct PresetConditions {
    /// `R^alpha >= 21 C^2`.
    pub large_r: bool,
    /// `C3 R^(-eta alpha) <= (4C)^-2 / 2`.
    pub small_c3: bool,
    /// `sum_{j>=1} ((6C)^2 / R^(eta alpha))^j <= 1`.
    pub geometric_sum: bool,
}

fn ceil_enclosure(x: &RInterval) -> Option<BigUint> {
    let lo = crate::arith::ceil(&x.lo_rational());
    let hi = crate::arith::ceil(&x.hi_rational());
    // ceil is exact when lo and hi share it and lo is not an integer below hi.
    (lo == hi && !x.lo_rational().is_integer()).then(|| lo.to_biguint()).flatten()
}

impl InductionPreset {
    /// Builds the table for `q <= q_max`, raising precision until every ceiling is exact.
    pub fn new(
        r: u64,
        c: Rational,
        alpha: (u32, u32),
        c3: Rational,
        eta: Rational,
        q_max: u32,
        policy: PrecisionPolicy,
    ) -> Result<Self> {
        if r < 2 || !c.is_positive() || !c3.is_positive() || !eta.is_positive() || eta >= Rational::one() {
            return Err(Error::InvalidConfig("need R >= 2, C > 0, C3 > 0 and 0 < eta < 1".into()));
        }
        let (count, base) = alpha;
        if count < 2 || base < count {
            return Err(Error::InvalidConfig("alpha must be ln a / ln b with 2 <= a <= b".into()));
        }
        let rr = Rational::from_integer(r.into());
        // The largest ceiling has about (1 - eta)(q_max + 2) log2 R bits (alpha <= 1).
        let one_minus = crate::arith::to_f64(&(Rational::one() - &eta));
        let needed = 64 + (one_minus * (q_max as f64 + 2.0) * (r as f64).log2()).ceil() as u32;
        let start = PrecisionPolicy::new(policy.start.max(needed), policy.cap.max(needed * 2));
        start.escalate(|prec| {
            let p = prec + 32;
            let alpha = ln_rational(&Rational::from_integer(count.into()), p)
                .ok()?
                .div_ref(&ln_rational(&Rational::from_integer(base.into()), p).ok()?)
                .ok()?;
            let ln_r = ln_rational(&rr, p).ok()?;
            let r_alpha = crate::arith::exp_interval(&alpha.mul_ref(&ln_r));
            let sixteen_c2 = Rational::from_integer(16.into()) * &c * &c;
            let diag_sub = ceil_enclosure(&r_alpha.div_ref(&RInterval::from_rational(&sixteen_c2, p)).ok()?)?;
            let diag = BigUint::from(r).checked_sub(&diag_sub)?;
            let one_minus_eta = Rational::one() - &eta;
            let step = crate::arith::exp_interval(
                &alpha
                    .mul_ref(&ln_r)
                    .mul_ref(&RInterval::from_rational(&one_minus_eta, p)),
            );
            let c3i = RInterval::from_rational(&c3, p);
            let mut off = Vec::with_capacity(q_max as usize + 1);
            // k = q - p >= 1; the exponent is alpha (1 - eta)(k + 1).
            let mut power = step.clone();
            off.push(BigUint::zero());
            for _ in 1..=q_max {
                power = power.mul_ref(&step);
                off.push(ceil_enclosure(&c3i.mul_ref(&power))?);
            }
            Some(InductionPreset {
                r,
                c: c.clone(),
                alpha_count: count,
                alpha_base: base,
                c3: c3.clone(),
                eta: eta.clone(),
                diag,
                off,
                r_alpha: r_alpha.with_precision(prec),
            })
        })
    }

    /// The desk-scale instance: `C = 1`, `alpha = ln 2 / ln 3`, `R = 2^16`, `C3 = 1`, `eta = 2/3`.
    pub fn desk(q_max: u32) -> Result<Self> {
        Self::new(
            1 << 16,
            Rational::one(),
            (2, 3),
            Rational::one(),
            Rational::new(2.into(), 3.into()),
            q_max,
            PrecisionPolicy::default(),
        )
    }

    pub fn r_alpha(&self) -> &RInterval {
        &self.r_alpha
    }

    /// Decides the three smallness conditions.
    pub fn conditions(&self) -> Result<PresetConditions> {
        // The conditions have slack far above 2^-100; table precision would only cost time.
        let prec = CONDITION_PRECISION.min(self.r_alpha.precision());
        let r_alpha = self.r_alpha.with_precision(prec);
        let c2 = &self.c * &self.c;
        let large_r = r_alpha
            .cmp_rational(&(Rational::from_integer(21.into()) * &c2))
            .ok_or(Error::Indeterminate { cap: prec })?
            .is_ge();
        // R^(eta alpha) = exp(eta ln R^alpha).
        let eta_pow = crate::arith::exp_interval(
            &crate::arith::ln_interval(&r_alpha)?.mul_ref(&RInterval::from_rational(&self.eta, prec)),
        );
        let lhs = RInterval::from_rational(&self.c3, prec).div_ref(&eta_pow)?;
        let bound = (Rational::from_integer(32.into()) * &c2).recip();
        let small_c3 = lhs.cmp_rational(&bound).ok_or(Error::Indeterminate { cap: prec })?.is_le();
        // Ratio rho = 36 C^2 / R^(eta alpha); the sum rho / (1 - rho) <= 1 iff rho <= 1/2.
        let rho = RInterval::from_rational(&(Rational::from_integer(36.into()) * &c2), prec).div_ref(&eta_pow)?;
        let geometric_sum = rho
            .cmp_rational(&Rational::new(1.into(), 2.into()))
            .ok_or(Error::Indeterminate { cap: prec })?
            .is_le();
        Ok(PresetConditions {
            large_r,
            small_c3,
            geometric_sum,
        })
    }

    /// First `q` (if any) where `t_q < R^alpha / (36 C^2)` fails to be certified.
    pub fn first_below_floor(&self, trace: &TqTrace) -> Option<u32> {
        let floor = self
            .r_alpha
            .div_ref(&RInterval::from_rational(
                &(Rational::from_integer(36.into()) * &self.c * &self.c),
                self.r_alpha.precision(),
            ))
            .expect("nonzero");
        let hi = floor.hi_rational();
        trace
            .t
            .iter()
            .position(|t| *t < hi)
            .map(|q| q as u32)
            .or(trace.failed_at)
    }

    pub fn describe(&self) -> String {
        format!(
            "R={} C={} alpha=ln{}/ln{} C3={} eta={} R^alpha~{:.3}",
            self.r,
            format_rational(&self.c),
            self.alpha_count,
            self.alpha_base,
            format_rational(&self.c3),
            format_rational(&self.eta),
            self.r_alpha.to_f64()
        )
    }

    pub fn diag_rate(&self) -> &BigUint {
        &self.diag
    }

    /// `log2` of the largest off-diagonal rate.
    pub fn max_rate_bits(&self) -> u64 {
        self.off.last().map_or(0, BigUint::bits)
    }
}

impl RemovalRates for InductionPreset {
    fn rate(&self, p: u32, q: u32) -> BigUint {
        if p == q {
            return self.diag.clone();
        }
        self.off.get((q - p) as usize).cloned().unwrap_or_default()
    }
}

/// `t_q` values as `f64` for display.
pub fn tq_f64(trace: &TqTrace) -> Vec<f64> {
    trace
        .t
        .iter()
        .map(|t| {
            let (n, d) = (t.numer(), t.denom());
            let shift = n.bits().max(d.bits()).saturating_sub(60);
            let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    #[test]
    fn zero_rates_give_constant_r() {
        let tr = tq_recursion(10, &RemovalTable::new(), 20);
        assert!(tr.nonempty());
        assert!(tr.t.iter().all(|t| *t == int(10)));
    }

    #[test]
    fn hand_computed_second_term() {
        let mut h = RemovalTable::new();
        h.record(0, 0, 5);
        h.record(1, 1, 2);
        h.record(0, 1, 10);
        let tr = tq_recursion(10, &h, 1);
        assert_eq!(tr.t, vec![int(5), int(6)]);
    }

    #[test]
    fn failure_is_reported_at_first_nonpositive() {
        let mut h = RemovalTable::new();
        h.record(0, 0, 9);
        h.record(0, 1, 10);
        let tr = tq_recursion(10, &h, 5);
        assert_eq!(tr.failed_at, Some(1));
        assert_eq!(tr.t.len(), 2);
    }

    #[test]
    fn csv_roundtrip_and_rejects() {
        let t = RemovalTable::from_csv("p,q,h\n0,0,5\n# note\n0,1,10\n").unwrap();
        assert_eq!(t.get(0, 1), 10);
        assert!(RemovalTable::from_csv("2,1,3\n").is_err());
        assert!(RemovalTable::from_csv("a,b\n").is_err());
    }
}
