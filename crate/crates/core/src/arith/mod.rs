//! Exact rationals, outward-rounded dyadic intervals and rational powers.
//!
//! Every irrational quantity in the library is carried as an [`RInterval`] whose
//! endpoints are rounded outward after each operation, so a computed enclosure
//! always contains the true value. Undecided comparisons are retried at doubled
//! precision up to a cap.

mod dyadic;
mod interval;
mod power;
mod rational;
mod transcendental;

pub use dyadic::Dyadic;
pub use interval::{parse_interval_json, RInterval};
pub use power::{cmp_power, cmp_rational_power, RationalPower};
pub use rational::{
    abs, ceil, dist_to_int, floor, format_rational, int, parse_rational, rat, serde_bigint_vec, serde_rational,
    serde_rational_pair, serde_rational_vec, to_f64, Rational,
};
pub use transcendental::{
    exp_interval, exp_rational, iv_exp_log_pow, ln2, ln_interval, ln_rational, pow_interval,
    pow_rational, sqrt_rational,
};

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Working precision used when none is configured.
pub const DEFAULT_PRECISION: u32 = 128;
/// Smallest precision an interval carries.
pub const MIN_PRECISION: u32 = 16;
/// Default escalation ceiling.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;
/// Ceiling accepted from configuration files.
pub const HARD_PRECISION_LIMIT: u32 = 1 << 16;

/// Precision escalation: start, then double until the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub start: u32,
    pub cap: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            start: DEFAULT_PRECISION,
            cap: DEFAULT_PRECISION_CAP,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(start: u32, cap: u32) -> Self {
        let start = start.max(MIN_PRECISION);
        PrecisionPolicy {
            start,
            cap: cap.max(start),
        }
    }

    /// Precisions tried in order.
    pub fn ladder(&self) -> Vec<u32> {
        let mut out = vec![self.start];
        let mut p = self.start;
        while p < self.cap {
            p = (p * 2).min(self.cap);
            out.push(p);
        }
        out
    }

    /// Runs `f` at increasing precision until it returns `Some`.
    pub fn escalate<T>(&self, mut f: impl FnMut(u32) -> Option<T>) -> crate::Result<T> {
        for p in self.ladder() {
            if let Some(v) = f(p) {
                return Ok(v);
            }
        }
        Err(crate::Error::Indeterminate { cap: self.cap })
    }
}

/// Field operations shared by exact rationals and intervals.
pub trait Scalar: Clone + std::fmt::Debug + Send + Sync + Zero + One + 'static {
    fn from_bigint(i: &BigInt) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    /// True only for an exact zero.
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }

    fn from_i64(i: i64) -> Self {
        Self::from_bigint(&BigInt::from(i))
    }
}

impl Scalar for Rational {
    fn from_bigint(i: &BigInt) -> Self {
        Rational::from_integer(i.clone())
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
}

impl Zero for RInterval {
    fn zero() -> Self {
        RInterval::from_int(0)
    }
    fn is_zero(&self) -> bool {
        self.is_point() && self.lo().is_zero()
    }
}

impl One for RInterval {
    fn one() -> Self {
        RInterval::from_int(1)
    }
}

impl Scalar for RInterval {
    fn from_bigint(i: &BigInt) -> Self {
        RInterval::from_bigint(i)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub_ref(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn negated(&self) -> Self {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_doubles_to_cap() {
        assert_eq!(PrecisionPolicy::new(128, 1000).ladder(), vec![128, 256, 512, 1000]);
        assert_eq!(PrecisionPolicy::new(64, 64).ladder(), vec![64]);
    }

    #[test]
    fn escalation_reports_cap() {
        let p = PrecisionPolicy::new(32, 128);
        assert_eq!(p.escalate(|b| (b >= 128).then_some(b)), Ok(128));
        assert_eq!(
            p.escalate(|_| None::<()>),
            Err(crate::Error::Indeterminate { cap: 128 })
        );
    }
}
