use num_bigint::BigInt;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use super::{make_a_time, make_u, Weights};
use crate::arith::{format_rational, parse_rational, sqrt_rational, to_f64, PrecisionPolicy, RInterval, Rational};
use crate::exterior::shortest_vector_interval;
use crate::error::{Error, Result};

/// A real coordinate given exactly or as `a + b sqrt(d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coordinate {
    Exact(Rational),
    Surd { a: Rational, b: Rational, d: Rational },
}

impl Coordinate {
    /// The golden ratio `(1 + sqrt 5) / 2`.
    pub fn golden() -> Self {
        let half = Rational::new(1.into(), 2.into());
        Coordinate::Surd {
            a: half.clone(),
            b: half,
            d: Rational::from_integer(5.into()),
        }
    }

    /// Accepts `p/q`, a decimal, `golden`, `sqrt(d)` or the printed form `a+b*sqrt(d)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "golden" {
            return Ok(Self::golden());
        }
        if let Some((prefix, inner)) = s.strip_suffix(')').and_then(|r| r.split_once("sqrt(")) {
            let d = parse_rational(inner)?;
            if d.is_negative() {
                return Err(Error::Parse("sqrt of a negative number".into()));
            }
            let (a, b) = if prefix.is_empty() {
                (Rational::from_integer(0.into()), Rational::one())
            } else {
                let sum = prefix
                    .strip_suffix('*')
                    .ok_or_else(|| Error::Parse(format!("invalid surd {s:?}")))?;
                // The coefficient of the root follows the last '+'.
                let (a, b) = sum
                    .rsplit_once('+')
                    .filter(|(a, _)| !a.is_empty())
                    .ok_or_else(|| Error::Parse(format!("invalid surd {s:?}")))?;
                (parse_rational(a)?, parse_rational(b)?)
            };
            return Ok(Coordinate::Surd { a, b, d });
        }
        Ok(Coordinate::Exact(parse_rational(s)?))
    }

    pub fn enclose(&self, prec: u32) -> RInterval {
        match self {
            Coordinate::Exact(r) => RInterval::from_rational(r, prec),
            Coordinate::Surd { a, b, d } => {
                let root = sqrt_rational(d, prec + 8).expect("non-negative radicand");
                RInterval::from_rational(a, prec + 8)
                    .add_ref(&RInterval::from_rational(b, prec + 8).mul_ref(&root))
                    .with_precision(prec)
            }
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Coordinate::Exact(r) => format_rational(r),
            Coordinate::Surd { a, b, d } => format!(
                "{}+{}*sqrt({})",
                format_rational(a),
                format_rational(b),
                format_rational(d)
            ),
        }
    }
}

/// Shortest-vector enclosure of `a(t) u(x) Z^(n+1)` at one time.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitSample {
    #[serde(with = "crate::arith::serde_rational")]
    pub t: Rational,
    /// Bounds on the squared shortest length; absent when undecided at the cap.
    pub norm2_lo: Option<f64>,
    pub norm2_hi: Option<f64>,
    #[serde(skip)]
    pub norm2: Option<RInterval>,
    #[serde(with = "crate::arith::serde_bigint_vec")]
    pub witness: Vec<BigInt>,
    pub precision: u32,
}

/// Samples the shortest vector along the diagonal orbit of `point` at each time in `t_grid`.
///
/// Undecided samples are reported with empty bounds rather than failing the run.
pub fn orbit_trajectory(
    weights: &Weights,
    point: &[Coordinate],
    t_grid: &[Rational],
    policy: PrecisionPolicy,
) -> Result<Vec<OrbitSample>> {
    if point.len() != weights.n() {
        return Err(Error::DimensionMismatch {
            expected: weights.n(),
            found: point.len(),
        });
    }
    if t_grid.iter().any(Signed::is_negative) {
        return Err(Error::PreconditionViolated("orbit times must be non-negative".into()));
    }
    Ok(t_grid
        .par_iter()
        .map(|t| {
            let a = make_a_time(weights, t);
            let found = policy.escalate(|prec| {
                let x: Vec<RInterval> = point.iter().map(|c| c.enclose(prec)).collect();
                let m = make_u(&x).scale_rows(&a.enclose(prec));
                shortest_vector_interval(&m).ok().map(|sv| (sv, prec))
            });
            match found {
                Ok((sv, prec)) => OrbitSample {
                    t: t.clone(),
                    norm2_lo: Some(to_f64(&sv.norm2.lo_rational())),
                    norm2_hi: Some(to_f64(&sv.norm2.hi_rational())),
                    norm2: Some(sv.norm2),
                    witness: sv.coeffs,
                    precision: prec,
                },
                Err(_) => OrbitSample {
                    t: t.clone(),
                    norm2_lo: None,
                    norm2_hi: None,
                    norm2: None,
                    witness: Vec::new(),
                    precision: policy.cap,
                },
            }
        })
        .collect())
}

/// Smallest certified lower bound over the decided samples, and the number undecided.
pub fn orbit_floor(samples: &[OrbitSample]) -> (Option<Rational>, usize) {
    let floor = samples
        .iter()
        .filter_map(|s| s.norm2.as_ref().map(RInterval::lo_rational))
        .min();
    (floor, samples.iter().filter(|s| s.norm2.is_none()).count())
}

/// `count + 1` evenly spaced times from `0` to `end`.
pub fn time_grid(end: &Rational, count: u32) -> Vec<Rational> {
    let c = Rational::from_integer(count.max(1).into());
    (0..=count.max(1)).map(|k| end * Rational::from_integer(k.into()) / &c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn uni() -> Weights {
        Weights::uniform(1).unwrap()
    }

    #[test]
    fn rational_point_orbit_collapses() {
        let s = orbit_trajectory(&uni(), &[Coordinate::Exact(rat(1, 2))], &[int(0), int(10)], PrecisionPolicy::default()).unwrap();
        // (−1, 2) maps to (0, 2 e^−10).
        let hi = s[1].norm2.as_ref().unwrap().hi_rational();
        assert!(hi < rat(1, 10_000_000));
        assert_eq!(s[0].norm2.as_ref().unwrap().lo_rational(), int(1));
    }

    #[test]
    fn golden_orbit_stays_bounded() {
        let s = orbit_trajectory(&uni(), &[Coordinate::golden()], &time_grid(&int(8), 16), PrecisionPolicy::default()).unwrap();
        let (floor, undecided) = orbit_floor(&s);
        assert_eq!(undecided, 0);
        assert!(floor.unwrap() >= rat(1, 2));
    }

    #[test]
    fn zero_point_decays_like_second_basis_vector() {
        // Shortest vector is e_2 with squared length e^(−2t).
        let s = orbit_trajectory(&uni(), &[Coordinate::Exact(int(0))], &[int(3)], PrecisionPolicy::default()).unwrap();
        let e = crate::arith::exp_rational(&int(-6), 128);
        assert!(s[0].norm2.as_ref().unwrap().intersect(&e).is_some());
    }

    #[test]
    fn coordinate_parsing() {
        assert_eq!(Coordinate::parse("golden").unwrap(), Coordinate::golden());
        assert_eq!(Coordinate::parse("3/4").unwrap(), Coordinate::Exact(rat(3, 4)));
        let r2 = Coordinate::parse("sqrt(2)").unwrap().enclose(64);
        assert!(r2.lo_rational() > rat(14142, 10000) && r2.hi_rational() < rat(14143, 10000));
        assert!(Coordinate::parse("sqrt(-2)").is_err());
        let g = Coordinate::golden();
        assert_eq!(Coordinate::parse(&g.to_text()).unwrap(), g);
        assert!(Coordinate::parse("1+sqrt(5)").is_err());
        assert!(Coordinate::parse("+2*sqrt(5)").is_err());
    }
}
