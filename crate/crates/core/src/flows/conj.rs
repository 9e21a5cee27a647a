use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{make_a, make_b, make_u, make_u1, make_z, FlowConfig};
use crate::arith::{pow_rational, to_f64, RInterval, Rational};
use crate::curves::CurveModel;
use crate::exterior::SquareMap;
use crate::error::Result;

/// Outcome of one identity over all samples.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub samples: usize,
    /// Every entrywise difference enclosure contains zero.
    pub contains_zero: bool,
    /// Largest width of an entrywise difference enclosure.
    #[serde(serialize_with = "ser_f64")]
    pub max_width: Rational,
    /// Largest magnitude bound of an entrywise difference.
    #[serde(serialize_with = "ser_f64")]
    pub max_magnitude: Rational,
    /// Samples where both sides were computed exactly and agreed.
    pub exact_matches: usize,
}

fn ser_f64<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(to_f64(r))
}

impl IdentityCheck {
    fn new(name: &'static str) -> Self {
        IdentityCheck {
            name,
            samples: 0,
            contains_zero: true,
            max_width: Rational::zero(),
            max_magnitude: Rational::zero(),
            exact_matches: 0,
        }
    }

    fn record(&mut self, lhs: &SquareMap<RInterval>, rhs: &SquareMap<RInterval>) {
        self.samples += 1;
        for (l, r) in lhs.entries().iter().zip(rhs.entries()) {
            let d = l.sub_ref(r);
            self.contains_zero &= d.contains_zero();
            let w = d.width();
            if w > self.max_width {
                self.max_width = w;
            }
            let m = d.abs_hi_rational();
            if m > self.max_magnitude {
                self.max_magnitude = m;
            }
        }
    }

    /// True when the identity held on every sample with width below `2^-bits`.
    pub fn passes(&self, bits: u32) -> bool {
        let tol = Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), bits as usize));
        self.contains_zero && self.max_width < tol
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugationReport {
    pub precision: u32,
    pub checks: Vec<IdentityCheck>,
}

impl ConjugationReport {
    pub fn passes(&self, bits: u32) -> bool {
        self.checks.iter().all(|c| c.passes(bits))
    }
}

fn random_rational(rng: &mut ChaCha8Rng, bound: i64) -> Rational {
    let d: i64 = rng.gen_range(1..=64);
    Rational::new(rng.gen_range(-bound * d..=bound * d).into(), d.into())
}

fn iv(m: &SquareMap<Rational>, prec: u32) -> SquareMap<RInterval> {
    m.to_interval(prec)
}

fn ivs(v: &[Rational], prec: u32) -> Vec<RInterval> {
    v.iter().map(|x| RInterval::from_rational(x, prec)).collect()
}

/// `R^e` enclosure used on the right-hand sides.
fn rpow(cfg: &FlowConfig, e: &Rational, prec: u32) -> RInterval {
    pow_rational(&cfg.r_rational(), e, prec).expect("R > 1")
}

/// Checks the five conjugation identities on `samples` random inputs.
///
/// Flow times are `s * beta` or `s * beta'` with random rational `s` in `[0, 2]`; the
/// right-hand sides are evaluated from closed-form exponents independently of the
/// left-hand products.
pub fn check_conjugations(
    cfg: &FlowConfig,
    curve: &CurveModel,
    samples: usize,
    seed: u64,
    prec: u32,
) -> Result<ConjugationReport> {
    let n = cfg.n();
    let w = cfg.weights.as_slice();
    let one = Rational::one();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut au = IdentityCheck::new("a u a^-1");
    let mut au1 = IdentityCheck::new("a u1 a^-1");
    let mut bu = IdentityCheck::new("b u b^-1");
    let mut bu1 = IdentityCheck::new("b u1 b^-1");
    let mut zu = IdentityCheck::new("z u(phi') z^-1");
    let (lo, hi) = curve.domain().clone();
    let span = &hi - &lo;
    for _ in 0..samples {
        let s = Rational::new(rng.gen_range(0..=128i64).into(), 64.into());
        let x: Vec<Rational> = (0..n).map(|_| random_rational(&mut rng, 10)).collect();
        let y: Vec<Rational> = (1..n).map(|_| random_rational(&mut rng, 10)).collect();
        let a = make_a(cfg, &s);
        let b = make_b(cfg, &s);
        let (am, ami) = (a.to_map(prec), a.inverse().to_map(prec));
        let (bm, bmi) = (b.to_map(prec), b.inverse().to_map(prec));
        let ux = iv(&make_u(&x), prec);
        let uy = iv(&make_u1(&y), prec);
        // e^((1 + r_i) t) = R^(s (1 + r_i) / (1 + r_1))
        let beta = cfg.beta_coeff();
        let x_a: Vec<RInterval> = x
            .iter()
            .zip(w)
            .map(|(xi, ri)| RInterval::from_rational(xi, prec).mul_ref(&rpow(cfg, &(&s * (&one + ri) * &beta), prec)))
            .collect();
        au.record(&am.mul(&ux).mul(&ami), &make_u(&x_a));
        // e^((r_j - r_1) t) = R^(s (r_j - r_1) / (1 + r_1))
        let y_a: Vec<RInterval> = y
            .iter()
            .zip(&w[1..])
            .map(|(yj, rj)| RInterval::from_rational(yj, prec).mul_ref(&rpow(cfg, &(&s * (rj - &w[0]) * &beta), prec)))
            .collect();
        au1.record(&am.mul(&uy).mul(&ami), &make_u1(&y_a));
        // e^((1 + 1/n) t') = R^s
        let rs = rpow(cfg, &s, prec);
        let rs_inv = rpow(cfg, &-&s, prec);
        let mut x_b = ivs(&x, prec);
        x_b[0] = x_b[0].mul_ref(&rs_inv);
        bu.record(&bm.mul(&ux).mul(&bmi), &make_u(&x_b));
        let y_b: Vec<RInterval> = ivs(&y, prec).iter().map(|v| v.mul_ref(&rs)).collect();
        bu1.record(&bm.mul(&uy).mul(&bmi), &make_u1(&y_b));

        let t = &lo + &span * Rational::new(rng.gen_range(0..=1024i64).into(), 1024.into());
        let z = make_z(curve, &t)?;
        let lhs = z.mul(&make_u(&curve.eval_derivative(&t)?)).mul(&z.inverse()?);
        let mut e1 = vec![Rational::zero(); n];
        e1[0] = one.clone();
        let rhs = make_u(&e1);
        if lhs == rhs {
            zu.exact_matches += 1;
        }
        zu.record(&iv(&lhs, prec), &iv(&rhs, prec));
    }
    Ok(ConjugationReport {
        precision: prec,
        checks: vec![au, au1, bu, bu1, zu],
    })
}
