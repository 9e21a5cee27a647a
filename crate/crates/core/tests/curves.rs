//! Polynomial curves against direct evaluation and root placement.

mod common;

use badlatt::arith::{int, rat, to_f64, RInterval, Rational};
use badlatt::curves::{CurveModel, Polynomial};
use common::random_rational;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> Polynomial {
    let deg = rng.gen_range(0..=max_deg);
    Polynomial::new((0..=deg).map(|_| random_rational(rng, 6, 4)).collect())
}

/// Powers summed term by term, independent of Horner evaluation.
fn eval_by_powers(p: &Polynomial, x: &Rational) -> Rational {
    p.coeffs().iter().enumerate().map(|(k, c)| c * num_traits::pow(x.clone(), k)).sum()
}

fn from_roots(roots: &[Rational]) -> Polynomial {
    roots
        .iter()
        .fold(Polynomial::monomial(0), |acc, r| acc.mul(&Polynomial::new(vec![-r.clone(), int(1)])))
}

#[test]
fn veronese_preset_and_json_roundtrip() {
    let c = CurveModel::parse("veronese:3").unwrap();
    assert_eq!(c.n(), 3);
    assert_eq!(c.eval(&rat(1, 2)).unwrap(), vec![rat(1, 2), rat(1, 4), rat(1, 8)]);
    assert_eq!(c.eval_derivative(&int(2)).unwrap(), vec![int(1), int(4), int(12)]);
    let back = CurveModel::parse(&c.to_json()).unwrap();
    assert_eq!(back, c);
    assert!(c.nondegenerate_check());
}

#[test]
fn malformed_and_degenerate_curves() {
    assert!(CurveModel::parse("veronese:x").is_err());
    assert!(CurveModel::parse("veronese:0").is_err());
    assert!(CurveModel::parse("veronese:18446744073709551615").is_err());
    assert!(CurveModel::parse(r#"{"n":1,"components":[["0","2"]],"domain":["0","1"]}"#).is_err());
    assert!(CurveModel::parse(r#"{"n":2,"components":[["0","1"]],"domain":["0","1"]}"#).is_err());
    assert!(CurveModel::parse(r#"{"n":1,"components":[["0","1"]],"domain":["1","0"]}"#).is_err());
    let dependent =
        CurveModel::parse(r#"{"n":2,"components":[["0","1"],["1","2"]],"domain":["0","1"]}"#).unwrap();
    assert!(!dependent.nondegenerate_check());
    assert!(dependent.require_nondegenerate().is_err());
    let c = CurveModel::veronese(2).unwrap();
    assert!(c.eval(&int(2_000_000)).is_err());
}

#[test]
fn pairing_is_the_dot_product_with_the_lifted_curve() {
    let c = CurveModel::veronese(2).unwrap();
    let v = vec![int(3), int(-1), rat(1, 2)];
    let p = c.pairing(&v).unwrap();
    for x in [int(0), rat(1, 3), int(-4)] {
        let lifted = [int(1), x.clone(), &x * &x];
        let want: Rational = lifted.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert_eq!(p.eval_rational(&x), want);
    }
    assert!(c.pairing(&v[..2]).is_err());
}

#[test]
fn root_counts_match_constructed_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let k = rng.gen_range(1..=5);
        let roots: Vec<Rational> = (0..k).map(|_| rat(rng.gen_range(-12..=12), rng.gen_range(1..=3))).collect();
        // Multiply by an irreducible quadratic so the count is not just the degree.
        let p = from_roots(&roots).mul(&Polynomial::from_i64(&[1, 0, 1])).scale(&rat(rng.gen_range(1..=5), 2));
        let a = rat(rng.gen_range(-15..=10), rng.gen_range(1..=3));
        let b = &a + rat(rng.gen_range(1..=20), rng.gen_range(1..=3));
        let mut distinct = roots.clone();
        distinct.sort();
        distinct.dedup();
        let want = distinct.iter().filter(|r| &a < *r && *r < &b).count();
        assert_eq!(p.roots_in_open(&a, &b), want, "roots {roots:?} in ({a}, {b})");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evaluation_matches_power_sums(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(&mut rng, 7);
        let x = random_rational(&mut rng, 3, 7);
        prop_assert_eq!(p.eval_rational(&x), eval_by_powers(&p, &x));
    }

    #[test]
    fn derivative_obeys_product_rule(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q) = (random_poly(&mut rng, 5), random_poly(&mut rng, 5));
        let lhs = p.mul(&q).derivative();
        let rhs = p.derivative().mul(&q).add(&p.mul(&q.derivative()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn division_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_poly(&mut rng, 8);
        let d = random_poly(&mut rng, 4);
        prop_assume!(!d.is_zero());
        let (q, r) = a.div_rem(&d).unwrap();
        prop_assert_eq!(q.mul(&d).add(&r), a);
        prop_assert!(r.is_zero() || r.degree() < d.degree());
    }

    #[test]
    fn interval_range_encloses_samples(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_poly(&mut rng, 6);
        let a = random_rational(&mut rng, 3, 5);
        let b = &a + rat(rng.gen_range(1..=16), 8);
        let iv = RInterval::from_rational_bounds(&a, &b, 96).unwrap();
        let range = p.range(&iv);
        let (lo, hi, _) = p.abs_range(&a, &b, 96);
        for k in 0..=32 {
            let x = &a + (&b - &a) * rat(k, 32);
            let v = p.eval_rational(&x);
            prop_assert!(range.contains(&v), "p({x}) = {v} outside {range}");
            prop_assert!(lo <= v.abs() && v.abs() <= hi);
        }
        prop_assert!(to_f64(&lo) >= 0.0);
    }

    #[test]
    fn wronskian_definition(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = CurveModel::veronese(n).unwrap();
        let a: Vec<Rational> = (0..=n).map(|_| random_rational(&mut rng, 4, 3)).collect();
        let b: Vec<Rational> = (0..=n).map(|_| random_rational(&mut rng, 4, 3)).collect();
        let w = c.wronskian_pair(&a, &b).unwrap();
        let (fa, fb) = (c.pairing(&a).unwrap(), c.pairing(&b).unwrap());
        let x = random_rational(&mut rng, 2, 5);
        let want = fa.eval_rational(&x) * fb.derivative().eval_rational(&x)
            - fb.eval_rational(&x) * fa.derivative().eval_rational(&x);
        prop_assert_eq!(w.eval_rational(&x), want);
    }
}
