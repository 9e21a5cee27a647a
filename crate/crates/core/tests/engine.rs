//! Construction, t_q recursion and certification against independent oracles.

mod common;

use std::path::Path;

use badlatt::arith::{dist_to_int, int, rat, to_f64, Rational};
use badlatt::curves::CurveModel;
use badlatt::engine::{certify_bad, tq_recursion, Construction, RemovalTable, RunConfig};
use badlatt::flows::{Coordinate, Weights};
use badlatt::Error;
use common::brute_min_q_dist;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn config(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    RunConfig::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// `t_q` straight from its definition with a running product of earlier terms.
fn tq_by_definition(r: i64, table: &RemovalTable, q_max: u32) -> (Vec<Rational>, Option<u32>) {
    let mut t: Vec<Rational> = Vec::new();
    for q in 0..=q_max {
        let h = |p: u32| Rational::from_integer(BigInt::from(table.get(p, q)));
        let mut v = int(r) - h(q);
        for j in 1..=q {
            let prod: Rational = (1..=j).map(|i| t[(q - i) as usize].clone()).product();
            v -= h(q - j) / prod;
        }
        let positive = v.is_positive();
        t.push(v);
        if !positive {
            return (t, Some(q));
        }
    }
    (t, None)
}

/// `min_{q <= horizon} q ||q x||` in exact arithmetic.
fn min_q_dist_exact(x: &Rational, horizon: u64) -> (Rational, u64) {
    (1..=horizon)
        .map(|q| {
            let qr = Rational::from_integer(q.into());
            (&qr * dist_to_int(&(&qr * x)), q)
        })
        .min_by(|a, b| a.0.cmp(&b.0))
        .unwrap()
}

/// Membership in the middle-third set by checking closed triadic cylinders to `depth`.
fn in_middle_third(x: &Rational, depth: u32) -> bool {
    (1..=depth).all(|k| {
        let scaled = x * Rational::from_integer(BigInt::from(3).pow(k));
        let f = scaled.floor().to_integer();
        let mut candidates = vec![f.clone()];
        if scaled.is_integer() {
            candidates.push(f - 1);
        }
        candidates.into_iter().any(|idx| {
            if idx.is_negative() || idx >= BigInt::from(3).pow(k) {
                return false;
            }
            let mut v = idx;
            (0..k).all(|_| {
                let ok = (&v % 3u32) != BigInt::from(1);
                v /= 3u32;
                ok
            })
        })
    })
}

#[test]
fn config_json_roundtrip_and_rejections() {
    let cfg = config("lebesgue_line.json");
    let again = RunConfig::parse(&cfg.to_json()).unwrap();
    assert_eq!(again.to_json(), cfg.to_json());
    assert!(RunConfig::parse(r#"{"weights":["1"],"R":16,"bogus":1}"#).is_err());
    assert!(RunConfig::parse("[]").is_err());
}

#[test]
fn removal_table_csv() {
    let t = RemovalTable::from_csv("p,q,h\n# comment\n0,0,3\n0,2,5\n1,2,7\n").unwrap();
    assert_eq!(t.rows(), vec![(0, 0, 3), (0, 2, 5), (1, 2, 7)]);
    assert_eq!(t.get(1, 1), 0);
    for bad in ["0,1\n", "2,1,4\n", "0,0,-1\n", "a,b,c\n", "0,99999999999,1\n"] {
        assert!(RemovalTable::from_csv(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn gap_start_fails_admissibility() {
    let err = Construction::new(config("cantor_gap.json")).err().expect("rejected");
    assert!(matches!(err, Error::PreconditionViolated(_)), "{err}");
}

#[test]
fn lebesgue_run_is_deterministic_and_certified() {
    let cfg = config("lebesgue_short.json");
    let (a, b) = (Construction::new(cfg.clone()).unwrap().run().unwrap(), Construction::new(cfg.clone()).unwrap().run().unwrap());
    assert!(a.nonempty);
    let hashes = |r: &badlatt::engine::RunReport| r.generations.iter().map(|g| g.hash.clone()).collect::<Vec<_>>();
    assert_eq!(hashes(&a), hashes(&b));
    assert_eq!(a.tq, tq_recursion(cfg.r_scale, &a.table, cfg.q_max));

    let cert = a.certificate.unwrap();
    assert!(cfg.i0.0 <= cert.point && cert.point <= cfg.i0.1);
    for w in cert.chain.windows(2) {
        assert!(w[0].lo <= w[1].lo && w[1].hi <= w[0].hi, "chain not nested");
    }
    let (want, q) = min_q_dist_exact(&cert.point, cert.horizon);
    assert_eq!(cert.bad_estimate.hi, want);
    assert_eq!(cert.bad_estimate.argmin, q);
}

#[test]
fn cantor_run_lands_in_the_support() {
    let mut cfg = config("cantor_line.json");
    cfg.q_max = 3;
    let report = Construction::new(cfg).unwrap().run().unwrap();
    assert!(report.nonempty);
    let cert = report.certificate.unwrap();
    assert!(cert.point_in_support);
    assert!(in_middle_third(&cert.point, 40), "{}", cert.point);
}

#[test]
fn certify_rational_vanishes_at_its_denominator() {
    let curve = CurveModel::veronese(1).unwrap();
    let w = Weights::uniform(1).unwrap();
    let est = certify_bad(&curve, &w, &Coordinate::Exact(rat(3, 7)), 100, 128).unwrap();
    assert!(est.hi.is_zero() && est.lo.is_zero() && est.exact);
    assert_eq!(est.argmin, 7);
}

#[test]
fn certify_surd_matches_direct_search() {
    let curve = CurveModel::veronese(1).unwrap();
    let w = Weights::uniform(1).unwrap();
    for (text, x) in [("sqrt(2)", 2f64.sqrt()), ("sqrt(3)", 3f64.sqrt()), ("golden", (1.0 + 5f64.sqrt()) / 2.0)] {
        let est = certify_bad(&curve, &w, &Coordinate::parse(text).unwrap(), 5000, 128).unwrap();
        let (want, q) = brute_min_q_dist(x, 1, 5000);
        assert!(est.lo <= est.hi);
        assert!((est.lo_f64() - want).abs() < 1e-9 && (est.hi_f64() - want).abs() < 1e-9, "{text}: {est:?} vs {want}");
        assert_eq!(est.argmin, q, "{text}");
    }
}

#[test]
fn certify_on_the_parabola_uses_the_worse_coordinate() {
    let curve = CurveModel::veronese(2).unwrap();
    let w = Weights::uniform(2).unwrap();
    let x = rat(1, 3);
    let est = certify_bad(&curve, &w, &Coordinate::Exact(x.clone()), 50, 128).unwrap();
    let oracle = (1..=50u64)
        .map(|q| {
            let qr = Rational::from_integer(q.into());
            // q^(1/2) dist is compared through squares: q dist^2.
            let d1 = dist_to_int(&(&qr * &x));
            let d2 = dist_to_int(&(&qr * &x * &x));
            let worst = d1.max(d2);
            to_f64(&(&qr * &worst * &worst)).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    assert!((est.hi_f64() - oracle).abs() < 1e-12, "{est:?} {oracle}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn recursion_matches_definition(r in 2i64..=64, q_max in 0u32..=6, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut table = RemovalTable::new();
        for q in 0..=q_max {
            for p in 0..=q {
                if rng.gen_bool(0.5) {
                    table.record(p, q, rng.gen_range(0..=(r as u64) / 2));
                }
            }
        }
        let trace = tq_recursion(r as u64, &table, q_max);
        let (t, failed) = tq_by_definition(r, &table, q_max);
        prop_assert_eq!(trace.t, t);
        prop_assert_eq!(trace.failed_at, failed);
    }
}
