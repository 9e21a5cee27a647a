//! Replays the fuzz corpus seeds and random inputs through every parser on stable.
//!
//! The checks mirror the fuzz targets: parsing never panics, and accepted input
//! survives a print-and-parse round trip.

use std::fs;
use std::path::{Path, PathBuf};

use badlatt::arith::{format_rational, parse_interval_json, parse_rational, Dyadic, Rational};
use badlatt::curves::CurveModel;
use badlatt::engine::{verify_content_hash, AuditLine, RemovalTable, RunConfig};
use badlatt::exterior::MultiVector;
use badlatt::flows::{Coordinate, Weights};
use badlatt::fractal::FractalMeasure;
use badlatt::qnd::QndExperiment;
use proptest::prelude::*;

const TARGETS: [&str; 12] = [
    "run_config",
    "qnd_experiment",
    "measure",
    "curve",
    "weights",
    "coordinate",
    "rational",
    "dyadic_hex",
    "interval",
    "multivector",
    "removal_table",
    "audit_log",
];

/// Runs one target on `data`; returns whether the input was accepted.
fn check(target: &str, data: &str) -> bool {
    match target {
        "run_config" => RunConfig::parse(data).is_ok_and(|cfg| {
            let text = cfg.to_json();
            assert_eq!(RunConfig::parse(&text).unwrap().to_json(), text);
            true
        }),
        "qnd_experiment" => QndExperiment::parse(data).is_ok_and(|e| {
            let text = e.to_json();
            assert_eq!(QndExperiment::parse(&text).unwrap().to_json(), text);
            true
        }),
        "measure" => FractalMeasure::parse(data).is_ok_and(|mu| {
            assert_eq!(FractalMeasure::parse(&serde_json::to_string(&mu).unwrap()).unwrap(), mu);
            let (lo, hi) = mu.hull();
            assert_eq!(mu.measure_interval(&lo, &hi), mu.total_mass());
            true
        }),
        "curve" => CurveModel::parse(data).is_ok_and(|c| {
            assert_eq!(CurveModel::parse(&c.to_json()).unwrap(), c);
            true
        }),
        "weights" => Weights::parse(data).is_ok_and(|w| {
            assert_eq!(Weights::parse(&w.to_text()).unwrap().as_slice(), w.as_slice());
            true
        }),
        "coordinate" => Coordinate::parse(data).is_ok_and(|c| {
            assert_eq!(Coordinate::parse(&c.to_text()).unwrap(), c);
            let e = c.enclose(64);
            assert!(e.lo() <= e.hi());
            true
        }),
        "rational" => parse_rational(data).is_ok_and(|r| {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
            true
        }),
        "dyadic_hex" => Dyadic::parse_hex(data).is_ok_and(|d| {
            assert_eq!(Dyadic::parse_hex(&d.to_hex()).unwrap().to_rational(), d.to_rational());
            true
        }),
        "interval" => parse_interval_json(data).is_ok_and(|iv| {
            assert!(iv.lo() <= iv.hi());
            assert_eq!(parse_interval_json(&serde_json::to_string(&iv).unwrap()).unwrap(), iv);
            true
        }),
        "multivector" => MultiVector::<Rational>::from_json(data).is_ok_and(|m| {
            assert_eq!(MultiVector::<Rational>::from_json(&m.to_json()).unwrap(), m);
            true
        }),
        "removal_table" => RemovalTable::from_csv(data).is_ok_and(|t| {
            let text: String = t.rows().iter().map(|(p, q, h)| format!("{p},{q},{h}\n")).collect();
            assert_eq!(RemovalTable::from_csv(&text).unwrap().rows(), t.rows());
            true
        }),
        "audit_log" => {
            let hashed = ["audit.jsonl", "certificate.json", "removals.csv"]
                .iter()
                .any(|name| verify_content_hash(name, data).unwrap_or(false));
            let lines_ok = data.lines().all(|l| serde_json::from_str::<AuditLine>(l).is_ok());
            hashed || lines_ok
        }
        other => panic!("unknown target {other}"),
    }
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus")
}

fn seeds(target: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(corpus_dir().join(target))
        .unwrap_or_else(|e| panic!("corpus for {target}: {e}"))
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn every_target_has_accepted_seeds() {
    for target in TARGETS {
        let seeds = seeds(target);
        assert!(!seeds.is_empty(), "{target} has no seeds");
        for (name, text) in &seeds {
            assert!(check(target, text), "{target}/{name} rejected");
        }
    }
}

#[test]
fn audit_seeds_carry_valid_hashes() {
    for (name, text) in seeds("audit_log") {
        let file = name.trim_start_matches("seed_").replace('_', ".");
        assert!(verify_content_hash(&file, &text).unwrap(), "{name}");
    }
}

#[test]
fn hostile_inputs_are_rejected_cheaply() {
    let cases = [
        ("curve", "veronese:18446744073709551615"),
        ("rational", "1e999999999999"),
        ("rational", "1/0"),
        ("dyadic_hex", "0x1p99999999999"),
        ("interval", r#"{"lo":"0x1p0","hi":"0x0p0","bits":64}"#),
        ("interval", r#"{"lo":"0x0","hi":"0x1","bits":4294967295}"#),
        ("multivector", r#"{"dim":1000000,"grade":500000,"coords":{}}"#),
        ("measure", r#"{"kind":"digit_cantor","base":4294967295,"digits":[0,1]}"#),
        ("coordinate", "sqrt(-1)"),
        ("weights", "1/2,1/2,0"),
    ];
    for (target, data) in cases {
        assert!(!check(target, data), "{target} accepted {data:?}");
    }
}

fn mutate(seed: &str, ops: &[(usize, u8, u8)]) -> String {
    let mut bytes = seed.as_bytes().to_vec();
    for &(pos, kind, byte) in ops {
        if bytes.is_empty() {
            bytes.push(byte);
            continue;
        }
        let i = pos % bytes.len();
        match kind % 3 {
            0 => bytes[i] = byte,
            1 => bytes.insert(i, byte),
            _ => {
                bytes.remove(i);
            }
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arbitrary_text_never_panics(target in 0usize..TARGETS.len(), data in "\\PC{0,64}") {
        check(TARGETS[target], &data);
    }

    #[test]
    fn mutated_seeds_never_panic(
        target in 0usize..TARGETS.len(),
        pick in any::<usize>(),
        ops in prop::collection::vec((any::<usize>(), any::<u8>(), 0x20u8..0x7f), 1..6),
    ) {
        let seeds = seeds(TARGETS[target]);
        let (_, seed) = &seeds[pick % seeds.len()];
        check(TARGETS[target], &mutate(seed, &ops));
    }
}
