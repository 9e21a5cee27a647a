#![no_main]

use badlatt::arith::Rational;
use badlatt::exterior::MultiVector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(m) = MultiVector::<Rational>::from_json(data) {
        assert_eq!(MultiVector::<Rational>::from_json(&m.to_json()).expect("serialized multivector parses"), m);
    }
});
