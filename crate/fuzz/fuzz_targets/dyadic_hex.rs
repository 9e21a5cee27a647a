#![no_main]

use badlatt::arith::Dyadic;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(d) = Dyadic::parse_hex(data) {
        let again = Dyadic::parse_hex(&d.to_hex()).expect("printed hex float parses");
        assert_eq!(again.to_rational(), d.to_rational());
    }
});
