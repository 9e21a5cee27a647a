#![no_main]

use badlatt::curves::CurveModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(c) = CurveModel::parse(data) {
        assert_eq!(CurveModel::parse(&c.to_json()).expect("serialized curve parses"), c);
        let _ = c.nondegenerate_check();
    }
});
