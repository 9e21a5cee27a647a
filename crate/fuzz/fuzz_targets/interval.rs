#![no_main]

use badlatt::arith::parse_interval_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(iv) = parse_interval_json(data) {
        assert!(iv.lo() <= iv.hi());
        let text = serde_json::to_string(&iv).expect("serializable");
        assert_eq!(parse_interval_json(&text).expect("serialized interval parses"), iv);
    }
});
