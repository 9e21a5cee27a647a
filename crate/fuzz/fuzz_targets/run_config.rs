#![no_main]

use badlatt::engine::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(cfg) = RunConfig::parse(data) {
        let text = cfg.to_json();
        let again = RunConfig::parse(&text).expect("serialized config parses");
        assert_eq!(again.to_json(), text);
        let _ = cfg.validate_shape();
    }
});
