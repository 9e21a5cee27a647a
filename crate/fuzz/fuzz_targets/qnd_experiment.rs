#![no_main]

use badlatt::qnd::QndExperiment;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(e) = QndExperiment::parse(data) {
        let text = e.to_json();
        let again = QndExperiment::parse(&text).expect("serialized experiment parses");
        assert_eq!(again.to_json(), text);
    }
});
