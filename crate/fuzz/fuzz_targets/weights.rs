#![no_main]

use badlatt::flows::Weights;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(w) = Weights::parse(data) {
        let again = Weights::parse(&w.to_text()).expect("printed weights parse");
        assert_eq!(again.as_slice(), w.as_slice());
    }
});
