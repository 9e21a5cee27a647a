#![no_main]

use badlatt::fractal::FractalMeasure;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(mu) = FractalMeasure::parse(data) {
        let text = serde_json::to_string(&mu).expect("serializable");
        assert_eq!(FractalMeasure::parse(&text).expect("serialized measure parses"), mu);
        let (lo, hi) = mu.hull();
        assert_eq!(mu.measure_interval(&lo, &hi), mu.total_mass());
    }
});
