#![no_main]

use badlatt::flows::Coordinate;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(c) = Coordinate::parse(data) {
        assert_eq!(Coordinate::parse(&c.to_text()).expect("printed coordinate parses"), c);
        let e = c.enclose(64);
        assert!(e.lo() <= e.hi());
    }
});
