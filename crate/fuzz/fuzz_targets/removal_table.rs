#![no_main]

use badlatt::engine::RemovalTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(t) = RemovalTable::from_csv(data) {
        let text: String = t.rows().iter().map(|(p, q, h)| format!("{p},{q},{h}\n")).collect();
        assert_eq!(RemovalTable::from_csv(&text).expect("printed table parses").rows(), t.rows());
    }
});
