#![no_main]

use badlatt::engine::{verify_content_hash, AuditLine};
use libfuzzer_sys::fuzz_target;

// Replaying would rerun an arbitrary construction, so only the parsing layers are exercised.
fuzz_target!(|data: &str| {
    for name in ["audit.jsonl", "certificate.json", "removals.csv"] {
        let _ = verify_content_hash(name, data);
    }
    for line in data.lines() {
        let _ = serde_json::from_str::<AuditLine>(line);
    }
});
