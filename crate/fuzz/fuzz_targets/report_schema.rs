#![no_main]
use libfuzzer_sys::fuzz_target;
use lognls::experiments::report_schema_validate;

fuzz_target!(|data: &[u8]| {
    if let Ok(v) = serde_json::from_slice::<serde_json::Value>(data) {
        for violation in report_schema_validate(&v) {
            assert!(violation.pointer.is_empty() || violation.pointer.starts_with('/'));
        }
    }
});
