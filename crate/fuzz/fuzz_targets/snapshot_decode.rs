#![no_main]
use libfuzzer_sys::fuzz_target;
use lognls::snapshot::Snapshot;

fuzz_target!(|data: &[u8]| {
    // Anything that decodes must re-encode to the same bytes.
    if let Ok(s) = Snapshot::decode(data) {
        let bytes = s.encode();
        assert_eq!(Snapshot::decode(&bytes).unwrap().encode(), bytes);
    }
});
