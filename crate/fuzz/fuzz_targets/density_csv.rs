#![no_main]
use libfuzzer_sys::fuzz_target;
use lognls::diagnostics::parse_density_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = parse_density_csv(data) {
        assert_eq!(s.points.len(), s.density.len());
        assert!(s.cell_volume > 0.0);
    }
});
