//! Replays the checked-in fuzz seeds through the same entry points as the
//! fuzz targets, so they run on the stable toolchain too.

use std::fs;
use std::path::PathBuf;

use lognls::config::RunConfig;
use lognls::diagnostics::parse_density_csv;
use lognls::experiments::report_schema_validate;
use lognls::snapshot::Snapshot;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn snapshot_seeds() {
    for (name, bytes) in seeds("snapshot_decode") {
        match Snapshot::decode(&bytes) {
            Ok(s) => assert_eq!(s.encode(), bytes, "{name}"),
            Err(_) => assert!(name.starts_with("truncated"), "{name}"),
        }
    }
}

#[test]
fn run_config_seeds() {
    for (name, bytes) in seeds("run_config") {
        let cfg = RunConfig::parse(std::str::from_utf8(&bytes).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(cfg.hash().len(), 64);
    }
}

#[test]
fn density_seeds() {
    for (name, bytes) in seeds("density_csv") {
        let r = parse_density_csv(bytes.as_slice());
        assert_eq!(r.is_err(), name.starts_with("negative"), "{name}");
    }
}

#[test]
fn report_seeds() {
    for (name, bytes) in seeds("report_schema") {
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(report_schema_validate(&v).is_empty(), !name.starts_with("broken"), "{name}");
    }
}
