mod common;

use pmcw_core::codes::{generate_p3, read_code_file, verify_almost_perfect};
use pmcw_core::config::ExperimentConfig;

fn data(name: &str) -> std::path::PathBuf {
    common::repo_root().join("crates/core/data").join(name)
}

#[test]
fn stored_apas_codes_verify() {
    for name in ["apas8.txt", "apas16.txt"] {
        let seq = read_code_file(&data(name)).unwrap();
        assert!(seq.is_binary());
        assert!(
            verify_almost_perfect(&seq, 1e-9).unwrap().is_almost_perfect,
            "{name}"
        );
    }
}

#[test]
fn stored_p3_matches_generator() {
    let stored = read_code_file(&data("p3_504.txt")).unwrap();
    let fresh = generate_p3(504);
    for (a, b) in stored.chips().iter().zip(fresh.chips()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn config_can_load_a_code_file() {
    let text = std::fs::read_to_string(common::reference_config())
        .unwrap()
        .replace(
            "code = p3\ncode_length = 504",
            "code = file\ncode_file = ../crates/core/data/apas16.txt",
        )
        .replace("chip_ns = 1", "chip_ns = 10");
    let cfg = ExperimentConfig::parse(&text, &common::repo_root().join("configs")).unwrap();
    assert_eq!(cfg.load_code().unwrap().len(), 16);
}
