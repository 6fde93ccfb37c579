//! Replays the checked-in fuzz corpus through the fuzz target properties.

use std::path::PathBuf;

use hoelder_core::counterexample::{parse_schedule, validate_schedule, write_schedule};
use hoelder_core::paths::{parse_path_file, write_path_file};
use hoelder_lab::ExperimentConfig;

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut v: Vec<(PathBuf, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    v.sort();
    assert!(!v.is_empty(), "empty corpus {}", dir.display());
    v
}

#[test]
fn path_file_seeds() {
    let mut parsed = 0;
    for (name, text) in corpus("path_file") {
        let Ok(path) = parse_path_file(&text) else { continue };
        parsed += 1;
        let again = parse_path_file(&write_path_file(&path)).unwrap();
        assert_eq!(again.increments(), path.increments(), "{}", name.display());
        assert_eq!(again.scale(), path.scale());
    }
    assert!(parsed >= 3);
}

#[test]
fn schedule_text_seeds() {
    let mut parsed = 0;
    for (name, text) in corpus("schedule_text") {
        let Ok(s) = parse_schedule(&text) else { continue };
        parsed += 1;
        assert_eq!(parse_schedule(&write_schedule(&s)).unwrap(), s, "{}", name.display());
        let _ = validate_schedule(&s);
    }
    assert!(parsed >= 2);
}

#[test]
fn config_toml_seeds() {
    for (name, text) in corpus("config_toml") {
        let cfg = ExperimentConfig::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}", name.display()));
        cfg.validate().unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again.to_toml().unwrap(), cfg.to_toml().unwrap());
    }
}
