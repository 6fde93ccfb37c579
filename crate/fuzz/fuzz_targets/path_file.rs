#![no_main]

use hoelder_core::paths::{parse_path_file, write_path_file};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(path) = parse_path_file(text) else { return };
    let again = parse_path_file(&write_path_file(&path)).expect("written path parses");
    assert_eq!(again.n(), path.n());
    assert_eq!(again.increments(), path.increments());
    assert_eq!(again.scale(), path.scale());
});
