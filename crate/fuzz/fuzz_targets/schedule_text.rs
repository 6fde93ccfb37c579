#![no_main]

use hoelder_core::counterexample::{parse_schedule, validate_schedule, write_schedule};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(s) = parse_schedule(text) else { return };
    let again = parse_schedule(&write_schedule(&s)).expect("written schedule parses");
    assert_eq!(again, s);
    let _ = validate_schedule(&s);
});
