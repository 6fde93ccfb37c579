#![no_main]

use hoelder_lab::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ExperimentConfig::from_toml(text) else {
        return;
    };
    let _ = cfg.validate();
    let again = ExperimentConfig::from_toml(&cfg.to_toml().expect("config serialises")).expect("written config parses");
    assert_eq!(again.to_toml().ok(), cfg.to_toml().ok());
});
