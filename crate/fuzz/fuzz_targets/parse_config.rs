#![no_main]

use libfuzzer_sys::fuzz_target;
use pla_core::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let back = ExperimentConfig::parse(&cfg.serialize()).expect("serialized config parses");
        assert_eq!(back, cfg);
    }
});
