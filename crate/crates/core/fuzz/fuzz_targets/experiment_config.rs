#![no_main]
use libfuzzer_sys::fuzz_target;
use qdi_core::experiment::throughput;
use qdi_core::io::{parse_experiment_config, to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_experiment_config(text) {
        let again = parse_experiment_config(&to_json(&cfg)).unwrap();
        assert_eq!(again, cfg);
        let t = throughput(&cfg, 1000).unwrap();
        assert!(t.rate_m1_hz >= 0.0 && t.rate_m2_hz_prob >= 0.0);
    }
});
