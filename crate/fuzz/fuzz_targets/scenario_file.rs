#![no_main]

use gsdma_core::scenario_file::{parse_scenario, serialize};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // No base dir: table references must be refused, not read.
    if let Ok(cfg) = parse_scenario(text, None) {
        let again = parse_scenario(&serialize(cfg.config()), None).expect("serialized config parses");
        assert_eq!(again, cfg);
    }
});
