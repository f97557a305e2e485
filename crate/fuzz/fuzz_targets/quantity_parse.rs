//! Fuzzes the value grammar (quantities with units, ranges, comma lists)
//! by splicing the raw input into a scalar key and a list key.

#![no_main]

use libfuzzer_sys::fuzz_target;
use satqkd_core::config::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = std::str::from_utf8(data) else {
        return;
    };
    if value.contains(['\n', '\r']) {
        return;
    }

    let scalar = format!("[coincidence]\nwindow_ns = {value}\n");
    if let Ok(mut cfg) = ScenarioConfig::parse(&scalar) {
        let _ = cfg.bench();
    }

    let list = format!("[sweep]\ntemperatures_K = {value}\nloss_db = 0:10:30\n");
    if let Ok(mut cfg) = ScenarioConfig::parse(&list) {
        let _ = cfg.sweep_grids();
    }
});
