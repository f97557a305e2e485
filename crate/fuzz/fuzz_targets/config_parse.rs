//! Fuzzes the scenario-config parser end to end: any input that parses must
//! survive every typed accessor without panicking, and its canonical echo
//! must be a fixed point of the parser.

#![no_main]

use libfuzzer_sys::fuzz_target;
use satqkd_core::config::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(mut cfg) = ScenarioConfig::parse(text) else {
        return;
    };

    let _ = cfg.seed();
    let _ = cfg.bench();
    let _ = cfg.overhead();
    let _ = cfg.link_template();
    let _ = cfg.orbit_pass();
    let _ = cfg.sweep_grids();
    let _ = cfg.protocol();
    let _ = cfg.wcp_source();
    let _ = cfg.relay();

    let echo = cfg.echo();
    let reparsed = ScenarioConfig::parse(&echo).expect("canonical echo must reparse");
    assert_eq!(
        echo,
        reparsed.echo(),
        "canonical echo is not a parser fixed point"
    );
});
