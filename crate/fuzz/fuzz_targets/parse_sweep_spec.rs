#![no_main]

use libfuzzer_sys::fuzz_target;
use sharks_core::io::{parse_sweep_spec, render_sweep_spec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = parse_sweep_spec(text) {
        let again = parse_sweep_spec(&render_sweep_spec(&spec)).expect("rendered spec parses");
        assert_eq!(render_sweep_spec(&again), render_sweep_spec(&spec));
    }
});
