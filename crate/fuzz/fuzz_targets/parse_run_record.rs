#![no_main]

use libfuzzer_sys::fuzz_target;
use sharks_core::io::{parse_config_json, parse_run_record};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_config_json(text);
    if let Ok(record) = parse_run_record(text) {
        let json = record.to_json();
        assert_eq!(parse_run_record(&json).expect("emitted record parses").to_json(), json);
    }
});
