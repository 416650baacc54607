#![no_main]

use libfuzzer_sys::fuzz_target;
use sharks_core::DelayPolicy;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(policy) = text.parse::<DelayPolicy>() {
        assert_eq!(policy.to_string().parse::<DelayPolicy>().unwrap(), policy);
    }
});
