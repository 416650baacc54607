#![no_main]

use libfuzzer_sys::fuzz_target;
use sharks_core::io::parse_raw_csv;
use sharks_core::io::table::{plot_data, write_raw_csv};
use sharks_core::sweep::View;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_raw_csv(text) {
        let csv = write_raw_csv(&rows);
        let again = parse_raw_csv(&csv).expect("written csv parses");
        assert_eq!(again.len(), rows.len());
        for view in View::ALL {
            let _ = plot_data(&rows, view).to_csv();
        }
    }
});
