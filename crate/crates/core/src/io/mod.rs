//! Text formats: sweep spec files, run records and CSV tables.

pub mod record;
pub mod spec_file;
pub mod table;

pub use record::{parse_config_json, parse_run_record, RunRecord, RECORD_SCHEMA_VERSION};
pub use spec_file::{parse_sweep_spec, render_sweep_spec};
pub use table::{parse_raw_csv, plot_data, sig6, write_raw_csv, write_summary_csv, Table};
